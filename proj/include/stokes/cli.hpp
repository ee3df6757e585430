#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stokes::cli {

inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1,
  exit_usage = 2,
  exit_numerical = 3,
};

/// Defaults, overridable through the environment and then through flags.
struct RunConfig {
  int m = 3;
  double rel_tol = 1e-12;      // STOKES_REL_TOL
  double root_floor = 1e-9;    // STOKES_ROOT_FLOOR
  double angular_tol = 1e-6;   // STOKES_ANGULAR_TOL
  double angle_tol = 1e-9;     // STOKES_ANGLE_TOL
  int threads = 0;             // STOKES_THREADS; 0 = runtime default
  std::uint64_t seed = 20240613;  // STOKES_SEED
  std::string format = "json";
  bool timing = false;
};

/// "1", "-2.5e-3", "2i", "-i", "1+2i", "3-0.5e1i".
std::complex<double> parse_complex(const std::string& text);

/// Runs one command line (without the program name). The result document
/// goes to `out`, diagnostics to `err`; the return value is the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stokes::cli
