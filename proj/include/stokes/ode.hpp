#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace stokes {

using cplx = std::complex<double>;

/// Q(z) = sum_k coefficients[k] z^k.
class PolynomialPotential {
 public:
  PolynomialPotential() = default;
  explicit PolynomialPotential(std::vector<cplx> coefficients);

  /// z^m + E, the potential of y'' = (z^m + E) y.
  static PolynomialPotential monomial_plus_energy(int m, cplx energy);

  cplx operator()(cplx z) const noexcept;
  /// Q'(z).
  cplx derivative(cplx z) const noexcept;

  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
  std::span<const cplx> coefficients() const noexcept { return coefficients_; }

 private:
  std::vector<cplx> coefficients_;
};

/// (y, y') at z, stored as mantissa * exp(log_offset) so that solutions
/// spanning hundreds of e-folds stay representable in binary64.
struct SolutionFrame {
  cplx z{};
  cplx y_mantissa{};
  cplx dy_mantissa{};
  cplx log_offset{};
  double err_estimate = 0.0;

  static SolutionFrame from_values(cplx z, cplx y, cplx dy, double err = 0.0);

  cplx y() const { return y_mantissa * std::exp(log_offset); }
  cplx dy() const { return dy_mantissa * std::exp(log_offset); }

  /// Move magnitude and phase into log_offset so the larger mantissa has
  /// modulus one. Zero frames are left alone.
  void renormalize();
};

struct Segment {
  cplx start;
  cplx end;
};

/// Piecewise-linear path in the complex plane.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<Segment> segments);

  static Path line(cplx from, cplx to);
  /// Polyline through the given points; consecutive duplicates are dropped.
  static Path through(std::span<const cplx> points);

  Path reversed() const;
  double length() const noexcept;
  cplx start() const { return segments_.front().start; }
  cplx end() const { return segments_.back().end; }
  bool empty() const noexcept { return segments_.empty(); }
  std::span<const Segment> segments() const noexcept { return segments_; }

 private:
  std::vector<Segment> segments_;
};

struct IntegratorOptions {
  double rel_tol = 1e-12;
  /// Hard cap on accepted+rejected steps over the whole path.
  long max_steps = 2'000'000;
};

/// Propagate (y, y') of y'' = Q(z) y along `path`.
SolutionFrame integrate_path(const PolynomialPotential& potential, const Path& path,
                             const SolutionFrame& initial, const IntegratorOptions& options = {});

/// Same, together with the E-derivative (u, u') solving u'' = Q u + y.
/// Both returned frames are renormalized independently.
std::pair<SolutionFrame, SolutionFrame> integrate_with_variation(
    const PolynomialPotential& potential, const Path& path, const SolutionFrame& initial,
    const SolutionFrame& initial_variation, const IntegratorOptions& options = {});

}  // namespace stokes
