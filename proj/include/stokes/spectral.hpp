#pragma once

#include <complex>
#include <optional>
#include <string>

#include "stokes/sibuya.hpp"

namespace stokes {

/// Which entire function of E to evaluate.
struct SpectralFunctionId {
  enum class Kind { C, g, f, h, f_minus_1, W };
  Kind kind = Kind::C;
  int n = 0;  // only for W
  int k = 0;

  static SpectralFunctionId wronskian(int n, int k) { return {Kind::W, n, k}; }
  /// Accepts "C", "g", "f", "h", "f-1" and "W(n,k)".
  static SpectralFunctionId parse(const std::string& text);
  std::string name() const;

  friend bool operator==(const SpectralFunctionId&, const SpectralFunctionId&) = default;
};

struct SpectralValue {
  cplx E{};
  cplx value{};
  /// Absolute error estimate of `value`, first-order propagated from the frames.
  double err_estimate = 0.0;
  /// d value / dE from the variational equations, when requested.
  std::optional<cplx> derivative;
};

struct SpectralOptions {
  double rel_tol = 1e-12;
  AnchorPolicy anchor{};
  bool with_derivative = false;
};

/// W_{i,j}(E) = y_i(0) y_j'(0) - y_i'(0) y_j(0).
SpectralValue wronskian(const ProblemSpec& spec, int i, int j, const SpectralOptions& opts = {});

/// C(E) = W_{-1,1} / W_{0,1}.
SpectralValue stokes_C(const ProblemSpec& spec, const SpectralOptions& opts = {});

/// g(E) = C(E) C(omega^2 E) - omega, evaluated as W_{-1,2} / W_{1,2}.
SpectralValue spectral_g(const ProblemSpec& spec, const SpectralOptions& opts = {});

/// f(E) = -omega^{-1} g(omega^{-1} E). Cross-checked against
/// 1 - h(omega^{-1} E) h(omega E); a mismatch raises ConsistencyError.
SpectralValue spectral_f(const ProblemSpec& spec, const SpectralOptions& opts = {});

/// f(E) - 1 = -omega^{-1} C(omega^{-1} E) C(omega E), evaluated without the
/// cancellation of forming f first.
SpectralValue spectral_f_minus_1(const ProblemSpec& spec, const SpectralOptions& opts = {});

/// h(E) = C(E) / epsilon with epsilon = exp(i pi/(m+2)).
SpectralValue spectral_h(const ProblemSpec& spec, const SpectralOptions& opts = {});

/// f through the product route 1 - h(omega^{-1}E) h(omega E), with the square
/// root of omega taken as sign * epsilon. The result does not depend on sign.
SpectralValue spectral_f_via_h(const ProblemSpec& spec, int sign, const SpectralOptions& opts = {});

/// Dispatch on an id.
SpectralValue evaluate(const ProblemSpec& spec, const SpectralFunctionId& id,
                       const SpectralOptions& opts = {});

/// max(|y_{-1} - C y_0 + omega y_1|, |same for derivatives|) / largest term, at z.
double connection_residual(const ProblemSpec& spec, cplx z, const SpectralOptions& opts = {});

/// W_{0,1} = 2 i omega^{-1/2}, independent of E.
cplx wronskian01_exact(int m);
/// C(0) = 1 + omega.
cplx stokes_C_at_zero_exact(int m);

/// Startup check that the Wronskian sign and rotation conventions reproduce
/// C(0) = 1 + omega. Throws ConsistencyError otherwise.
void self_test(int m, const SpectralOptions& opts = {});

}  // namespace stokes
