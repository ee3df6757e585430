#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "stokes/ode.hpp"

namespace stokes {

/// One instance of y'' = (z^m + E) y, m >= 3 integer.
class ProblemSpec {
 public:
  ProblemSpec(int m, cplx energy);

  int m() const noexcept { return m_; }
  cplx energy() const noexcept { return energy_; }
  /// omega = exp(2 pi i / (m+2)).
  cplx omega() const noexcept { return omega_power(1); }
  /// epsilon = exp(pi i / (m+2)), the fixed square root of omega.
  cplx epsilon() const noexcept;
  /// omega^k, computed from k reduced mod (m+2) so that periodic powers are bit-identical.
  cplx omega_power(int k) const noexcept;
  /// Same instance at energy E'.
  ProblemSpec with_energy(cplx energy) const { return ProblemSpec(m_, energy); }

 private:
  int m_;
  cplx energy_;
};

/// S_k = { z : |arg z - 2 pi k/(m+2)| < pi/(m+2) }.
struct StokesSector {
  int m;
  int index;  // reduced to [0, m+2)

  StokesSector(int m, int k);
  double bisector() const noexcept;
  double half_opening() const noexcept;
  bool contains(cplx z) const noexcept;
};

/// How the asymptotic seed for y0 is produced.
enum class SeedOrder {
  /// Q^{-1/4} exp(-S) with the two-term action; error O(z^{-(m+2)/2}).
  liouville_green,
  /// Optimally truncated Riccati series for y'/y; error exponentially small.
  full_series,
};

struct AnchorPolicy {
  double eta = 0.1;       // |E| <= eta R^m
  /// Smallest anchor radius; 0 selects the radius where the leading action
  /// 2/(m+2) R^{(m+2)/2} reaches 20 (see minimum_anchor_radius).
  double r_min = 0.0;
  double r_max = 400.0;   // radii beyond this are capped (with a diagnostic)
  int series_terms = 0;   // highest index of the z^{-1/2} expansion; 0 picks 30 m + 20
  SeedOrder order = SeedOrder::full_series;
};

/// Coefficients b_n of y'/y = sum_n b_n z^{(m-n)/2} for the subdominant
/// solution, together with their E-derivatives.
class SeedSeries {
 public:
  SeedSeries(int m, cplx energy, int terms);

  struct Evaluation {
    cplx log_y;       // log y0 with the normalization of the leading asymptotics
    cplx logderiv;    // y0'/y0
    cplx dlog_y_dE;   // d(log y0)/dE
    cplx dlogderiv_dE;
    double truncation_error;  // modulus of the first omitted log-y term
  };

  Evaluation evaluate(cplx z) const;
  /// Truncation error estimate at radius r (direction does not enter).
  double truncation_error(double r) const;

  int m() const noexcept { return m_; }
  const std::vector<cplx>& coefficients() const noexcept { return b_; }

 private:
  /// Index after which terms are dropped at radius r, and the error estimate.
  std::pair<int, double> cut(double r) const;

  int m_;
  std::vector<cplx> b_;
  std::vector<cplx> db_;
};

/// Effective lower bound on the anchor radius for this policy and m.
double minimum_anchor_radius(int m, const AnchorPolicy& policy = {});

/// Radius at which the seed is accurate to rel_tol and |E| <= eta R^m.
/// Never below policy.r_min; capped at policy.r_max.
double anchor_radius(const ProblemSpec& spec, double rel_tol, const AnchorPolicy& policy = {});

/// Asymptotic data (y0, y0') at z0 in |arg z0| <= 3 pi/(m+2) - delta.
SolutionFrame wkb_seed(const ProblemSpec& spec, cplx z0, const AnchorPolicy& policy = {});
/// Seed frame and its E-derivative frame (d y0/dE, d y0'/dE).
std::pair<SolutionFrame, SolutionFrame> wkb_seed_with_variation(const ProblemSpec& spec, cplx z0,
                                                                const AnchorPolicy& policy = {});

/// Path used by evaluate_y0 to reach z from the anchor.
Path y0_path(const ProblemSpec& spec, cplx z, double anchor);

/// y0(z, E), the solution decaying in S_0 with the normalization
/// y0 ~ z^{-m/4} exp(-2/(m+2) z^{(m+2)/2}).
SolutionFrame evaluate_y0(const ProblemSpec& spec, cplx z, double rel_tol = 1e-12,
                          const AnchorPolicy& policy = {});
/// y0 together with d y0/dE.
std::pair<SolutionFrame, SolutionFrame> evaluate_y0_with_variation(const ProblemSpec& spec, cplx z,
                                                                   double rel_tol = 1e-12,
                                                                   const AnchorPolicy& policy = {});

/// (y_k(0,E), y_k'(0,E)) with y_k(z,E) = y0(omega^{-k} z, omega^{2k} E).
SolutionFrame yk_at_origin(const ProblemSpec& spec, int k, double rel_tol = 1e-12,
                           const AnchorPolicy& policy = {});

/// y_k(0,E) obtained without energy rotation: the seed is placed on the
/// bisector of S_k and y'' = (z^m + E) y is integrated inward along it.
SolutionFrame yk_at_origin_along_bisector(const ProblemSpec& spec, int k, double rel_tol = 1e-12,
                                          const AnchorPolicy& policy = {});

}  // namespace stokes
