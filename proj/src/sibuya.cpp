#include "stokes/sibuya.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stokes/errors.hpp"

namespace stokes {

namespace {

constexpr double kPi = std::numbers::pi;

int reduce(int k, int period) {
  const int r = k % period;
  return r < 0 ? r + period : r;
}

// Half-width of the excluded band at the outer edge of S_{-1} u S_0 u S_1.
double seed_margin(int m) { return 0.05 * kPi / (m + 2); }

}  // namespace

ProblemSpec::ProblemSpec(int m, cplx energy) : m_(m), energy_(energy) {
  if (m < 3) throw PreconditionError("m must be an integer >= 3");
  if (!std::isfinite(energy.real()) || !std::isfinite(energy.imag()))
    throw PreconditionError("energy must be finite");
}

cplx ProblemSpec::epsilon() const noexcept { return std::polar(1.0, kPi / (m_ + 2)); }

cplx ProblemSpec::omega_power(int k) const noexcept {
  const int n = m_ + 2;
  const int r = reduce(k, n);
  if (r == 0) return 1.0;
  return std::polar(1.0, 2.0 * kPi * r / n);
}

StokesSector::StokesSector(int m_, int k) : m(m_), index(reduce(k, m_ + 2)) {}

double StokesSector::bisector() const noexcept {
  const double a = 2.0 * kPi * index / (m + 2);
  return a > kPi ? a - 2.0 * kPi : a;
}

double StokesSector::half_opening() const noexcept { return kPi / (m + 2); }

bool StokesSector::contains(cplx z) const noexcept {
  if (z == cplx{}) return false;
  double d = std::arg(z) - bisector();
  d = std::remainder(d, 2.0 * kPi);
  return std::abs(d) < half_opening();
}

// ---------------------------------------------------------------------------
// Asymptotic series.
//
// With y = exp(int v), the Riccati equation v' + v^2 = z^m + E is solved by
// v = sum_n b_n z^{(m-n)/2}. Matching powers z^{m - N/2}:
//   -2 b_N + sum_{i=1}^{N-1} b_i b_{N-i} + (2m+2-N)/2 b_{N-m-2} = [N=2m] E,
// with b_0 = -1 selecting the subdominant branch. Integrating term by term,
//   log y = sum_{n != m+2} 2 b_n z^{(m-n+2)/2} / (m-n+2) + b_{m+2} log z,
// where b_{m+2} = -m/4 and every non-leading power decays (m >= 3), which is
// exactly the normalization y ~ z^{-m/4} exp(-2/(m+2) z^{(m+2)/2}).

SeedSeries::SeedSeries(int m, cplx energy, int terms) : m_(m) {
  const int n_max = std::max(terms > 0 ? terms : 30 * m + 20, 2 * m + 1);
  b_.assign(static_cast<std::size_t>(n_max) + 1, cplx{});
  db_.assign(b_.size(), cplx{});
  b_[0] = -1.0;
  for (int n = 1; n <= n_max; ++n) {
    cplx s{}, ds{};
    for (int i = 1; i < n; ++i) {
      s += b_[i] * b_[n - i];
      ds += 2.0 * db_[i] * b_[n - i];
    }
    if (n >= m + 2) {
      const double c = 0.5 * (2 * m + 2 - n);
      s += c * b_[n - m - 2];
      ds += c * db_[n - m - 2];
    }
    if (n == 2 * m) {
      s -= energy;
      ds -= 1.0;
    }
    b_[n] = 0.5 * s;
    db_[n] = 0.5 * ds;
  }
}

std::pair<int, double> SeedSeries::cut(double r) const {
  const int n_max = static_cast<int>(b_.size()) - 1;
  const double log_r = std::log(r);
  // log-magnitudes of the log-y terms; -inf marks an exact zero.
  std::vector<double> lt(b_.size(), -std::numeric_limits<double>::infinity());
  int last = 0;
  for (int n = 1; n <= n_max; ++n) {
    if (n == m_ + 2 || b_[n] == cplx{}) continue;
    lt[n] = std::log(std::abs(2.0 * b_[n] / double(m_ - n + 2))) + 0.5 * (m_ - n + 2) * log_r;
    last = n;
  }
  if (last == 0) return {n_max, 0.0};
  // Error of cutting after c: the largest term in the next window, wide enough
  // to contain one term of each family (E-powers every 2m, derivative
  // corrections every m+2), extended until it holds at least one nonzero term.
  // Past the computed range the last term stands in.
  const int window = 2 * m_ + 2;
  auto term = [&](int n) { return n > n_max ? lt[last] : lt[n]; };
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int c = 0; c <= last; ++c) {
    double e = -std::numeric_limits<double>::infinity();
    for (int n = c + 1; n <= c + window || std::isinf(e); ++n) e = std::max(e, term(n));
    if (e < best_err) {
      best_err = e;
      best = c;
    }
  }
  return {best, std::exp(best_err)};
}

double SeedSeries::truncation_error(double r) const { return cut(r).second; }

SeedSeries::Evaluation SeedSeries::evaluate(cplx z) const {
  const auto [n_cut, err] = cut(std::abs(z));
  const cplx log_z = std::log(z);
  const cplx w_inv = std::exp(-0.5 * log_z);
  // Leading term exactly: -(2/(m+2)) z^{(m+2)/2}.
  const cplx lead_pow = std::exp(0.5 * (m_ + 2) * log_z);
  Evaluation e{};
  e.log_y = -2.0 / (m_ + 2) * lead_pow + b_[m_ + 2] * log_z;
  e.logderiv = -lead_pow * w_inv * w_inv;
  e.dlog_y_dE = db_[m_ + 2] * log_z;
  e.dlogderiv_dE = 0.0;
  // Powers w^{m-n+2} by repeated multiplication with w^{-1}.
  cplx p = lead_pow;
  for (int n = 1; n <= n_cut; ++n) {
    p *= w_inv;
    const cplx pv = p * w_inv * w_inv;  // w^{m-n}
    e.logderiv += b_[n] * pv;
    e.dlogderiv_dE += db_[n] * pv;
    if (n == m_ + 2) continue;
    const double k = 2.0 / (m_ - n + 2);
    e.log_y += k * b_[n] * p;
    e.dlog_y_dE += k * db_[n] * p;
  }
  e.truncation_error = err;
  return e;
}

// ---------------------------------------------------------------------------

namespace {

struct LiouvilleGreen {
  cplx log_y;
  cplx logderiv;
};

// y = Q^{-1/4} exp(-S), S = 2/(m+2) z^{(m+2)/2} - E/(m-2) z^{-(m-2)/2},
// y' = (-sqrt(Q) - Q'/(4Q)) y. Powers of Q are taken as z^{m a} (1 + E z^{-m})^a
// so that the branch follows z rather than the principal branch of Q.
LiouvilleGreen liouville_green(int m, cplx energy, cplx z) {
  const cplx log_z = std::log(z);
  const cplx zm = std::exp(double(m) * log_z);
  const cplx ratio = 1.0 + energy / zm;
  const cplx action = 2.0 / (m + 2) * std::exp(0.5 * (m + 2) * log_z) -
                      energy / double(m - 2) * std::exp(-0.5 * (m - 2) * log_z);
  const cplx log_y = -0.25 * m * log_z - 0.25 * std::log(ratio) - action;
  const cplx sqrt_q = std::exp(0.5 * m * log_z) * std::sqrt(ratio);
  const cplx q = zm + energy;
  const cplx dq = double(m) * zm / z;
  return {log_y, -sqrt_q - dq / (4.0 * q)};
}

void check_seed_domain(const ProblemSpec& spec, cplx z0) {
  const int m = spec.m();
  if (z0 == cplx{} || std::abs(std::arg(z0)) > 3.0 * kPi / (m + 2) - seed_margin(m))
    throw DomainError("seed point outside the closed subsector |arg z| <= 3 pi/(m+2) - delta");
}

SolutionFrame frame_from_log(cplx z, cplx log_y, cplx logderiv, double err) {
  SolutionFrame f{z, 1.0, logderiv, log_y, err};
  f.renormalize();
  return f;
}

double seed_error(const ProblemSpec& spec, const AnchorPolicy& policy, double r) {
  const SeedSeries series(spec.m(), spec.energy(), policy.series_terms);
  if (policy.order == SeedOrder::full_series) return series.truncation_error(r);
  const auto full = series.evaluate(r);
  const auto lg = liouville_green(spec.m(), spec.energy(), r);
  return std::abs(full.log_y - lg.log_y) + full.truncation_error;
}

}  // namespace

double minimum_anchor_radius(int m, const AnchorPolicy& policy) {
  if (policy.r_min > 0.0) return policy.r_min;
  // Leading action of 20 puts the optimal truncation error near exp(-40).
  constexpr double kAction = 20.0;
  return std::pow(kAction * (m + 2) / 2.0, 2.0 / (m + 2));
}

double anchor_radius(const ProblemSpec& spec, double rel_tol, const AnchorPolicy& policy) {
  if (!(rel_tol > 0.0)) throw PreconditionError("rel_tol must be positive");
  if (!(policy.eta > 0.0 && policy.eta < 1.0) || policy.r_min < 0.0)
    throw PreconditionError("invalid anchor policy");
  const int m = spec.m();
  double r = std::max(minimum_anchor_radius(m, policy),
                      std::pow(std::abs(spec.energy()) / policy.eta, 1.0 / m));
  if (r >= policy.r_max) return policy.r_max;
  const SeedSeries series(m, spec.energy(), policy.series_terms);
  while (r < policy.r_max) {
    const double err = policy.order == SeedOrder::full_series ? series.truncation_error(r)
                                                              : seed_error(spec, policy, r);
    if (err <= rel_tol) return r;
    r *= 1.2;
  }
  return policy.r_max;
}

SolutionFrame wkb_seed(const ProblemSpec& spec, cplx z0, const AnchorPolicy& policy) {
  check_seed_domain(spec, z0);
  const double eps = std::numeric_limits<double>::epsilon();
  if (policy.order == SeedOrder::liouville_green) {
    const auto lg = liouville_green(spec.m(), spec.energy(), z0);
    return frame_from_log(z0, lg.log_y, lg.logderiv, seed_error(spec, policy, std::abs(z0)) + eps);
  }
  const SeedSeries series(spec.m(), spec.energy(), policy.series_terms);
  const auto e = series.evaluate(z0);
  return frame_from_log(z0, e.log_y, e.logderiv, e.truncation_error + eps);
}

std::pair<SolutionFrame, SolutionFrame> wkb_seed_with_variation(const ProblemSpec& spec, cplx z0,
                                                                const AnchorPolicy& policy) {
  check_seed_domain(spec, z0);
  const double eps = std::numeric_limits<double>::epsilon();
  const SeedSeries series(spec.m(), spec.energy(), policy.series_terms);
  const auto e = series.evaluate(z0);
  if (policy.order == SeedOrder::liouville_green) {
    // The two-term seed is only used for diagnostics; its E-derivative is
    // taken from the series, which agrees to the seed's own accuracy.
    const auto lg = liouville_green(spec.m(), spec.energy(), z0);
    const double err = seed_error(spec, policy, std::abs(z0)) + eps;
    SolutionFrame var{z0, e.dlog_y_dE, e.dlogderiv_dE + lg.logderiv * e.dlog_y_dE, lg.log_y, err};
    var.renormalize();
    return {frame_from_log(z0, lg.log_y, lg.logderiv, err), var};
  }
  // u = y dlog y/dE, u' = y (dv/dE + v dlog y/dE).
  SolutionFrame var{z0, e.dlog_y_dE, e.dlogderiv_dE + e.logderiv * e.dlog_y_dE, e.log_y,
                    e.truncation_error + eps};
  var.renormalize();
  return {frame_from_log(z0, e.log_y, e.logderiv, e.truncation_error + eps), var};
}

Path y0_path(const ProblemSpec& spec, cplx z, double anchor) {
  const int m = spec.m();
  if (z == cplx{}) return Path::line(anchor, 0.0);
  const double theta = std::arg(z);
  const double r = std::abs(z);
  if (std::abs(theta) <= kPi / (m + 2)) {
    // Inside S_0 the solution grows inward along the ray: stable direction.
    if (r >= anchor) return Path{};
    return Path::line(std::polar(anchor, theta), z);
  }
  // Outside S_0: come in along the positive axis, then turn at radius |z|.
  // Rotating away from the axis y0 becomes dominant, so the arc is stable too.
  std::vector<cplx> pts;
  pts.emplace_back(std::max(anchor, r), 0.0);
  pts.emplace_back(r, 0.0);
  const int chords = static_cast<int>(std::ceil(std::abs(theta) / (kPi / 24.0)));
  for (int i = 1; i < chords; ++i) pts.push_back(std::polar(r, theta * i / chords));
  pts.push_back(z);
  return Path::through(pts);
}

namespace {

void check_y0_domain(const ProblemSpec& spec, cplx z) {
  if (z != cplx{} && std::abs(std::arg(z)) >= 3.0 * kPi / (spec.m() + 2))
    throw DomainError("z outside the interior of S_{-1} u S_0 u S_1");
}

}  // namespace

SolutionFrame evaluate_y0(const ProblemSpec& spec, cplx z, double rel_tol,
                          const AnchorPolicy& policy) {
  check_y0_domain(spec, z);
  const double anchor = anchor_radius(spec, rel_tol, policy);
  const Path path = y0_path(spec, z, anchor);
  if (path.empty()) return wkb_seed(spec, z, policy);
  const SolutionFrame seed = wkb_seed(spec, path.start(), policy);
  return integrate_path(PolynomialPotential::monomial_plus_energy(spec.m(), spec.energy()), path,
                        seed, {.rel_tol = rel_tol});
}

std::pair<SolutionFrame, SolutionFrame> evaluate_y0_with_variation(const ProblemSpec& spec, cplx z,
                                                                   double rel_tol,
                                                                   const AnchorPolicy& policy) {
  check_y0_domain(spec, z);
  const double anchor = anchor_radius(spec, rel_tol, policy);
  const Path path = y0_path(spec, z, anchor);
  if (path.empty()) return wkb_seed_with_variation(spec, z, policy);
  const auto [seed, seed_var] = wkb_seed_with_variation(spec, path.start(), policy);
  return integrate_with_variation(
      PolynomialPotential::monomial_plus_energy(spec.m(), spec.energy()), path, seed, seed_var,
      {.rel_tol = rel_tol});
}

SolutionFrame yk_at_origin(const ProblemSpec& spec, int k, double rel_tol,
                           const AnchorPolicy& policy) {
  const int kr = reduce(k, spec.m() + 2);
  SolutionFrame f =
      evaluate_y0(spec.with_energy(spec.omega_power(2 * kr) * spec.energy()), 0.0, rel_tol, policy);
  f.dy_mantissa *= spec.omega_power(-kr);
  f.renormalize();
  return f;
}

SolutionFrame yk_at_origin_along_bisector(const ProblemSpec& spec, int k, double rel_tol,
                                          const AnchorPolicy& policy) {
  const int kr = reduce(k, spec.m() + 2);
  const ProblemSpec rotated = spec.with_energy(spec.omega_power(2 * kr) * spec.energy());
  const double anchor = anchor_radius(rotated, rel_tol, policy);
  // y_k(R omega^k, E) = y0(R, omega^{2k} E), y_k' = omega^{-k} y0'.
  SolutionFrame seed = wkb_seed(rotated, anchor, policy);
  seed.z = anchor * spec.omega_power(kr);
  seed.dy_mantissa *= spec.omega_power(-kr);
  seed.renormalize();
  return integrate_path(PolynomialPotential::monomial_plus_energy(spec.m(), spec.energy()),
                        Path::line(seed.z, 0.0), seed, {.rel_tol = rel_tol});
}

}  // namespace stokes
