#include "stokes/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "dop853_tableau.hpp"
#include "stokes/errors.hpp"

namespace stokes {

PolynomialPotential::PolynomialPotential(std::vector<cplx> coefficients)
    : coefficients_(std::move(coefficients)) {}

PolynomialPotential PolynomialPotential::monomial_plus_energy(int m, cplx energy) {
  std::vector<cplx> c(static_cast<std::size_t>(m) + 1, cplx{});
  c[0] += energy;
  c[static_cast<std::size_t>(m)] += 1.0;
  return PolynomialPotential(std::move(c));
}

cplx PolynomialPotential::operator()(cplx z) const noexcept {
  cplx acc{};
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx PolynomialPotential::derivative(cplx z) const noexcept {
  cplx acc{};
  for (std::size_t k = coefficients_.size(); k-- > 1;)
    acc = acc * z + static_cast<double>(k) * coefficients_[k];
  return acc;
}

SolutionFrame SolutionFrame::from_values(cplx z, cplx y, cplx dy, double err) {
  SolutionFrame f{z, y, dy, cplx{}, err};
  f.renormalize();
  return f;
}

void SolutionFrame::renormalize() {
  const cplx& big = std::abs(y_mantissa) >= std::abs(dy_mantissa) ? y_mantissa : dy_mantissa;
  if (big == cplx{}) return;
  const cplx pivot = big;
  y_mantissa /= pivot;
  dy_mantissa /= pivot;
  log_offset += std::log(pivot);
}

Path::Path(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].start == segments_[i].end)
      throw PreconditionError("path segment " + std::to_string(i) + " has zero length");
    if (i > 0 && segments_[i].start != segments_[i - 1].end)
      throw PreconditionError("path segments " + std::to_string(i - 1) + " and " +
                              std::to_string(i) + " are not contiguous");
  }
}

Path Path::line(cplx from, cplx to) { return Path({Segment{from, to}}); }

Path Path::through(std::span<const cplx> points) {
  std::vector<Segment> segs;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i] != points[i - 1]) segs.push_back({points[i - 1], points[i]});
  // Re-stitch so that dropped duplicates do not leave gaps.
  for (std::size_t i = 1; i < segs.size(); ++i) segs[i].start = segs[i - 1].end;
  return Path(std::move(segs));
}

Path Path::reversed() const {
  std::vector<Segment> segs;
  segs.reserve(segments_.size());
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) segs.push_back({it->end, it->start});
  return Path(std::move(segs));
}

double Path::length() const noexcept {
  double total = 0.0;
  for (const auto& s : segments_) total += std::abs(s.end - s.start);
  return total;
}

namespace {

namespace tab = detail::dop853;

// Fraction of the state norm used as an absolute floor in the error scale, so
// that a component passing through zero does not stall the step control.
constexpr double kScaleFloor = 1e-2;
constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 6.0;
// PI controller exponents (Gustafsson); alpha + beta tuned for order 8.
constexpr double kBeta = 0.04;
constexpr double kAlpha = 1.0 / 8.0 - 0.2 * kBeta;

template <std::size_t N>
using State = std::array<cplx, N>;

template <std::size_t N>
double sup_norm(const State<N>& x) {
  double s = 0.0;
  for (const auto& v : x) s = std::max(s, std::abs(v));
  return s;
}

// Right-hand side along a segment parametrized by arc length t: z = z0 + t d.
template <std::size_t N>
State<N> rhs(const PolynomialPotential& q, cplx z, cplx dir, const State<N>& x) {
  const cplx qz = q(z);
  State<N> out{};
  out[0] = dir * x[1];
  out[1] = dir * qz * x[0];
  if constexpr (N == 4) {
    out[2] = dir * x[3];
    out[3] = dir * (qz * x[2] + x[0]);
  }
  return out;
}

template <std::size_t N>
struct Integrator {
  const PolynomialPotential& q;
  IntegratorOptions opt;
  State<N> x;
  cplx log_offset;
  double err_acc;
  double h_prev = 0.0;
  double err_prev = 1.0;
  long steps = 0;

  void rescale() {
    const double s = std::max(std::abs(x[0]), std::abs(x[1]));
    if (s == 0.0 || (s >= 0.5 && s <= 2.0)) return;
    for (auto& v : x) v /= s;
    log_offset += std::log(s);
  }

  void run_segment(const Segment& seg) {
    const double len = std::abs(seg.end - seg.start);
    const cplx dir = (seg.end - seg.start) / len;
    double t = 0.0;
    double h = h_prev;
    if (h <= 0.0) h = std::min(len, 0.25 / (std::sqrt(std::abs(q(seg.start))) + 1.0));

    std::array<State<N>, tab::kStages> k;
    while (t < len) {
      bool last = false;
      if (t + h >= len * (1.0 - 1e-14)) {
        h_prev = h;
        h = len - t;
        last = true;
      }
      const cplx z = seg.start + t * dir;
      if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(t, len))
        throw IntegrationError("step size underflow: tolerance unreachable at working precision", z);
      if (++steps > opt.max_steps) throw IntegrationError("step budget exhausted", z);

      k[0] = rhs<N>(q, z, dir, x);
      for (int s = 1; s < tab::kStages; ++s) {
        State<N> xs = x;
        for (int j = 0; j < s; ++j) {
          const double a = tab::a[s][j];
          if (a == 0.0) continue;
          for (std::size_t i = 0; i < N; ++i) xs[i] += (h * a) * k[j][i];
        }
        k[s] = rhs<N>(q, seg.start + (t + tab::c[s] * h) * dir, dir, xs);
      }

      State<N> xn = x;
      State<N> e3{}, e5{};
      for (int s = 0; s < tab::kStages; ++s) {
        for (std::size_t i = 0; i < N; ++i) {
          xn[i] += (h * tab::b[s]) * k[s][i];
          e3[i] += tab::e3[s] * k[s][i];
          e5[i] += tab::e5[s] * k[s][i];
        }
      }

      // Error per unit length: scale carries the factor h.
      const double norm = std::max(sup_norm<N>(x), sup_norm<N>(xn));
      double e3sq = 0.0, e5sq = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = opt.rel_tol * h *
                          (std::max(std::abs(x[i]), std::abs(xn[i])) + kScaleFloor * norm);
        e3sq += std::norm(e3[i] / sc);
        e5sq += std::norm(e5[i] / sc);
      }
      double err = 0.0;
      if (e5sq > 0.0 || e3sq > 0.0)
        err = h * e5sq / std::sqrt((e5sq + 0.01 * e3sq) * static_cast<double>(N));

      if (!std::isfinite(err)) {
        h *= kMinFactor;
        continue;
      }
      if (err <= 1.0) {
        t = last ? len : t + h;
        x = xn;
        err_acc += err * opt.rel_tol * h + 4.0 * std::numeric_limits<double>::epsilon();
        rescale();
        double fac = err == 0.0 ? kMaxFactor
                                : kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
        fac = std::clamp(fac, kMinFactor, kMaxFactor);
        err_prev = std::max(err, 1e-4);
        h *= fac;
        if (!last) h_prev = h;
      } else {
        h *= std::max(kMinFactor, kSafety * std::pow(err, -1.0 / 8.0));
      }
    }
  }
};

void check_inputs(const Path& path, const SolutionFrame& initial, const IntegratorOptions& options) {
  if (!(options.rel_tol > 0.0)) throw PreconditionError("rel_tol must be positive");
  if (path.empty()) throw PreconditionError("empty path");
  const cplx s = path.start();
  if (std::abs(initial.z - s) > 1e-12 * (1.0 + std::abs(s)))
    throw PreconditionError("initial frame is not at the path start");
}

}  // namespace

SolutionFrame integrate_path(const PolynomialPotential& potential, const Path& path,
                             const SolutionFrame& initial, const IntegratorOptions& options) {
  check_inputs(path, initial, options);
  Integrator<2> it{potential, options, {initial.y_mantissa, initial.dy_mantissa},
                   initial.log_offset, initial.err_estimate};
  for (const auto& seg : path.segments()) it.run_segment(seg);
  SolutionFrame out{path.end(), it.x[0], it.x[1], it.log_offset, it.err_acc};
  out.renormalize();
  return out;
}

std::pair<SolutionFrame, SolutionFrame> integrate_with_variation(
    const PolynomialPotential& potential, const Path& path, const SolutionFrame& initial,
    const SolutionFrame& initial_variation, const IntegratorOptions& options) {
  check_inputs(path, initial, options);
  const bool zero_var =
      initial_variation.y_mantissa == cplx{} && initial_variation.dy_mantissa == cplx{};
  const cplx shift =
      zero_var ? cplx{} : std::exp(initial_variation.log_offset - initial.log_offset);
  Integrator<4> it{potential,
                   options,
                   {initial.y_mantissa, initial.dy_mantissa, initial_variation.y_mantissa * shift,
                    initial_variation.dy_mantissa * shift},
                   initial.log_offset,
                   std::max(initial.err_estimate, initial_variation.err_estimate)};
  for (const auto& seg : path.segments()) it.run_segment(seg);
  SolutionFrame base{path.end(), it.x[0], it.x[1], it.log_offset, it.err_acc};
  SolutionFrame var{path.end(), it.x[2], it.x[3], it.log_offset, it.err_acc};
  base.renormalize();
  var.renormalize();
  return {base, var};
}

}  // namespace stokes
