#include "stokes/raysystem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <regex>
#include <sstream>

#include "stokes/errors.hpp"

namespace stokes {

namespace {

constexpr double kPi = std::numbers::pi;

const Angle& full_turn() {
  static const Angle a = Angle::pi_multiple(2, 1);
  return a;
}

}  // namespace

// ---------------------------------------------------------------- Fraction

Fraction Fraction::make(std::int64_t p, std::int64_t q) {
  if (q == 0) throw PreconditionError("zero denominator");
  if (q < 0) p = -p, q = -q;
  const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  return {p / g, q / g};
}

Fraction operator+(Fraction a, Fraction b) { return Fraction::make(a.p * b.q + b.p * a.q, a.q * b.q); }
Fraction operator-(Fraction a, Fraction b) { return Fraction::make(a.p * b.q - b.p * a.q, a.q * b.q); }
bool operator<(Fraction a, Fraction b) { return a.p * b.q < b.p * a.q; }

// ------------------------------------------------------------------- Angle

Angle Angle::radians(double value) {
  if (!std::isfinite(value)) throw PreconditionError("angle must be finite");
  if (value == 0.0) return pi_multiple(0, 1);
  Angle a;
  a.rad_ = value;
  return a;
}

Angle Angle::pi_multiple(std::int64_t p, std::int64_t q) {
  Angle a;
  a.pi_ = Fraction::make(p, q);
  a.rad_ = kPi * a.pi_->value();
  return a;
}

Angle Angle::parse(const std::string& text) {
  static const std::regex leading(R"(^\s*([+-]?)(\d*)(?:\s*/\s*(\d+))?\s*\*?\s*pi\s*$)");
  static const std::regex trailing(R"(^\s*([+-]?)(\d*)\s*\*?\s*pi\s*/\s*(\d+)\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, leading) || std::regex_match(text, m, trailing)) {
    const std::int64_t num = m[2].str().empty() ? 1 : std::stoll(m[2].str());
    const std::int64_t den = m[3].matched ? std::stoll(m[3].str()) : 1;
    if (den == 0) throw PreconditionError("zero denominator in angle '" + text + "'");
    return pi_multiple(m[1].str() == "-" ? -num : num, den);
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end == text.c_str() || *end != '\0' || !std::isfinite(v))
    throw PreconditionError("cannot parse angle '" + text + "'");
  return radians(v);
}

Angle Angle::normalized() const {
  if (pi_) {
    const std::int64_t period = 2 * pi_->q;
    return pi_multiple(((pi_->p % period) + period) % period, pi_->q);
  }
  double r = std::fmod(rad_, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  if (r >= 2 * kPi) r = 0.0;
  return radians(r);
}

std::string Angle::to_string() const {
  if (pi_) {
    if (pi_->p == 0) return "0";
    std::ostringstream s;
    if (pi_->q != 1) s << pi_->p << "/" << pi_->q;
    else if (pi_->p == -1) s << "-";
    else if (pi_->p != 1) s << pi_->p;
    s << "pi";
    return s.str();
  }
  std::ostringstream s;
  s.precision(17);
  s << rad_;
  return s.str();
}

Angle operator+(const Angle& a, const Angle& b) {
  if (a.pi_ && b.pi_) return Angle::pi_multiple(*a.pi_ + *b.pi_);
  return Angle::radians(a.rad_ + b.rad_);
}

Angle operator-(const Angle& a, const Angle& b) {
  if (a.pi_ && b.pi_) return Angle::pi_multiple(*a.pi_ - *b.pi_);
  return Angle::radians(a.rad_ - b.rad_);
}

int compare(const Angle& a, const Angle& b, double tol) {
  if (a.pi_fraction() && b.pi_fraction()) {
    if (*a.pi_fraction() == *b.pi_fraction()) return 0;
    return *a.pi_fraction() < *b.pi_fraction() ? -1 : 1;
  }
  const double d = a.radians() - b.radians();
  if (std::abs(d) <= tol) return 0;
  return d < 0 ? -1 : 1;
}

char label_char(RayLabel l) { return l == RayLabel::A ? 'A' : 'B'; }
RayLabel opposite(RayLabel l) { return l == RayLabel::A ? RayLabel::B : RayLabel::A; }

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::order_bound: return "piomega";
    case Condition::opening: return "i";
    case Condition::odd_boundary: return "ii";
    case Condition::even_interior: return "iii";
    case Condition::odd_interior: return "iv";
    case Condition::empty_odd: return "v";
  }
  return "?";
}

// -------------------------------------------------------- LabeledRaySystem

LabeledRaySystem::LabeledRaySystem(std::vector<LabeledRay> rays, double angle_tol)
    : rays_(std::move(rays)), tol_(angle_tol) {
  if (!(angle_tol > 0)) throw PreconditionError("angle_tol must be positive");
  if (rays_.empty()) throw PreconditionError("a ray system needs at least one ray");
  for (auto& r : rays_) r.angle = r.angle.normalized();
  std::stable_sort(rays_.begin(), rays_.end(), [](const LabeledRay& a, const LabeledRay& b) {
    return a.angle.radians() < b.angle.radians();
  });
  for (std::size_t i = 0; i + 1 < rays_.size(); ++i)
    if (compare(rays_[i].angle, rays_[i + 1].angle, tol_) == 0)
      throw PreconditionError("rays at " + rays_[i].angle.to_string() + " and " +
                              rays_[i + 1].angle.to_string() + " coincide");
  if (rays_.size() > 1 && compare(rays_.front().angle + full_turn(), rays_.back().angle, tol_) == 0)
    throw PreconditionError("rays at " + rays_.front().angle.to_string() + " and " +
                            rays_.back().angle.to_string() + " coincide");
}

LabeledRaySystem LabeledRaySystem::from_labels(const std::vector<Angle>& a, const std::vector<Angle>& b,
                                               double angle_tol) {
  std::vector<LabeledRay> rays;
  for (const auto& x : a) rays.push_back({x, RayLabel::A});
  for (const auto& x : b) rays.push_back({x, RayLabel::B});
  return LabeledRaySystem(std::move(rays), angle_tol);
}

Angle LabeledRaySystem::gap(std::size_t i) const {
  const std::size_t n = rays_.size();
  if (n == 1) return full_turn();
  if (i + 1 < n) return rays_[i + 1].angle - rays_[i].angle;
  return rays_.front().angle + full_turn() - rays_.back().angle;
}

LabeledRaySystem LabeledRaySystem::rotated(const Angle& by) const {
  std::vector<LabeledRay> out = rays_;
  for (auto& r : out) r.angle = r.angle + by;
  return LabeledRaySystem(std::move(out), tol_);
}

LabeledRaySystem LabeledRaySystem::swapped() const {
  std::vector<LabeledRay> out = rays_;
  for (auto& r : out) r.label = opposite(r.label);
  return LabeledRaySystem(std::move(out), tol_);
}

// ------------------------------------------------------------ admissibility

std::vector<SectorDiagnostic> check_partition(const LabeledRaySystem& system, const Partition& p,
                                              const Angle& omega_gap,
                                              std::optional<Condition>* first_failure) {
  const auto& rays = system.rays();
  const double tol = system.angle_tol();
  const std::size_t n = rays.size();
  const std::size_t k2 = p.boundary.size();
  std::vector<SectorDiagnostic> out;
  std::optional<Condition> worst;

  for (std::size_t j = 0; j < k2; ++j) {
    const std::size_t from = p.boundary[j], to = p.boundary[(j + 1) % k2];
    SectorDiagnostic s;
    s.start = rays[from].angle;
    s.end = rays[to].angle;
    s.opening = to > from ? s.end - s.start : s.end + full_turn() - s.start;
    s.even = p.first_even == (j % 2 == 0);
    s.start_label = rays[from].label;
    s.end_label = rays[to].label;
    for (std::size_t i = (from + 1) % n; i != to; i = (i + 1) % n) s.interior.push_back(rays[i].label);

    auto record = [&](Condition c, bool ok) {
      if (ok) {
        s.passed.push_back(c);
      } else if (!s.failed) {
        s.failed = c;
      }
    };
    const int cmp = compare(s.opening, omega_gap, tol);
    if (s.even) {
      record(Condition::opening, cmp == 0);
      record(Condition::even_interior, s.interior.empty());
    } else {
      record(Condition::opening, cmp <= 0);
      const bool same = s.start_label == s.end_label;
      record(Condition::odd_boundary, same);
      if (same && !s.interior.empty())
        record(Condition::odd_interior,
               std::all_of(s.interior.begin(), s.interior.end(),
                           [&](RayLabel l) { return l == opposite(s.start_label); }));
      if (s.interior.empty()) record(Condition::empty_odd, cmp == 0);
    }
    // Conditions are ranked in the order they are stated; keep the earliest.
    if (s.failed && (!worst || *s.failed < *worst)) worst = s.failed;
    out.push_back(std::move(s));
  }
  if (first_failure) *first_failure = worst;
  return out;
}

AdmissibilityReport admissibility_check(const LabeledRaySystem& system, const AdmissibilityOptions& opts) {
  const auto& rays = system.rays();
  const std::size_t n = rays.size();
  const double tol = system.angle_tol();

  AdmissibilityReport rep;
  rep.omega_gap = system.gap(0);
  for (std::size_t i = 1; i < n; ++i)
    if (compare(system.gap(i), rep.omega_gap, tol) > 0) rep.omega_gap = system.gap(i);
  rep.rho = kPi / rep.omega_gap.radians();
  if (rep.omega_gap.pi_fraction())
    rep.rho_exact = Fraction::make(rep.omega_gap.pi_fraction()->q, rep.omega_gap.pi_fraction()->p);

  const bool order_ok = rep.rho_exact ? Fraction{1, 2} < *rep.rho_exact : rep.rho > 0.5 + tol;
  if (!order_ok || n < 2) {
    rep.failure_witness = Condition::order_bound;
    return rep;
  }

  // Even sectors hold no rays and open by omega_gap, so they are exactly the
  // largest gaps; a partition is a set of such gaps, no two sharing a ray.
  std::vector<std::size_t> maximal;
  for (std::size_t i = 0; i < n; ++i)
    if (compare(system.gap(i), rep.omega_gap, tol) == 0) maximal.push_back(i);
  auto adjacent = [n](std::size_t a, std::size_t b) { return (a + 1) % n == b || (b + 1) % n == a; };

  std::optional<Condition> best_failure;
  std::vector<SectorDiagnostic> best_sectors;
  std::vector<LabeledRay> best_partition;
  bool found = false;

  const std::size_t M = maximal.size();
  for (std::size_t k = 1; k <= M && !(found && !opts.collect_all); ++k) {
    // Lexicographic k-subsets of the maximal gaps.
    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    for (;;) {
      bool valid = true;
      for (std::size_t a = 0; a < k && valid; ++a)
        for (std::size_t b = a + 1; b < k && valid; ++b)
          if (adjacent(maximal[pick[a]], maximal[pick[b]])) valid = false;
      if (valid) {
        Partition part;
        std::vector<bool> even_gap(n, false);
        for (std::size_t a : pick) {
          const std::size_t g = maximal[a];
          even_gap[g] = true;
          part.boundary.push_back(g);
          part.boundary.push_back((g + 1) % n);
        }
        std::sort(part.boundary.begin(), part.boundary.end());
        part.first_even = even_gap[part.boundary[0]] && (part.boundary[0] + 1) % n == part.boundary[1];

        ++rep.candidates_tried;
        std::optional<Condition> failure;
        auto sectors = check_partition(system, part, rep.omega_gap, &failure);
        std::vector<LabeledRay> boundary;
        for (std::size_t i : part.boundary) boundary.push_back(rays[i]);
        if (!failure) {
          if (!found) {
            found = true;
            rep.sectors = std::move(sectors);
            rep.partition = std::move(boundary);
          }
          if (opts.collect_all) rep.all_solutions.push_back(part);
          if (!opts.collect_all) break;
        } else if (!found && (!best_failure || *best_failure < *failure)) {
          // Keep the candidate that got furthest through the conditions.
          best_failure = failure;
          best_sectors = std::move(sectors);
          best_partition = std::move(boundary);
        }
      }
      // Next subset.
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == M - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  rep.admissible = found;
  if (!found) {
    rep.failure_witness = best_failure.value_or(Condition::opening);
    rep.sectors = std::move(best_sectors);
    rep.partition = std::move(best_partition);
  }
  return rep;
}

// -------------------------------------------------------------- two lines

LineClassification classify_two_lines(LineRelation relation) {
  LineClassification out{relation, {}, {}};
  switch (relation) {
    case LineRelation::parallel_distinct:
      out.forms = {"P(exp(a z)), P a polynomial, a complex"};
      out.verdict = "parallel lines: f is a polynomial in exp(a z)";
      break;
    case LineRelation::intersecting:
      out.forms = {"exp(a z + b)", "1 - exp(a z + b)", "polynomial of degree <= 2"};
      out.verdict = "intersecting lines: only the listed forms occur";
      break;
    case LineRelation::identical:
      out.verdict = "unconstrained: zeros and 1-points on one line is outside both classifications";
      break;
  }
  return out;
}

LineClassification classify_two_lines(const Line& first, const Line& second, double angle_tol) {
  // Directions are compared mod pi.
  const Angle d = (first.direction - second.direction);
  double r = std::remainder(d.radians(), kPi);
  bool parallel;
  if (d.pi_fraction()) {
    parallel = d.pi_fraction()->q == 1;
  } else {
    parallel = std::abs(r) <= angle_tol;
  }
  if (!parallel) return classify_two_lines(LineRelation::intersecting);
  // Same line iff the offset between base points is along the direction.
  const std::complex<double> u = std::polar(1.0, first.direction.radians());
  const std::complex<double> off = second.point - first.point;
  const double normal = std::abs((off * std::conj(u)).imag());
  const double scale = std::max({1.0, std::abs(first.point), std::abs(second.point)});
  return classify_two_lines(normal <= angle_tol * scale ? LineRelation::identical
                                                       : LineRelation::parallel_distinct);
}

// ---------------------------------------------------------------- three rays

ThreeRayReport three_ray_check(const Angle& alpha, double angle_tol) {
  const Angle pi = Angle::pi_multiple(1, 1);
  if (compare(alpha, Angle::pi_multiple(0, 1), angle_tol) <= 0 || compare(alpha, pi, angle_tol) >= 0)
    throw DomainError("alpha must lie in (0, pi), got " + alpha.to_string());

  ThreeRayReport rep;
  rep.alpha = alpha;
  const auto system = LabeledRaySystem::from_labels({Angle::pi_multiple(0, 1)},
                                                    {alpha, full_turn() - alpha}, angle_tol);
  rep.admissibility = admissibility_check(system);

  const int side = compare(alpha, Angle::pi_multiple(1, 2), angle_tol);
  if (side < 0) {
    rep.verdict = ThreeRayReport::Verdict::admissible;
    rep.rho = kPi / (2 * kPi - 2 * alpha.radians());
    rep.close_to_rays_possible = true;
    // alpha = 2 pi/(m+2): the 1-points of the spectral function f lie exactly on the rays.
    const long mm = std::lround(2 * kPi / alpha.radians()) - 2;
    if (mm >= 3 && compare(alpha, Angle::pi_multiple(2, mm + 2), angle_tol) == 0) {
      rep.realizing_m = static_cast<int>(mm);
      rep.exact_rays_possible = true;
      rep.exact_rays = "realized for m = " + std::to_string(mm);
    } else {
      rep.exact_rays = "existence open for exact rays";
    }
  } else if (side == 0) {
    rep.verdict = ThreeRayReport::Verdict::split;
    rep.rho = 1.0;
    rep.exact_rays_possible = false;
    rep.close_to_rays_possible = true;
    rep.exact_rays = "impossible for transcendental functions";
  } else {
    rep.verdict = ThreeRayReport::Verdict::inadmissible;
    rep.exact_rays_possible = false;
    rep.close_to_rays_possible = false;
    rep.exact_rays = "impossible";
  }
  return rep;
}

}  // namespace stokes
