#include "stokes/rootfinder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "stokes/errors.hpp"

namespace stokes {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- regions

struct Edge {
  // Straight edges run from a to b; arcs from angle t0 to t1 around c.
  bool arc = false;
  cplx a{}, b{};
  cplx c{};
  double r = 0, t0 = 0, t1 = 0;
  bool reversed = false;  // traversed b -> a on the oriented contour

  cplx at(double u) const {
    if (arc) {
      const double t = std::lerp(t0, t1, u);
      return c + r * cplx(std::cos(t), std::sin(t));
    }
    return {std::lerp(a.real(), b.real(), u), std::lerp(a.imag(), b.imag(), u)};
  }
};

// Edges are stored in a canonical direction (left to right, bottom to top)
// so that neighbouring cells hit identical sample points on a shared edge.
std::vector<Edge> edges_of(const Region& r) {
  if (r.kind() == Region::Kind::disk) {
    Edge e;
    e.arc = true;
    e.c = r.center();
    e.r = r.radius();
    e.t0 = 0.0;
    e.t1 = 2 * kPi;
    return {e};
  }
  const cplx ll(r.re_min(), r.im_min()), lr(r.re_max(), r.im_min());
  const cplx ul(r.re_min(), r.im_max()), ur(r.re_max(), r.im_max());
  std::vector<Edge> out(4);
  out[0].a = ll, out[0].b = lr;
  out[1].a = lr, out[1].b = ur;
  out[2].a = ul, out[2].b = ur, out[2].reversed = true;
  out[3].a = ll, out[3].b = ul, out[3].reversed = true;
  return out;
}

// -------------------------------------------------------------- memoized F

struct KeyHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
    return std::hash<std::uint64_t>{}(k.first * 0x9E3779B97F4A7C15ull ^ k.second);
  }
};

struct Sample {
  cplx f;
  cplx df;
};

std::pair<cplx, cplx> value_and_slope(const AnalyticFunction& F, cplx z, bool central = false) {
  if (F.value_and_derivative && !central) return F.value_and_derivative(z);
  const double h = 1e-5 * std::max(1.0, std::abs(z));
  const cplx fp = F.value(z + h), fm = F.value(z - h);
  return {F.value(z), (fp - fm) / (2 * h)};
}

// Samples are a pure function of the point, so sharing them between
// contours cannot change any result; it only saves evaluations.
class Sampler {
 public:
  Sampler(const AnalyticFunction& F, Execution exec) : F_(F), exec_(exec) {}

  std::vector<Sample> values(const std::vector<cplx>& points) {
    std::vector<Sample> out(points.size());
    std::vector<cplx> todo;
    std::vector<std::size_t> where;
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < points.size(); ++i) {
        auto it = memo_.find(key(points[i]));
        if (it != memo_.end()) {
          out[i] = it->second;
        } else {
          todo.push_back(points[i]);
          where.push_back(i);
        }
      }
    }
    std::vector<Sample> fresh(todo.size());
    for_each_index(
        todo.size(),
        [&](std::size_t j) {
          const auto [f, df] = value_and_slope(F_, todo[j]);
          fresh[j] = {f, df};
        },
        exec_);
    std::lock_guard lock(mutex_);
    for (std::size_t j = 0; j < todo.size(); ++j) {
      out[where[j]] = fresh[j];
      memo_.emplace(key(todo[j]), fresh[j]);
    }
    return out;
  }

  const AnalyticFunction& function() const { return F_; }

 private:
  static std::pair<std::uint64_t, std::uint64_t> key(cplx z) {
    return {std::bit_cast<std::uint64_t>(z.real()), std::bit_cast<std::uint64_t>(z.imag())};
  }

  const AnalyticFunction& F_;
  Execution exec_;
  std::mutex mutex_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, Sample, KeyHash> memo_;
};

// ------------------------------------------------------------------ winding

enum class ContourStatus { ok, near_zero };

struct ContourWinding {
  ContourStatus status = ContourStatus::ok;
  int count = 0;
  int samples = 0;
  double min_abs = 0, max_abs = 0;
};

double phase_step(cplx from, cplx to) { return std::arg(to / from); }

// The endpoint phases alone cannot see a full turn between two samples, so
// the logarithmic derivative at both ends must also predict a small change
// that agrees with the observed one.
bool needs_refinement(const Sample& a, const Sample& b, cplx chord) {
  const double step = phase_step(a.f, b.f);
  if (std::abs(step) >= kPi / 2) return true;
  const cplx pa = a.df / a.f * chord, pb = b.df / b.f * chord;
  if (!std::isfinite(std::abs(pa)) || !std::isfinite(std::abs(pb))) return true;
  if (std::abs(pa) > kPi / 2 || std::abs(pb) > kPi / 2) return true;
  return std::abs(0.5 * (pa.imag() + pb.imag()) - step) > kPi / 8;
}

ContourWinding contour_winding(Sampler& sampler, const Region& region, const WindingOptions& opts) {
  const auto edges = edges_of(region);
  const int per_edge =
      std::max(8, edges.size() == 1 ? opts.initial_samples : opts.initial_samples / 4);

  std::vector<std::vector<double>> us(edges.size());
  std::vector<std::vector<Sample>> fs(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int i = 0; i <= per_edge; ++i) us[e].push_back(static_cast<double>(i) / per_edge);

  // Evaluate everything that is still missing in one parallel batch.
  auto fill = [&](std::vector<std::vector<double>>& new_us) {
    std::vector<cplx> pts;
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (double u : new_us[e]) pts.push_back(edges[e].at(u));
    return sampler.values(pts);
  };
  {
    const auto vals = fill(us);
    std::size_t p = 0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (std::size_t i = 0; i < us[e].size(); ++i) fs[e].push_back(vals[p++]);
  }

  ContourWinding out;
  for (;;) {
    out.samples = 0;
    out.max_abs = 0;
    out.min_abs = std::numeric_limits<double>::infinity();
    for (const auto& f : fs) {
      out.samples += static_cast<int>(f.size());
      for (const Sample& v : f) {
        const double a = std::abs(v.f);
        if (!std::isfinite(a)) throw RootFinderError("function is not finite on the contour");
        out.max_abs = std::max(out.max_abs, a);
        out.min_abs = std::min(out.min_abs, a);
      }
    }
    // A relative floor against max |F| would misfire on functions that grow
    // exponentially along the contour; zeros close to it show up instead as
    // an interval that keeps needing refinement.
    if (out.min_abs == 0.0) {
      out.status = ContourStatus::near_zero;
      return out;
    }

    std::vector<std::vector<double>> mids(edges.size());
    bool any = false;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      for (std::size_t i = 0; i + 1 < us[e].size(); ++i) {
        const cplx chord = edges[e].at(us[e][i + 1]) - edges[e].at(us[e][i]);
        if (!needs_refinement(fs[e][i], fs[e][i + 1], chord)) continue;
        const double h = us[e][i + 1] - us[e][i];
        if (h < opts.min_step) {
          // The phase keeps jumping at any resolution: a zero sits on the contour.
          out.status = ContourStatus::near_zero;
          return out;
        }
        mids[e].push_back(us[e][i] + 0.5 * h);
        any = true;
      }
    }
    if (!any) break;
    if (out.samples > opts.max_samples)
      throw RootFinderError("contour refinement did not converge within the sample cap");

    const auto vals = fill(mids);
    std::size_t p = 0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      std::vector<double> u2;
      std::vector<Sample> f2;
      std::size_t j = 0;
      for (std::size_t i = 0; i < us[e].size(); ++i) {
        u2.push_back(us[e][i]);
        f2.push_back(fs[e][i]);
        if (j < mids[e].size() && i + 1 < us[e].size() && mids[e][j] < us[e][i + 1]) {
          u2.push_back(mids[e][j++]);
          f2.push_back(vals[p++]);
        }
      }
      us[e] = std::move(u2);
      fs[e] = std::move(f2);
    }
  }

  // Oriented cycle.
  std::vector<Sample> cycle;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].reversed)
      cycle.insert(cycle.end(), fs[e].rbegin(), fs[e].rend());
    else
      cycle.insert(cycle.end(), fs[e].begin(), fs[e].end());
  }
  double total = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    total += phase_step(cycle[i].f, cycle[(i + 1) % cycle.size()].f);
  out.count = static_cast<int>(std::lround(total / (2 * kPi)));
  return out;
}

WindingResult winding_with_nudges(Sampler& sampler, const Region& region, const WindingOptions& opts) {
  const double step = 1e-3 * region.diameter();
  for (int nudge = 0; nudge <= opts.max_nudges; ++nudge) {
    const Region r = nudge == 0 ? region : region.expanded(step * nudge);
    const auto w = contour_winding(sampler, r, opts);
    if (w.status == ContourStatus::ok) {
      WindingResult out;
      out.count = w.count;
      out.region = r;
      out.nudges = nudge;
      out.samples = w.samples;
      out.min_abs = w.min_abs;
      out.max_abs = w.max_abs;
      return out;
    }
  }
  throw RootFinderError("contour passes through a zero after " + std::to_string(opts.max_nudges) +
                        " outward nudges");
}

// ------------------------------------------------------------------- newton

struct NewtonOutcome {
  bool converged = false;
  cplx z{};
};

NewtonOutcome newton(const AnalyticFunction& F, cplx start, double reach, const RootFinderOptions& opts) {
  cplx z = start;
  for (int it = 0; it < opts.max_newton; ++it) {
    const auto [f, df] = value_and_slope(F, z);
    if (f == 0.0) return {true, z};
    if (df == 0.0 || !std::isfinite(std::abs(df))) return {false, z};
    const cplx step = f / df;
    z -= step;
    if (!std::isfinite(std::abs(z)) || std::abs(z - start) > reach) return {false, z};
    if (std::abs(step) <= opts.tol * std::max(1.0, std::abs(z))) return {true, z};
  }
  return {false, z};
}

// ---------------------------------------------------------------- quad-tree

struct Cell {
  double x0, x1, y0, y1;
  int count;
  Region region() const { return Region::rectangle(x0, x1, y0, y1); }
  double size() const { return std::max(x1 - x0, y1 - y0); }
  bool holds(cplx z, double slack) const {
    return z.real() >= x0 - slack && z.real() <= x1 + slack && z.imag() >= y0 - slack &&
           z.imag() <= y1 + slack;
  }
};

// Split points deliberately avoid the midpoint, so that zeros on the
// coordinate axes (the common case here) do not land on cell edges.
constexpr std::pair<double, double> kSplits[] = {
    {0.5173, 0.4869}, {0.4781, 0.5241}, {0.5307, 0.5089}, {0.4647, 0.4723}};

std::vector<Cell> split(const Cell& c, std::pair<double, double> frac) {
  const double w = c.x1 - c.x0, h = c.y1 - c.y0;
  const double xm = c.x0 + frac.first * w, ym = c.y0 + frac.second * h;
  if (w >= 2 * h) return {{c.x0, xm, c.y0, c.y1, 0}, {xm, c.x1, c.y0, c.y1, 0}};
  if (h >= 2 * w) return {{c.x0, c.x1, c.y0, ym, 0}, {c.x0, c.x1, ym, c.y1, 0}};
  return {{c.x0, xm, c.y0, ym, 0}, {xm, c.x1, c.y0, ym, 0}, {c.x0, xm, ym, c.y1, 0},
          {xm, c.x1, ym, c.y1, 0}};
}

// Children with winding counts that add up to the parent's, or nothing.
std::optional<std::vector<Cell>> subdivide(Sampler& sampler, const Cell& c, const WindingOptions& wopts) {
  WindingOptions serial = wopts;
  serial.exec = Execution::serial;
  for (const auto& frac : kSplits) {
    auto kids = split(c, frac);
    bool ok = true;
    int sum = 0;
    for (auto& k : kids) {
      const auto w = contour_winding(sampler, k.region(), serial);
      if (w.status != ContourStatus::ok || w.count < 0) {
        ok = false;
        break;
      }
      k.count = w.count;
      sum += w.count;
    }
    if (ok && sum == c.count) return kids;
  }
  return std::nullopt;
}

// Isolating circle around a refined root.
std::optional<RootRecord> certify(Sampler& sampler, cplx z, double radius, const WindingOptions& wopts) {
  WindingOptions serial = wopts;
  serial.exec = Execution::serial;
  serial.initial_samples = 32;
  const double fz = std::abs(sampler.values({z})[0].f);
  for (int attempt = 0; attempt < 8; ++attempt, radius *= 0.25) {
    const auto w = contour_winding(sampler, Region::disk(z, radius), serial);
    if (w.status != ContourStatus::ok || w.count != 1) continue;
    RootRecord rec;
    rec.location = z;
    rec.winding_certificate = 1;
    rec.certificate_radius = radius;
    // |F(z)| against the linear scale |F'| max(1, |z|) read off the circle:
    // roughly the relative accuracy of the location.
    rec.residual = fz / w.max_abs * radius / std::max(1.0, std::abs(z));
    rec.separation = fz == 0 ? std::numeric_limits<double>::infinity() : w.min_abs / fz;
    rec.refined = true;
    return rec;
  }
  return std::nullopt;
}

bool root_order(const RootRecord& a, const RootRecord& b) {
  const double ma = std::abs(a.location), mb = std::abs(b.location);
  if (ma != mb) return ma < mb;
  return std::arg(a.location) < std::arg(b.location);
}

int mod(int a, int p) { return ((a % p) + p) % p; }

}  // namespace

// ------------------------------------------------------------------ Region

Region Region::rectangle(double re_min, double re_max, double im_min, double im_max) {
  if (!(re_max > re_min) || !(im_max > im_min) || !std::isfinite(re_max - re_min) ||
      !std::isfinite(im_max - im_min))
    throw PreconditionError("rectangle needs positive, finite width and height");
  Region r;
  r.kind_ = Kind::rectangle;
  r.x0_ = re_min, r.x1_ = re_max, r.y0_ = im_min, r.y1_ = im_max;
  r.center_ = {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)};
  return r;
}

Region Region::disk(cplx center, double radius) {
  if (!(radius > 0) || !std::isfinite(radius) || !std::isfinite(std::abs(center)))
    throw PreconditionError("disk needs a positive, finite radius");
  Region r;
  r.kind_ = Kind::disk;
  r.center_ = center;
  r.radius_ = radius;
  r.x0_ = center.real() - radius, r.x1_ = center.real() + radius;
  r.y0_ = center.imag() - radius, r.y1_ = center.imag() + radius;
  return r;
}

cplx Region::center() const noexcept { return center_; }

double Region::diameter() const noexcept {
  return kind_ == Kind::disk ? 2 * radius_ : std::hypot(x1_ - x0_, y1_ - y0_);
}

bool Region::contains(cplx z) const noexcept {
  if (kind_ == Kind::disk) return std::abs(z - center_) <= radius_;
  return z.real() >= x0_ && z.real() <= x1_ && z.imag() >= y0_ && z.imag() <= y1_;
}

Region Region::expanded(double margin) const {
  if (kind_ == Kind::disk) return disk(center_, radius_ + margin);
  return rectangle(x0_ - margin, x1_ + margin, y0_ - margin, y1_ + margin);
}

cplx Region::boundary_point(double t) const noexcept {
  t -= std::floor(t);
  if (kind_ == Kind::disk) return center_ + radius_ * std::polar(1.0, 2 * kPi * t);
  const auto e = edges_of(*this);
  const int side = std::min(3, static_cast<int>(4 * t));
  const double u = 4 * t - side;
  return e[side].at(e[side].reversed ? 1 - u : u);
}

std::vector<double> Region::corner_parameters() const {
  if (kind_ == Kind::disk) return {};
  return {0.0, 0.25, 0.5, 0.75};
}

// ----------------------------------------------------------------- winding

WindingResult winding_count(const AnalyticFunction& F, const Region& region, const WindingOptions& opts) {
  Sampler sampler(F, opts.exec);
  return winding_with_nudges(sampler, region, opts);
}

int winding_count(const std::function<cplx(cplx)>& F, const Region& region) {
  return winding_count(AnalyticFunction(F), region).count;
}

// -------------------------------------------------------------- find_roots

RootSearchResult find_roots(const AnalyticFunction& F, const Region& region, int max_roots,
                            const RootFinderOptions& opts) {
  if (!F.value) throw PreconditionError("find_roots needs a function");
  Sampler sampler(F, opts.winding.exec);
  const auto total = winding_with_nudges(sampler, region, opts.winding);

  RootSearchResult result;
  result.expected = total.count;
  result.region = total.region;
  if (total.count < 0) throw ConsistencyError("negative winding count for an entire function");
  if (total.count > max_roots)
    throw PreconditionError("region holds " + std::to_string(total.count) +
                            " zeros, more than max_roots = " + std::to_string(max_roots));
  if (total.count == 0) return result;

  const Region& R = total.region;
  std::vector<Cell> level;
  if (R.kind() == Region::Kind::rectangle) {
    level.push_back({R.re_min(), R.re_max(), R.im_min(), R.im_max(), total.count});
  } else {
    // Bounding square, grown slightly until its boundary is clear of zeros.
    const double pad = 1e-3 * R.diameter();
    bool found = false;
    for (int i = 0; i < 4 && !found; ++i) {
      const Region box = Region::rectangle(R.re_min() - pad * (1 + i), R.re_max() + pad * (1 + i),
                                           R.im_min() - pad * (1 + i), R.im_max() + pad * (1 + i));
      const auto w = contour_winding(sampler, box, opts.winding);
      if (w.status == ContourStatus::ok) {
        level.push_back({box.re_min(), box.re_max(), box.im_min(), box.im_max(), w.count});
        found = true;
      }
    }
    if (!found) throw RootFinderError("bounding box of the disk passes through a zero");
  }

  const double min_cell = opts.min_cell_fraction * R.diameter();
  std::vector<RootRecord> records;
  std::vector<std::string> problems;
  int cells_used = 0;

  while (!level.empty()) {
    // Largest cells first; the order only affects which cells a budget cut drops.
    std::stable_sort(level.begin(), level.end(), [](const Cell& a, const Cell& b) {
      return (a.x1 - a.x0) * (a.y1 - a.y0) > (b.x1 - b.x0) * (b.y1 - b.y0);
    });
    cells_used += static_cast<int>(level.size());
    if (cells_used > opts.max_cells) {
      result.complete = false;
      problems.push_back("cell budget exhausted with " + std::to_string(level.size()) +
                         " cells pending");
      break;
    }

    struct Outcome {
      std::optional<RootRecord> record;
      std::vector<Cell> children;
      std::string problem;
    };
    std::vector<Outcome> outcomes(level.size());
    for_each_index(
        level.size(),
        [&](std::size_t i) {
          const Cell& c = level[i];
          Outcome& o = outcomes[i];
          if (c.count == 0) return;
          if (c.count == 1) {
            const cplx mid(0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1));
            const auto nw = newton(F, mid, 2 * c.size(), opts);
            const double slack = 1e-9 * std::max(1.0, std::abs(nw.z));
            if (nw.converged && c.holds(nw.z, slack)) {
              o.record = certify(sampler, nw.z, 0.25 * std::min(c.x1 - c.x0, c.y1 - c.y0),
                                 opts.winding);
              if (o.record) return;
            }
          }
          if (c.size() < min_cell) {
            RootRecord rec;
            rec.location = {0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1)};
            rec.winding_certificate = c.count;
            rec.certificate_radius = 0.5 * std::hypot(c.x1 - c.x0, c.y1 - c.y0);
            rec.residual = std::numeric_limits<double>::quiet_NaN();
            o.record = rec;
            if (c.count == 1) o.problem = "simple zero could not be refined";
            return;
          }
          auto kids = subdivide(sampler, c, opts.winding);
          if (!kids) {
            o.problem = "cell subdivision failed near " + std::to_string(c.x0) + "+" +
                        std::to_string(c.y0) + "i";
            return;
          }
          o.children = std::move(*kids);
        },
        opts.winding.exec);

    std::vector<Cell> next;
    for (auto& o : outcomes) {
      if (o.record) records.push_back(*o.record);
      if (!o.problem.empty()) {
        result.complete = false;
        problems.push_back(o.problem);
      }
      for (const Cell& k : o.children)
        if (k.count > 0) next.push_back(k);
    }
    level = std::move(next);
  }

  int inside = 0;
  for (const auto& rec : records) {
    if (!R.contains(rec.location)) continue;
    if (rec.refined && !(rec.residual <= opts.residual_floor)) {
      result.complete = false;
      problems.push_back("residual above floor at a refined root");
    }
    inside += rec.winding_certificate;
    result.roots.push_back(rec);
  }
  std::sort(result.roots.begin(), result.roots.end(), root_order);
  if (inside != total.count) {
    result.complete = false;
    problems.push_back("located " + std::to_string(inside) + " of " + std::to_string(total.count) +
                       " zeros");
  }
  std::ostringstream diag;
  for (std::size_t i = 0; i < problems.size(); ++i) diag << (i ? "; " : "") << problems[i];
  result.diagnostic = diag.str();
  return result;
}

cplx newton_step(const AnalyticFunction& F, cplx z, bool central_difference) {
  const auto [f, df] = value_and_slope(F, z, central_difference);
  return f / df;
}

// --------------------------------------------------------- boundary problems

void BoundaryProblem::validate() const {
  if (m < 3) throw PreconditionError("m must be an integer >= 3");
  const int p = m + 2;
  const int d = mod(n - k, p);
  if (d == 0 || d == 1 || d == p - 1)
    throw PreconditionError("boundary problem (" + std::to_string(n) + "," + std::to_string(k) +
                            ") has no discrete spectrum: need n != k and n != k+-1 (mod m+2)");
}

RootSearchResult eigenvalues_nk(const BoundaryProblem& problem, const Region& region,
                                const RootFinderOptions& opts, const SpectralOptions& spectral,
                                int max_roots) {
  problem.validate();
  return find_roots(spectral_handle(problem.m, SpectralFunctionId::wronskian(problem.n, problem.k),
                                    spectral),
                    region, max_roots, opts);
}

double predicted_ray(int m, int n, int k) {
  const int p = m + 2;
  // Reduce the rotation index first so the angle is exact for integer inputs.
  int j = mod(-(n + k), p);
  if (2 * j > p) j -= p;
  return 2 * kPi * j / p;
}

// ------------------------------------------------------------------ radial

RadialReport verify_radial_any(const std::vector<RootRecord>& roots, const std::vector<double>& angles,
                               double angular_tol) {
  if (roots.empty()) throw PreconditionError("verify_radial needs at least one root");
  if (angles.empty()) throw PreconditionError("verify_radial needs at least one ray");
  RadialReport rep;
  rep.angle = angles.front();
  rep.angular_tol = angular_tol;
  rep.roots = roots;
  for (auto& r : rep.roots) {
    if (std::abs(r.location) < 1e-6) {
      r.angular_deviation.reset();
      ++rep.excluded_at_origin;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (double a : angles)
      best = std::min(best, std::abs(std::remainder(std::arg(r.location) - a, 2 * kPi)));
    r.angular_deviation = best;
    rep.max_deviation = std::max(rep.max_deviation, best);
    ++rep.checked;
  }
  rep.pass = rep.max_deviation <= angular_tol;
  return rep;
}

RadialReport verify_radial(const std::vector<RootRecord>& roots, double angle, double angular_tol) {
  return verify_radial_any(roots, {angle}, angular_tol);
}

// ------------------------------------------------------------------- order

OrderEstimate order_estimate(const std::function<cplx(cplx)>& F, const std::vector<double>& radii,
                             Execution exec) {
  if (radii.size() < 3) throw PreconditionError("order_estimate needs at least three radii");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0) || (i && !(radii[i] > radii[i - 1])))
      throw PreconditionError("radii must be positive and increasing");

  OrderEstimate out;
  for (double r : radii) {
    const int n = std::max(128, static_cast<int>(std::ceil(8 * r)));
    std::vector<cplx> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = std::polar(r, 2 * kPi * i / n);
    auto vals = sample(F, pts, exec);
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(vals[i]) > std::abs(vals[best])) best = i;
    double M = std::abs(vals[best]);
    // Resample around the coarse maximum.
    std::vector<cplx> fine(32);
    for (int i = 0; i < 32; ++i)
      fine[i] = std::polar(r, 2 * kPi * (best + (i - 15.5) / 16.0) / n);
    for (const cplx& v : sample(F, fine, exec)) M = std::max(M, std::abs(v));
    if (!(M > 1)) {
      out.dropped.push_back(r);
      continue;
    }
    out.radii.push_back(r);
    out.log_max.push_back(std::log(M));
  }
  if (out.radii.size() < 3)
    throw PreconditionError("fewer than three radii with max |F| > 1");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(out.radii.size());
  for (std::size_t i = 0; i < out.radii.size(); ++i) {
    const double x = std::log(out.radii[i]), y = std::log(out.log_max[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.sub_exponential = out.slope <= 0.1;
  return out;
}

AnalyticFunction spectral_handle(int m, const SpectralFunctionId& id, const SpectralOptions& opts) {
  ProblemSpec(m, 0.0);  // validates m
  SpectralOptions plain = opts, with = opts;
  plain.with_derivative = false;
  with.with_derivative = true;
  return AnalyticFunction(
      [m, id, plain](cplx E) { return evaluate(ProblemSpec(m, E), id, plain).value; },
      [m, id, with](cplx E) {
        const auto v = evaluate(ProblemSpec(m, E), id, with);
        if (!v.derivative) throw ConsistencyError("spectral derivative unavailable for " + id.name());
        return std::make_pair(v.value, *v.derivative);
      });
}

}  // namespace stokes
