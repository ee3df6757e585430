#include "stokes/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stokes/errors.hpp"
#include "stokes/ode.hpp"
#include "stokes/parallel.hpp"
#include "stokes/raysystem.hpp"
#include "stokes/rootfinder.hpp"
#include "stokes/sibuya.hpp"
#include "stokes/spectral.hpp"

namespace stokes::cli {

using json = nlohmann::ordered_json;

std::complex<double> parse_complex(const std::string& text) {
  static const std::string unum = R"((?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)";
  static const std::regex real_only("^([+-]?" + unum + ")$");
  static const std::regex imag_only("^([+-]?)(" + unum + ")?i$");
  static const std::regex both("^([+-]?" + unum + ")([+-])(" + unum + ")?i$");
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  std::smatch mt;
  auto imag_part = [](const std::string& sign, const std::ssub_match& digits) {
    const double v = digits.matched ? std::stod(digits.str()) : 1.0;
    return sign == "-" ? -v : v;
  };
  if (std::regex_match(s, mt, real_only)) return {std::stod(mt[1].str()), 0.0};
  if (std::regex_match(s, mt, imag_only)) return {0.0, imag_part(mt[1].str(), mt[2])};
  if (std::regex_match(s, mt, both)) return {std::stod(mt[1].str()), imag_part(mt[2].str(), mt[3])};
  throw PreconditionError("cannot parse complex number '" + text + "' (expected a+bi)");
}

namespace {

constexpr double kPi = std::numbers::pi;

json cj(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// Uniform doubles in [0, 1) from the top 53 bits; identical on every platform.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : gen_(seed) {}
  double operator()() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  cplx in_disk(double radius) {
    const double r = radius * std::sqrt((*this)());
    const double t = 2 * kPi * (*this)();
    return std::polar(r, t);
  }

 private:
  std::mt19937_64 gen_;
};

double rel_dev(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct Check {
  std::string name;
  bool pass = false;
  json measured;
  json reference;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string detail;

  json to_json() const {
    json j{{"name", name}, {"pass", pass}, {"measured", measured}, {"reference", reference},
           {"deviation", deviation}, {"tolerance", tolerance}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
  }
};

Check compare_check(std::string name, cplx measured, cplx reference, double tol) {
  Check c;
  c.name = std::move(name);
  c.measured = cj(measured);
  c.reference = cj(reference);
  c.deviation = rel_dev(measured, reference);
  c.tolerance = tol;
  c.pass = c.deviation <= tol;
  return c;
}

Check compare_check(std::string name, double measured, double reference, double tol) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.reference = reference;
  c.deviation = std::abs(measured - reference) / std::max(std::abs(reference), 1e-300);
  c.tolerance = tol;
  c.pass = c.deviation <= tol;
  return c;
}

// Runs `body`; a library exception becomes a failed check instead of aborting the suite.
Check guarded(const std::string& name, const std::function<Check()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    Check c;
    c.name = name;
    c.detail = e.what();
    return c;
  }
}

json region_json(const Region& r) {
  if (r.kind() == Region::Kind::disk)
    return json{{"kind", "disk"}, {"center", cj(r.center())}, {"radius", r.radius()}};
  return json{{"kind", "rectangle"}, {"re_min", r.re_min()}, {"re_max", r.re_max()},
              {"im_min", r.im_min()}, {"im_max", r.im_max()}};
}

json root_json(const RootRecord& r) {
  json j{{"E", cj(r.location)},
         {"modulus", std::abs(r.location)},
         {"argument", std::arg(r.location)},
         {"winding_certificate", r.winding_certificate},
         {"certificate_radius", r.certificate_radius},
         {"residual", r.residual},
         {"separation", r.separation},
         {"refined", r.refined}};
  j["angular_deviation"] = r.angular_deviation ? json(*r.angular_deviation) : json(nullptr);
  return j;
}

json radial_json(const RadialReport& rep, const std::vector<double>& angles) {
  return json{{"angles", angles},
              {"angular_tol", rep.angular_tol},
              {"max_deviation", rep.max_deviation},
              {"checked", rep.checked},
              {"excluded_at_origin", rep.excluded_at_origin},
              {"pass", rep.pass}};
}

json angle_json(const Angle& a) { return json{{"text", a.to_string()}, {"radians", a.radians()}}; }

std::string fraction_text(const Fraction& f) {
  return f.q == 1 ? std::to_string(f.p) : std::to_string(f.p) + "/" + std::to_string(f.q);
}

json ray_json(const LabeledRay& r) {
  json j = angle_json(r.angle);
  j["label"] = std::string(1, label_char(r.label));
  return j;
}

json admissibility_json(const LabeledRaySystem& sys, const AdmissibilityReport& rep, bool all) {
  json rays = json::array();
  for (const auto& r : sys.rays()) rays.push_back(ray_json(r));
  json part = json::array();
  for (const auto& r : rep.partition) part.push_back(ray_json(r));
  json sectors = json::array();
  for (const auto& s : rep.sectors) {
    json interior = json::array();
    for (auto l : s.interior) interior.push_back(std::string(1, label_char(l)));
    json passed = json::array();
    for (auto c : s.passed) passed.push_back(condition_name(c));
    sectors.push_back(json{{"start", angle_json(s.start)},
                           {"end", angle_json(s.end)},
                           {"opening", angle_json(s.opening)},
                           {"parity", s.even ? "even" : "odd"},
                           {"start_label", std::string(1, label_char(s.start_label))},
                           {"end_label", std::string(1, label_char(s.end_label))},
                           {"interior", interior},
                           {"passed", passed},
                           {"failed", s.failed ? json(condition_name(*s.failed)) : json(nullptr)}});
  }
  json j{{"system", rays},
         {"admissible", rep.admissible},
         {"omega_gap", angle_json(rep.omega_gap)},
         {"rho", rep.rho},
         {"rho_exact", rep.rho_exact ? json(fraction_text(*rep.rho_exact)) : json(nullptr)},
         {"partition", part},
         {"sectors", sectors},
         {"failure_witness",
          rep.failure_witness ? json(condition_name(*rep.failure_witness)) : json(nullptr)},
         {"candidates_tried", rep.candidates_tried}};
  if (all) {
    json sols = json::array();
    for (const auto& p : rep.all_solutions) {
      json b = json::array();
      for (auto i : p.boundary) b.push_back(sys.rays()[i].angle.to_string());
      sols.push_back(json{{"boundary", b}, {"first_parity", p.first_even ? "even" : "odd"}});
    }
    j["all_solutions"] = sols;
  }
  return j;
}

std::vector<cplx> parse_complex_list(const std::vector<std::string>& items) {
  std::vector<cplx> out;
  for (const auto& s : items) out.push_back(parse_complex(s));
  return out;
}

std::vector<Angle> parse_angles(const std::vector<std::string>& items) {
  std::vector<Angle> out;
  for (const auto& s : items) out.push_back(Angle::parse(s));
  return out;
}

// Predicted argument(s) of the zeros, when one is known.
std::vector<double> predicted_rays(int m, const SpectralFunctionId& id) {
  const double step = 2 * kPi / (m + 2);
  using K = SpectralFunctionId::Kind;
  switch (id.kind) {
    case K::C:
    case K::h:
    case K::f: return {0.0};
    case K::g: return {-step};
    case K::f_minus_1: return {-step, step};
    case K::W: return {predicted_ray(m, id.n, id.k)};
  }
  return {};
}

struct Options {
  RunConfig cfg;
  // eval / roots
  std::string fn;
  int n = 0, k = 0;
  bool n_given = false;
  std::vector<std::string> energies;
  std::vector<std::string> circle;
  std::string center = "0";
  std::vector<std::string> segment;
  bool derivative = false;
  std::vector<int> eig;
  std::vector<std::string> disk;
  std::vector<double> rect;
  int max_roots = 64;
  double tol = 1e-12;
  // verify
  std::string suite;
  double radius = 30.0;
  // rays
  std::vector<std::string> a, b;
  bool all = false;
  std::string alpha;
  bool parallel = false, intersecting = false, identical = false;
  std::string line1, line2;
};

class Failure : public std::runtime_error {
 public:
  Failure(ExitCode code, std::string kind, const std::string& msg)
      : std::runtime_error(msg), code(code), kind(std::move(kind)) {}
  ExitCode code;
  std::string kind;
};

[[noreturn]] void usage(const std::string& msg) { throw Failure(exit_usage, "usage", msg); }

SpectralFunctionId function_id(const Options& o) {
  if (o.fn.empty()) usage("--fn is required");
  if (o.fn == "W") {
    if (!o.n_given) usage("--fn W needs --n and --k");
    return SpectralFunctionId::wronskian(o.n, o.k);
  }
  if (o.n_given) usage("--n/--k only apply to --fn W");
  return SpectralFunctionId::parse(o.fn);
}

SpectralOptions spectral_options(const RunConfig& cfg, bool derivative) {
  SpectralOptions s;
  s.rel_tol = cfg.rel_tol;
  s.with_derivative = derivative;
  return s;
}

struct Outcome {
  json payload;
  ExitCode code = exit_ok;
};

// ------------------------------------------------------------------- eval

Outcome cmd_eval(const Options& o, json& echo, std::ostream& out, bool& wrote_csv) {
  const SpectralFunctionId id = function_id(o);
  const int given = int(!o.energies.empty()) + int(!o.circle.empty()) + int(!o.segment.empty());
  if (given != 1) usage("give exactly one of --E, --circle, --segment");

  std::vector<cplx> points;
  json grid = nullptr;
  if (!o.energies.empty()) {
    points = parse_complex_list(o.energies);
  } else if (!o.circle.empty()) {
    const double radius = std::stod(o.circle[0]);
    const long count = std::stol(o.circle[1]);
    if (!(radius > 0) || count < 1) usage("--circle needs R > 0 and N >= 1");
    const cplx c = parse_complex(o.center);
    for (long j = 0; j < count; ++j)
      points.push_back(c + std::polar(radius, 2 * kPi * double(j) / double(count)));
    grid = json{{"kind", "circle"}, {"center", cj(c)}, {"radius", radius}, {"count", count}};
  } else {
    const cplx a = parse_complex(o.segment[0]);
    const cplx b = parse_complex(o.segment[1]);
    const long count = std::stol(o.segment[2]);
    if (count < 2) usage("--segment needs N >= 2");
    for (long j = 0; j < count; ++j) points.push_back(a + (b - a) * (double(j) / double(count - 1)));
    grid = json{{"kind", "segment"}, {"start", cj(a)}, {"end", cj(b)}, {"count", count}};
  }
  if (o.cfg.format == "csv" && grid.is_null()) usage("csv output is only available for --circle/--segment grids");

  echo["fn"] = id.name();
  if (grid.is_null()) {
    json e = json::array();
    for (auto p : points) e.push_back(cj(p));
    echo["E"] = e;
  } else {
    echo["grid"] = grid;
  }
  echo["derivative"] = o.derivative;

  const SpectralOptions sopts = spectral_options(o.cfg, o.derivative);
  std::vector<SpectralValue> values(points.size());
  for_each_index(points.size(), [&](std::size_t i) {
    values[i] = evaluate(ProblemSpec(o.cfg.m, points[i]), id, sopts);
  });

  if (o.cfg.format == "csv") {
    out << "re_E,im_E,re_value,im_value,err";
    if (o.derivative) out << ",re_derivative,im_derivative";
    out << "\n";
    char buf[256];
    for (const auto& v : values) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", v.E.real(), v.E.imag(),
                    v.value.real(), v.value.imag(), v.err_estimate);
      out << buf;
      if (o.derivative) {
        const cplx d = v.derivative.value_or(cplx(NAN, NAN));
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", d.real(), d.imag());
        out << buf;
      }
      out << "\n";
    }
    wrote_csv = true;
    return {};
  }

  json list = json::array();
  for (const auto& v : values) {
    json item{{"E", cj(v.E)}, {"value", cj(v.value)}, {"err", v.err_estimate}};
    if (o.derivative) item["derivative"] = v.derivative ? cj(*v.derivative) : json(nullptr);
    list.push_back(item);
  }
  return {json{{"function", id.name()}, {"values", list}}, exit_ok};
}

// ------------------------------------------------------------------ roots

Region region_from(const Options& o, json& echo) {
  if (!o.disk.empty() == !o.rect.empty()) usage("give exactly one of --disk and --rect");
  if (!o.disk.empty()) {
    const cplx c = parse_complex(o.disk[0]);
    const double r = std::stod(o.disk[1]);
    if (!(r > 0)) usage("--disk radius must be positive");
    Region reg = Region::disk(c, r);
    echo["region"] = region_json(reg);
    return reg;
  }
  if (!(o.rect[0] < o.rect[1] && o.rect[2] < o.rect[3])) usage("--rect needs x0 < x1 and y0 < y1");
  Region reg = Region::rectangle(o.rect[0], o.rect[1], o.rect[2], o.rect[3]);
  echo["region"] = region_json(reg);
  return reg;
}

RootFinderOptions root_options(const RunConfig& cfg, double tol) {
  RootFinderOptions r;
  r.tol = tol;
  r.residual_floor = cfg.root_floor;
  return r;
}

Outcome cmd_roots(const Options& o, json& echo) {
  SpectralFunctionId id;
  if (!o.eig.empty()) {
    if (!o.fn.empty()) usage("give only one of --fn and --eig");
    id = SpectralFunctionId::wronskian(o.eig[0], o.eig[1]);
  } else {
    id = function_id(o);
  }
  if (id.kind == SpectralFunctionId::Kind::W) BoundaryProblem{o.cfg.m, id.n, id.k}.validate();
  echo["fn"] = id.name();
  const Region region = region_from(o, echo);
  echo["max_roots"] = o.max_roots;
  echo["tol"] = o.tol;

  const SpectralOptions sopts = spectral_options(o.cfg, true);
  const RootSearchResult res =
      find_roots(spectral_handle(o.cfg.m, id, sopts), region, o.max_roots, root_options(o.cfg, o.tol));

  const std::vector<double> rays = predicted_rays(o.cfg.m, id);
  std::optional<RadialReport> radial;
  std::vector<RootRecord> roots = res.roots;
  if (!rays.empty() && !roots.empty()) {
    radial = verify_radial_any(roots, rays, o.cfg.angular_tol);
    roots = radial->roots;
  }
  json list = json::array();
  for (const auto& r : roots) list.push_back(root_json(r));
  json payload{{"function", id.name()},
               {"searched_region", region_json(res.region)},
               {"expected", res.expected},
               {"complete", res.complete},
               {"diagnostic", res.diagnostic},
               {"roots", list}};
  payload["radial"] = radial ? radial_json(*radial, rays) : json(nullptr);

  Outcome out{payload, exit_ok};
  if (!res.complete) out.code = exit_numerical;
  else if (radial && !radial->pass) out.code = exit_check_failed;
  return out;
}

// ----------------------------------------------------------------- verify

std::vector<Check> suite_thm2(const Options& o) {
  const int m = o.cfg.m;
  const int p = m + 2;
  const ProblemSpec base(m, 0.0);
  const SpectralOptions sopts = spectral_options(o.cfg, true);
  const RootFinderOptions ropts = root_options(o.cfg, 1e-12);
  const Region disk = Region::disk(0.0, o.radius);
  std::vector<Check> checks;

  auto search = [&](const SpectralFunctionId& id) {
    return find_roots(spectral_handle(m, id, sopts), disk, 256, ropts);
  };
  auto certified = [](const std::string& name, const RootSearchResult& r) {
    Check c;
    c.name = name;
    int bad = 0;
    for (const auto& rec : r.roots) bad += (rec.winding_certificate != 1 || !rec.refined);
    c.pass = r.complete && bad == 0;
    c.measured = static_cast<int>(r.roots.size());
    c.reference = r.expected;
    c.deviation = bad;
    c.detail = r.complete ? std::to_string(r.roots.size()) + " certified simple zeros" : r.diagnostic;
    return c;
  };
  auto radial = [&](const std::string& name, const RootSearchResult& r, std::vector<double> angles) {
    Check c;
    c.name = name;
    c.tolerance = o.cfg.angular_tol;
    if (r.roots.empty()) {
      c.pass = true;
      c.detail = "no zeros in region";
      return c;
    }
    const RadialReport rep = verify_radial_any(r.roots, angles, o.cfg.angular_tol);
    c.pass = rep.pass && rep.checked > 0;
    c.measured = rep.max_deviation;
    c.reference = 0.0;
    c.deviation = rep.max_deviation;
    c.detail = std::to_string(rep.checked) + " zeros checked";
    return c;
  };

  std::optional<RootSearchResult> zeros_f, zeros_C, points_1;
  const double step = 2 * kPi / p;
  auto run_search = [&](const std::string& name, SpectralFunctionId::Kind kind,
                        std::optional<RootSearchResult>& slot) {
    checks.push_back(guarded(name, [&] {
      slot = search({kind});
      return certified(name, *slot);
    }));
  };
  run_search("f_zeros_certified", SpectralFunctionId::Kind::f, zeros_f);
  if (zeros_f) checks.push_back(radial("f_zeros_on_positive_ray", *zeros_f, {0.0}));
  run_search("f_minus_1_zeros_certified", SpectralFunctionId::Kind::f_minus_1, points_1);
  if (points_1) checks.push_back(radial("f_minus_1_zeros_on_rays", *points_1, {-step, step}));
  run_search("C_zeros_certified", SpectralFunctionId::Kind::C, zeros_C);
  if (zeros_C && points_1) {
    Check c;
    c.name = "f_minus_1_pairing";
    c.tolerance = 1e-8;
    c.reference = static_cast<int>(zeros_C->roots.size());
    c.measured = static_cast<int>(points_1->roots.size());
    double worst = 0.0;
    for (const auto& e : points_1->roots) {
      double best = INFINITY;
      for (const auto& z : zeros_C->roots)
        for (int s : {-1, 1}) best = std::min(best, rel_dev(e.location, base.omega_power(s) * z.location));
      worst = std::max(worst, best);
    }
    c.deviation = worst;
    c.pass = worst <= c.tolerance;
    c.detail = "each zero of f-1 against omega^{+-1} times zeros of C";
    checks.push_back(c);
  }
  checks.push_back(guarded("order_of_C", [&] {
    const AnalyticFunction C = spectral_handle(m, {SpectralFunctionId::Kind::C}, spectral_options(o.cfg, false));
    const OrderEstimate est = order_estimate(C.value, {10, 20, 30, 40, 50});
    Check c = compare_check("order_of_C", est.slope, 0.5 + 1.0 / m, 0.0);
    c.deviation = std::abs(est.slope - (0.5 + 1.0 / m));
    c.tolerance = 0.1;
    c.pass = c.deviation <= c.tolerance;
    c.detail = "slope of log log M(r) over r = 10..50";
    return c;
  }));
  return checks;
}

std::vector<Check> suite_consistency(const Options& o) {
  const int m = o.cfg.m;
  const SpectralOptions sopts = spectral_options(o.cfg, false);
  Uniform rng(o.cfg.seed);
  std::vector<Check> checks;

  std::vector<std::pair<cplx, cplx>> pairs;
  // y_{-1}, y_0, y_1 are all evaluated at rotations of z, so z stays inside S_0.
  for (int i = 0; i < 20; ++i) {
    const cplx E = rng.in_disk(20.0);
    const double r = 2.0 * rng();
    const double t = (2 * rng() - 1) * 0.9 * kPi / (m + 2);
    pairs.emplace_back(E, std::polar(r, t));
  }
  std::vector<cplx> energies;
  for (int i = 0; i < 100; ++i) energies.push_back(rng.in_disk(50.0));
  std::vector<cplx> small;
  for (int i = 0; i < 8; ++i) small.push_back(rng.in_disk(10.0));

  checks.push_back(guarded("connection_residual", [&] {
    std::vector<double> res(pairs.size());
    for_each_index(pairs.size(), [&](std::size_t i) {
      res[i] = connection_residual(ProblemSpec(m, pairs[i].first), pairs[i].second, sopts);
    });
    Check c;
    c.name = "connection_residual";
    c.deviation = *std::max_element(res.begin(), res.end());
    c.measured = c.deviation;
    c.reference = 0.0;
    c.tolerance = 1e-8;
    c.pass = c.deviation <= c.tolerance;
    c.detail = "20 random (E, z), |E| <= 20, z in S_0 with |z| <= 2";
    return c;
  }));

  checks.push_back(guarded("W01_constant", [&] {
    std::vector<cplx> w(energies.size());
    for_each_index(energies.size(), [&](std::size_t i) {
      w[i] = wronskian(ProblemSpec(m, energies[i]), 0, 1, sopts).value;
    });
    const cplx exact = wronskian01_exact(m);
    double worst = 0.0;
    cplx worst_value = exact;
    for (cplx v : w)
      if (rel_dev(v, exact) >= worst) worst = rel_dev(v, exact), worst_value = v;
    Check c = compare_check("W01_constant", worst_value, exact, 1e-8);
    c.detail = "100 random E, |E| <= 50; worst case shown";
    return c;
  }));

  checks.push_back(guarded("branch_independence", [&] {
    double worst = 0.0;
    for (cplx E : small) {
      const ProblemSpec spec(m, E);
      for (int k : {-1, 1, 2}) {
        const SolutionFrame a = yk_at_origin(spec, k, o.cfg.rel_tol);
        const SolutionFrame b = yk_at_origin_along_bisector(spec, k, o.cfg.rel_tol);
        const double scale = std::max(std::abs(a.y()), std::abs(a.dy()));
        worst = std::max(worst, std::max(std::abs(a.y() - b.y()), std::abs(a.dy() - b.dy())) / scale);
      }
    }
    Check c;
    c.name = "branch_independence";
    c.deviation = worst;
    c.measured = worst;
    c.reference = 0.0;
    c.tolerance = 1e-8;
    c.pass = worst <= c.tolerance;
    c.detail = "y_k(0) by energy rotation vs direct integration along the bisector, k = -1, 1, 2";
    return c;
  }));

  checks.push_back(guarded("conjugation_symmetry", [&] {
    double worst = 0.0;
    for (cplx E : small) {
      const SpectralValue a = spectral_h(ProblemSpec(m, std::conj(E)), sopts);
      const SpectralValue b = spectral_h(ProblemSpec(m, E), sopts);
      worst = std::max(worst, std::abs(a.value - std::conj(b.value)) / std::max(1.0, std::abs(b.value)));
    }
    Check c;
    c.name = "conjugation_symmetry";
    c.deviation = worst;
    c.measured = worst;
    c.reference = 0.0;
    c.tolerance = 1e-8;
    c.pass = worst <= c.tolerance;
    c.detail = "h(conj E) = conj h(E)";
    return c;
  }));

  checks.push_back(guarded("f_product_route", [&] {
    double worst = 0.0;
    for (cplx E : small) {
      const ProblemSpec spec(m, E);
      const cplx f = spectral_f(spec, sopts).value;
      for (int sign : {-1, 1})
        worst = std::max(worst, std::abs(spectral_f_via_h(spec, sign, sopts).value - f) /
                                    std::max(1.0, std::abs(f)));
    }
    Check c;
    c.name = "f_product_route";
    c.deviation = worst;
    c.measured = worst;
    c.reference = 0.0;
    c.tolerance = 1e-8;
    c.pass = worst <= c.tolerance;
    c.detail = "f against 1 - h(E/omega) h(omega E), both square roots of omega";
    return c;
  }));

  checks.push_back(guarded("anchor_independence", [&] {
    SpectralOptions far = sopts;
    far.anchor.r_min = 1.5 * minimum_anchor_radius(m, sopts.anchor);
    double worst = 0.0;
    for (cplx E : small) {
      const ProblemSpec spec(m, E);
      const SpectralValue a = stokes_C(spec, sopts);
      const SpectralValue b = stokes_C(spec, far);
      worst = std::max(worst, std::abs(a.value - b.value) / std::max(1.0, std::abs(a.value)));
    }
    Check c;
    c.name = "anchor_independence";
    c.deviation = worst;
    c.measured = worst;
    c.reference = 0.0;
    c.tolerance = 1e-8;
    c.pass = worst <= c.tolerance;
    c.detail = "C(E) with the anchor radius raised by half";
    return c;
  }));
  return checks;
}

// Quartic oscillator -y'' + x^4 y = lambda y, lowest levels.
constexpr double kQuarticLevels[] = {1.0603620904841829, 3.7996730298013942, 7.4556979379867384};

std::vector<Check> suite_oracles(const Options& o) {
  const int m = o.cfg.m;
  const int p = m + 2;
  const SpectralOptions sopts = spectral_options(o.cfg, false);
  const ProblemSpec origin(m, 0.0);
  std::vector<Check> checks;

  checks.push_back(guarded("C_at_zero", [&] {
    return compare_check("C_at_zero", stokes_C(origin, sopts).value, 1.0 + origin.omega(), 1e-9);
  }));
  checks.push_back(guarded("f_at_zero", [&] {
    const double c = std::cos(kPi / p);
    return compare_check("f_at_zero", spectral_f(origin, sopts).value, cplx(1 - 4 * c * c), 1e-9);
  }));
  // y0(0,0) and y0'(0,0) from the modified Bessel representation of the decaying solution.
  const double nu = 1.0 / p;
  const double y00 = std::tgamma(nu) * std::pow(double(p), nu - 0.5) / std::sqrt(kPi);
  const double dy00 = std::tgamma(-nu) * std::pow(double(p), -nu - 0.5) / std::sqrt(kPi);
  checks.push_back(guarded("y0_at_origin", [&] {
    return compare_check("y0_at_origin", evaluate_y0(origin, 0.0, o.cfg.rel_tol).y(), cplx(y00), 1e-9);
  }));
  checks.push_back(guarded("y0_prime_at_origin", [&] {
    return compare_check("y0_prime_at_origin", evaluate_y0(origin, 0.0, o.cfg.rel_tol).dy(), cplx(dy00), 1e-9);
  }));
  checks.push_back(guarded("W01_value", [&] {
    const cplx E(1.5, -2.0);
    return compare_check("W01_value", wronskian(ProblemSpec(m, E), 0, 1, sopts).value,
                         2.0 * cplx(0, 1) / origin.epsilon(), 1e-8);
  }));
  checks.push_back(guarded("airy_integration", [&] {
    const double ai0 = 0.35502805388781723926, dai0 = -0.25881940379280679841;
    const double ai1 = 0.13529241631288141552, dai1 = -0.15914744129679321279;
    const SolutionFrame f = integrate_path(PolynomialPotential({0.0, 1.0}), Path::line(0.0, 1.0),
                                           SolutionFrame::from_values(0.0, ai0, dai0),
                                           IntegratorOptions{o.cfg.rel_tol, 2'000'000});
    Check c = compare_check("airy_integration", f.y(), cplx(ai1), 1e-10);
    const double d = rel_dev(f.dy(), cplx(dai1));
    c.deviation = std::max(c.deviation, d);
    c.pass = c.deviation <= c.tolerance;
    c.detail = "Ai(0), Ai'(0) integrated to z = 1; deviation covers Ai and Ai'";
    return c;
  }));
  if (m == 4) {
    checks.push_back(guarded("y0_deep_in_sector", [&] {
      const SolutionFrame f = evaluate_y0(origin, 10.0, o.cfg.rel_tol);
      const double log_y = f.log_offset.real() + std::log(std::abs(f.y_mantissa));
      Check c = compare_check("y0_deep_in_sector", log_y, -335.63625126120906230, 1e-10);
      const double d = std::abs((f.dy_mantissa / f.y_mantissa).real() + 100.09990029860863351) / 100.1;
      c.deviation = std::max(c.deviation, d);
      c.pass = c.deviation <= c.tolerance;
      c.detail = "log y0(10) and y0'/y0 at E = 0";
      return c;
    }));
    checks.push_back(guarded("quartic_levels", [&] {
      const RootSearchResult r = eigenvalues_nk(BoundaryProblem{4, 0, 3}, Region::rectangle(-10, 0, -1, 1),
                                                root_options(o.cfg, 1e-12), spectral_options(o.cfg, true));
      Check c;
      c.name = "quartic_levels";
      c.tolerance = 1e-6;
      json got = json::array(), want = json::array();
      for (const auto& rec : r.roots) got.push_back(cj(rec.location));
      for (double l : kQuarticLevels) want.push_back(-l);
      c.measured = got;
      c.reference = want;
      const std::size_t n = std::size(kQuarticLevels);
      if (!r.complete || r.roots.size() != n) {
        c.deviation = INFINITY;
        c.detail = "expected " + std::to_string(n) + " zeros; " + r.diagnostic;
        return c;
      }
      for (std::size_t i = 0; i < n; ++i)
        c.deviation = std::max(c.deviation, rel_dev(r.roots[i].location, cplx(-kQuarticLevels[i])));
      const RadialReport rep = verify_radial(r.roots, predicted_ray(4, 0, 3), o.cfg.angular_tol);
      c.pass = c.deviation <= c.tolerance && rep.pass;
      c.detail = "zeros of W(0,3) in [-10,0]; predicted ray " + std::to_string(predicted_ray(4, 0, 3));
      return c;
    }));
  }
  return checks;
}

Outcome cmd_verify(const Options& o, json& echo) {
  echo["suite"] = o.suite;
  if (o.suite == "thm2") echo["radius"] = o.radius;
  std::vector<Check> checks;
  if (o.suite == "thm2") checks = suite_thm2(o);
  else if (o.suite == "consistency") checks = suite_consistency(o);
  else checks = suite_oracles(o);
  json list = json::array();
  int failed = 0;
  for (const auto& c : checks) {
    list.push_back(c.to_json());
    failed += !c.pass;
  }
  json payload{{"suite", o.suite}, {"passed", failed == 0}, {"failed", failed}, {"checks", list}};
  return {payload, failed ? exit_check_failed : exit_ok};
}

// ------------------------------------------------------------------- rays

Line parse_line(const std::string& text) {
  const auto at = text.find('@');
  if (at == std::string::npos) return Line{Angle::parse(text), 0.0};
  return Line{Angle::parse(text.substr(0, at)), parse_complex(text.substr(at + 1))};
}

std::string relation_name(LineRelation r) {
  switch (r) {
    case LineRelation::parallel_distinct: return "parallel";
    case LineRelation::intersecting: return "intersecting";
    case LineRelation::identical: return "identical";
  }
  return "?";
}

Outcome cmd_rays_check(const Options& o, json& echo) {
  if (o.a.empty() && o.b.empty()) usage("rays check needs --a and/or --b");
  const LabeledRaySystem sys = LabeledRaySystem::from_labels(parse_angles(o.a), parse_angles(o.b), o.cfg.angle_tol);
  json ea = json::array(), eb = json::array();
  for (const auto& r : sys.rays()) (r.label == RayLabel::A ? ea : eb).push_back(r.angle.to_string());
  echo["a"] = ea;
  echo["b"] = eb;
  echo["all"] = o.all;
  AdmissibilityOptions opts;
  opts.collect_all = o.all;
  return {admissibility_json(sys, admissibility_check(sys, opts), o.all), exit_ok};
}

Outcome cmd_rays_three(const Options& o, json& echo) {
  const Angle alpha = Angle::parse(o.alpha);
  echo["alpha"] = alpha.to_string();
  const ThreeRayReport rep = three_ray_check(alpha, o.cfg.angle_tol);
  const char* verdict = rep.verdict == ThreeRayReport::Verdict::admissible ? "admissible"
                        : rep.verdict == ThreeRayReport::Verdict::split   ? "split"
                                                                          : "inadmissible";
  const LabeledRaySystem sys = LabeledRaySystem::from_labels(
      {Angle::radians(0.0)}, {alpha, Angle::radians(0.0) - alpha}, o.cfg.angle_tol);
  json payload{{"alpha", angle_json(alpha)},
               {"verdict", verdict},
               {"rho", rep.rho ? json(*rep.rho) : json(nullptr)},
               {"exact_rays_possible", rep.exact_rays_possible ? json(*rep.exact_rays_possible) : json(nullptr)},
               {"close_to_rays_possible", rep.close_to_rays_possible},
               {"exact_rays", rep.exact_rays},
               {"realizing_m", rep.realizing_m ? json(*rep.realizing_m) : json(nullptr)},
               {"admissibility", admissibility_json(sys, rep.admissibility, false)}};
  return {payload, exit_ok};
}

Outcome cmd_rays_lines(const Options& o, json& echo) {
  const int flags = int(o.parallel) + int(o.intersecting) + int(o.identical);
  const bool explicit_lines = !o.line1.empty() || !o.line2.empty();
  if (flags + int(explicit_lines) != 1 || (explicit_lines && (o.line1.empty() || o.line2.empty())))
    usage("give one of --parallel, --intersecting, --identical, or both --line1 and --line2");
  LineClassification cls;
  if (explicit_lines) {
    echo["line1"] = o.line1;
    echo["line2"] = o.line2;
    cls = classify_two_lines(parse_line(o.line1), parse_line(o.line2), o.cfg.angle_tol);
  } else {
    const LineRelation rel = o.parallel ? LineRelation::parallel_distinct
                             : o.intersecting ? LineRelation::intersecting
                                              : LineRelation::identical;
    echo["relation"] = relation_name(rel);
    cls = classify_two_lines(rel);
  }
  return {json{{"relation", relation_name(cls.relation)}, {"forms", cls.forms}, {"verdict", cls.verdict}},
          exit_ok};
}

json config_json(const RunConfig& c, bool with_m) {
  json j;
  if (with_m) j["m"] = c.m;
  j["rel_tol"] = c.rel_tol;
  j["root_floor"] = c.root_floor;
  j["angular_tol"] = c.angular_tol;
  j["angle_tol"] = c.angle_tol;
  j["seed"] = c.seed;
  j["format"] = c.format;
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  RunConfig& cfg = o.cfg;

  CLI::App app{"Stokes multipliers, spectral determinants and ray-system checks", "stokes"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--m", cfg.m, "Degree of the potential z^m (>= 3)")->check(CLI::Range(3, 64));
  app.add_option("--rel-tol", cfg.rel_tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
  app.add_option("--root-floor", cfg.root_floor, "Largest accepted root residual")->check(CLI::PositiveNumber);
  app.add_option("--angular-tol", cfg.angular_tol, "Tolerance on root arguments")->check(CLI::PositiveNumber);
  app.add_option("--angle-tol", cfg.angle_tol, "Tolerance for comparing inexact ray angles")->check(CLI::PositiveNumber);
  app.add_option("--threads", cfg.threads, "Parallelism degree (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed, "Seed for the random property checks");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--timing", cfg.timing, "Add wall-clock timing to the document");

  auto* eval = app.add_subcommand("eval", "Evaluate C, g, f, h, f-1 or W(n,k) at energies");
  eval->add_option("--fn", o.fn, "C, g, f, h, f-1, W or W(n,k)")->required();
  eval->add_option("--n", o.n, "First sector index for W");
  eval->add_option("--k", o.k, "Second sector index for W");
  eval->add_option("--E", o.energies, "Comma-separated energies a+bi")->delimiter(',');
  eval->add_option("--circle", o.circle, "R N: N points on |E - center| = R")->expected(2);
  eval->add_option("--center", o.center, "Circle center");
  eval->add_option("--segment", o.segment, "A B N: N points from A to B")->expected(3);
  eval->add_flag("--derivative", o.derivative, "Also report dF/dE");

  auto* roots = app.add_subcommand("roots", "Certified zeros of a spectral function in a region");
  roots->add_option("--fn", o.fn, "C, g, f, h, f-1, W or W(n,k)");
  roots->add_option("--n", o.n, "First sector index for W");
  roots->add_option("--k", o.k, "Second sector index for W");
  roots->add_option("--eig", o.eig, "N K: eigenvalues decaying in S_N and S_K")->expected(2);
  roots->add_option("--disk", o.disk, "c R")->expected(2);
  roots->add_option("--rect", o.rect, "x0 x1 y0 y1")->expected(4);
  roots->add_option("--max-roots", o.max_roots, "Refuse regions holding more zeros")->check(CLI::PositiveNumber);
  roots->add_option("--tol", o.tol, "Newton tolerance")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", o.suite, "thm2, consistency or oracles")
      ->required()->check(CLI::IsMember({"thm2", "consistency", "oracles"}));
  verify->add_option("--radius", o.radius, "Disk radius for thm2")->check(CLI::PositiveNumber);

  auto* rays = app.add_subcommand("rays", "Ray-system admissibility");
  rays->require_subcommand(1);
  auto* check = rays->add_subcommand("check", "Admissibility of a labeled ray system");
  check->add_option("--a", o.a, "Angles of rays carrying zeros")->delimiter(',');
  check->add_option("--b", o.b, "Angles of rays carrying 1-points")->delimiter(',');
  check->add_flag("--all", o.all, "List every admissible partition");
  auto* three = rays->add_subcommand("three-ray", "Zeros on the positive ray, 1-points on +-alpha");
  three->add_option("--alpha", o.alpha, "Angle in (0, pi)")->required();
  auto* lines = rays->add_subcommand("classify-lines", "Zeros on one line, 1-points on another");
  lines->add_flag("--parallel", o.parallel);
  lines->add_flag("--intersecting", o.intersecting);
  lines->add_flag("--identical", o.identical);
  lines->add_option("--line1", o.line1, "angle@point");
  lines->add_option("--line2", o.line2, "angle@point");

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = json{{"name", nullptr}, {"options", json::object()}};
  doc["config"] = json::object();
  doc["status"] = "error";
  doc["payload"] = nullptr;

  auto emit_error = [&](int code, const std::string& kind, const std::string& msg) {
    doc["status"] = "error";
    doc["error"] = json{{"kind", kind}, {"message", msg}};
    err << "stokes: " << msg << "\n";
    out << doc.dump(2) << "\n";
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    for (auto* sub : app.get_subcommands()) doc["command"]["name"] = sub->get_name();
    return emit_error(exit_usage, "usage", e.what());
  }

  // Environment defaults, for options not given on the command line.
  const std::pair<const char*, const char*> env_names[] = {
      {"--rel-tol", "STOKES_REL_TOL"}, {"--root-floor", "STOKES_ROOT_FLOOR"},
      {"--angular-tol", "STOKES_ANGULAR_TOL"}, {"--angle-tol", "STOKES_ANGLE_TOL"},
      {"--threads", "STOKES_THREADS"}, {"--seed", "STOKES_SEED"}};
  for (const auto& [flag, var] : env_names) {
    const char* value = std::getenv(var);
    if (!value || app.count(flag) > 0) continue;
    try {
      app.get_option(flag)->add_result(std::string(value))->run_callback();
    } catch (const CLI::Error& e) {
      return emit_error(exit_usage, "usage", std::string(var) + ": " + e.what());
    }
  }
  o.n_given = eval->count("--n") + eval->count("--k") + roots->count("--n") + roots->count("--k") > 0;
  std::string name = app.get_subcommands().front()->get_name();
  if (name == "rays") name += " " + rays->get_subcommands().front()->get_name();
  const bool uses_m = name == "eval" || name == "roots" || name == "verify";
  doc["command"]["name"] = name;
  doc["config"] = config_json(cfg, uses_m);
  json& echo = doc["command"]["options"];

  const auto started = std::chrono::steady_clock::now();
  if (cfg.threads > 0) set_parallelism(cfg.threads);
  bool wrote_csv = false;
  try {
    // Environment values bypass the option validators.
    for (double t : {cfg.rel_tol, cfg.root_floor, cfg.angular_tol, cfg.angle_tol})
      if (!(t > 0) || !std::isfinite(t)) usage("tolerances must be positive and finite");
    if (cfg.threads < 0) usage("--threads must be >= 0");
    if (uses_m && app.count("--m") == 0) usage("--m is required");
    if (cfg.format == "csv" && name != "eval") usage("csv output is only available for eval grids");
    if (uses_m) self_test(cfg.m, spectral_options(cfg, false));

    Outcome res;
    if (name == "eval") res = cmd_eval(o, echo, out, wrote_csv);
    else if (name == "roots") res = cmd_roots(o, echo);
    else if (name == "verify") res = cmd_verify(o, echo);
    else if (name == "rays check") res = cmd_rays_check(o, echo);
    else if (name == "rays three-ray") res = cmd_rays_three(o, echo);
    else res = cmd_rays_lines(o, echo);
    if (wrote_csv) return res.code;

    doc["payload"] = res.payload;
    doc["status"] = res.code == exit_ok ? "ok" : res.code == exit_check_failed ? "check_failed" : "error";
    if (res.code == exit_numerical) {
      const std::string msg = res.payload.value("diagnostic", std::string("numerical failure"));
      doc["error"] = json{{"kind", "numerical"}, {"message", msg}};
      err << "stokes: " << msg << "\n";
    }
    if (cfg.timing) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      doc["timing"] = json{{"wall_seconds", secs}, {"threads", parallelism()}};
    }
    out << doc.dump(2) << "\n";
    return res.code;
  } catch (const Failure& f) {
    return emit_error(f.code, f.kind, f.what());
  } catch (const PreconditionError& e) {
    return emit_error(exit_usage, "usage", e.what());
  } catch (const DomainError& e) {
    return emit_error(exit_usage, "usage", e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error(exit_usage, "usage", std::string("malformed number: ") + e.what());
  } catch (const std::out_of_range& e) {
    return emit_error(exit_usage, "usage", std::string("number out of range: ") + e.what());
  } catch (const IntegrationError& e) {
    return emit_error(exit_numerical, "integration", e.what());
  } catch (const ConsistencyError& e) {
    return emit_error(exit_numerical, "consistency", e.what());
  } catch (const RootFinderError& e) {
    return emit_error(exit_numerical, "root_finder", e.what());
  } catch (const Error& e) {
    return emit_error(exit_numerical, "numerical", e.what());
  }
}

}  // namespace stokes::cli
