// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stokes/errors.hpp"
#include "stokes/raysystem.hpp"
#include "stokes/rootfinder.hpp"
#include "stokes/sibuya.hpp"
#include "stokes/spectral.hpp"

using namespace stokes;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Collects failures for one criterion; the first few are printed.
class Tally {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      if (failures_ < 5) std::printf("    failed: %s\n", what.c_str());
      ++failures_;
    }
  }
  bool ok() const { return failures_ == 0 && checks_ > 0; }
  int checks() const { return checks_; }
  int failures() const { return failures_; }

 private:
  int checks_ = 0;
  int failures_ = 0;
};

template <class T>
std::string str(const T& v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

RootSearchResult zeros_in_disk(int m, SpectralFunctionId::Kind kind, double radius) {
  SpectralOptions so;
  so.with_derivative = true;
  return find_roots(spectral_handle(m, {kind}, so), Region::disk(0.0, radius), 256);
}

void ray_criterion(int m, Tally& t) {
  const double step = 2 * kPi / (m + 2);
  const auto f = zeros_in_disk(m, SpectralFunctionId::Kind::f, 30.0);
  const auto f1 = zeros_in_disk(m, SpectralFunctionId::Kind::f_minus_1, 30.0);
  const auto c = zeros_in_disk(m, SpectralFunctionId::Kind::C, 30.0);
  t.require(f.complete && f1.complete && c.complete, "root searches complete for m=" + std::to_string(m));
  t.require(!f.roots.empty() && !f1.roots.empty(), "zeros found");
  for (const auto* r : {&f, &f1, &c})
    for (const auto& rec : r->roots) t.require(rec.winding_certificate == 1 && rec.refined, "certified simple zero");
  for (const auto& z : f.roots)
    t.require(std::abs(std::arg(z.location)) < 1e-6, "zero of f at " + str(z.location));
  double worst_ray = 0, worst_pair = 0;
  for (const auto& e : f1.roots) {
    const double dev = std::abs(std::abs(std::arg(e.location)) - step);
    worst_ray = std::max(worst_ray, dev);
    t.require(dev < 1e-6, "1-point of f at " + str(e.location));
    double best = INFINITY;
    for (const auto& z : c.roots)
      for (int s : {-1, 1}) best = std::min(best, rel(e.location, std::polar(1.0, s * step) * z.location));
    worst_pair = std::max(worst_pair, best);
    t.require(best < 1e-8, "pairing of " + str(e.location));
  }
  std::printf("    m=%d: %zu zeros of f, %zu of f-1, %zu of C; worst ray %.1e, worst pairing %.1e\n", m,
              f.roots.size(), f1.roots.size(), c.roots.size(), worst_ray, worst_pair);
}

void criterion_oracles(Tally& t) {
  for (int m : {3, 4, 5}) {
    const ProblemSpec s(m, 0.0);
    t.require(rel(stokes_C(s).value, 1.0 + s.omega()) < 1e-9, "C(0), m=" + std::to_string(m));
    const double c = std::cos(kPi / (m + 2));
    t.require(rel(spectral_f(s).value, cplx(1 - 4 * c * c)) < 1e-9, "f(0), m=" + std::to_string(m));
  }
  for (int m : {3, 4, 5, 6}) {
    const double p = m + 2, nu = 1 / p;
    const auto y = evaluate_y0(ProblemSpec(m, 0.0), 0.0);
    t.require(rel(y.y(), std::tgamma(nu) * std::pow(p, nu - 0.5) / std::sqrt(kPi)) < 1e-9, "y0(0,0)");
    t.require(rel(y.dy(), std::tgamma(-nu) * std::pow(p, -nu - 0.5) / std::sqrt(kPi)) < 1e-9, "y0'(0,0)");
  }
  std::mt19937_64 gen(2718);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int m : {3, 4, 5}) {
    for (int i = 0; i < 100; ++i) {
      const cplx E = std::polar(50 * std::sqrt(u(gen)), 2 * kPi * u(gen));
      const double d = rel(wronskian(ProblemSpec(m, E), 0, 1).value, wronskian01_exact(m));
      worst = std::max(worst, d);
      t.require(d < 1e-8, "W01 at E=" + str(E));
    }
  }
  std::printf("    worst W01 deviation over 300 energies: %.1e\n", worst);
}

void criterion_quartic(Tally& t) {
  SpectralOptions so;
  so.with_derivative = true;
  const auto r = eigenvalues_nk({4, 0, 3}, Region::rectangle(-10, 0, -1, 1), {}, so);
  t.require(r.complete && r.roots.size() == 3, "three levels below 10");
  for (std::size_t n = 0; n < r.roots.size() && n < 3; ++n) {
    const double lambda = double(oracle::quartic_level(int(n)));
    const double d = std::abs(r.roots[n].location - cplx(-lambda)) / lambda;
    std::printf("    level %zu: %.12f vs %.12f (rel %.1e)\n", n, -r.roots[n].location.real(), lambda, d);
    t.require(d < 1e-6, "level " + std::to_string(n));
  }
  t.require(std::abs(std::abs(predicted_ray(4, 0, 3)) - kPi) < 1e-15, "predicted ray is pi");
  if (!r.roots.empty()) t.require(verify_radial(r.roots, predicted_ray(4, 0, 3), 1e-6).pass, "levels on ray pi");
}

void criterion_connection(Tally& t) {
  std::mt19937_64 gen(31415);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int m : {3, 4, 5}) {
    for (int i = 0; i < 20; ++i) {
      const cplx E = std::polar(20 * std::sqrt(u(gen)), 2 * kPi * u(gen));
      // z in S_0 so that all three rotated evaluations stay in range.
      const cplx z = std::polar(2 * u(gen), (2 * u(gen) - 1) * 0.9 * kPi / (m + 2));
      const double r = connection_residual(ProblemSpec(m, E), z);
      worst = std::max(worst, r);
      t.require(r < 1e-8, "residual at E=" + str(E) + " z=" + str(z));
    }
  }
  std::printf("    worst scaled residual over 60 pairs: %.1e\n", worst);
}

void criterion_order(Tally& t) {
  for (int m : {3, 4}) {
    const AnalyticFunction C = spectral_handle(m, {SpectralFunctionId::Kind::C});
    const auto est = order_estimate(C.value, {10, 20, 30, 40, 50});
    const double target = 0.5 + 1.0 / m;
    std::printf("    m=%d: slope %.4f, target %.4f\n", m, est.slope, target);
    t.require(std::abs(est.slope - target) < 0.1, "order for m=" + std::to_string(m));
  }
}

Angle pi_frac(std::int64_t p, std::int64_t q) { return Angle::pi_multiple(p, q); }

void criterion_rays(Tally& t) {
  for (int m = 3; m <= 8; ++m) {
    const auto rep = admissibility_check(
        LabeledRaySystem::from_labels({Angle::radians(0.0)}, {pi_frac(2, m + 2), pi_frac(-2, m + 2)}));
    t.require(rep.admissible && rep.rho_exact == Fraction::make(m + 2, 2 * m), "configuration for m=" + std::to_string(m));
  }
  {
    const auto rep = admissibility_check(LabeledRaySystem::from_labels({Angle::radians(0.0)}, {pi_frac(1, 2), pi_frac(3, 2)}));
    t.require(rep.admissible && rep.rho_exact == Fraction::make(1, 1), "exponential configuration");
  }
  for (int i = 1; i <= 10; ++i) {
    const double alpha = kPi / 2 + i * kPi / 22;
    const auto rep = admissibility_check(LabeledRaySystem::from_labels(
        {Angle::radians(0.0)}, {Angle::radians(alpha), Angle::radians(-alpha)}));
    t.require(!rep.admissible, "three rays at alpha=" + str(alpha));
  }
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b)
      if (a != b)
        t.require(!admissibility_check(LabeledRaySystem::from_labels({pi_frac(a, 12)}, {pi_frac(b, 12)})).admissible,
                  "two rays " + std::to_string(a) + "," + std::to_string(b));

  // Every labeled system of at most 6 rays on the grid k pi/12.
  long systems = 0, admissible = 0, mismatches = 0;
  std::vector<int> labels(24, 0);
  std::function<void(int, int)> walk = [&](int start, int left) {
    for (int k = start; k < 24; ++k) {
      for (int l : {1, 2}) {
        labels[k] = l;
        std::vector<Angle> A, B;
        for (int j = 0; j < 24; ++j) {
          if (labels[j] == 1) A.push_back(pi_frac(j, 12));
          if (labels[j] == 2) B.push_back(pi_frac(j, 12));
        }
        const bool ours = admissibility_check(LabeledRaySystem::from_labels(A, B)).admissible;
        const bool brute = oracle::rays_admissible(labels);
        ++systems;
        admissible += ours;
        if (ours != brute) {
          if (mismatches < 3) {
            std::string desc;
            for (int j = 0; j < 24; ++j)
              if (labels[j]) desc += std::to_string(j) + (labels[j] == 1 ? "A " : "B ");
            std::printf("    mismatch: %s(ours %d, brute force %d)\n", desc.c_str(), ours, brute);
          }
          ++mismatches;
        }
        if (left > 1) walk(k + 1, left - 1);
        labels[k] = 0;
      }
    }
  };
  walk(0, 6);
  std::printf("    brute force: %ld systems, %ld admissible, %ld mismatches\n", systems, admissible, mismatches);
  t.require(mismatches == 0, "brute-force agreement");
}

void criterion_rootfinder(Tally& t) {
  std::mt19937_64 gen(1618);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_int_distribution<int> deg(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cplx> roots;
    const int n = deg(gen);
    for (int i = 0; i < n; ++i) roots.emplace_back(u(gen), u(gen));
    auto value = [roots](cplx z) {
      cplx p = 1;
      for (cplx r : roots) p *= z - r;
      return p;
    };
    const auto res = find_roots(AnalyticFunction(value), Region::rectangle(-3.5, 3.5, -3.5, 3.5), 10);
    t.require(res.complete && res.roots.size() == roots.size(), "trial " + std::to_string(trial) + " complete");
    for (const auto& r : res.roots) {
      double best = INFINITY;
      for (cplx z : roots) best = std::min(best, std::abs(z - r.location));
      t.require(best < 1e-10, "root accuracy in trial " + std::to_string(trial));
      t.require(r.winding_certificate == 1, "certificate in trial " + std::to_string(trial));
    }
  }
  std::vector<cplx> roots;
  for (int i = 0; i < 6; ++i) roots.emplace_back(u(gen) * 0.8, u(gen) * 0.8);
  auto F = [roots](cplx z) {
    cplx p = std::exp(0.3 * z);
    for (cplx r : roots) p *= z - r;
    return p;
  };
  std::uniform_real_distribution<double> cut(-2.4, 2.4);
  const int whole = winding_count(F, Region::rectangle(-3, 3, -3, 3));
  t.require(whole == 6, "whole region count");
  for (int trial = 0; trial < 100; ++trial) {
    const double x = cut(gen), y = cut(gen);
    const int parts = winding_count(F, Region::rectangle(-3, x, -3, y)) + winding_count(F, Region::rectangle(x, 3, -3, y)) +
                      winding_count(F, Region::rectangle(-3, x, y, 3)) + winding_count(F, Region::rectangle(x, 3, y, 3));
    t.require(parts == whole, "additivity at cut " + str(cplx(x, y)));
  }
}

bool report(int number, const std::string& title, const std::function<void(Tally&)>& body) {
  Tally t;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(t);
  } catch (const Error& e) {
    t.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s %d: %s (%d checks, %d failed, %.1f s)\n", t.ok() ? "PASS" : "FAIL", number, title.c_str(),
              t.checks(), t.failures(), secs);
  std::fflush(stdout);
  return t.ok();
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "m=3: zeros of f on the positive ray, 1-points on +-2pi/5 paired with zeros of C",
               [](Tally& t) { ray_criterion(3, t); });
  ok &= report(2, "m=4, 5: same ray and pairing checks with rays +-2pi/(m+2)", [](Tally& t) {
    ray_criterion(4, t);
    ray_criterion(5, t);
  });
  ok &= report(3, "derived oracles: C(0), f(0), y0 at the origin, constant W01", criterion_oracles);
  ok &= report(4, "quartic oscillator levels from zeros of W(0,3)", criterion_quartic);
  ok &= report(5, "connection identity residuals", criterion_connection);
  ok &= report(6, "order of C from growth up to |E| = 50", criterion_order);
  ok &= report(7, "ray-system admissibility cases and brute-force agreement", criterion_rays);
  ok &= report(8, "root finder on random polynomials and winding additivity", criterion_rootfinder);
  return ok ? 0 : 1;
}
