#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stokes/errors.hpp"
#include "stokes/sibuya.hpp"

using namespace stokes;

namespace {

constexpr double kPi = std::numbers::pi;

// y0(0, 0) and y0'(0, 0), frozen from the Bessel closed form.
struct OriginValues {
  int m;
  double y;
  double dy;
};
constexpr OriginValues kOrigin[] = {
    {3, 1.598183234678470396487150143591481, -1.0645222523851310967500407317477617},
    {4, 1.7282603693599267452516072532726536, -1.1572330393369570338471516904745985},
    {5, 1.843814305937225775891067926461126, -1.249998366723245384586811145684452},
    {6, 1.9488955675307886911709899353061826, -1.3408239893857067023112489767506461},
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(ProblemSpecTest, OmegaPowersArePeriodicBitForBit) {
  const ProblemSpec s(3, 0.0);
  for (int k = -7; k <= 7; ++k) {
    EXPECT_EQ(s.omega_power(k), s.omega_power(k + 5));
    EXPECT_EQ(s.omega_power(k), s.omega_power(k - 10));
  }
  EXPECT_NEAR(std::abs(s.epsilon() * s.epsilon() - s.omega()), 0.0, 1e-15);
  EXPECT_THROW(ProblemSpec(2, 0.0), PreconditionError);
}

TEST(Sectors, BisectorsAndMembership) {
  const StokesSector s1(3, 1), sm1(3, -1);
  EXPECT_NEAR(s1.bisector(), 2 * kPi / 5, 1e-15);
  EXPECT_NEAR(s1.half_opening(), kPi / 5, 1e-15);
  EXPECT_EQ(sm1.index, 4);
  EXPECT_TRUE(s1.contains(std::polar(3.0, 2 * kPi / 5 + 0.1)));
  EXPECT_FALSE(s1.contains(std::polar(3.0, 0.0)));
  EXPECT_TRUE(sm1.contains(std::polar(1.0, -2 * kPi / 5)));
}

TEST(Y0, MatchesBesselClosedFormAtOrigin) {
  for (const auto& o : kOrigin) {
    const auto f = evaluate_y0(ProblemSpec(o.m, 0.0), 0.0);
    EXPECT_LT(rel(f.y(), o.y), 1e-10) << "m=" << o.m;
    EXPECT_LT(rel(f.dy(), o.dy), 1e-10) << "m=" << o.m;
  }
}

TEST(Y0, ClosedFormFromGammaFunction) {
  // Same oracle recomputed from tgamma, guarding the frozen digits.
  for (const auto& o : kOrigin) {
    const double p = o.m + 2, nu = 1 / p;
    EXPECT_NEAR(std::tgamma(nu) * std::pow(p, nu - 0.5) / std::sqrt(kPi), o.y, 1e-14);
    EXPECT_NEAR(std::tgamma(-nu) * std::pow(p, -nu - 0.5) / std::sqrt(kPi), o.dy, 1e-14);
  }
}

TEST(Y0, DeepInsideSectorStaysRepresentable) {
  // log y0(10) is about -335.6: the value itself underflows binary64.
  const auto f = evaluate_y0(ProblemSpec(4, 0.0), 10.0);
  const double log_y = f.log_offset.real() + std::log(std::abs(f.y_mantissa));
  EXPECT_NEAR(log_y, -335.63625126120906230, 1e-9);
  EXPECT_NEAR((f.dy_mantissa / f.y_mantissa).real(), -100.09990029860863351, 1e-9);
}

TEST(Y0, RealOnPositiveAxisForRealEnergy) {
  const auto f = evaluate_y0(ProblemSpec(3, 2.5), 0.7);
  EXPECT_LT(std::abs(f.y().imag()), 1e-12 * std::abs(f.y()));
}

TEST(Y0, ConjugationSymmetry) {
  const cplx E(1.3, 2.1), z(0.4, 0.3);
  const auto a = evaluate_y0(ProblemSpec(3, E), z);
  const auto b = evaluate_y0(ProblemSpec(3, std::conj(E)), std::conj(z));
  EXPECT_LT(rel(b.y(), std::conj(a.y())), 1e-11);
}

TEST(Y0, IndependentOfSeedRadius) {
  const ProblemSpec spec(3, cplx(3, -4));
  AnchorPolicy near_policy, far_policy;
  far_policy.r_min = 2.0 * minimum_anchor_radius(3);
  const auto a = evaluate_y0(spec, cplx(0.5, 0.2), 1e-12, near_policy);
  const auto b = evaluate_y0(spec, cplx(0.5, 0.2), 1e-12, far_policy);
  EXPECT_LT(rel(a.y(), b.y()), 1e-10);
  EXPECT_LT(rel(a.dy(), b.dy()), 1e-10);
}

TEST(Y0, TwoTermSeedAgreesAtLargeRadius) {
  AnchorPolicy lg;
  lg.order = SeedOrder::liouville_green;
  lg.r_min = 30.0;
  lg.r_max = 30.0;
  const ProblemSpec spec(3, 1.0);
  const auto a = evaluate_y0(spec, 0.0, 1e-12, lg);
  const auto b = evaluate_y0(spec, 0.0);
  EXPECT_LT(rel(a.y(), b.y()), 1e-3);  // two-term error ~ R^{-5/2}
}

TEST(Y0, RejectsPointsOutsideThreeSectors) {
  const ProblemSpec spec(3, 0.0);
  EXPECT_THROW(evaluate_y0(spec, std::polar(1.0, 3 * kPi / 5 + 0.01)), DomainError);
  EXPECT_NO_THROW(evaluate_y0(spec, std::polar(1.0, 3 * kPi / 5 - 0.2)));
}

TEST(Y0, EnergyDerivativeMatchesFiniteDifference) {
  const ProblemSpec spec(4, cplx(1, 1));
  const cplx h = 1e-6, z(0.3, -0.2);
  const auto [y, dy] = evaluate_y0_with_variation(spec, z);
  const cplx fd = (evaluate_y0(spec.with_energy(spec.energy() + h), z).y() -
                   evaluate_y0(spec.with_energy(spec.energy() - h), z).y()) / (2.0 * h);
  EXPECT_LT(rel(dy.y(), fd), 1e-6);
}

TEST(Seed, SeriesErrorShrinksWithRadius) {
  const SeedSeries s(3, cplx(2, 1), 110);
  EXPECT_GT(s.truncation_error(6.0), s.truncation_error(12.0));
  EXPECT_LT(s.truncation_error(20.0), 1e-14);
}

TEST(Seed, AnchorRadiusRespectsPolicy) {
  AnchorPolicy p;
  for (int m : {3, 4, 5, 8}) {
    const double r = anchor_radius(ProblemSpec(m, 40.0), 1e-12, p);
    EXPECT_GE(r, minimum_anchor_radius(m, p));
    EXPECT_LE(r, p.r_max);
    EXPECT_LE(40.0, p.eta * std::pow(r, m) * (1 + 1e-12));
  }
}

TEST(Yk, RotationAgreesWithDirectBisectorIntegration) {
  for (int m : {3, 4, 6}) {
    const ProblemSpec spec(m, cplx(-2, 3));
    for (int k : {-1, 1, 2}) {
      const auto a = yk_at_origin(spec, k);
      const auto b = yk_at_origin_along_bisector(spec, k);
      EXPECT_LT(rel(a.y(), b.y()), 1e-9) << m << " " << k;
      EXPECT_LT(rel(a.dy(), b.dy()), 1e-9) << m << " " << k;
    }
  }
}

TEST(Y0, DecaysAlongPositiveAxis) {
  const ProblemSpec spec(3, 1.0);
  double previous = INFINITY;
  for (double x : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double a = std::abs(evaluate_y0(spec, x).y());
    EXPECT_LT(a, previous) << x;
    previous = a;
  }
}
