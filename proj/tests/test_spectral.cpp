#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stokes/errors.hpp"
#include "stokes/spectral.hpp"

using namespace stokes;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

SpectralOptions with_derivative() {
  SpectralOptions o;
  o.with_derivative = true;
  return o;
}

}  // namespace

TEST(FunctionId, ParseAndName) {
  EXPECT_EQ(SpectralFunctionId::parse("f-1").kind, SpectralFunctionId::Kind::f_minus_1);
  EXPECT_EQ(SpectralFunctionId::parse("W(0, -2)"), SpectralFunctionId::wronskian(0, -2));
  EXPECT_EQ(SpectralFunctionId::wronskian(1, 3).name(), "W(1,3)");
  EXPECT_THROW(SpectralFunctionId::parse("Q"), PreconditionError);
}

TEST(Oracles, StokesMultiplierAtZeroEnergy) {
  for (int m : {3, 4, 5, 6, 8}) {
    const ProblemSpec s(m, 0.0);
    EXPECT_LT(rel(stokes_C(s).value, 1.0 + s.omega()), 1e-10) << m;
    EXPECT_LT(rel(stokes_C_at_zero_exact(m), 1.0 + s.omega()), 1e-15);
  }
}

TEST(Oracles, SpectralDeterminantAtZeroEnergy) {
  for (int m : {3, 4, 5}) {
    const double c = std::cos(kPi / (m + 2));
    EXPECT_LT(rel(spectral_f(ProblemSpec(m, 0.0)).value, cplx(1 - 4 * c * c)), 1e-10) << m;
  }
}

TEST(Wronskian, ZeroOneIsConstant) {
  for (int m : {3, 4, 5}) {
    const cplx exact = wronskian01_exact(m);
    EXPECT_LT(rel(exact, 2.0 * cplx(0, 1) / ProblemSpec(m, 0.0).epsilon()), 1e-15);
    for (cplx E : {cplx(0), cplx(7, -3), cplx(-25, 10), cplx(0, 45)})
      EXPECT_LT(rel(wronskian(ProblemSpec(m, E), 0, 1).value, exact), 1e-10) << m << " " << E;
  }
}

TEST(Wronskian, AntisymmetricAndVanishingOnDiagonal) {
  const ProblemSpec s(4, cplx(2, 1));
  EXPECT_EQ(wronskian(s, 2, 2).value, cplx(0));
  EXPECT_EQ(wronskian(s, 1, 7).value, cplx(0));  // 7 = 1 mod 6
  EXPECT_LT(rel(wronskian(s, 3, 0).value, -wronskian(s, 0, 3).value), 1e-12);
}

TEST(Wronskian, ShiftRule) {
  // W_{k+1,j+1}(E) = omega^{-1} W_{k,j}(omega^2 E).
  const ProblemSpec s(3, cplx(1.5, -2));
  const cplx lhs = wronskian(s, 1, 3).value;
  const cplx rhs = s.omega_power(-1) * wronskian(s.with_energy(s.omega_power(2) * s.energy()), 0, 2).value;
  EXPECT_LT(rel(lhs, rhs), 1e-10);
}

TEST(Relations, GIsProductOfMultipliersMinusOmega) {
  for (int m : {3, 5}) {
    const ProblemSpec s(m, cplx(3, 2));
    const cplx c1 = stokes_C(s).value;
    const cplx c2 = stokes_C(s.with_energy(s.omega_power(2) * s.energy())).value;
    EXPECT_LT(rel(spectral_g(s).value, c1 * c2 - s.omega()), 1e-9) << m;
  }
}

TEST(Relations, FMinusOneAndProductRoute) {
  for (cplx E : {cplx(0.5, 0.5), cplx(-4, 3), cplx(6, -1)}) {
    const ProblemSpec s(3, E);
    const cplx f = spectral_f(s).value;
    EXPECT_LT(std::abs(spectral_f_minus_1(s).value - (f - 1.0)), 1e-10 * std::max(1.0, std::abs(f)));
    EXPECT_LT(std::abs(spectral_f_via_h(s, 1).value - f), 1e-9 * std::max(1.0, std::abs(f)));
    EXPECT_LT(std::abs(spectral_f_via_h(s, -1).value - f), 1e-9 * std::max(1.0, std::abs(f)));
  }
}

TEST(Relations, HIsCOverEpsilon) {
  const ProblemSpec s(4, cplx(2, -3));
  EXPECT_LT(rel(spectral_h(s).value * s.epsilon(), stokes_C(s).value), 1e-13);
}

TEST(Symmetry, ConjugateEnergy) {
  for (int m : {3, 4}) {
    for (cplx E : {cplx(1, 2), cplx(-3, 0.5), cplx(8, -6)}) {
      const cplx h = spectral_h(ProblemSpec(m, E)).value;
      const cplx hb = spectral_h(ProblemSpec(m, std::conj(E))).value;
      EXPECT_LT(std::abs(hb - std::conj(h)), 1e-10 * std::max(1.0, std::abs(h))) << m << " " << E;
      const cplx f = spectral_f(ProblemSpec(m, E)).value;
      const cplx fb = spectral_f(ProblemSpec(m, std::conj(E))).value;
      EXPECT_LT(std::abs(fb - std::conj(f)), 1e-10 * std::max(1.0, std::abs(f)));
    }
  }
}

TEST(Symmetry, RealOnPositiveAxis) {
  for (double E : {0.3, 2.0, 9.0}) {
    const cplx f = spectral_f(ProblemSpec(3, E)).value;
    EXPECT_LT(std::abs(f.imag()), 1e-10 * std::max(1.0, std::abs(f)));
  }
}

TEST(Derivatives, VariationalMatchesFiniteDifference) {
  const cplx E(1.7, 0.9), h = 1e-5;
  for (auto id : {SpectralFunctionId{SpectralFunctionId::Kind::C}, SpectralFunctionId{SpectralFunctionId::Kind::f},
                  SpectralFunctionId{SpectralFunctionId::Kind::g}, SpectralFunctionId::wronskian(0, 2)}) {
    const ProblemSpec s(3, E);
    const auto v = evaluate(s, id, with_derivative());
    ASSERT_TRUE(v.derivative.has_value()) << id.name();
    const cplx fd = (evaluate(s.with_energy(E + h), id).value - evaluate(s.with_energy(E - h), id).value) / (2.0 * h);
    EXPECT_LT(rel(*v.derivative, fd), 1e-6) << id.name();
  }
}

TEST(Connection, ResidualIsSmall) {
  for (int m : {3, 4, 5})
    for (cplx E : {cplx(0), cplx(5, -2), cplx(-12, 4)})
      EXPECT_LT(connection_residual(ProblemSpec(m, E), cplx(0.6, 0.1)), 1e-9) << m << " " << E;
}

TEST(Errors, EstimateIsSmallButPositive) {
  const auto v = stokes_C(ProblemSpec(3, cplx(4, 4)));
  EXPECT_GT(v.err_estimate, 0.0);
  EXPECT_LT(v.err_estimate, 1e-8 * std::max(1.0, std::abs(v.value)));
}

TEST(SelfTest, PassesForSeveralDegrees) {
  for (int m : {3, 4, 5, 7, 10}) EXPECT_NO_THROW(self_test(m)) << m;
}

TEST(Zeros, EigenvalueOfMinusOneOneProblemIsStokesZero) {
  // C vanishes exactly where W_{-1,1} does.
  const double c0 = 1.15626707198812;
  const ProblemSpec s(3, c0);
  EXPECT_LT(std::abs(stokes_C(s).value), 1e-10);
  EXPECT_LT(std::abs(wronskian(s, -1, 1).value), 1e-10);
  EXPECT_GT(std::abs(stokes_C(ProblemSpec(3, c0 + 0.1)).value), 1e-3);
}
