#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "homog/coefficients.hpp"
#include "homog/error.hpp"

using namespace homog;

TEST(Coefficients, MeanOfBuiltinsIsExact) {
  // Every trigonometric family has zero-mean perturbations, so the mean is 1.
  for (int d : {1, 2}) {
    for (const auto& fam : builtin_coefficient_families()) {
      const auto c = make_builtin_coefficient(fam, d, {1.0, 0.7});
      EXPECT_NEAR(mean_lambda(c, d == 1 ? 64 : 16), 1.0, 1e-14) << fam;
    }
    EXPECT_NEAR(mean_lambda(make_builtin_coefficient("constant", d, {2.5, 0.0}), 16), 2.5, 1e-14);
  }
}

TEST(Coefficients, MeanOfCustomSquareMatchesHandValue) {
  // (1 + a sin 2 pi x)^2 averages to 1 + a^2 / 2.
  const double a = 0.4;
  const PeriodicCoefficient c(
      1,
      [a](const Point& x, const Point& y) {
        const double s = std::sin(2.0 * std::numbers::pi * x[0]) + std::sin(2.0 * std::numbers::pi * y[0]);
        return 1.0 + a * a * s * s / 4.0;
      },
      1.0, 1.0 + a * a);
  EXPECT_NEAR(mean_lambda(c, 32), 1.0 + a * a / 4.0, 1e-14);
}

TEST(Coefficients, SymmetricPeriodicAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& fam : builtin_coefficient_families()) {
    const auto c = make_builtin_coefficient(fam, 2, {1.0, 0.5});
    for (int i = 0; i < 300; ++i) {
      const Point x{u(rng), u(rng)};
      const Point y{u(rng), u(rng)};
      EXPECT_NEAR(c(x, y), c(y, x), 1e-14);
      EXPECT_NEAR(c(x, y), c(x + Point{1.0, 0.0}, y + Point{0.0, -2.0}), 1e-12);
      EXPECT_GE(c(x, y), c.gamma1() - 1e-14);
      EXPECT_LE(c(x, y), c.gamma2() + 1e-14);
    }
    EXPECT_TRUE(validate_coefficient(c).passed()) << fam;
  }
}

TEST(Coefficients, ValidatorCatchesAsymmetry) {
  const PeriodicCoefficient c(
      1, [](const Point& x, const Point&) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x[0]); }, 0.5, 1.5);
  const auto rep = validate_coefficient(c);
  EXPECT_FALSE(rep.passed());
  EXPECT_FALSE(rep.find("symmetry")->passed);
  EXPECT_TRUE(rep.find("bounds")->passed);
  EXPECT_TRUE(rep.find("periodicity")->passed);
}

TEST(Coefficients, ValidatorCatchesBadBoundsAndPeriod) {
  const PeriodicCoefficient wide(1, [](const Point&, const Point&) { return 3.0; }, 1.0, 2.0);
  EXPECT_FALSE(validate_coefficient(wide).find("bounds")->passed);
  const PeriodicCoefficient aperiodic(
      1, [](const Point& x, const Point& y) { return 2.0 + std::sin(x[0] + y[0]); }, 1.0, 3.0);
  EXPECT_FALSE(validate_coefficient(aperiodic).find("periodicity")->passed);
}

TEST(Coefficients, RejectsBadParameters) {
  EXPECT_THROW(make_builtin_coefficient("separable-trig", 1, {1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(make_builtin_coefficient("constant", 1, {0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(make_builtin_coefficient("unknown", 1), InvalidArgument);
}

TEST(Coefficients, ScalingScalesMeanAndBounds) {
  const auto c = make_builtin_coefficient("separable-trig", 1, {1.0, 0.5}).scaled(3.0);
  EXPECT_NEAR(mean_lambda(c), 3.0, 1e-13);
  EXPECT_NEAR(c.gamma1(), 0.75, 1e-15);
  EXPECT_NEAR(c.gamma2(), 6.75, 1e-14);
}
