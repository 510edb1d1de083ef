#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "homog/error.hpp"
#include "homog/solvers.hpp"

using namespace homog;

namespace {

// Eigenvalue of the circulant L on the k-th harmonic, from the offset table:
// h^d sum_o q_o (cos(2 pi k.o / N) - 1).
double discrete_symbol(const EpsilonStencil& st, std::array<int, 2> k) {
  const TorusGrid& g = st.grid();
  const int n = g.points();
  double s = 0.0;
  for (std::size_t o = 0; o < g.size(); ++o) {
    const auto c = g.coords(o);
    const double phase = 2.0 * std::numbers::pi * (k[0] * c[0] + k[1] * c[1]) / n;
    s += st.offset_weights()[o] * (std::cos(phase) - 1.0);
  }
  return g.cell_volume() * s;
}

EpsilonStencil stencil(int d, double T, double eps, int rho, const char* coeff, double alpha = 1.5) {
  const TorusGrid g(d, T, static_cast<int>(std::lround(rho * T / eps)));
  return assemble_stencil(g, make_builtin_kernel(d == 2 ? "anisotropic-pareto" : "pareto", d, alpha, {0.5, 0.5, 0.0}),
                          make_builtin_coefficient(coeff, d, {1.0, 0.5}), eps);
}

}  // namespace

TEST(Solvers, ConstantCoefficientMatchesDiscreteSymbol) {
  for (int d : {1, 2}) {
    const EpsilonStencil st = d == 1 ? stencil(1, 8.0, 0.5, 8, "constant") : stencil(2, 2.0, 0.5, 4, "constant");
    const TorusGrid& g = st.grid();
    const double w = 2.0 * std::numbers::pi / g.side();
    for (std::array<int, 2> k : {std::array<int, 2>{1, 0}, std::array<int, 2>{3, d == 2 ? 2 : 0}}) {
      const auto f = DiscreteField::from_function(g, [&](const Point& x) { return std::cos(w * (k[0] * x[0] + k[1] * x[1])); });
      const double m = 1.0;
      SolveOptions o;
      o.tol = 1e-12;
      const auto r = solve_epsilon(st, m, f, o);
      ASSERT_TRUE(r.converged);
      const double factor = 1.0 / (m - discrete_symbol(st, k));
      DiscreteField expect(g);
      for (std::size_t i = 0; i < g.size(); ++i) expect[i] = factor * f[i];
      EXPECT_LT(difference(r.u, expect).norm() / expect.norm(), 1e-10);
    }
  }
}

TEST(Solvers, AprioriBoundsAndGreenIdentity) {
  const EpsilonStencil st = stencil(1, 8.0, 0.25, 8, "separable-trig");
  const auto f = DiscreteField::from_function(st.grid(), [](const Point& x) { return std::exp(-2.0 * (x[0] - 4) * (x[0] - 4)); });
  for (double m : {0.5, 1.0, 4.0}) {
    const auto r = solve_epsilon(st, m, f, {1e-10, 2000, false});
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.c1_ratio, 1.0 + 1e-6);
    EXPECT_LE(r.c2_ratio, 1.0 + 1e-6);
    EXPECT_TRUE(r.c1_ok);
    EXPECT_TRUE(r.c2_ok);
    EXPECT_TRUE(r.energy_monotone);
    EXPECT_LT(r.green_defect, 1e-8);
  }
}

TEST(Solvers, JacobiGivesSameSolution) {
  const EpsilonStencil st = stencil(1, 8.0, 0.5, 8, "separable-trig");
  const auto f = DiscreteField::from_function(st.grid(), [](const Point& x) { return std::sin(M_PI * x[0] / 4.0); });
  const auto a = solve_epsilon(st, 1.0, f, {1e-11, 2000, false});
  const auto b = solve_epsilon(st, 1.0, f, {1e-11, 2000, true});
  EXPECT_LT(difference(a.u, b.u).norm() / a.u.norm(), 1e-9);
}

TEST(Solvers, ZeroRhsGivesZeroField) {
  const EpsilonStencil st = stencil(1, 8.0, 0.5, 8, "constant");
  const auto r = solve_epsilon(st, 1.0, DiscreteField(st.grid()));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.u.max_abs(), 0.0);
}

TEST(Solvers, IterationCapReportsNonConvergence) {
  const EpsilonStencil st = stencil(1, 8.0, 0.25, 8, "separable-trig");
  const auto f = DiscreteField::from_function(st.grid(), [](const Point& x) { return std::exp(-(x[0] - 4) * (x[0] - 4)); });
  const auto r = solve_epsilon(st, 1.0, f, {1e-12, 2, false});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_GT(r.residual, 1e-12);
}

TEST(Solvers, RejectsBadInput) {
  const EpsilonStencil st = stencil(1, 8.0, 0.5, 8, "constant");
  const DiscreteField f(st.grid());
  EXPECT_THROW(solve_epsilon(st, 0.0, f), InvalidArgument);
  EXPECT_THROW(solve_epsilon(st, 1.0, f, {2.0, 10, false}), InvalidArgument);
  EXPECT_THROW(solve_epsilon(st, 1.0, DiscreteField(TorusGrid(1, 8.0, 32))), GridMismatch);
}
