#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "homog/error.hpp"
#include "homog/grid.hpp"

using namespace homog;

TEST(Grid, IndexRoundTripAndWrap) {
  const TorusGrid g(2, 4.0, 8);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    EXPECT_EQ(g.index(c[0], c[1]), i);
    EXPECT_EQ(g.index(c[0] + 8, c[1] - 8), i);
  }
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g.node(g.index(3, 5))[1], 2.5);
}

TEST(Grid, RejectsOddOrTinyGrids) {
  EXPECT_THROW(TorusGrid(1, 8.0, 3), InvalidArgument);
  EXPECT_THROW(TorusGrid(1, 8.0, 2), InvalidArgument);
  EXPECT_THROW(TorusGrid(3, 8.0, 8), InvalidArgument);
  EXPECT_NO_THROW(TorusGrid(1, 8.0, 24));
}

TEST(Grid, InnerProductAndNorm) {
  const TorusGrid g(1, 2.0 * M_PI, 64);
  const auto s = DiscreteField::from_function(g, [](const Point& x) { return std::sin(x[0]); });
  const auto c = DiscreteField::from_function(g, [](const Point& x) { return std::cos(x[0]); });
  EXPECT_NEAR(inner(s, c), 0.0, 1e-14);
  EXPECT_NEAR(s.norm() * s.norm(), M_PI, 1e-13);
  EXPECT_THROW(inner(s, DiscreteField(TorusGrid(1, 2.0 * M_PI, 32))), GridMismatch);
}

TEST(Grid, TranslationModulusOfConstantIsZero) {
  const TorusGrid g(2, 1.0, 16);
  const auto u = DiscreteField::from_function(g, [](const Point&) { return 3.0; });
  EXPECT_EQ(translation_modulus(u, {3, 5}), 0.0);
  const auto v = DiscreteField::from_function(g, [](const Point& x) { return std::sin(2.0 * M_PI * x[0]); });
  // Shift by half a period: |2 sin|^2 averaged gives 2 over the unit square.
  EXPECT_NEAR(translation_modulus(v, {8, 0}), 2.0, 1e-13);
}

TEST(Grid, RestrictionPicksSubgrid) {
  const TorusGrid fine(1, 8.0, 64);
  const TorusGrid coarse(1, 8.0, 16);
  const auto u = DiscreteField::from_function(fine, [](const Point& x) { return x[0] * x[0]; });
  const auto r = restrict_to(u, coarse);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], coarse.node(i)[0] * coarse.node(i)[0]);
  EXPECT_THROW(restrict_to(u, TorusGrid(1, 8.0, 24)), GridMismatch);
}

TEST(Grid, BinaryRoundTripIsBitExact) {
  const TorusGrid g(2, 4.0, 16);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  DiscreteField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = n(rng);
  const auto path = (std::filesystem::temp_directory_path() / "homog_grid_rt.bin").string();
  write_field_binary(path, u, 0.25);
  const LoadedField back = read_field_binary(path);
  EXPECT_EQ(back.eps, 0.25);
  EXPECT_TRUE(back.field.grid() == g);
  EXPECT_EQ(back.field.values(), u.values());
  EXPECT_EQ(std::filesystem::file_size(path), 4u + 4u + 8u + 8u + 8u * g.size());
  std::remove(path.c_str());
}

TEST(Grid, ReadingTruncatedFileFails) {
  const auto path = (std::filesystem::temp_directory_path() / "homog_grid_bad.bin").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "xx";
  }
  EXPECT_THROW(read_field_binary(path), Error);
  std::remove(path.c_str());
}
