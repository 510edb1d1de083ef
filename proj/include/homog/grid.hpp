#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "homog/geometry.hpp"

namespace homog {

/// Uniform periodic grid of side T with N points per axis, x_i = i h.
class TorusGrid {
 public:
  TorusGrid(int dim, double side, int points);

  int dim() const { return dim_; }
  double side() const { return side_; }
  int points() const { return n_; }
  double spacing() const { return side_ / n_; }
  double cell_volume() const { return dim_ == 1 ? spacing() : spacing() * spacing(); }
  /// N^d.
  std::size_t size() const { return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_; }

  /// Flat index i_x + N i_y.
  std::size_t index(int ix, int iy = 0) const;
  std::array<int, 2> coords(std::size_t flat) const;
  Point node(std::size_t flat) const;

  bool operator==(const TorusGrid& other) const {
    return dim_ == other.dim_ && side_ == other.side_ && n_ == other.n_;
  }
  bool operator!=(const TorusGrid& other) const { return !(*this == other); }

 private:
  int dim_;
  double side_;
  int n_;
};

/// Real samples on a TorusGrid.
class DiscreteField {
 public:
  explicit DiscreteField(const TorusGrid& grid);
  DiscreteField(const TorusGrid& grid, std::vector<double> values);

  static DiscreteField from_function(const TorusGrid& grid, const std::function<double(const Point&)>& f);

  const TorusGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// (h^d sum u_i^2)^{1/2}
  double norm() const;
  double max_abs() const;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// h^d sum u_i v_i with a fixed summation tree.
double inner(const DiscreteField& u, const DiscreteField& v);

/// u - v.
DiscreteField difference(const DiscreteField& u, const DiscreteField& v);

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what);

/// h^d sum_i (u_{i+shift} - u_i)^2.
double translation_modulus(const DiscreteField& u, std::array<int, 2> shift);

/// Samples of a field on a grid whose spacing is an integer multiple of the
/// field's spacing.
DiscreteField restrict_to(const DiscreteField& fine, const TorusGrid& coarse);

/// Binary layout (little endian): int32 d, int32 N, float64 T, float64 eps,
/// then N^d float64 values in flat order.
void write_field_binary(const std::string& path, const DiscreteField& u, double eps);

struct LoadedField {
  DiscreteField field;
  double eps;
};
LoadedField read_field_binary(const std::string& path);

/// Columns x (and y), u.
void write_field_csv(const std::string& path, const DiscreteField& u);

}  // namespace homog
