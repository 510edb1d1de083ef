#include "homog/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "homog/error.hpp"
#include "homog/reduction.hpp"

namespace homog {

static_assert(std::endian::native == std::endian::little, "field payloads are written in native little-endian order");

TorusGrid::TorusGrid(int dim, double side, int points) : dim_(dim), side_(side), n_(points) {
  check_dimension(dim);
  if (!(side > 0.0) || !std::isfinite(side)) throw InvalidArgument("torus side T must be positive");
  if (points < 4 || points % 2 != 0) throw InvalidArgument("points per axis must be even and >= 4");
}

std::size_t TorusGrid::index(int ix, int iy) const {
  const auto wrap = [this](int i) { return static_cast<std::size_t>(((i % n_) + n_) % n_); };
  return dim_ == 1 ? wrap(ix) : wrap(ix) + static_cast<std::size_t>(n_) * wrap(iy);
}

std::array<int, 2> TorusGrid::coords(std::size_t flat) const {
  const auto n = static_cast<std::size_t>(n_);
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat % n), static_cast<int>(flat / n)};
}

Point TorusGrid::node(std::size_t flat) const {
  const auto c = coords(flat);
  const double h = spacing();
  return {c[0] * h, dim_ == 2 ? c[1] * h : 0.0};
}

DiscreteField::DiscreteField(const TorusGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

DiscreteField::DiscreteField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size()) throw GridMismatch("field value count differs from N^d");
}

DiscreteField DiscreteField::from_function(const TorusGrid& grid, const std::function<double(const Point&)>& f) {
  DiscreteField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(grid.node(i));
  return u;
}

double DiscreteField::norm() const { return std::sqrt(inner(*this, *this)); }

double DiscreteField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (a != b) throw GridMismatch(std::string(what) + ": operands live on different grids");
}

double inner(const DiscreteField& u, const DiscreteField& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  return u.grid().cell_volume() * deterministic_dot(u.values(), v.values());
}

DiscreteField difference(const DiscreteField& u, const DiscreteField& v) {
  require_same_grid(u.grid(), v.grid(), "difference");
  DiscreteField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - v[i];
  return out;
}

double translation_modulus(const DiscreteField& u, std::array<int, 2> shift) {
  const TorusGrid& g = u.grid();
  std::vector<double> sq(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto c = g.coords(i);
    const double d = u[g.index(c[0] + shift[0], c[1] + shift[1])] - u[i];
    sq[i] = d * d;
  }
  return g.cell_volume() * deterministic_sum(sq);
}

DiscreteField restrict_to(const DiscreteField& fine, const TorusGrid& coarse) {
  const TorusGrid& g = fine.grid();
  if (g.dim() != coarse.dim() || g.side() != coarse.side() || g.points() % coarse.points() != 0) {
    throw GridMismatch("restrict_to: coarse grid is not a subgrid");
  }
  const int stride = g.points() / coarse.points();
  DiscreteField out(coarse);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = coarse.coords(i);
    out[i] = fine[g.index(c[0] * stride, c[1] * stride)];
  }
  return out;
}

void write_field_binary(const std::string& path, const DiscreteField& u, double eps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const std::int32_t d = u.grid().dim();
  const std::int32_t n = u.grid().points();
  const double T = u.grid().side();
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&T), sizeof T);
  out.write(reinterpret_cast<const char*>(&eps), sizeof eps);
  out.write(reinterpret_cast<const char*>(u.values().data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
  if (!out) throw Error("write to '" + path + "' failed");
}

LoadedField read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::int32_t d = 0;
  std::int32_t n = 0;
  double T = 0.0;
  double eps = 0.0;
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&T), sizeof T);
  in.read(reinterpret_cast<char*>(&eps), sizeof eps);
  if (!in) throw Error("'" + path + "': truncated header");
  TorusGrid grid(d, T, n);
  std::vector<double> values(grid.size());
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw Error("'" + path + "': truncated payload");
  return {DiscreteField(grid, std::move(values)), eps};
}

void write_field_csv(const std::string& path, const DiscreteField& u) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  const TorusGrid& g = u.grid();
  out << (g.dim() == 1 ? "x,u\n" : "x,y,u\n");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point x = g.node(i);
    out << x[0] << ',';
    if (g.dim() == 2) out << x[1] << ',';
    out << u[i] << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace homog
