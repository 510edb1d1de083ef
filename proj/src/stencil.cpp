#include "homog/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/error.hpp"
#include "homog/reduction.hpp"

namespace homog {
namespace {

int integer_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double k = std::round(r);
  if (!(k >= 1.0) || std::abs(r - k) > 1e-9 * k) {
    throw CommensurabilityError(std::string(what) + " must be a positive integer, got " + std::to_string(r));
  }
  return static_cast<int>(k);
}

/// Signed representative of an offset component in [-N/2, N/2).
int signed_offset(int o, int n) { return o < n / 2 ? o : o - n; }

Point offset_vector(const TorusGrid& g, std::size_t flat) {
  const auto c = g.coords(flat);
  const int n = g.points();
  const double h = g.spacing();
  return {signed_offset(c[0], n) * h, g.dim() == 2 ? signed_offset(c[1], n) * h : 0.0};
}

/// sum_j lam(c_i, c_j) q(j - i) (u_j - u_i) for one row, fixed order.
double row_apply(const EpsilonStencil& s, const std::vector<double>& u, std::size_t i) {
  const TorusGrid& g = s.grid();
  const int n = g.points();
  const auto& q = s.offset_weights();
  const auto& lam = s.lambda_table();
  const std::size_t pd = g.dim() == 1 ? static_cast<std::size_t>(s.period())
                                      : static_cast<std::size_t>(s.period()) * s.period();
  const double* lrow = lam.data() + static_cast<std::size_t>(s.node_class(i)) * pd;
  const double ui = u[i];
  double acc = 0.0;
  if (g.dim() == 1) {
    const int ii = static_cast<int>(i);
    for (int j = 0; j < n; ++j) {
      const int off = j >= ii ? j - ii : j - ii + n;
      acc += lrow[s.node_class(static_cast<std::size_t>(j))] * q[static_cast<std::size_t>(off)] * (u[static_cast<std::size_t>(j)] - ui);
    }
    return acc;
  }
  const auto c = g.coords(i);
  for (int jy = 0; jy < n; ++jy) {
    const int oy = jy >= c[1] ? jy - c[1] : jy - c[1] + n;
    const double* qrow = q.data() + static_cast<std::size_t>(oy) * n;
    const std::size_t base = static_cast<std::size_t>(jy) * n;
    for (int jx = 0; jx < n; ++jx) {
      const int ox = jx >= c[0] ? jx - c[0] : jx - c[0] + n;
      const std::size_t j = base + static_cast<std::size_t>(jx);
      acc += lrow[s.node_class(j)] * qrow[ox] * (u[j] - ui);
    }
  }
  return acc;
}

}  // namespace

double image_tail_sum(int dim, double side, double alpha, int image_radius, double z, const AngularDensity& angular) {
  const double R = (image_radius + 0.5) * side;
  if (dim == 1) {
    const double k = angular({1.0, 0.0});
    return k / (alpha * side) * (std::pow(R + z, -alpha) + std::pow(R - z, -alpha));
  }
  constexpr int kAngles = 256;
  double s = 0.0;
  for (int i = 0; i < kAngles; ++i) {
    const double t = 2.0 * std::numbers::pi * (i + 0.5) / kAngles;
    const double rho = R / std::max(std::abs(std::cos(t)), std::abs(std::sin(t)));
    s += angular.at_angle(t) * std::pow(rho, -alpha) / alpha;
  }
  return s * 2.0 * std::numbers::pi / kAngles / (side * side);
}

double EpsilonStencil::weight(std::size_t i, std::size_t j) const {
  const auto a = grid_.coords(i);
  const auto b = grid_.coords(j);
  const std::size_t pd = grid_.dim() == 1 ? static_cast<std::size_t>(period_) : static_cast<std::size_t>(period_) * period_;
  return lam_[static_cast<std::size_t>(cls_[i]) * pd + static_cast<std::size_t>(cls_[j])] * q(b[0] - a[0], b[1] - a[1]);
}

EpsilonStencil assemble_stencil(const TorusGrid& grid, const JumpKernel& kernel, const PeriodicCoefficient& coeff,
                                double eps, const StencilOptions& options) {
  if (kernel.dim() != grid.dim() || coeff.dim() != grid.dim()) {
    throw InvalidArgument("kernel, coefficient and grid dimensions differ");
  }
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("eps must lie in (0, 1]");
  if (options.image_radius < 1) throw InvalidArgument("image radius must be >= 1");
  if (options.subsamples < 1) throw InvalidArgument("subsamples must be >= 1");
  const int d = grid.dim();
  const double T = grid.side();
  const double h = grid.spacing();
  integer_ratio(T, eps, "T/eps");
  const int P = integer_ratio(eps, h, "eps/h");

  EpsilonStencil st(grid);
  st.eps_ = eps;
  st.period_ = P;
  st.image_radius_ = options.image_radius;

  const double alpha = kernel.alpha();
  const double factor = std::pow(eps, -(d + alpha)) /
                        (kernel.mode() == TailMode::SlowlyVarying ? kernel.slowly_varying(1.0 / eps) : 1.0);
  const auto rho = [&](const Point& y) { return factor * kernel((1.0 / eps) * y); };
  const double near = kernel.tail_radius() * eps + h * std::sqrt(static_cast<double>(d));
  const int s = options.subsamples;
  const auto cell_value = [&](const Point& y) {
    if (norm(y) > near) return rho(y);
    double acc = 0.0;
    for (int b = 0; b < (d == 2 ? s : 1); ++b) {
      for (int a = 0; a < s; ++a) {
        const Point sub{y[0] + h * ((a + 0.5) / s - 0.5), d == 2 ? y[1] + h * ((b + 0.5) / s - 0.5) : 0.0};
        acc += rho(sub);
      }
    }
    return acc / (d == 2 ? s * s : s);
  };

  const double sv_tail = kernel.mode() == TailMode::SlowlyVarying
                             ? kernel.slowly_varying((options.image_radius + 0.5) * T / eps) / kernel.slowly_varying(1.0 / eps)
                             : 1.0;
  const int R = options.image_radius;
  const std::size_t size = grid.size();
  std::vector<double> raw(size, 0.0);
  std::vector<double> corr(size, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k < size; ++k) {
    if (k == 0) continue;
    const Point z = offset_vector(grid, k);
    double acc = 0.0;
    for (int ny = (d == 2 ? -R : 0); ny <= (d == 2 ? R : 0); ++ny) {
      for (int nx = -R; nx <= R; ++nx) acc += cell_value({z[0] + T * nx, z[1] + T * ny});
    }
    if (options.tail_correction) {
      corr[k] = sv_tail * image_tail_sum(d, T, alpha, R, z[0], kernel.angular());
      acc += corr[k];
    }
    raw[k] = acc;
  }
  // Exact evenness: average each offset with its mirror.
  st.q_.assign(size, 0.0);
  for (std::size_t k = 1; k < size; ++k) {
    const auto c = grid.coords(k);
    const std::size_t mirror = grid.index(-c[0], -c[1]);
    st.q_[k] = 0.5 * (raw[k] + raw[mirror]);
  }
  st.tail_correction_ = *std::max_element(corr.begin(), corr.end());
  const double edge = d == 1 ? (R - 0.5) * T : (R - 1.0) * T;
  st.tail_bound_ = d == 1 ? kernel.beta2() * 2.0 / (alpha * T) * std::pow(edge, -alpha)
                          : kernel.beta2() * 2.0 * std::numbers::pi / (alpha * T * T) * std::pow(edge, -alpha);
  st.tail_bound_ *= sv_tail;
  const double e = d + alpha;
  st.tail_residual_ = options.tail_correction
                          ? st.tail_bound_ * e * (e + 1.0) / (24.0 * (R + 0.5) * (R + 0.5))
                          : st.tail_bound_;
  const double td = d == 1 ? T : T * T;
  if (st.tail_residual_ * td > options.tail_cap) {
    throw InvalidArgument("image tail estimate " + std::to_string(st.tail_residual_ * td) + " exceeds the cap " +
                          std::to_string(options.tail_cap) + "; increase the image radius");
  }

  const int pd = d == 1 ? P : P * P;
  const auto class_point = [&](int c) -> Point {
    return {static_cast<double>(c % P) / P, d == 2 ? static_cast<double>(c / P) / P : 0.0};
  };
  st.lam_.assign(static_cast<std::size_t>(pd) * pd, 0.0);
  for (int a = 0; a < pd; ++a) {
    for (int b = a; b < pd; ++b) {
      const Point xa = class_point(a);
      const Point xb = class_point(b);
      const double v = 0.5 * (coeff(xa, xb) + coeff(xb, xa));
      st.lam_[static_cast<std::size_t>(a) * pd + b] = v;
      st.lam_[static_cast<std::size_t>(b) * pd + a] = v;
    }
  }
  st.cls_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto c = grid.coords(i);
    st.cls_[i] = (c[0] % P) + (d == 2 ? P * (c[1] % P) : 0);
  }

  st.row_sums_.assign(size, 0.0);
  const double hd = grid.cell_volume();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < size; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < size; ++j) acc += st.weight(i, j);
    st.row_sums_[i] = hd * acc;
  }
  return st;
}

DiscreteField apply_operator(const EpsilonStencil& stencil, const DiscreteField& u) {
  require_same_grid(stencil.grid(), u.grid(), "apply_operator");
  DiscreteField v(u.grid());
  const double hd = u.grid().cell_volume();
  const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = hd * row_apply(stencil, u.values(), static_cast<std::size_t>(i));
  }
  return v;
}

DiscreteField apply_operator_serial(const EpsilonStencil& stencil, const DiscreteField& u) {
  require_same_grid(stencil.grid(), u.grid(), "apply_operator_serial");
  DiscreteField v(u.grid());
  const double hd = u.grid().cell_volume();
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = hd * row_apply(stencil, u.values(), i);
  return v;
}

double energy_form(const EpsilonStencil& stencil, const DiscreteField& u) {
  require_same_grid(stencil.grid(), u.grid(), "energy_form");
  const std::size_t size = u.size();
  std::vector<double> rows(size);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < size; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < size; ++j) {
      const double d = u[i] - u[j];
      acc += stencil.weight(i, j) * d * d;
    }
    rows[i] = acc;
  }
  const double hd = u.grid().cell_volume();
  return 0.5 * hd * hd * deterministic_sum(rows);
}

double fractional_energy_tail(const DiscreteField& u, double alpha, double cutoff, int image_radius) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  const TorusGrid& g = u.grid();
  const int d = g.dim();
  const double T = g.side();
  const int R = image_radius;
  const double e = d + alpha;
  const AngularDensity unit(d, [](const Point&) { return 1.0; }, 1.0, 1.0);
  const std::size_t size = g.size();
  std::vector<double> table(size, 0.0);
  for (std::size_t k = 0; k < size; ++k) {
    const Point z = offset_vector(g, k);
    double acc = 0.0;
    for (int ny = (d == 2 ? -R : 0); ny <= (d == 2 ? R : 0); ++ny) {
      for (int nx = -R; nx <= R; ++nx) {
        const double r = norm({z[0] + T * nx, z[1] + T * ny});
        if (r > cutoff) acc += std::pow(r, -e);
      }
    }
    table[k] = acc + image_tail_sum(d, T, alpha, R, z[0], unit);
  }
  std::vector<double> rows(size);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < size; ++i) {
    const auto c = g.coords(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const auto o = g.coords(k);
      const double diff = u[g.index(c[0] + o[0], c[1] + o[1])] - u[i];
      acc += table[k] * diff * diff;
    }
    rows[i] = acc;
  }
  const double hd = g.cell_volume();
  return hd * hd * deterministic_sum(rows);
}

}  // namespace homog
