#include "homog/symbol.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>

#include "homog/error.hpp"
#include "homog/quadrature.hpp"
#include "homog/stencil.hpp"

namespace homog {
namespace {

constexpr double kPi = std::numbers::pi;

boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule;
}

/// int_0^inf (1 - cos(omega r)) r^{-1-alpha} dr, directly in r.
double radial_symbol(double omega, double alpha) {
  omega = std::abs(omega);
  if (!(omega > 1e-300)) return 0.0;
  const double X = 2.0 * kPi / omega;
  const auto near = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double s = std::sin(0.5 * omega * r) / r;
    return 2.0 * s * s * std::pow(r, 1.0 - alpha);
  };
  const double inner = tanh_sinh_rule().integrate(near, 0.0, X, 1e-14);
  const double outer = std::pow(X, -alpha) / alpha - oscillatory_power_integral(omega, 0.5 * kPi, X, 1.0 + alpha).value;
  return inner + outer;
}

struct FftBuffer {
  fftw_complex* data = nullptr;
  explicit FftBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw Error("fftw_alloc_complex failed");
  }
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void transform(const TorusGrid& g, fftw_complex* data, int sign) {
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = g.dim() == 1 ? fftw_plan_dft_1d(g.points(), data, data, sign, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(g.points(), g.points(), data, data, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("FFTW plan creation failed");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

/// Applies the real even multiplier mult(xi) to u.
DiscreteField fourier_multiply(const DiscreteField& u, const std::function<double(const Point&)>& mult,
                               double imag_tol) {
  const TorusGrid& g = u.grid();
  const std::size_t size = g.size();
  FftBuffer buf(size);
  for (std::size_t i = 0; i < size; ++i) {
    buf.data[i][0] = u[i];
    buf.data[i][1] = 0.0;
  }
  transform(g, buf.data, FFTW_FORWARD);
  const int n = g.points();
  const double w = 2.0 * kPi / g.side();
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto c = g.coords(i);
    const int kx = c[0] < n / 2 ? c[0] : c[0] - n;
    const int ky = c[1] < n / 2 ? c[1] : c[1] - n;
    const Point xi{w * kx, g.dim() == 2 ? w * ky : 0.0};
    const double f = mult(xi) * inv;
    buf.data[i][0] *= f;
    buf.data[i][1] *= f;
  }
  transform(g, buf.data, FFTW_BACKWARD);
  DiscreteField out(g);
  double imag2 = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    out[i] = buf.data[i][0];
    imag2 += buf.data[i][1] * buf.data[i][1];
  }
  const double imag = std::sqrt(g.cell_volume() * imag2);
  if (imag > imag_tol) {
    throw Error("Fourier multiplier left an imaginary residue " + std::to_string(imag));
  }
  return out;
}

}  // namespace

double c_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  // int_0^1 (1 - cos t) t^{-1-alpha} dt = sum_k (-1)^{k+1} / ((2k)! (2k - alpha)).
  double series = 0.0;
  double fact = 1.0;
  for (int k = 1; k < 30; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    const double term = (k % 2 == 1 ? 1.0 : -1.0) / (fact * (2.0 * k - alpha));
    series += term;
    if (std::abs(term) < 1e-18 * std::abs(series)) break;
  }
  const QuadratureResult osc = oscillatory_power_integral(1.0, 0.5 * kPi, 1.0, 1.0 + alpha);
  return series + 1.0 / alpha - osc.value;
}

double brute_force_symbol(const Point& xi, double alpha, double lambda_bar, const AngularDensity& k) {
  const double r = norm(xi);
  if (r == 0.0) return 0.0;
  if (k.dim() == 1) return lambda_bar * (k({1.0, 0.0}) + k({-1.0, 0.0})) * radial_symbol(xi[0], alpha);
  const double phi = std::atan2(xi[1], xi[0]);
  const auto f = [&](double t) {
    const Point s = unit_vector(t);
    return k(s) * radial_symbol(xi[0] * s[0] + xi[1] * s[1], alpha);
  };
  // Split where s is orthogonal to xi.
  const double a = phi - 0.5 * kPi;
  const double b = phi + 0.5 * kPi;
  const double c = phi + 1.5 * kPi;
  auto& rule = tanh_sinh_rule();
  return lambda_bar * (rule.integrate(f, a, b, 1e-13) + rule.integrate(f, b, c, 1e-13));
}

EffectiveSymbol init_symbol(double alpha, double lambda_bar, const AngularDensity& k, int n_angular, int checks) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  if (!(lambda_bar > 0.0)) throw InvalidArgument("lambda_bar must be positive");
  const int d = k.dim();
  if (d == 2 && n_angular < 16) throw InvalidArgument("n_angular must be >= 16 in two dimensions");
  EffectiveSymbol sym;
  sym.dim_ = d;
  sym.alpha_ = alpha;
  sym.lambda_bar_ = lambda_bar;
  sym.c_alpha_ = c_alpha(alpha);
  if (alpha <= 0.1 || alpha >= 1.9) {
    sym.warnings_.push_back("alpha near an endpoint of (0, 2): quadrature constants degrade");
    sym.check_tol_ = 1e-4;
  }
  if (d == 1) {
    sym.table_ = {sym.c_alpha_ * (k({1.0, 0.0}) + k({-1.0, 0.0}))};
  } else {
    sym.table_.resize(static_cast<std::size_t>(n_angular));
    auto& rule = tanh_sinh_rule();
    for (int j = 0; j < n_angular; ++j) {
      const double phi = kPi * j / n_angular;
      const auto f = [&](double t) {
        const double c = std::cos(t);
        return (k(unit_vector(phi + t)) + k(unit_vector(phi + t + kPi))) * (c > 0.0 ? std::pow(c, alpha) : 0.0);
      };
      sym.table_[static_cast<std::size_t>(j)] = sym.c_alpha_ * rule.integrate(f, -0.5 * kPi, 0.5 * kPi, 1e-14);
    }
  }
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> mag(0.5, 20.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  for (int i = 0; i < checks; ++i) {
    const double r = mag(rng);
    const Point xi = d == 1 ? Point{i % 2 == 0 ? r : -r, 0.0} : r * unit_vector(ang(rng));
    SymbolCheck c;
    c.xi = xi;
    c.symbol = sym(xi);
    c.brute_force = brute_force_symbol(xi, alpha, lambda_bar, k);
    c.rel_diff = std::abs(c.symbol - c.brute_force) / std::abs(c.brute_force);
    sym.checks_.push_back(c);
    if (!(c.rel_diff <= sym.check_tol_)) {
      throw QuadratureError("effective symbol cross-check failed at |xi| = " + std::to_string(r), c.rel_diff);
    }
  }
  return sym;
}

double EffectiveSymbol::angular_factor(const Point& unit) const {
  if (dim_ == 1) return table_.front();
  double phi = std::atan2(unit[1], unit[0]);
  if (phi < 0.0) phi += kPi;
  if (phi >= kPi) phi -= kPi;
  const auto n = table_.size();
  const double t = phi / kPi * static_cast<double>(n);
  const auto j = std::min(static_cast<std::size_t>(t), n - 1);
  const double f = t - static_cast<double>(j);
  return (1.0 - f) * table_[j] + f * table_[(j + 1) % n];
}

double EffectiveSymbol::operator()(const Point& xi) const {
  const double r = norm(xi);
  if (r == 0.0) return 0.0;
  return lambda_bar_ * std::pow(r, alpha_) * angular_factor((1.0 / r) * xi);
}

DiscreteField solve_effective(const TorusGrid& grid, double m, const DiscreteField& f, const EffectiveSymbol& sym) {
  if (!(m > 0.0)) throw InvalidArgument("m must be positive");
  require_same_grid(grid, f.grid(), "solve_effective");
  if (grid.dim() != sym.dim()) throw InvalidArgument("symbol and grid dimensions differ");
  const double fn = f.norm();
  if (fn == 0.0) return DiscreteField(grid);
  return fourier_multiply(
      f,
      [&](const Point& xi) {
        const double den = m + sym(xi);
        if (!(den > 0.0)) throw Error("m + sigma(xi) is not positive");
        return 1.0 / den;
      },
      1e-12 * fn);
}

DiscreteField apply_effective_symbol(const DiscreteField& u, double m, const EffectiveSymbol& sym) {
  const double scale = u.norm();
  if (scale == 0.0) return DiscreteField(u.grid());
  double top = m;
  const double kmax = kPi * u.grid().points() / u.grid().side();
  top += sym(Point{kmax, u.grid().dim() == 2 ? kmax : 0.0});
  return fourier_multiply(u, [&](const Point& xi) { return m + sym(xi); }, 1e-12 * top * scale);
}

DiscreteField apply_effective_quadrature(const DiscreteField& u, const EffectiveSymbol& sym, const AngularDensity& k,
                                         double pv_radius, int image_radius) {
  const TorusGrid& g = u.grid();
  const int d = g.dim();
  const double h = g.spacing();
  const double T = g.side();
  const int n = g.points();
  if (!(pv_radius >= 2.0 * h)) throw InvalidArgument("pv_radius must be >= 2h");
  const double alpha = sym.alpha();
  const double lb = sym.lambda_bar();
  const double e = d + alpha;
  const auto K = [&](const Point& y) {
    const double r = norm(y);
    return lb * k((1.0 / r) * y) * std::pow(r, -e);
  };
  const int R = image_radius;

  // Offsets with nonnegative first nonzero component; each stands for a pair.
  struct Pair {
    int ox;
    int oy;
    double w;
  };
  std::vector<Pair> pairs;
  const int half = n / 2;
  for (int oy = (d == 2 ? -half + 1 : 0); oy <= (d == 2 ? half - 1 : 0); ++oy) {
    for (int ox = -half + 1; ox <= half - 1; ++ox) {
      if (ox < 0 || (ox == 0 && oy <= 0)) continue;
      const Point z{ox * h, oy * h};
      const double r = norm(z);
      double w = 0.0;
      if (r < pv_radius) {
        // Second moment of the kernel over the cell, divided by |z|^2.
        double m2 = 0.0;
        if (d == 1) {
          const double a = r - 0.5 * h;
          const double b = r + 0.5 * h;
          m2 = lb * 0.5 * (k({1.0, 0.0}) + k({-1.0, 0.0})) * (std::pow(b, 2.0 - alpha) - std::pow(a, 2.0 - alpha)) /
               (2.0 - alpha);
        } else {
          constexpr int s = 8;
          for (int b = 0; b < s; ++b) {
            for (int a = 0; a < s; ++a) {
              const Point y{z[0] + h * ((a + 0.5) / s - 0.5), z[1] + h * ((b + 0.5) / s - 0.5)};
              m2 += K(y) * (y[0] * y[0] + y[1] * y[1]);
            }
          }
          m2 *= h * h / (s * s);
        }
        w = m2 / (r * r);
      } else {
        w = K(z) * g.cell_volume();
      }
      double images = 0.0;
      for (int ny = (d == 2 ? -R : 0); ny <= (d == 2 ? R : 0); ++ny) {
        for (int nx = -R; nx <= R; ++nx) {
          if (nx == 0 && ny == 0) continue;
          images += K({z[0] + T * nx, z[1] + T * ny});
        }
      }
      w += g.cell_volume() * (images + lb * image_tail_sum(d, T, alpha, R, z[0], k));
      pairs.push_back({ox, oy, w});
    }
  }
  // Cell around the origin: 1/2 sum_ab H_ab int_cell K y_a y_b.
  double mxx = 0.0;
  double myy = 0.0;
  double mxy = 0.0;
  if (d == 1) {
    mxx = lb * 0.5 * (k({1.0, 0.0}) + k({-1.0, 0.0})) * 2.0 * std::pow(0.5 * h, 2.0 - alpha) / (2.0 - alpha);
  } else {
    constexpr int kAngles = 512;
    for (int i = 0; i < kAngles; ++i) {
      const double t = 2.0 * kPi * (i + 0.5) / kAngles;
      const double c = std::cos(t);
      const double s = std::sin(t);
      const double rho = 0.5 * h / std::max(std::abs(c), std::abs(s));
      const double rad = lb * k({c, s}) * std::pow(rho, 2.0 - alpha) / (2.0 - alpha);
      mxx += rad * c * c;
      myy += rad * s * s;
      mxy += rad * c * s;
    }
    mxx *= 2.0 * kPi / kAngles;
    myy *= 2.0 * kPi / kAngles;
    mxy *= 2.0 * kPi / kAngles;
  }
  // Offsets on the Nyquist edge are left out.
  DiscreteField out(g);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    const double ui = u[i];
    const auto at = [&](int dx, int dy) { return u[g.index(c[0] + dx, c[1] + dy)]; };
    double acc = 0.0;
    for (const Pair& p : pairs) acc += p.w * (at(p.ox, p.oy) + at(-p.ox, -p.oy) - 2.0 * ui);
    const double hxx = (at(1, 0) - 2.0 * ui + at(-1, 0)) / (h * h);
    acc += 0.5 * mxx * hxx;
    if (d == 2) {
      const double hyy = (at(0, 1) - 2.0 * ui + at(0, -1)) / (h * h);
      const double hxy = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      acc += 0.5 * myy * hyy + mxy * hxy;
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace homog
