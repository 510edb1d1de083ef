#pragma once

#include <string>
#include <vector>

#include "homog/grid.hpp"
#include "homog/kernels.hpp"

namespace homog {

/// c_alpha = int_0^inf (1 - cos t) t^{-1-alpha} dt: exact series on [0, 1],
/// analytic power tail minus an oscillatory remainder on [1, inf).
double c_alpha(double alpha);

struct SymbolCheck {
  Point xi;
  double symbol = 0.0;
  double brute_force = 0.0;
  double rel_diff = 0.0;
};

/// sigma(xi) = lambda_bar |xi|^alpha A(xi/|xi|) with
/// A(e) = c_alpha int_S k(s) |s.e|^alpha ds.
class EffectiveSymbol {
 public:
  double operator()(const Point& xi) const;

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double lambda_bar() const { return lambda_bar_; }
  double c() const { return c_alpha_; }
  /// A at a unit direction (table interpolation in two dimensions).
  double angular_factor(const Point& unit) const;
  const std::vector<double>& table() const { return table_; }
  const std::vector<SymbolCheck>& cross_checks() const { return checks_; }
  double cross_check_tolerance() const { return check_tol_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend EffectiveSymbol init_symbol(double, double, const AngularDensity&, int, int);
  int dim_ = 1;
  double alpha_ = 1.0;
  double lambda_bar_ = 1.0;
  double c_alpha_ = 0.0;
  std::vector<double> table_;  // A at phi_j = pi j / n, j = 0..n-1 (period pi); one entry in d = 1
  std::vector<SymbolCheck> checks_;
  double check_tol_ = 1e-6;
  std::vector<std::string> warnings_;
};

/// Throws QuadratureError when the brute-force cross-check at `checks`
/// seeded frequencies misses by more than 1e-6 (1e-4 for alpha <= 0.1 or
/// alpha >= 1.9).
EffectiveSymbol init_symbol(double alpha, double lambda_bar, const AngularDensity& k, int n_angular = 2048,
                            int checks = 3);

/// lambda_bar int (1 - cos xi.z) k(z/|z|) |z|^{-d-alpha} dz with the radial
/// integral done numerically along every direction.
double brute_force_symbol(const Point& xi, double alpha, double lambda_bar, const AngularDensity& k);

/// (m - L0) u = f by the Fourier multiplier 1/(m + sigma).
DiscreteField solve_effective(const TorusGrid& grid, double m, const DiscreteField& f, const EffectiveSymbol& sym);

/// (m + sigma) applied to u by FFT; with m = 0 this is -L0 u.
DiscreteField apply_effective_symbol(const DiscreteField& u, double m, const EffectiveSymbol& sym);

/// L0 u by symmetric-pair quadrature in space. Offsets below pv_radius use
/// second differences with exact |y|^2 moments of the kernel over each cell.
DiscreteField apply_effective_quadrature(const DiscreteField& u, const EffectiveSymbol& sym, const AngularDensity& k,
                                         double pv_radius, int image_radius = 8);

}  // namespace homog
