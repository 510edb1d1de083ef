#pragma once

#include <functional>

namespace homog {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  bool converged = true;
};

using ScalarFunction = std::function<double(double)>;

/// Fixed 31-point Gauss-Kronrod rule applied on 2^k equal subpanels with k
/// doubled until successive estimates agree to abs_tol. Equal subpanels
/// (instead of local bisection) keep the work bounded for integrands that
/// oscillate on a scale much smaller than the panel.
QuadratureResult composite_gauss_kronrod(const ScalarFunction& f, double a, double b, double abs_tol,
                                         int max_level = 20);

struct TailOptions {
  double rel_tol = 1e-12;
  int max_level = 20;    // composite refinement cap per octave panel
  int max_octaves = 48;  // panels [a 2^j, a 2^{j+1}]
};

/// Integral of f over [a, inf) for f(r) ~ C(r) L(r) r^{-1-alpha}.
///
/// Geometric octave panels are integrated until the tail beyond the last
/// panel, extrapolated as c * int_R^inf L r^{-1-alpha} with c the
/// L r^{-1-alpha}-weighted mean of f on the last panel, changes by less than
/// the tolerance between consecutive panels. `slowly_varying` may be null
/// (L = 1, analytic weights).
QuadratureResult integrate_power_tail(const ScalarFunction& f, double a, double alpha,
                                      const ScalarFunction* slowly_varying,
                                      const TailOptions& options = {});

/// int_R^inf L(r) r^{-1-alpha} dr (L = 1 when null).
double power_tail_weight(double R, double alpha, const ScalarFunction* slowly_varying);

/// int_a^b L(r) r^{-1-alpha} dr (L = 1 when null).
double power_panel_weight(double a, double b, double alpha, const ScalarFunction* slowly_varying);

/// int_a^inf sin(omega r + phase) r^{-beta} dr for beta > 0, a > 0,
/// omega > 0. Half-period panels up to a large zero X of the integrand, then
/// the asymptotic series obtained by repeated integration by parts, whose
/// truncation error is returned as the error estimate.
QuadratureResult oscillatory_power_integral(double omega, double phase, double a, double beta);

}  // namespace homog
