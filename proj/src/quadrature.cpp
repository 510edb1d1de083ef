#include "homog/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "homog/error.hpp"

namespace homog {
namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;

struct LevelSum {
  double value = 0.0;
  double rule_error = 0.0;
};

LevelSum level_sum(const ScalarFunction& f, double a, double b, long panels) {
  LevelSum s;
  const double w = (b - a) / static_cast<double>(panels);
  for (long i = 0; i < panels; ++i) {
    const double lo = a + w * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : lo + w;
    double err = 0.0;
    s.value += Rule::integrate(f, lo, hi, 0, 0.0, &err);
    s.rule_error += err;
  }
  return s;
}

}  // namespace

QuadratureResult composite_gauss_kronrod(const ScalarFunction& f, double a, double b, double abs_tol,
                                         int max_level) {
  if (!(b > a)) return {0.0, 0.0, true};
  LevelSum prev = level_sum(f, a, b, 1);
  double prev_diff = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_level; ++k) {
    const LevelSum cur = level_sum(f, a, b, 1L << k);
    const double diff = std::abs(cur.value - prev.value);
    if (diff <= abs_tol && (cur.rule_error <= abs_tol || prev_diff <= abs_tol)) {
      return {cur.value, std::max(diff, std::min(cur.rule_error, abs_tol)), true};
    }
    prev_diff = diff;
    prev = cur;
  }
  return {prev.value, prev_diff, false};
}

double power_panel_weight(double a, double b, double alpha, const ScalarFunction* slowly_varying) {
  if (slowly_varying == nullptr) return (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha;
  const ScalarFunction& L = *slowly_varying;
  const auto g = [&](double r) { return L(r) * std::pow(r, -1.0 - alpha); };
  const double scale = (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha * std::abs(L(a));
  return composite_gauss_kronrod(g, a, b, 1e-15 * scale, 12).value;
}

double power_tail_weight(double R, double alpha, const ScalarFunction* slowly_varying) {
  if (slowly_varying == nullptr) return std::pow(R, -alpha) / alpha;
  const ScalarFunction& L = *slowly_varying;
  // r = R e^s maps the tail to an exponentially decaying integrand.
  boost::math::quadrature::exp_sinh<double> integrator;
  const auto g = [&](double s) {
    if (s > 700.0 / alpha) return 0.0;
    return L(R * std::exp(s)) * std::exp(-alpha * s);
  };
  return std::pow(R, -alpha) * integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity());
}

QuadratureResult integrate_power_tail(const ScalarFunction& f, double a, double alpha,
                                      const ScalarFunction* slowly_varying, const TailOptions& options) {
  if (!(a > 0.0)) throw InvalidArgument("power tail integral needs a positive lower limit");
  // Scale for the absolute tolerance: crude one-rule estimate of the first
  // octave plus its power-law continuation.
  double coarse_err = 0.0;
  const double first = Rule::integrate(f, a, 2.0 * a, 0, 0.0, &coarse_err);
  const double w0 = power_panel_weight(a, 2.0 * a, alpha, slowly_varying);
  const double scale = std::abs(first) + std::abs(first / w0) * power_tail_weight(2.0 * a, alpha, slowly_varying);
  const double abs_tol = std::max(options.rel_tol * scale, std::numeric_limits<double>::min());

  QuadratureResult out;
  double prev_c = std::numeric_limits<double>::quiet_NaN();
  double r = a;
  for (int j = 0; j < options.max_octaves; ++j) {
    const QuadratureResult panel = composite_gauss_kronrod(f, r, 2.0 * r, abs_tol / 8.0, options.max_level);
    out.value += panel.value;
    out.error += panel.error;
    out.converged = out.converged && panel.converged;
    const double w = power_panel_weight(r, 2.0 * r, alpha, slowly_varying);
    const double c = panel.value / w;
    const double tail_w = power_tail_weight(2.0 * r, alpha, slowly_varying);
    if (j >= 1) {
      const double spread = std::abs(c - prev_c) * tail_w;
      if (spread <= abs_tol / 2.0) {
        out.value += c * tail_w;
        out.error += spread;
        return out;
      }
    }
    prev_c = c;
    r *= 2.0;
  }
  // Octave budget exhausted: extrapolate anyway and report the spread.
  const double tail_w = power_tail_weight(r, alpha, slowly_varying);
  out.value += prev_c * tail_w;
  out.error += std::abs(prev_c) * tail_w;
  out.converged = false;
  return out;
}

QuadratureResult oscillatory_power_integral(double omega, double phase, double a, double beta) {
  if (!(omega > 0.0) || !(a > 0.0) || !(beta > 0.0)) {
    throw InvalidArgument("oscillatory_power_integral needs omega, a, beta > 0");
  }
  const double pi = std::numbers::pi;
  const auto f = [&](double r) { return std::sin(omega * r + phase) * std::pow(r, -beta); };
  // Zeros of sin(omega r + phase) are r_k = (k pi - phase) / omega.
  auto zero = [&](double k) { return (k * pi - phase) / omega; };
  double k = std::floor((omega * a + phase) / pi) + 1.0;
  const double x_target = std::max(a, 2000.0 / omega);

  QuadratureResult out;
  double lo = a;
  while (true) {
    const double hi = zero(k);
    double err = 0.0;
    out.value += Rule::integrate(f, lo, hi, 0, 0.0, &err);
    out.error += err;
    lo = hi;
    k += 1.0;
    if (lo >= x_target) break;
  }
  // Asymptotic series at X = lo, where sin(omega X + phase) = 0.
  const double X = lo;
  const double c0 = std::cos(omega * X + phase);
  const double wx = omega * X;
  double term = c0 * std::pow(X, -beta) / omega;
  double series = 0.0;
  double last = std::abs(term);
  for (int j = 0; j < 12; ++j) {
    series += term;
    const double g = beta + 2.0 * j;
    term *= -(g * (g + 1.0)) / (wx * wx);
    last = std::abs(term);
    if (last < 1e-18 * std::abs(series)) break;
  }
  out.value += series;
  out.error += last;
  return out;
}

}  // namespace homog
