#include "homog/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "homog/error.hpp"
#include "homog/reduction.hpp"

namespace homog {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::pair<Point, Point>> sample_pairs(int dim, const CoefficientBudget& budget) {
  std::vector<std::pair<Point, Point>> out;
  const int n = budget.samples_per_axis;
  const auto node = [n](int i) { return (i + 0.37) / n; };
  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.push_back({{node(i), 0.0}, {node(j), 0.0}});
    }
  } else {
    const int m = std::max(4, n / 4);
    const auto nd = [m](int i) { return (i + 0.37) / m; };
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int e = 0; e < m; ++e) out.push_back({{nd(a), nd(b)}, {nd(c), nd(e)}});
  }
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < budget.random_pairs; ++k) {
    Point x{u(rng), dim == 2 ? u(rng) : 0.0};
    Point y{u(rng), dim == 2 ? u(rng) : 0.0};
    out.push_back({x, y});
  }
  return out;
}

}  // namespace

PeriodicCoefficient::PeriodicCoefficient(int dim, Evaluator lambda, double gamma1, double gamma2,
                                         Description description)
    : dim_(dim), lambda_(std::move(lambda)), gamma1_(gamma1), gamma2_(gamma2), description_(std::move(description)) {
  check_dimension(dim);
  if (!lambda_) throw InvalidArgument("coefficient needs an evaluator");
  if (!(gamma1 > 0.0) || gamma2 < gamma1) throw InvalidArgument("coefficient bounds need 0 < gamma1 <= gamma2");
}

PeriodicCoefficient PeriodicCoefficient::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidArgument("coefficient scale factor must be positive");
  PeriodicCoefficient out = *this;
  out.scale_ *= factor;
  return out;
}

const std::vector<std::string>& builtin_coefficient_families() {
  static const std::vector<std::string> names{"constant", "separable-trig", "additive-trig"};
  return names;
}

PeriodicCoefficient make_builtin_coefficient(std::string_view family, int dim, const CoefficientParams& params) {
  check_dimension(dim);
  PeriodicCoefficient::Description desc;
  desc.family = std::string(family);
  if (family == "constant") {
    const double c = params.value;
    if (!(c > 0.0)) throw InvalidArgument("constant coefficient must be positive");
    desc.params["value"] = c;
    return {dim, [c](const Point&, const Point&) { return c; }, c, c, desc};
  }
  const double a = params.amplitude;
  if (!(std::abs(a) < 1.0)) throw InvalidArgument("coefficient amplitude must satisfy |a| < 1");
  desc.params["amplitude"] = a;
  if (family == "separable-trig") {
    const double lo = 1.0 - std::abs(a);
    const double hi = 1.0 + std::abs(a);
    return {dim,
            [a](const Point& x, const Point& y) {
              return (1.0 + a * std::sin(kTwoPi * x[0])) * (1.0 + a * std::sin(kTwoPi * y[0]));
            },
            lo * lo, hi * hi, desc};
  }
  if (family == "additive-trig") {
    return {dim, [a](const Point& x, const Point& y) { return 1.0 + a * std::sin(kTwoPi * (x[0] + y[0])); },
            1.0 - std::abs(a), 1.0 + std::abs(a), desc};
  }
  throw InvalidArgument("unknown coefficient family '" + std::string(family) + "'");
}

double mean_lambda(const PeriodicCoefficient& coeff, int n_quad) {
  if (n_quad < 2) throw InvalidArgument("mean_lambda needs n_quad >= 2");
  const int d = coeff.dim();
  const long n = n_quad;
  const long outer = d == 1 ? n : n * n;
  std::vector<double> nodes(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const auto point = [&](long idx) -> Point {
    if (d == 1) return {nodes[static_cast<std::size_t>(idx)], 0.0};
    return {nodes[static_cast<std::size_t>(idx % n)], nodes[static_cast<std::size_t>(idx / n)]};
  };
  // One compensated partial per x-node, merged in index order.
  std::vector<CompensatedSum> rows(static_cast<std::size_t>(outer));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < outer; ++i) {
    const Point x = point(i);
    CompensatedSum s;
    for (long j = 0; j < outer; ++j) s.add(coeff(x, point(j)));
    rows[static_cast<std::size_t>(i)] = s;
  }
  CompensatedSum total;
  for (const auto& r : rows) total.add(r);
  return total.value() / (static_cast<double>(outer) * static_cast<double>(outer));
}

bool CoefficientReport::passed() const {
  return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const Verdict* CoefficientReport::find(std::string_view name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

CoefficientReport validate_coefficient(const PeriodicCoefficient& coeff, const CoefficientBudget& budget) {
  const int d = coeff.dim();
  const auto pairs = sample_pairs(d, budget);
  CoefficientReport report;
  report.coefficient = describe(coeff);

  Verdict sym;
  sym.name = "symmetry";
  sym.condition = "|Lambda(x,y) - Lambda(y,x)| <= tol |Lambda(x,y)|";
  sym.tolerance = budget.symmetry_tol;
  Verdict bounds;
  bounds.name = "bounds";
  bounds.condition = "gamma1 <= Lambda(x,y) <= gamma2";
  bounds.tolerance = budget.bounds_tol;
  Verdict per;
  per.name = "periodicity";
  per.condition = "|Lambda(x + e_i, y) - Lambda(x, y)| and |Lambda(x, y + e_i) - Lambda(x, y)| <= tol";
  per.tolerance = budget.periodicity_tol;

  double worst_sym = 0.0;
  double worst_per = 0.0;
  double mn = INFINITY;
  double mx = -INFINITY;
  std::pair<Point, Point> sym_witness{};
  for (const auto& [x, y] : pairs) {
    const double v = coeff(x, y);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    const double s = std::abs(v - coeff(y, x)) / std::max(std::abs(v), 1e-300);
    if (s > worst_sym) {
      worst_sym = s;
      sym_witness = {x, y};
    }
    for (int i = 0; i < d; ++i) {
      Point xs = x;
      Point ys = y;
      xs[static_cast<std::size_t>(i)] += 1.0;
      ys[static_cast<std::size_t>(i)] += 1.0;
      worst_per = std::max({worst_per, std::abs(coeff(xs, y) - v), std::abs(coeff(x, ys) - v)});
    }
  }
  const SampleRange range{pairs.size(), 0.0, 0.0, budget.seed};
  sym.measured = worst_sym;
  sym.passed = worst_sym <= budget.symmetry_tol;
  sym.samples = range;
  if (worst_sym > 0.0) {
    sym.details["witness_x"] = {sym_witness.first[0], sym_witness.first[1]};
    sym.details["witness_y"] = {sym_witness.second[0], sym_witness.second[1]};
  }

  const double g1 = coeff.gamma1();
  const double g2 = coeff.gamma2();
  bounds.measured = std::max({0.0, g1 - mn, mx - g2});
  bounds.passed = mn > 0.0 && bounds.measured <= budget.bounds_tol;
  bounds.samples = range;
  bounds.details["inf"] = mn;
  bounds.details["sup"] = mx;
  bounds.details["gamma1"] = g1;
  bounds.details["gamma2"] = g2;

  per.measured = worst_per;
  per.passed = worst_per <= budget.periodicity_tol;
  per.samples = range;

  report.verdicts = {sym, bounds, per};
  return report;
}

nlohmann::ordered_json describe(const PeriodicCoefficient& coeff) {
  nlohmann::ordered_json j;
  j["family"] = coeff.description().family;
  j["dim"] = coeff.dim();
  j["params"] = coeff.description().params;
  j["gamma1"] = coeff.gamma1();
  j["gamma2"] = coeff.gamma2();
  return j;
}

nlohmann::ordered_json to_json(const CoefficientReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  j["coefficient"] = report.coefficient;
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& v : report.verdicts) vs.push_back(to_json(v));
  j["verdicts"] = vs;
  return j;
}

}  // namespace homog
