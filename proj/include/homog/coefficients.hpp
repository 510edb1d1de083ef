#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "homog/geometry.hpp"
#include "homog/verdict.hpp"
#include "json.hpp"

namespace homog {

struct CoefficientDescription {
  std::string family = "custom";
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

/// Lambda(x, y), 1-periodic in every coordinate of both arguments.
class PeriodicCoefficient {
 public:
  using Evaluator = std::function<double(const Point& x, const Point& y)>;

  using Description = CoefficientDescription;

  PeriodicCoefficient(int dim, Evaluator lambda, double gamma1, double gamma2, Description description = {});

  double operator()(const Point& x, const Point& y) const { return scale_ * lambda_(x, y); }
  int dim() const { return dim_; }
  double gamma1() const { return scale_ * gamma1_; }
  double gamma2() const { return scale_ * gamma2_; }
  const Description& description() const { return description_; }

  PeriodicCoefficient scaled(double factor) const;

 private:
  int dim_;
  Evaluator lambda_;
  double gamma1_;
  double gamma2_;
  double scale_ = 1.0;
  Description description_;
};

struct CoefficientParams {
  double value = 1.0;      // constant family
  double amplitude = 0.5;  // a in the trigonometric families
};

/// Families: "constant", "separable-trig", "additive-trig".
PeriodicCoefficient make_builtin_coefficient(std::string_view family, int dim, const CoefficientParams& params = {});

const std::vector<std::string>& builtin_coefficient_families();

/// Tensor midpoint rule with n_quad points per axis over the 2d-torus,
/// compensated summation.
double mean_lambda(const PeriodicCoefficient& coeff, int n_quad = 64);

struct CoefficientBudget {
  int samples_per_axis = 24;  // (x, y) lattice per coordinate
  int random_pairs = 2000;
  std::uint64_t seed = 0;
  double symmetry_tol = 1e-14;  // relative
  double bounds_tol = 1e-9;
  double periodicity_tol = 1e-12;
};

struct CoefficientReport {
  nlohmann::ordered_json coefficient;
  std::vector<Verdict> verdicts;

  bool passed() const;
  const Verdict* find(std::string_view name) const;
};

/// Verdicts "symmetry", "bounds", "periodicity".
CoefficientReport validate_coefficient(const PeriodicCoefficient& coeff, const CoefficientBudget& budget = {});

nlohmann::ordered_json describe(const PeriodicCoefficient& coeff);
nlohmann::ordered_json to_json(const CoefficientReport& report);

}  // namespace homog
