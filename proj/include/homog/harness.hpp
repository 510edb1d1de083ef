#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "homog/coefficients.hpp"
#include "homog/grid.hpp"
#include "homog/kernels.hpp"
#include "homog/solvers.hpp"
#include "homog/stencil.hpp"
#include "homog/symbol.hpp"
#include "json.hpp"

namespace homog {

struct KernelSpec {
  std::string family = "pareto";
  KernelParams params{0.5, 0.5, 0.0};
};

struct CoefficientSpec {
  std::string family = "separable-trig";
  CoefficientParams params;
  int mean_quadrature = 64;
};

struct Harmonic {
  std::array<int, 2> k{1, 0};
  double amplitude = 1.0;
};

/// "gaussian": periodized bump at the torus centre; "harmonics": sum of
/// amplitude * cos(2 pi k.x / T); "zero".
struct RhsSpec {
  std::string type = "gaussian";
  double width = 0.5;
  double amplitude = 1.0;
  std::vector<Harmonic> harmonics;
};

struct WeakProbeSpec {
  bool enabled = true;
  double delta = 0.25;
  double psi_radius = 0.5;
  Point x0{-1.1, 0.0};
  Point y0{1.0, 0.0};
};

struct DiagnosticsSpec {
  bool energy_tail = true;
  bool translation = true;
  bool mass_escape = true;
  std::vector<double> translation_shifts{0.25, 0.5, 1.0};  // physical lengths
  std::vector<double> mass_escape_fractions{0.125, 0.25};  // L / T
  WeakProbeSpec weak;
};

struct StudyConfig {
  int dim = 1;
  double alpha = 1.5;
  double m = 1.0;
  double side = 8.0;  // T
  int rho = 8;        // h = eps / rho
  std::vector<double> eps;  // explicit schedule, or empty to use exponents
  int j0 = 4;               // eps = T / 2^j for j0 <= j <= j1
  int j1 = 7;
  KernelSpec kernel;
  CoefficientSpec coefficient;
  RhsSpec rhs;
  SolveOptions solver;
  StencilOptions stencil;
  int symbol_angular = 2048;
  DiagnosticsSpec diagnostics;
  ValidationBudget validation;
  bool allow_invalid_kernel = false;
  std::optional<double> acceptance_threshold;

  /// The resolved schedule, coarse to fine.
  std::vector<double> schedule() const;
  /// Points per axis for a given eps.
  int points_for(double eps) const;
};

/// Throws InvalidArgument / CommensurabilityError on inconsistent configs.
void check_config(const StudyConfig& config);

nlohmann::ordered_json to_json(const StudyConfig& config);

JumpKernel build_kernel(const StudyConfig& config);
PeriodicCoefficient build_coefficient(const StudyConfig& config);
DiscreteField build_rhs(const StudyConfig& config, const TorusGrid& grid);

struct TranslationEntry {
  double shift = 0.0;
  double modulus = 0.0;
  double ratio = 0.0;  // modulus / shift^alpha
};

struct MassEscapeEntry {
  double cutoff = 0.0;
  double value = 0.0;
};

struct EpsRecord {
  double eps = 0.0;
  int points = 0;
  double error = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double c1_ratio = 0.0;
  double c2_ratio = 0.0;
  bool c1_ok = true;
  bool c2_ok = true;
  double energy = 0.0;
  double green_defect = 0.0;
  std::optional<double> energy_tail;
  std::optional<double> c4_ratio;
  std::vector<TranslationEntry> translation;
  std::vector<MassEscapeEntry> mass_escape;
  double image_tail_residual = 0.0;
  bool monotone = true;  // error <= previous error + 10 tol
  double seconds = 0.0;
};

struct FitResult {
  std::optional<double> slope;
  std::optional<double> intercept;
  std::optional<double> residual;
  int points = 0;
  std::string flag;
};

struct WeakProbeRow {
  double eps = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 1.0;
};

struct ConvergenceReport {
  nlohmann::ordered_json config;
  nlohmann::ordered_json kernel;
  nlohmann::ordered_json kernel_validation;
  bool kernel_override = false;
  double lambda_bar = 0.0;
  nlohmann::ordered_json symbol;
  double effective_norm = 0.0;
  std::vector<EpsRecord> records;
  FitResult fit;
  std::vector<WeakProbeRow> weak_probe;
  std::vector<MassEscapeEntry> mass_escape_sup;
  std::vector<std::string> notes;
  double total_seconds = 0.0;

  bool all_converged() const;
};

/// Solves the effective problem once on the finest grid and every eps-problem
/// of the schedule; errors are measured on each eps-grid.
ConvergenceReport run_study(const StudyConfig& config);

/// Same pipeline, also returning the fields (effective solution on the finest
/// grid and u^eps per record).
struct StudyFields {
  std::optional<DiscreteField> effective;
  std::vector<DiscreteField> solutions;
};
ConvergenceReport run_study(const StudyConfig& config, StudyFields* fields);

/// Requires 2L <= T/2. Distance is measured from the torus centre.
double mass_escape(const DiscreteField& u, double cutoff);

/// Product bump psi(x, y) = B(|x - x0|/r) B(|y - y0|/r), B(t) = exp(-1/(1 - t^2)).
struct BumpPair {
  Point x0;
  Point y0;
  double radius = 0.5;
  double amplitude = 1.0;
  double operator()(const Point& x, const Point& y) const;
};

/// LHS(eps)/RHS for each eps by tensor 8-point Gauss-Legendre panels of
/// width <= eps/2 on the support boxes. Throws InvalidArgument when psi is not
/// supported inside G_1^delta.
std::vector<WeakProbeRow> weak_convergence_probe(const JumpKernel& kernel, const PeriodicCoefficient& coeff,
                                                 double lambda_bar, const std::vector<double>& eps_list,
                                                 const BumpPair& psi, double delta);

/// OLS of log error on log eps. Throws InvalidArgument with fewer than 2 points.
FitResult fit_rate(const std::vector<EpsRecord>& records);

nlohmann::ordered_json to_json(const ConvergenceReport& report, bool include_timing = true);
std::string to_csv(const ConvergenceReport& report);

/// Self-contained SVG: log-log error against eps with the fitted line and a
/// panel of the a-priori ratios.
void emit_plot(const ConvergenceReport& report, const std::string& path);
std::string render_plot(const ConvergenceReport& report);

}  // namespace homog
