#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homog/geometry.hpp"
#include "homog/quadrature.hpp"
#include "homog/verdict.hpp"
#include "json.hpp"

namespace homog {

/// Closed arc of directions [from, to) measured as angles; in one dimension
/// the sphere is {+1, -1} at angles 0 and pi.
struct Sector {
  double from = 0.0;
  double to = 2.0 * std::numbers::pi;

  static Sector full() { return {}; }
  static Sector positive() { return {-0.5 * std::numbers::pi, 0.5 * std::numbers::pi}; }
  static Sector negative() { return {0.5 * std::numbers::pi, 1.5 * std::numbers::pi}; }
  static Sector arc(double from, double to) { return {from, to}; }

  double width() const { return to - from; }
  bool contains(double theta) const;
};

/// Angular density k on the unit sphere S^{d-1}.
class AngularDensity {
 public:
  using Evaluator = std::function<double(const Point& unit)>;

  AngularDensity() = default;
  AngularDensity(int dim, Evaluator k, double beta1, double beta2);

  int dim() const { return dim_; }
  double operator()(const Point& unit) const { return scale_ * k_(unit); }
  double at_angle(double theta) const { return (*this)(unit_vector(theta)); }
  double beta1() const { return scale_ * beta1_; }
  double beta2() const { return scale_ * beta2_; }

  AngularDensity scaled(double factor) const;

  /// int_Omega k(s) ds. Counting measure in one dimension.
  double integral(const Sector& omega) const;

 private:
  int dim_ = 1;
  Evaluator k_ = [](const Point&) { return 1.0; };
  double beta1_ = 1.0;
  double beta2_ = 1.0;
  double scale_ = 1.0;
};

enum class TailMode { Plain, SlowlyVarying };

std::string_view to_string(TailMode mode);

/// Jump density p on R^d with its tail metadata. Immutable; copies share the
/// evaluator.
class JumpKernel {
 public:
  using Evaluator = std::function<double(const Point&)>;

  struct Description {
    std::string family = "custom";
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
  };

  JumpKernel(int dim, double alpha, Evaluator density, double beta1, double beta2, double tail_radius,
             AngularDensity angular, TailMode mode = TailMode::Plain, ScalarFunction slowly_varying = {});

  double operator()(const Point& z) const { return scale_ * density_(z); }

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double beta1() const { return scale_ * beta1_; }
  double beta2() const { return scale_ * beta2_; }
  /// The radius M beyond which the tail bounds hold (M >= 1).
  double tail_radius() const { return tail_radius_; }
  const AngularDensity& angular() const { return angular_; }
  TailMode mode() const { return mode_; }
  /// L(r); identically 1 in Plain mode.
  double slowly_varying(double r) const { return slowly_varying_ ? slowly_varying_(r) : 1.0; }
  const ScalarFunction* slowly_varying_function() const {
    return slowly_varying_ ? &slowly_varying_ : nullptr;
  }
  bool normalized() const { return normalized_; }
  double scale() const { return scale_; }

  /// Radii where p has kinks or jumps; used as quadrature breakpoints.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const Description& description() const { return description_; }

  /// Optional product structure p(z) = a(z/|z|) g(|z|) (before scale())
  /// used by the mass and tail quadratures. `radial_tail`, when set, returns
  /// int_R^inf g(r) r^{d-1} dr for R >= tail_radius().
  struct RadialStructure {
    AngularDensity::Evaluator angular_factor;
    ScalarFunction profile;
    std::function<QuadratureResult(double R, double rel_tol)> radial_tail;
  };
  const std::optional<RadialStructure>& radial_structure() const { return radial_; }

  JumpKernel scaled(double factor) const;
  JumpKernel with_radial_structure(RadialStructure structure) const;
  JumpKernel with_description(Description d) const;
  JumpKernel with_breakpoints(std::vector<double> radii) const;
  JumpKernel as_normalized(double factor) const;

 private:
  int dim_;
  double alpha_;
  Evaluator density_;
  double beta1_;
  double beta2_;
  double tail_radius_;
  AngularDensity angular_;
  TailMode mode_;
  ScalarFunction slowly_varying_;
  double scale_ = 1.0;
  bool normalized_ = false;
  std::vector<double> breakpoints_;
  std::optional<RadialStructure> radial_;
  Description description_;
};

/// Parameters of the builtin families. Unused fields are ignored by families
/// that do not need them.
struct KernelParams {
  double inner_radius = 1.0;  // r0: plateau radius
  double anisotropy = 0.5;    // b in k(theta) = 1 + b cos(2 theta), anisotropic-pareto only
  double core_noise = 0.0;    // amplitude of the even multiplicative perturbation on |z| < r0
};

/// Families: "pareto", "anisotropic-pareto" (d = 2), "log-perturbed",
/// "oscillation-violator". The result is normalized.
JumpKernel make_builtin_kernel(std::string_view family, int dim, double alpha, const KernelParams& params = {});

/// Names accepted by make_builtin_kernel.
const std::vector<std::string>& builtin_kernel_families();

/// int_{R^d} p by radial panels with power-law tail extrapolation.
/// Angular trapezoid (64 directions) in two dimensions.
QuadratureResult total_mass(const JumpKernel& kernel, double rel_tol = 1e-13);

/// Default normalization tolerance: 1e-10 in one dimension, 1e-7 in two.
double default_normalization_tolerance(int dim);

/// Returns the kernel divided by its mass. Throws QuadratureError when the
/// mass cannot be computed to `tolerance`.
JumpKernel normalize(const JumpKernel& kernel, std::optional<double> tolerance = std::nullopt);

struct TailMassResult {
  double mass = 0.0;
  double error = 0.0;
  /// (1/(alpha n^alpha)) int_Omega k, times L(n) when the target mode is SlowlyVarying.
  double target = 0.0;
  double ratio = 0.0;
  bool converged = true;
};

/// int_{|z| > n, z/|z| in Omega} p(z) dz together with its asymptotic target.
TailMassResult tail_mass(const JumpKernel& kernel, double n, const Sector& omega,
                         std::optional<TailMode> target_mode = std::nullopt, double rel_tol = 1e-10);

/// Fixed sampling lattice for the oscillation functional. The lattice does
/// not depend on r or K, which makes phi_K(r) nonincreasing in r and
/// nondecreasing in K.
struct OscillationBudget {
  double r_min = 1.0;          // smallest sampled |z|
  double r_max = 1e5;          // outer sampling radius R_max
  int radial_per_octave = 24;  // z radii per factor 2
  int angular = 16;            // z directions (d = 2)
  double shift_step = 1.0 / 16.0;
  int shift_angular = 16;      // gamma directions (d = 2)
  std::uint64_t seed = 0;      // jitter of the radial lattice
};

/// Default shift radius K = 2 sqrt(d).
double default_shift_radius(int dim);

/// Sampled sup of |p(z + g) - p(z)| / p(z) over |g| <= K, r <= |z| <= R_max.
double oscillation_phi(const JumpKernel& kernel, double K, double r, const OscillationBudget& budget = {});

/// phi_K at several radii from one pass over the lattice.
std::vector<double> oscillation_profile(const JumpKernel& kernel, double K, const std::vector<double>& radii,
                                        const OscillationBudget& budget = {});

/// eps^{-d-alpha} p(z / eps), further divided by L(1/eps) in SlowlyVarying mode.
double rescaled_density(const JumpKernel& kernel, double eps, const Point& z);

// ---------------------------------------------------------------------------
// Compliance report

struct KernelComplianceReport {
  nlohmann::ordered_json kernel;
  nlohmann::ordered_json budget;
  std::string validated_mode;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  bool passed() const;
  const Verdict* find(std::string_view name) const;
};

struct ValidationBudget {
  OscillationBudget oscillation;
  std::optional<double> shift_radius;           // K, default 2 sqrt(d)
  int phi_radii = 6;                            // r = M 4^j for the decay fit
  double phi_tol = 0.05;                        // phi at the largest r must not exceed this
  std::vector<double> tail_radii;               // n values; default geometric 10 M .. 1e8
  double tail_ratio_tol = 0.05;                 // |ratio - 1| at the largest n
  double tail_mass_rel_tol = 1e-4;
  double tail_bound_rel_tol = 1e-9;
  std::optional<double> normalization_tol;      // default 1e-10 (d=1), 1e-7 (d=2)
  double symmetry_tol = 1e-14;                  // relative
  std::optional<TailMode> mode;                 // validate as if in this mode
};

nlohmann::ordered_json to_json(const ValidationBudget& budget, int dim);

/// Runs the symmetry, normalization, tail and oscillation checks on samples.
/// Verdict names: "symmetry", "normalization", "tail-bounds",
/// "tail-asymptotics", "oscillation-decay".
KernelComplianceReport validate_kernel(const JumpKernel& kernel, const ValidationBudget& budget = {});

nlohmann::ordered_json describe(const JumpKernel& kernel);
nlohmann::ordered_json to_json(const KernelComplianceReport& report);

}  // namespace homog
