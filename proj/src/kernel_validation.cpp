#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/error.hpp"
#include "homog/kernels.hpp"

namespace homog {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> geometric_radii(double lo, double hi, int per_octave) {
  std::vector<double> r;
  const int n = static_cast<int>(std::ceil(std::log2(hi / lo) * per_octave));
  for (int j = 0; j <= n; ++j) r.push_back(std::min(hi, lo * std::exp2(static_cast<double>(j) / per_octave)));
  return r;
}

std::vector<Point> directions(int dim, int count) {
  if (dim == 1) return {{1.0, 0.0}, {-1.0, 0.0}};
  std::vector<Point> out;
  for (int i = 0; i < count; ++i) out.push_back(unit_vector(2.0 * kPi * (i + 0.5) / count));
  return out;
}

std::vector<Sector> probe_sectors(int dim) {
  if (dim == 1) return {Sector::full(), Sector::positive(), Sector::negative()};
  return {Sector::full(), Sector::arc(0.0, 0.5 * kPi), Sector::arc(0.25 * kPi, 0.75 * kPi)};
}

std::string sector_label(const Sector& s) {
  if (s.width() >= 2.0 * kPi) return "full";
  return "[" + std::to_string(s.from) + ", " + std::to_string(s.to) + ")";
}

Verdict check_symmetry(const JumpKernel& kernel, const ValidationBudget& budget) {
  Verdict v;
  v.name = "symmetry";
  v.condition = "p(z) >= 0 and |p(z) - p(-z)| <= tol p(z)";
  v.tolerance = budget.symmetry_tol;
  const double lo = 1e-3 * kernel.tail_radius();
  const double hi = budget.oscillation.r_max;
  const auto radii = geometric_radii(lo, hi, budget.oscillation.radial_per_octave);
  const auto dirs = directions(kernel.dim(), 4 * budget.oscillation.angular);
  double worst = 0.0;
  double negative = 0.0;
  Point witness{0.0, 0.0};
  std::size_t count = 0;
  for (double r : radii) {
    for (const Point& s : dirs) {
      const Point z = r * s;
      const double a = kernel(z);
      const double b = kernel(-z);
      ++count;
      negative = std::min({negative, a, b});
      const double rel = a > 0.0 ? std::abs(a - b) / a : (b == 0.0 ? 0.0 : INFINITY);
      if (rel > worst) {
        worst = rel;
        witness = z;
      }
    }
  }
  v.measured = worst;
  v.passed = worst <= budget.symmetry_tol && negative >= 0.0;
  v.samples = {count, lo, hi, budget.oscillation.seed};
  v.details["most_negative_value"] = negative;
  v.details["witness"] = {witness[0], witness[1]};
  return v;
}

Verdict check_normalization(const JumpKernel& kernel, const ValidationBudget& budget) {
  Verdict v;
  v.name = "normalization";
  v.condition = "|int p - 1| <= tol";
  v.tolerance = budget.normalization_tol.value_or(default_normalization_tolerance(kernel.dim()));
  const QuadratureResult mass = total_mass(kernel, std::min(1e-13, v.tolerance * 1e-3));
  v.measured = std::abs(mass.value - 1.0);
  v.passed = mass.converged && v.measured <= v.tolerance;
  v.samples = {0, 0.0, INFINITY, 0};
  v.details["mass"] = mass.value;
  v.details["quadrature_error"] = mass.error;
  v.details["normalized_flag"] = kernel.normalized();
  return v;
}

Verdict check_tail_bounds(const JumpKernel& kernel, const ValidationBudget& budget, TailMode mode) {
  Verdict v;
  v.name = "tail-bounds";
  v.condition = mode == TailMode::Plain ? "beta1 <= p(z)|z|^(d+alpha) <= beta2 on M <= |z| <= R_max"
                                        : "beta1 <= p(z)|z|^(d+alpha)/L(|z|) <= beta2 on M <= |z| <= R_max";
  v.tolerance = budget.tail_bound_rel_tol;
  const double lo = kernel.tail_radius();
  const double hi = budget.oscillation.r_max;
  const auto radii = geometric_radii(lo, hi, budget.oscillation.radial_per_octave);
  const auto dirs = directions(kernel.dim(), 4 * budget.oscillation.angular);
  const double e = kernel.dim() + kernel.alpha();
  double mn = INFINITY;
  double mx = 0.0;
  std::size_t count = 0;
  for (double r : radii) {
    const double L = mode == TailMode::SlowlyVarying ? kernel.slowly_varying(r) : 1.0;
    for (const Point& s : dirs) {
      const double env = kernel(r * s) * std::pow(r, e) / L;
      mn = std::min(mn, env);
      mx = std::max(mx, env);
      ++count;
    }
  }
  const double b1 = kernel.beta1();
  const double b2 = kernel.beta2();
  v.measured = std::max(std::max(0.0, (b1 - mn) / b1), std::max(0.0, (mx - b2) / b2));
  v.passed = v.measured <= v.tolerance;
  v.samples = {count, lo, hi, budget.oscillation.seed};
  v.details["envelope_min"] = mn;
  v.details["envelope_max"] = mx;
  v.details["beta1"] = b1;
  v.details["beta2"] = b2;
  return v;
}

Verdict check_tail_asymptotics(const JumpKernel& kernel, const ValidationBudget& budget, TailMode mode) {
  Verdict v;
  v.name = "tail-asymptotics";
  v.condition = "|tail_mass(n, Omega) / target(n, Omega) - 1| <= tol at the largest n";
  v.tolerance = budget.tail_ratio_tol;
  std::vector<double> ns = budget.tail_radii;
  if (ns.empty()) {
    for (double n = 10.0 * kernel.tail_radius(); n <= 1e8 * (1.0 + 1e-12); n *= 10.0) ns.push_back(n);
  }
  std::sort(ns.begin(), ns.end());
  const auto sectors = probe_sectors(kernel.dim());
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  double worst_last = 0.0;
  bool converged = true;
  for (double n : ns) {
    nlohmann::ordered_json row;
    row["n"] = n;
    nlohmann::ordered_json ratios = nlohmann::ordered_json::object();
    for (const Sector& s : sectors) {
      const TailMassResult t = tail_mass(kernel, n, s, mode, budget.tail_mass_rel_tol);
      converged = converged && t.converged;
      ratios[sector_label(s)] = t.ratio;
      if (n == ns.back()) worst_last = std::max(worst_last, std::abs(t.ratio - 1.0));
    }
    row["ratios"] = ratios;
    table.push_back(row);
  }
  v.measured = worst_last;
  v.passed = converged && worst_last <= v.tolerance;
  v.samples = {ns.size() * sectors.size(), ns.front(), ns.back(), 0};
  v.details["target_mode"] = std::string(to_string(mode));
  v.details["table"] = table;
  return v;
}

Verdict check_oscillation(const JumpKernel& kernel, const ValidationBudget& budget) {
  Verdict v;
  v.name = "oscillation-decay";
  v.condition = "phi_K(r) nonincreasing along r = M 4^j and phi_K(r_last) <= tol";
  v.tolerance = budget.phi_tol;
  const double K = budget.shift_radius.value_or(default_shift_radius(kernel.dim()));
  std::vector<double> radii;
  for (int j = 0; j < budget.phi_radii; ++j) radii.push_back(kernel.tail_radius() * std::pow(4.0, j));
  OscillationBudget ob = budget.oscillation;
  ob.r_min = std::min(ob.r_min, radii.front());
  const auto phi = oscillation_profile(kernel, K, radii, ob);
  bool monotone = true;
  for (std::size_t i = 1; i < phi.size(); ++i) monotone = monotone && phi[i] <= phi[i - 1];
  v.measured = phi.back();
  v.passed = monotone && phi.back() <= v.tolerance && phi.back() < phi.front();
  v.samples = {radii.size(), radii.front(), ob.r_max, ob.seed};
  v.details["K"] = K;
  v.details["radii"] = radii;
  v.details["phi"] = phi;
  v.details["min_phi"] = *std::min_element(phi.begin(), phi.end());
  if (phi.size() >= 2 && phi.front() > 0.0 && phi.back() > 0.0) {
    v.details["decay_exponent"] =
        -std::log(phi.back() / phi.front()) / std::log(radii.back() / radii.front());
  }
  return v;
}

}  // namespace

bool KernelComplianceReport::passed() const {
  return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const Verdict* KernelComplianceReport::find(std::string_view name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

nlohmann::ordered_json to_json(const ValidationBudget& budget, int dim) {
  nlohmann::ordered_json j;
  const auto& o = budget.oscillation;
  j["r_min"] = o.r_min;
  j["r_max"] = o.r_max;
  j["radial_per_octave"] = o.radial_per_octave;
  j["angular"] = o.angular;
  j["shift_step"] = o.shift_step;
  j["shift_angular"] = o.shift_angular;
  j["seed"] = o.seed;
  j["K"] = budget.shift_radius.value_or(default_shift_radius(dim));
  j["phi_radii"] = budget.phi_radii;
  j["phi_tol"] = budget.phi_tol;
  j["tail_radii"] = budget.tail_radii;
  j["tail_ratio_tol"] = budget.tail_ratio_tol;
  j["tail_mass_rel_tol"] = budget.tail_mass_rel_tol;
  j["tail_bound_rel_tol"] = budget.tail_bound_rel_tol;
  j["normalization_tol"] = budget.normalization_tol.value_or(default_normalization_tolerance(dim));
  j["symmetry_tol"] = budget.symmetry_tol;
  return j;
}

KernelComplianceReport validate_kernel(const JumpKernel& kernel, const ValidationBudget& budget) {
  if (!(budget.oscillation.r_max > kernel.tail_radius())) {
    throw InvalidArgument("validation budget needs R_max > M");
  }
  KernelComplianceReport report;
  report.kernel = describe(kernel);
  report.budget = to_json(budget, kernel.dim());
  const TailMode mode = budget.mode.value_or(kernel.mode());
  report.validated_mode = std::string(to_string(mode));
  const auto run = [&](const char* name, auto&& fn) {
    try {
      report.verdicts.push_back(fn());
    } catch (const HypothesisViolation& e) {
      Verdict v;
      v.name = name;
      v.condition = "evaluation";
      v.passed = false;
      v.measured = INFINITY;
      v.details["error"] = e.what();
      report.verdicts.push_back(v);
    } catch (const std::exception& e) {
      throw Error(std::string("validate_kernel: ") + name + ": " + e.what());
    }
  };
  run("symmetry", [&] { return check_symmetry(kernel, budget); });
  run("normalization", [&] { return check_normalization(kernel, budget); });
  run("tail-bounds", [&] { return check_tail_bounds(kernel, budget, mode); });
  run("tail-asymptotics", [&] { return check_tail_asymptotics(kernel, budget, mode); });
  run("oscillation-decay", [&] { return check_oscillation(kernel, budget); });
  report.notes.push_back("oscillation decay is certified only on the sampled range r <= R_max; no decay rate is required");
  report.notes.push_back("tail asymptotics use a finite-n ratio threshold; the limit itself is not computable");
  return report;
}

nlohmann::ordered_json to_json(const Verdict& v) {
  nlohmann::ordered_json e;
  e["name"] = v.name;
  e["passed"] = v.passed;
  e["condition"] = v.condition;
  e["measured"] = v.measured;
  e["tolerance"] = v.tolerance;
  e["samples"] = {{"count", v.samples.count},
                  {"radius_min", v.samples.radius_min},
                  {"radius_max", v.samples.radius_max},
                  {"seed", v.samples.seed}};
  e["details"] = v.details;
  return e;
}

nlohmann::ordered_json to_json(const KernelComplianceReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  j["validated_mode"] = report.validated_mode;
  j["kernel"] = report.kernel;
  j["budget"] = report.budget;
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& v : report.verdicts) {
    vs.push_back(to_json(v));
  }
  j["verdicts"] = vs;
  j["notes"] = report.notes;
  return j;
}

}  // namespace homog
