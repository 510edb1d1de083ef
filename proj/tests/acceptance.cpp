#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "homog/harness.hpp"
#include "homog/solvers.hpp"
#include "homog/stencil.hpp"
#include "homog/symbol.hpp"

using namespace homog;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

StudyConfig baseline(double alpha) {
  StudyConfig c;
  c.dim = 1;
  c.alpha = alpha;
  c.m = 1.0;
  c.side = 8.0;
  c.rho = 8;
  c.eps = {0.5, 0.25, 0.125, 0.0625};
  c.kernel.family = "pareto";
  c.kernel.params = {0.5, 0.5, 0.0};
  c.coefficient.family = "separable-trig";
  c.coefficient.params = {1.0, 0.5};
  c.rhs.type = "gaussian";
  c.rhs.width = 0.5;
  c.solver.tol = 1e-10;
  c.solver.maxit = 2000;
  c.diagnostics.mass_escape_fractions = {0.125, 0.25};
  return c;
}

struct Run {
  ConvergenceReport report;
  StudyFields fields;
  double seconds = 0.0;
};

Run run(const StudyConfig& c) {
  Run r;
  const auto t0 = std::chrono::steady_clock::now();
  r.report = run_study(c, &r.fields);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::map<std::string, Run> g_runs;

const Run& cached(const std::string& key, const StudyConfig& c) {
  auto it = g_runs.find(key);
  if (it == g_runs.end()) it = g_runs.emplace(key, run(c)).first;
  return it->second;
}

const Run& base(double alpha) { return cached("base" + std::to_string(alpha), baseline(alpha)); }

DiscreteField random_field(const TorusGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  DiscreteField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = n(rng);
  return u;
}

void apriori_bounds(Outcome& o) {
  for (double alpha : {0.5, 1.5}) {
    const Run& r = base(alpha);
    double c1 = 0.0;
    double c2 = 0.0;
    for (const auto& rec : r.report.records) {
      if (!rec.converged) continue;
      c1 = std::max(c1, rec.c1_ratio);
      c2 = std::max(c2, rec.c2_ratio);
    }
    o.detail << " alpha=" << alpha << ": max c1=" << c1 << " max c2=" << c2 << " time=" << r.seconds << "s;";
    o.require(r.report.all_converged(), "all solves converged");
    o.require(c1 <= 1.0 + 1e-6, "m|u| <= |f|(1+1e-6)");
    o.require(c2 <= 1.0 + 1e-6, "energy <= |f|^2/m (1+1e-6)");
    o.require(r.seconds <= 120.0, "study runtime <= 2 min");
  }
}

void operator_algebra(Outcome& o) {
  struct Case {
    int dim;
    double side;
    double eps;
    int rho;
    const char* kernel;
  };
  std::mt19937_64 rng(20240917);
  double worst_sa = 0.0;
  double worst_nsd = 0.0;
  double worst_const = 0.0;
  double worst_energy = 0.0;
  for (const Case c : {Case{1, 8.0, 0.25, 8, "pareto"}, Case{2, 2.0, 0.5, 4, "anisotropic-pareto"}}) {
    const TorusGrid g(c.dim, c.side, static_cast<int>(std::lround(c.rho * c.side / c.eps)));
    const auto st = assemble_stencil(g, make_builtin_kernel(c.kernel, c.dim, 1.5, {0.5, 0.5, 0.0}),
                                     make_builtin_coefficient("separable-trig", c.dim, {1.0, 0.5}), c.eps);
    for (int t = 0; t < 20; ++t) {
      const auto u = random_field(g, rng);
      const auto v = random_field(g, rng);
      const auto lu = apply_operator(st, u);
      const auto lv = apply_operator(st, v);
      const double a = inner(lu, v);
      const double b = inner(u, lv);
      const double scale = std::sqrt(inner(lu, lu) * inner(v, v)) + 1e-300;
      worst_sa = std::max(worst_sa, std::abs(a - b) / scale);
      const double luu = inner(lu, u);
      worst_nsd = std::max(worst_nsd, luu / (std::abs(luu) + 1e-300));
      worst_energy = std::max(worst_energy, std::abs(energy_form(st, u) + luu) / std::abs(luu));
    }
    const auto one = DiscreteField::from_function(g, [](const Point&) { return 1.0; });
    const auto any = random_field(g, rng);
    worst_const = std::max(worst_const, apply_operator(st, one).norm() / apply_operator(st, any).norm());
  }
  o.detail << " self-adjoint=" << worst_sa << " max <Lu,u>/|<Lu,u>|=" << worst_nsd << " constants=" << worst_const
           << " energy=" << worst_energy;
  o.require(worst_sa <= 1e-12, "self-adjointness 1e-12");
  o.require(worst_nsd <= 1e-12, "negative semidefinite");
  o.require(worst_const <= 1e-12, "constants annihilated");
  o.require(worst_energy <= 1e-12, "energy_form = <-Lu,u>");
}

void symbol_oracle(Outcome& o) {
  const AngularDensity aniso(2, [](const Point& u) { return 1.0 + 0.5 * (u[0] * u[0] - u[1] * u[1]); }, 0.5, 1.5);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rad(0.5, 20.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (double alpha : {0.1, 0.5, 1.0, 1.5, 1.9}) {
    const double tol = (alpha <= 0.1 || alpha >= 1.9) ? 1e-4 : 1e-6;
    const EffectiveSymbol s = init_symbol(alpha, 1.0, aniso, 2048, 0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Point xi = rad(rng) * unit_vector(ang(rng));
      const double bf = brute_force_symbol(xi, alpha, 1.0, aniso);
      worst = std::max(worst, std::abs(s(xi) - bf) / bf);
    }
    o.detail << " alpha=" << alpha << ": " << worst << ";";
    o.require(worst <= tol, "brute force at alpha " + std::to_string(alpha));
  }
  const AngularDensity unit(1, [](const Point&) { return 1.0; }, 1.0, 1.0);
  const EffectiveSymbol s1 = init_symbol(1.0, 1.0, unit);
  double worst_pi = 0.0;
  for (double xi : {0.25, 1.0, 3.0, 11.0}) {
    worst_pi = std::max(worst_pi, std::abs(s1({xi, 0.0}) / xi - std::numbers::pi));
    worst_pi = std::max(worst_pi, std::abs(brute_force_symbol({xi, 0.0}, 1.0, 1.0, unit) / xi - std::numbers::pi));
  }
  o.detail << " |sigma/|xi| - pi|=" << worst_pi;
  o.require(worst_pi <= 1e-8, "sigma/|xi| = pi");
}

void spectral_exactness(Outcome& o) {
  const double T = 8.0;
  const double m = 1.0;
  const AngularDensity unit(1, [](const Point&) { return 1.0; }, 1.0, 1.0);
  const EffectiveSymbol s = init_symbol(1.5, 1.0, unit);
  const TorusGrid g(1, T, 256);
  double worst_eff = 0.0;
  double worst_eps = 0.0;
  const double tol = 1e-10;
  const auto st = assemble_stencil(g, make_builtin_kernel("pareto", 1, 1.5, {0.5, 0.5, 0.0}),
                                   make_builtin_coefficient("constant", 1), 0.25);
  for (int k : {1, 2, 5, 17}) {
    const double w = 2.0 * std::numbers::pi * k / T;
    // Phase reduced mod N so the samples are a harmonic to the last bit.
    DiscreteField f(g);
    for (int i = 0; i < g.points(); ++i) {
      f[static_cast<std::size_t>(i)] = std::cos(2.0 * std::numbers::pi * ((k * i) % g.points()) / g.points());
    }
    const auto u = solve_effective(g, m, f, s);
    const double fac = 1.0 / (m + s({w, 0.0}));
    DiscreteField exact(g);
    for (std::size_t i = 0; i < g.size(); ++i) exact[i] = fac * f[i];
    // The multiplier is bounded by 1/m, so roundoff is measured against |f|/m.
    worst_eff = std::max(worst_eff, difference(u, exact).norm() / (f.norm() / m));

    double lam = 0.0;
    for (std::size_t off = 0; off < g.size(); ++off) {
      lam += st.offset_weights()[off] * (std::cos(2.0 * std::numbers::pi * k * static_cast<double>(off) / g.points()) - 1.0);
    }
    lam *= g.cell_volume();
    const auto r = solve_epsilon(st, m, f, {tol, 2000, false});
    DiscreteField expect(g);
    for (std::size_t i = 0; i < g.size(); ++i) expect[i] = f[i] / (m - lam);
    worst_eps = std::max(worst_eps, difference(r.u, expect).norm() / expect.norm());
  }
  o.detail << " effective max err/(|f|/m)=" << worst_eff << " eps-solve rel=" << worst_eps;
  // Machine precision for a forward and inverse FFT of length N.
  const double machine = 4.0 * std::numeric_limits<double>::epsilon() * std::log2(static_cast<double>(g.points()));
  o.detail << " (machine bound " << machine << ")";
  o.require(worst_eff <= machine, "solve_effective to machine precision");
  o.require(worst_eps <= 10.0 * tol, "solve_epsilon matches discrete symbol");
}

void strong_convergence(Outcome& o) {
  for (double alpha : {0.5, 1.5}) {
    const Run& r = base(alpha);
    bool decreasing = true;
    for (std::size_t i = 1; i < r.report.records.size(); ++i) {
      decreasing = decreasing && r.report.records[i].error < r.report.records[i - 1].error;
    }
    const double fin = r.report.records.back().error;
    StudyConfig big = baseline(alpha);
    big.side = 16.0;
    const Run& rb = cached("big" + std::to_string(alpha), big);
    const double fin_big = rb.report.records.back().error;
    const double change = std::abs(fin_big - fin) / fin;
    o.detail << " alpha=" << alpha << ": errors";
    for (const auto& rec : r.report.records) o.detail << " " << rec.error;
    o.detail << ", T doubled final " << fin_big << " (change " << change << ");";
    o.require(decreasing, "errors strictly decrease");
    o.require(fin <= 0.05, "final error <= 0.05");
    o.require(change <= 0.2, "T doubling changes final error <= 20%");
  }
}

void mean_invariance(Outcome& o) {
  for (double alpha : {0.5, 1.5}) {
    const Run& osc = base(alpha);
    StudyConfig c = baseline(alpha);
    c.coefficient.family = "constant";
    c.coefficient.params = {1.0, 0.0};
    const Run& con = cached("const" + std::to_string(alpha), c);
    const bool same = osc.report.lambda_bar == con.report.lambda_bar &&
                      osc.fields.effective->values() == con.fields.effective->values();
    const auto& uo = osc.fields.solutions.back();
    const auto& uc = con.fields.solutions.back();
    const auto u0 = restrict_to(*osc.fields.effective, uo.grid());
    const double gap = difference(uo, uc).norm() / u0.norm();
    o.detail << " alpha=" << alpha << ": effective bit-identical=" << (same ? "yes" : "no") << " final gap=" << gap << ";";
    o.require(same, "bit-identical effective solutions");
    o.require(gap <= 0.05, "final |u_osc - u_const|/|u| <= 0.05");
  }
}

void validator_discrimination(Outcome& o) {
  const auto all_pass = [](const KernelComplianceReport& r) { return r.passed(); };
  const bool p1 = all_pass(validate_kernel(make_builtin_kernel("pareto", 1, 1.5, {0.5, 0.5, 0.0})));
  const bool p2 = all_pass(validate_kernel(make_builtin_kernel("pareto", 2, 0.8, {0.5, 0.5, 0.0})));
  const bool an = all_pass(validate_kernel(make_builtin_kernel("anisotropic-pareto", 2, 1.0, {0.5, 0.5, 0.0})));
  o.require(p1 && p2, "pareto passes");
  o.require(an, "anisotropic-pareto passes");

  const auto vr = validate_kernel(make_builtin_kernel("oscillation-violator", 1, 1.5, {0.5, 0.5, 0.0}));
  bool exactly = true;
  for (const auto& v : vr.verdicts) exactly = exactly && (v.passed == (v.name != "oscillation-decay"));
  const double phi = vr.find("oscillation-decay")->measured;
  o.detail << " violator phi_K=" << phi;
  o.require(exactly, "violator fails exactly oscillation-decay");
  o.require(phi >= 0.3, "violator phi_K >= 0.3");

  const JumpKernel lg = make_builtin_kernel("log-perturbed", 1, 1.5, {0.5, 0.5, 0.0});
  ValidationBudget plain;
  plain.mode = TailMode::Plain;
  ValidationBudget sv;
  sv.mode = TailMode::SlowlyVarying;
  const auto rp = validate_kernel(lg, plain);
  const auto rs = validate_kernel(lg, sv);
  o.detail << " log plain tail ratio=" << rp.find("tail-asymptotics")->measured
           << " slowly-varying=" << rs.find("tail-asymptotics")->measured;
  o.require(!rp.find("tail-asymptotics")->passed, "log-perturbed fails tail asymptotics in plain mode");
  o.require(rs.passed(), "log-perturbed passes in slowly-varying mode");
}

void diagnostic_probes(Outcome& o) {
  const auto k = make_builtin_kernel("pareto", 1, 1.5, {0.5, 0.5, 0.0});
  const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625};
  const BumpPair psi{{-1.1, 0.0}, {1.0, 0.0}, 0.5, 1.0};
  const auto osc = make_builtin_coefficient("separable-trig", 1, {1.0, 0.5});
  const auto rows = weak_convergence_probe(k, osc, mean_lambda(osc), eps, psi, 0.25);
  bool mono = true;
  o.detail << " oscillating |ratio-1|:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    o.detail << " " << std::abs(rows[i].ratio - 1.0);
    if (i > 0) mono = mono && std::abs(rows[i].ratio - 1.0) <= std::abs(rows[i - 1].ratio - 1.0);
  }
  const auto one = make_builtin_coefficient("constant", 1);
  double worst = 0.0;
  for (const auto& r : weak_convergence_probe(k, one, 1.0, eps, psi, 0.25)) worst = std::max(worst, std::abs(r.ratio - 1.0));
  o.detail << "; constant max |ratio-1|=" << worst << ";";
  o.require(mono, "oscillating |ratio-1| nonincreasing");
  o.require(worst <= 1e-3, "constant ratio 1 +- 1e-3");
  for (double alpha : {0.5, 1.5}) {
    const auto& sup = base(alpha).report.mass_escape_sup;
    o.detail << " alpha=" << alpha << " mass escape sup L=" << sup[0].cutoff << ": " << sup[0].value
             << ", L=" << sup[1].cutoff << ": " << sup[1].value << ";";
    o.require(sup.size() == 2 && sup[1].value <= sup[0].value, "mass escape sup nonincreasing in L");
  }
}

std::string bytes_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(Outcome& o) {
  const auto dir = std::filesystem::temp_directory_path() / "homog_acceptance";
  std::filesystem::create_directories(dir);
  for (double alpha : {0.5, 1.5}) {
    const Run& a = base(alpha);
    const Run b = run(baseline(alpha));
    const bool json = to_json(a.report, false).dump() == to_json(b.report, false).dump();
    bool payload = true;
    for (std::size_t i = 0; i < a.fields.solutions.size(); ++i) {
      const std::string pa = (dir / "a.bin").string();
      const std::string pb = (dir / "b.bin").string();
      write_field_binary(pa, a.fields.solutions[i], a.report.records[i].eps);
      write_field_binary(pb, b.fields.solutions[i], b.report.records[i].eps);
      payload = payload && bytes_of(pa) == bytes_of(pb);
    }
    o.detail << " alpha=" << alpha << ": report " << (json ? "identical" : "DIFFERS") << ", payloads "
             << (payload ? "identical" : "DIFFER") << ";";
    o.require(json, "byte-identical JSON report");
    o.require(payload, "byte-identical solution payloads");
  }
  std::filesystem::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"a-priori bounds", apriori_bounds},
      {"operator algebra", operator_algebra},
      {"symbol oracle equivalence", symbol_oracle},
      {"spectral exactness", spectral_exactness},
      {"strong convergence at desk scale", strong_convergence},
      {"mean invariance", mean_invariance},
      {"validator discrimination", validator_discrimination},
      {"diagnostic probes", diagnostic_probes},
      {"determinism", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << " exception: " << e.what();
    }
    std::printf("%s %d %s:%s\n", o.passed ? "PASS" : "FAIL", index, name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.passed) ++failures;
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
