#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "homog/config.hpp"
#include "homog/error.hpp"
#include "homog/harness.hpp"

namespace fs = std::filesystem;
using homog::RunConfig;

namespace {

enum Exit { kOk = 0, kOperational = 1, kVerdict = 2, kNotConverged = 3 };

struct Flags {
  std::string config;
  std::string out;
  std::string eps;
  std::string format;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  int verbose = 0;
  bool quiet = false;
};

struct Session {
  RunConfig rc;
  fs::path out;
  bool json = true;
  bool csv = true;
  bool svg = true;
  int verbosity = 1;
};

Session open_session(const Flags& f) {
  Session s;
  s.rc = homog::load_config(f.config);
  if (f.seed) {
    s.rc.seed = *f.seed;
    s.rc.study.validation.oscillation.seed = *f.seed;
  }
  if (!f.eps.empty()) s.rc.eps = homog::parse_rational(f.eps);
  std::string dir = s.rc.out_dir;
  if (const char* env = std::getenv(homog::kOutDirEnv); env != nullptr && *env != '\0') dir = env;
  if (!f.out.empty()) dir = f.out;
  s.rc.out_dir = dir;
  s.out = dir;
  fs::create_directories(s.out);
  std::vector<std::string> formats = s.rc.formats;
  if (!f.format.empty()) formats = {f.format};
  const auto has = [&](const char* x) {
    return std::find(formats.begin(), formats.end(), x) != formats.end() ||
           std::find(formats.begin(), formats.end(), "all") != formats.end();
  };
  s.json = has("json");
  s.csv = has("csv");
  s.svg = has("svg");
  s.verbosity = f.quiet ? 0 : s.rc.verbosity + f.verbose;
  if (f.threads > 0) omp_set_num_threads(f.threads);
  return s;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw homog::Error("cannot open '" + p.string() + "' for writing");
  out << text;
  if (!out) throw homog::Error("failed writing '" + p.string() + "'");
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

double require_eps(const Session& s) {
  if (!s.rc.eps) throw homog::InvalidArgument("no eps given: pass --eps or set [output] eps");
  const double eps = *s.rc.eps;
  const auto& c = s.rc.study;
  if (!(eps > 0.0 && eps <= 1.0)) throw homog::InvalidArgument("eps must lie in (0, 1]");
  const double q = c.side / eps;
  if (std::abs(q - std::round(q)) > 1e-9 * q) {
    throw homog::CommensurabilityError("T/eps must be an integer (T = " + std::to_string(c.side) +
                                       ", eps = " + std::to_string(eps) + " gives " + std::to_string(q) + ")");
  }
  return eps;
}

int cmd_validate_kernel(const Flags& f) {
  Session s = open_session(f);
  const homog::JumpKernel k = homog::build_kernel(s.rc.study);
  const homog::KernelComplianceReport rep = homog::validate_kernel(k, s.rc.study.validation);
  nlohmann::ordered_json j;
  j["config"] = homog::to_json(s.rc);
  j["report"] = homog::to_json(rep);
  j["passed"] = rep.passed();
  const fs::path p = s.out / "kernel_report.json";
  write_json(p, j);
  for (const auto& v : rep.verdicts) {
    if (s.verbosity > 0 || !v.passed) {
      std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << " (" << v.condition << ") measured " << v.measured
                << " tolerance " << v.tolerance << "\n";
    }
  }
  if (s.verbosity > 0) std::cout << "wrote " << p.string() << "\n";
  return rep.passed() ? kOk : kVerdict;
}

nlohmann::ordered_json field_sidecar(const Session& s, const homog::DiscreteField& u, double eps) {
  nlohmann::ordered_json j;
  j["config"] = homog::to_json(s.rc);
  j["dim"] = u.grid().dim();
  j["N"] = u.grid().points();
  j["T"] = u.grid().side();
  j["eps"] = eps;
  j["norm"] = u.norm();
  return j;
}

void write_field(const Session& s, const std::string& stem, const homog::DiscreteField& u, double eps,
                 const nlohmann::ordered_json& sidecar) {
  homog::write_field_binary((s.out / (stem + ".bin")).string(), u, eps);
  if (s.csv) homog::write_field_csv((s.out / (stem + ".csv")).string(), u);
  write_json(s.out / (stem + ".json"), sidecar);
  if (s.verbosity > 0) std::cout << "wrote " << (s.out / (stem + ".bin")).string() << "\n";
}

int cmd_solve_eps(const Flags& f) {
  Session s = open_session(f);
  const double eps = require_eps(s);
  const auto& c = s.rc.study;
  const homog::TorusGrid grid(c.dim, c.side, c.points_for(eps));
  const homog::JumpKernel k = homog::build_kernel(c);
  const homog::PeriodicCoefficient lam = homog::build_coefficient(c);
  const homog::EpsilonStencil st = homog::assemble_stencil(grid, k, lam, eps, c.stencil);
  const homog::DiscreteField rhs = homog::build_rhs(c, grid);
  const homog::ResolventSolveResult r = homog::solve_epsilon(st, c.m, rhs, c.solver);
  nlohmann::ordered_json j = field_sidecar(s, r.u, eps);
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  j["energy"] = r.energy;
  j["c1_ratio"] = r.c1_ratio;
  j["c2_ratio"] = r.c2_ratio;
  j["green_defect"] = r.green_defect;
  j["image_tail_residual"] = st.image_tail_residual();
  write_field(s, "u_eps", r.u, eps, j);
  if (s.verbosity > 0) {
    std::cout << "eps " << eps << " N " << grid.points() << " iterations " << r.iterations << " residual "
              << r.residual << " c1_ratio " << r.c1_ratio << " c2_ratio " << r.c2_ratio << "\n";
  }
  if (!r.converged) {
    std::cerr << "CG did not converge (residual " << r.residual << ")\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_solve_eff(const Flags& f) {
  Session s = open_session(f);
  const auto& c = s.rc.study;
  const double eps = s.rc.eps ? require_eps(s) : c.schedule().back();
  const homog::TorusGrid grid(c.dim, c.side, c.points_for(eps));
  const homog::JumpKernel k = homog::build_kernel(c);
  const homog::PeriodicCoefficient lam = homog::build_coefficient(c);
  const double lbar = homog::mean_lambda(lam, c.coefficient.mean_quadrature);
  const homog::EffectiveSymbol sym = homog::init_symbol(c.alpha, lbar, k.angular(), c.symbol_angular);
  const homog::DiscreteField rhs = homog::build_rhs(c, grid);
  const homog::DiscreteField u = homog::solve_effective(grid, c.m, rhs, sym);
  nlohmann::ordered_json j = field_sidecar(s, u, eps);
  j["lambda_bar"] = lbar;
  j["c_alpha"] = sym.c();
  j["c1_ratio"] = rhs.norm() > 0.0 ? c.m * u.norm() / rhs.norm() : 0.0;
  write_field(s, "u_eff", u, eps, j);
  return kOk;
}

int cmd_study(const Flags& f) {
  Session s = open_session(f);
  const homog::ConvergenceReport rep = homog::run_study(s.rc.study);
  nlohmann::ordered_json j = homog::to_json(rep);
  j["run"] = homog::to_json(s.rc)["output"];
  if (s.json) write_json(s.out / "report.json", j);
  if (s.csv) write_text(s.out / "report.csv", homog::to_csv(rep));
  if (s.svg) homog::emit_plot(rep, (s.out / "report.svg").string());
  if (s.verbosity > 0) {
    for (const auto& r : rep.records) {
      std::cout << "eps " << r.eps << " N " << r.points << " error " << r.error << " iterations " << r.iterations
                << (r.converged ? "" : " NOT CONVERGED") << "\n";
    }
    if (rep.fit.slope) {
      std::cout << "slope " << *rep.fit.slope << " residual " << *rep.fit.residual << "\n";
    } else {
      std::cout << "slope absent: " << rep.fit.flag << "\n";
    }
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
  }
  bool ok = rep.all_converged() && !rep.records.empty();
  if (ok && s.rc.study.acceptance_threshold) {
    const double final_error = rep.records.back().error;
    ok = final_error < *s.rc.study.acceptance_threshold;
    if (!ok) std::cerr << "final error " << final_error << " above threshold " << *s.rc.study.acceptance_threshold << "\n";
  }
  return ok ? kOk : kVerdict;
}

int cmd_probe_weak(const Flags& f) {
  Session s = open_session(f);
  if (!s.rc.probe_delta_given) throw homog::ConfigError(f.config + ": [probe] delta: required by probe-weak");
  const auto& c = s.rc.study;
  const auto& w = c.diagnostics.weak;
  const homog::JumpKernel k = homog::build_kernel(c);
  const homog::PeriodicCoefficient lam = homog::build_coefficient(c);
  const double lbar = homog::mean_lambda(lam, c.coefficient.mean_quadrature);
  const homog::BumpPair psi{w.x0, w.y0, w.psi_radius, 1.0};
  const auto rows = homog::weak_convergence_probe(k, lam, lbar, c.schedule(), psi, w.delta);
  nlohmann::ordered_json j;
  j["config"] = homog::to_json(s.rc);
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    t.push_back({{"eps", r.eps}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}});
    if (s.verbosity > 0) std::cout << "eps " << r.eps << " ratio " << r.ratio << "\n";
  }
  j["rows"] = t;
  write_json(s.out / "weak_probe.json", j);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal periodic homogenization: kernel validation, solves and convergence studies"};
  app.require_subcommand(1);
  Flags flags;
  const auto common = [&](CLI::App* sub, bool eps) {
    sub->add_option("--config", flags.config, "Study config (.ini or .json)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory (overrides NLHOMOG_OUT_DIR and [output] dir)");
    sub->add_option("--format", flags.format, "Report formats")->check(CLI::IsMember({"json", "csv", "all"}));
    sub->add_option("--threads", flags.threads, "OpenMP threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "Seed for the sampling validators");
    sub->add_flag("-v,--verbose", flags.verbose, "More output");
    sub->add_flag("-q,--quiet", flags.quiet, "Only errors and failed verdicts");
    if (eps) sub->add_option("--eps", flags.eps, "eps as p/q or decimal");
  };
  std::function<int(const Flags&)> run;
  const auto add = [&](const char* name, const char* help, bool eps, int (*fn)(const Flags&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub, eps);
    sub->callback([&run, fn] { run = fn; });
  };
  add("validate-kernel", "Check the kernel hypotheses on samples", false, cmd_validate_kernel);
  add("solve-eps", "Solve the eps-problem on one grid", true, cmd_solve_eps);
  add("solve-eff", "Solve the effective problem spectrally", true, cmd_solve_eff);
  add("study", "Run the eps-sweep and write report, table and plot", false, cmd_study);
  add("probe-weak", "Weak-convergence ratio table", false, cmd_probe_weak);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kOperational;
  }
  try {
    return run(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOperational;
  }
}
