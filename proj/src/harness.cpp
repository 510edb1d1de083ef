#include "homog/harness.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homog/error.hpp"

namespace homog {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool is_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

/// Gauss-Legendre nodes and weights of order 8 on [lo, hi], split into panels.
struct Rule1d {
  std::vector<double> x;
  std::vector<double> w;
};

Rule1d panel_rule(double lo, double hi, int panels) {
  using GL = boost::math::quadrature::gauss<double, 8>;
  const auto& a = GL::abscissa();
  const auto& wt = GL::weights();
  Rule1d r;
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(c - half * a[i]);
      r.w.push_back(half * wt[i]);
      r.x.push_back(c + half * a[i]);
      r.w.push_back(half * wt[i]);
    }
  }
  return r;
}

std::vector<std::pair<Point, double>> box_rule(int dim, const Point& centre, double radius, int panels) {
  const Rule1d rx = panel_rule(centre[0] - radius, centre[0] + radius, panels);
  std::vector<std::pair<Point, double>> out;
  if (dim == 1) {
    for (std::size_t i = 0; i < rx.x.size(); ++i) out.push_back({{rx.x[i], 0.0}, rx.w[i]});
    return out;
  }
  const Rule1d ry = panel_rule(centre[1] - radius, centre[1] + radius, panels);
  for (std::size_t j = 0; j < ry.x.size(); ++j) {
    for (std::size_t i = 0; i < rx.x.size(); ++i) out.push_back({{rx.x[i], ry.x[j]}, rx.w[i] * ry.w[j]});
  }
  return out;
}

}  // namespace

std::vector<double> StudyConfig::schedule() const {
  if (!eps.empty()) {
    std::vector<double> s = eps;
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
  }
  std::vector<double> s;
  for (int j = j0; j <= j1; ++j) s.push_back(side / std::exp2(j));
  return s;
}

int StudyConfig::points_for(double e) const {
  const double n = rho * side / e;
  if (!is_integer(n)) throw CommensurabilityError("rho T / eps must be an integer, got " + std::to_string(n));
  return static_cast<int>(std::lround(n));
}

void check_config(const StudyConfig& c) {
  check_dimension(c.dim);
  if (!(c.alpha > 0.0 && c.alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  if (!(c.m > 0.0)) throw InvalidArgument("m must be positive");
  if (!(c.side > 0.0)) throw InvalidArgument("torus side T must be positive");
  if (c.rho < 1) throw InvalidArgument("rho must be a positive integer");
  if (c.eps.empty() && c.j1 < c.j0) throw InvalidArgument("empty eps schedule (j1 < j0)");
  for (double e : c.schedule()) {
    if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("every eps must lie in (0, 1], got " + std::to_string(e));
    if (!is_integer(c.side / e)) {
      throw CommensurabilityError("T/eps must be an integer: T = " + std::to_string(c.side) +
                                  ", eps = " + std::to_string(e));
    }
    const int n = c.points_for(e);
    if (n < 4 || n % 2 != 0) throw InvalidArgument("implied points per axis must be even and >= 4");
  }
  if (c.rhs.type == "gaussian") {
    if (!(c.rhs.width > 0.0)) throw InvalidArgument("rhs width must be positive");
    if (4.0 * c.rhs.width > c.side / 4.0 + 1e-12) {
      throw InvalidArgument("rhs gaussian must fit the central quarter: need 4 width <= T/4");
    }
  } else if (c.rhs.type != "harmonics" && c.rhs.type != "zero") {
    throw InvalidArgument("unknown rhs type '" + c.rhs.type + "'");
  }
  for (double fr : c.diagnostics.mass_escape_fractions) {
    if (!(fr > 0.0 && 2.0 * fr <= 0.5 + 1e-12)) throw InvalidArgument("mass escape cutoff must satisfy 2L <= T/2");
  }
}

JumpKernel build_kernel(const StudyConfig& c) { return make_builtin_kernel(c.kernel.family, c.dim, c.alpha, c.kernel.params); }

PeriodicCoefficient build_coefficient(const StudyConfig& c) {
  return make_builtin_coefficient(c.coefficient.family, c.dim, c.coefficient.params);
}

DiscreteField build_rhs(const StudyConfig& c, const TorusGrid& grid) {
  const double T = grid.side();
  const int d = grid.dim();
  if (c.rhs.type == "zero") return DiscreteField(grid);
  if (c.rhs.type == "harmonics") {
    const double w = 2.0 * std::numbers::pi / T;
    return DiscreteField::from_function(grid, [&](const Point& x) {
      double s = 0.0;
      for (const auto& hm : c.rhs.harmonics) s += hm.amplitude * std::cos(w * (hm.k[0] * x[0] + hm.k[1] * x[1]));
      return c.rhs.amplitude * s;
    });
  }
  const double w2 = 2.0 * c.rhs.width * c.rhs.width;
  return DiscreteField::from_function(grid, [&](const Point& x) {
    double s = 0.0;
    for (int ny = (d == 2 ? -1 : 0); ny <= (d == 2 ? 1 : 0); ++ny) {
      for (int nx = -1; nx <= 1; ++nx) {
        const double dx = x[0] - 0.5 * T + nx * T;
        const double dy = d == 2 ? x[1] - 0.5 * T + ny * T : 0.0;
        s += std::exp(-(dx * dx + dy * dy) / w2);
      }
    }
    return c.rhs.amplitude * s;
  });
}

nlohmann::ordered_json to_json(const StudyConfig& c) {
  nlohmann::ordered_json j;
  j["dim"] = c.dim;
  j["alpha"] = c.alpha;
  j["m"] = c.m;
  j["T"] = c.side;
  j["rho"] = c.rho;
  j["schedule"] = c.schedule();
  nlohmann::ordered_json k;
  k["family"] = c.kernel.family;
  k["inner_radius"] = c.kernel.params.inner_radius;
  k["anisotropy"] = c.kernel.params.anisotropy;
  k["core_noise"] = c.kernel.params.core_noise;
  j["kernel"] = k;
  nlohmann::ordered_json co;
  co["family"] = c.coefficient.family;
  co["value"] = c.coefficient.params.value;
  co["amplitude"] = c.coefficient.params.amplitude;
  co["mean_quadrature"] = c.coefficient.mean_quadrature;
  j["coefficient"] = co;
  nlohmann::ordered_json r;
  r["type"] = c.rhs.type;
  r["width"] = c.rhs.width;
  r["amplitude"] = c.rhs.amplitude;
  nlohmann::ordered_json hs = nlohmann::ordered_json::array();
  for (const auto& h : c.rhs.harmonics) hs.push_back({{"k", h.k}, {"amplitude", h.amplitude}});
  r["harmonics"] = hs;
  j["rhs"] = r;
  j["solver"] = {{"tol", c.solver.tol}, {"maxit", c.solver.maxit}, {"jacobi", c.solver.jacobi}};
  j["stencil"] = {{"image_radius", c.stencil.image_radius},
                  {"subsamples", c.stencil.subsamples},
                  {"tail_correction", c.stencil.tail_correction},
                  {"tail_cap", c.stencil.tail_cap}};
  j["symbol_angular"] = c.symbol_angular;
  const auto& dg = c.diagnostics;
  j["diagnostics"] = {{"energy_tail", dg.energy_tail},
                      {"translation", dg.translation},
                      {"mass_escape", dg.mass_escape},
                      {"translation_shifts", dg.translation_shifts},
                      {"mass_escape_fractions", dg.mass_escape_fractions},
                      {"weak_probe",
                       {{"enabled", dg.weak.enabled},
                        {"delta", dg.weak.delta},
                        {"psi_radius", dg.weak.psi_radius},
                        {"x0", {dg.weak.x0[0], dg.weak.x0[1]}},
                        {"y0", {dg.weak.y0[0], dg.weak.y0[1]}}}}};
  j["validation"] = to_json(c.validation, c.dim);
  j["allow_invalid_kernel"] = c.allow_invalid_kernel;
  j["acceptance_threshold"] = optional_json(c.acceptance_threshold);
  return j;
}

double mass_escape(const DiscreteField& u, double cutoff) {
  const TorusGrid& g = u.grid();
  const double T = g.side();
  if (!(cutoff > 0.0) || 2.0 * cutoff > 0.5 * T * (1.0 + 1e-12)) {
    throw InvalidArgument("mass_escape cutoff does not fit: need 0 < 2L <= T/2");
  }
  std::vector<double> terms(u.size());
  const Point c{0.5 * T, g.dim() == 2 ? 0.5 * T : 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = norm(g.node(i) - c);
    const double phi = r <= cutoff ? 0.0 : (r >= 2.0 * cutoff ? 1.0 : (r - cutoff) / cutoff);
    terms[i] = phi * u[i] * u[i];
  }
  double s = 0.0;
  for (double t : terms) s += t;
  return g.cell_volume() * s;
}

double BumpPair::operator()(const Point& x, const Point& y) const {
  const auto bump = [this](double t) { return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; };
  return amplitude * bump(norm(x - x0) / radius) * bump(norm(y - y0) / radius);
}

std::vector<WeakProbeRow> weak_convergence_probe(const JumpKernel& kernel, const PeriodicCoefficient& coeff,
                                                 double lambda_bar, const std::vector<double>& eps_list,
                                                 const BumpPair& psi, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (!(psi.radius > 0.0)) throw InvalidArgument("psi radius must be positive");
  if (norm(psi.x0 - psi.y0) - 2.0 * psi.radius < delta) {
    throw InvalidArgument("psi support violates |x - y| >= delta");
  }
  if (norm(psi.x0) + norm(psi.y0) + 2.0 * psi.radius > 1.0 / delta) {
    throw InvalidArgument("psi support violates |x| + |y| <= 1/delta");
  }
  const int d = kernel.dim();
  const double e = d + kernel.alpha();
  const AngularDensity& k = kernel.angular();
  std::vector<WeakProbeRow> rows;
  for (double eps : eps_list) {
    const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * psi.radius / (0.5 * eps) - 1e-9)));
    const auto X = box_rule(d, psi.x0, psi.radius, panels);
    const auto Y = box_rule(d, psi.y0, psi.radius, panels);
    std::vector<double> lhs_rows(X.size());
    std::vector<double> rhs_rows(X.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < X.size(); ++i) {
      const auto& [x, wx] = X[i];
      double l = 0.0;
      double r = 0.0;
      for (const auto& [y, wy] : Y) {
        const double p = psi(x, y);
        if (p == 0.0) continue;
        const Point z = x - y;
        const double rz = norm(z);
        l += wy * p * rescaled_density(kernel, eps, z) * coeff((1.0 / eps) * x, (1.0 / eps) * y);
        r += wy * p * k((1.0 / rz) * z) * std::pow(rz, -e);
      }
      lhs_rows[i] = wx * l;
      rhs_rows[i] = wx * r * lambda_bar;
    }
    WeakProbeRow row;
    row.eps = eps;
    for (std::size_t i = 0; i < X.size(); ++i) {
      row.lhs += lhs_rows[i];
      row.rhs += rhs_rows[i];
    }
    row.ratio = (row.lhs == 0.0 && row.rhs == 0.0) ? 1.0 : row.lhs / row.rhs;
    rows.push_back(row);
  }
  return rows;
}

FitResult fit_rate(const std::vector<EpsRecord>& records) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : records) {
    if (r.converged && r.error > 0.0) {
      xs.push_back(std::log(r.eps));
      ys.push_back(std::log(r.error));
    }
  }
  if (xs.size() < 2) throw InvalidArgument("fit_rate needs at least two converged records");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_rate needs at least two distinct eps values");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - *f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (*f.intercept + *f.slope * xs[i]);
    ss += res * res;
  }
  f.residual = std::sqrt(ss / n);
  f.points = static_cast<int>(xs.size());
  return f;
}

bool ConvergenceReport::all_converged() const {
  return std::all_of(records.begin(), records.end(), [](const EpsRecord& r) { return r.converged; });
}

ConvergenceReport run_study(const StudyConfig& config) { return run_study(config, nullptr); }

ConvergenceReport run_study(const StudyConfig& config, StudyFields* fields) {
  const auto t_start = Clock::now();
  check_config(config);
  ConvergenceReport rep;
  rep.config = to_json(config);

  const JumpKernel kernel = build_kernel(config);
  const PeriodicCoefficient coeff = build_coefficient(config);
  rep.kernel = describe(kernel);
  const KernelComplianceReport kr = validate_kernel(kernel, config.validation);
  rep.kernel_validation = to_json(kr);
  if (!kr.passed()) {
    std::string failed;
    for (const auto& v : kr.verdicts) {
      if (!v.passed) failed += (failed.empty() ? "" : ", ") + v.name;
    }
    if (!config.allow_invalid_kernel) {
      throw HypothesisViolation("kernel fails validation (" + failed + "); set allow_invalid_kernel to study it anyway");
    }
    rep.kernel_override = true;
    rep.notes.push_back("kernel fails validation (" + failed + "); studied on purpose via allow_invalid_kernel");
  }
  const CoefficientReport cr = validate_coefficient(coeff);
  if (!cr.passed()) throw HypothesisViolation("coefficient fails validation; non-symmetric or unbounded Lambda is not homogenized");

  rep.lambda_bar = mean_lambda(coeff, config.coefficient.mean_quadrature);
  const EffectiveSymbol sym = init_symbol(config.alpha, rep.lambda_bar, kernel.angular(), config.symbol_angular);
  nlohmann::ordered_json sj;
  sj["c_alpha"] = sym.c();
  sj["lambda_bar"] = sym.lambda_bar();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : sym.cross_checks()) {
    checks.push_back({{"xi", {c.xi[0], c.xi[1]}}, {"symbol", c.symbol}, {"brute_force", c.brute_force}, {"rel_diff", c.rel_diff}});
  }
  sj["cross_checks"] = checks;
  sj["warnings"] = sym.warnings();
  rep.symbol = sj;
  for (const auto& w : sym.warnings()) rep.notes.push_back(w);

  const std::vector<double> schedule = config.schedule();
  const double finest = schedule.back();
  const TorusGrid fine_grid(config.dim, config.side, config.points_for(finest));
  const DiscreteField fine_f = build_rhs(config, fine_grid);
  const DiscreteField fine_u = solve_effective(fine_grid, config.m, fine_f, sym);
  rep.effective_norm = fine_u.norm();

  const double tol = config.solver.tol;
  std::vector<double> escape_sup(config.diagnostics.mass_escape_fractions.size(), 0.0);
  for (double eps : schedule) {
    const auto t0 = Clock::now();
    const TorusGrid grid(config.dim, config.side, config.points_for(eps));
    const DiscreteField f = build_rhs(config, grid);
    const DiscreteField u0 = fine_grid.points() % grid.points() == 0 ? restrict_to(fine_u, grid)
                                                                     : solve_effective(grid, config.m, f, sym);
    const EpsilonStencil st = assemble_stencil(grid, kernel, coeff, eps, config.stencil);
    ResolventSolveResult sol = solve_epsilon(st, config.m, f, config.solver);

    EpsRecord r;
    r.eps = eps;
    r.points = grid.points();
    const double u0n = u0.norm();
    const double diff = difference(sol.u, u0).norm();
    r.error = u0n > 0.0 ? diff / u0n : diff;
    r.iterations = sol.iterations;
    r.residual = sol.residual;
    r.converged = sol.converged;
    r.c1_ratio = sol.c1_ratio;
    r.c2_ratio = sol.c2_ratio;
    r.c1_ok = sol.c1_ok;
    r.c2_ok = sol.c2_ok;
    r.energy = sol.energy;
    r.green_defect = sol.green_defect;
    r.image_tail_residual = st.image_tail_residual();
    if (config.diagnostics.energy_tail) {
      const double cutoff = kernel.tail_radius() * eps;
      const double tail = fractional_energy_tail(sol.u, config.alpha, cutoff, config.stencil.image_radius);
      r.energy_tail = tail;
      if (kernel.mode() == TailMode::Plain && sol.energy > 0.0) {
        r.c4_ratio = coeff.gamma1() * kernel.beta1() * tail / (2.0 * sol.energy);
      }
    }
    if (config.diagnostics.translation) {
      for (double s : config.diagnostics.translation_shifts) {
        const double steps = s / grid.spacing();
        if (!is_integer(steps) || steps < 1.0) continue;
        TranslationEntry te;
        te.shift = s;
        te.modulus = translation_modulus(sol.u, {static_cast<int>(std::lround(steps)), 0});
        te.ratio = te.modulus / std::pow(s, config.alpha);
        r.translation.push_back(te);
      }
    }
    if (config.diagnostics.mass_escape) {
      for (std::size_t k = 0; k < config.diagnostics.mass_escape_fractions.size(); ++k) {
        const double L = config.diagnostics.mass_escape_fractions[k] * config.side;
        const double v = mass_escape(sol.u, L);
        r.mass_escape.push_back({L, v});
        escape_sup[k] = std::max(escape_sup[k], v);
      }
    }
    if (!rep.records.empty() && r.error > rep.records.back().error + 10.0 * tol) {
      r.monotone = false;
      rep.notes.push_back("error increased at eps = " + std::to_string(eps) + " (flagged, not failed)");
    }
    if (!r.converged) rep.notes.push_back("CG did not converge at eps = " + std::to_string(eps) + "; excluded from the fit");
    r.seconds = seconds_since(t0);
    rep.records.push_back(r);
    if (fields != nullptr) fields->solutions.push_back(std::move(sol.u));
  }
  if (fields != nullptr) fields->effective = fine_u;
  if (config.diagnostics.mass_escape) {
    for (std::size_t k = 0; k < escape_sup.size(); ++k) {
      rep.mass_escape_sup.push_back({config.diagnostics.mass_escape_fractions[k] * config.side, escape_sup[k]});
    }
  }

  try {
    rep.fit = fit_rate(rep.records);
  } catch (const InvalidArgument& e) {
    rep.fit.flag = e.what();
    rep.fit.points = static_cast<int>(std::count_if(rep.records.begin(), rep.records.end(),
                                                    [](const EpsRecord& r) { return r.converged && r.error > 0.0; }));
  }

  const auto& wk = config.diagnostics.weak;
  if (wk.enabled) {
    if (config.dim == 1) {
      BumpPair psi{wk.x0, wk.y0, wk.psi_radius, 1.0};
      rep.weak_probe = weak_convergence_probe(kernel, coeff, rep.lambda_bar, schedule, psi, wk.delta);
    } else {
      rep.notes.push_back("weak convergence probe skipped in two dimensions (4-D quadrature cost)");
    }
  }
  rep.total_seconds = seconds_since(t_start);
  return rep;
}

nlohmann::ordered_json to_json(const ConvergenceReport& rep, bool include_timing) {
  nlohmann::ordered_json j;
  j["config"] = rep.config;
  j["kernel"] = rep.kernel;
  j["kernel_validation"] = rep.kernel_validation;
  j["kernel_override"] = rep.kernel_override;
  j["lambda_bar"] = rep.lambda_bar;
  j["symbol"] = rep.symbol;
  j["effective_norm"] = rep.effective_norm;
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : rep.records) {
    nlohmann::ordered_json e;
    e["eps"] = r.eps;
    e["N"] = r.points;
    e["error"] = r.error;
    e["iterations"] = r.iterations;
    e["residual"] = r.residual;
    e["converged"] = r.converged;
    e["c1_ratio"] = r.c1_ratio;
    e["c2_ratio"] = r.c2_ratio;
    e["c1_ok"] = r.c1_ok;
    e["c2_ok"] = r.c2_ok;
    e["energy"] = r.energy;
    e["green_defect"] = r.green_defect;
    e["energy_tail"] = optional_json(r.energy_tail);
    e["c4_ratio"] = optional_json(r.c4_ratio);
    nlohmann::ordered_json tr = nlohmann::ordered_json::array();
    for (const auto& t : r.translation) tr.push_back({{"shift", t.shift}, {"modulus", t.modulus}, {"ratio", t.ratio}});
    e["translation"] = tr;
    nlohmann::ordered_json me = nlohmann::ordered_json::array();
    for (const auto& m : r.mass_escape) me.push_back({{"L", m.cutoff}, {"value", m.value}});
    e["mass_escape"] = me;
    e["image_tail_residual"] = r.image_tail_residual;
    e["monotone"] = r.monotone;
    recs.push_back(e);
  }
  j["records"] = recs;
  nlohmann::ordered_json fit;
  fit["slope"] = optional_json(rep.fit.slope);
  fit["intercept"] = optional_json(rep.fit.intercept);
  fit["residual"] = optional_json(rep.fit.residual);
  fit["points"] = rep.fit.points;
  fit["flag"] = rep.fit.flag;
  j["fit"] = fit;
  nlohmann::ordered_json wp = nlohmann::ordered_json::array();
  for (const auto& w : rep.weak_probe) wp.push_back({{"eps", w.eps}, {"lhs", w.lhs}, {"rhs", w.rhs}, {"ratio", w.ratio}});
  j["weak_probe"] = wp;
  nlohmann::ordered_json ms = nlohmann::ordered_json::array();
  for (const auto& m : rep.mass_escape_sup) ms.push_back({{"L", m.cutoff}, {"sup_over_eps", m.value}});
  j["mass_escape_sup"] = ms;
  j["notes"] = rep.notes;
  nlohmann::ordered_json ver;
  ver["homog"] = "1.0.0";
  ver["boost"] = std::string(BOOST_LIB_VERSION);
  ver["fftw"] = std::string(fftw_version);
  ver["compiler"] = std::string(__VERSION__);
  j["versions"] = ver;
  if (include_timing) {
    nlohmann::ordered_json t;
    t["total_seconds"] = rep.total_seconds;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& r : rep.records) per.push_back(r.seconds);
    t["per_eps_seconds"] = per;
    j["timing"] = t;
  }
  return j;
}

std::string to_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "eps,N,error,iterations,c1_ratio,c2_ratio,energy\n";
  for (const auto& r : rep.records) {
    os << r.eps << ',' << r.points << ',' << r.error << ',' << r.iterations << ',' << r.c1_ratio << ','
       << r.c2_ratio << ',' << r.energy << '\n';
  }
  return os.str();
}

}  // namespace homog
