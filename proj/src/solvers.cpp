#include "homog/solvers.hpp"

#include <cmath>

#include "homog/error.hpp"

namespace homog {
namespace {

DiscreteField shifted_apply(const EpsilonStencil& s, double m, const DiscreteField& u) {
  DiscreteField v = apply_operator(s, u);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m * u[i] - v[i];
  return v;
}

}  // namespace

ResolventSolveResult solve_epsilon(const EpsilonStencil& stencil, double m, const DiscreteField& f,
                                   const SolveOptions& options) {
  if (!(m > 0.0)) throw InvalidArgument("m must be positive");
  if (!(options.tol > 0.0 && options.tol < 1.0)) throw InvalidArgument("tol must lie in (0, 1)");
  require_same_grid(stencil.grid(), f.grid(), "solve_epsilon");
  const TorusGrid& g = f.grid();
  ResolventSolveResult res{DiscreteField(g)};
  const double fn = f.norm();
  if (fn == 0.0) {
    res.converged = true;
    return res;
  }
  std::vector<double> diag(g.size(), 1.0);
  if (options.jacobi) {
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = m + stencil.row_sums()[i];
  }
  const auto precondition = [&](const DiscreteField& r) {
    DiscreteField z(g);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = r[i] / diag[i];
    return z;
  };

  DiscreteField& u = res.u;
  DiscreteField r = f;
  DiscreteField z = precondition(r);
  DiscreteField p = z;
  double rz = inner(r, z);
  double rr = inner(r, r);
  const double target = options.tol * fn;
  int it = 0;
  while (it < options.maxit) {
    if (std::sqrt(rr) <= target) {
      // Confirm with the true residual before stopping.
      const DiscreteField ar = shifted_apply(stencil, m, u);
      const DiscreteField tr = difference(f, ar);
      if (tr.norm() <= target) break;
      r = tr;
      z = precondition(r);
      p = z;
      rz = inner(r, z);
      rr = inner(r, r);
    }
    const DiscreteField ap = shifted_apply(stencil, m, p);
    const double pap = inner(p, ap);
    if (!(pap > 0.0)) {
      res.energy_monotone = false;
      break;
    }
    const double a = rz / pap;
    // Energy-norm error decrease per step is a * rz.
    if (!(a > 0.0)) res.energy_monotone = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] += a * p[i];
      r[i] -= a * ap[i];
    }
    z = precondition(r);
    const double rz_new = inner(r, z);
    rr = inner(r, r);
    const double b = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + b * p[i];
    ++it;
  }
  res.iterations = it;
  const DiscreteField ar = shifted_apply(stencil, m, u);
  res.residual = difference(f, ar).norm() / fn;
  res.converged = res.residual <= options.tol;

  const double un = u.norm();
  res.energy = energy_form(stencil, u);
  res.c1_ratio = m * un / fn;
  res.c2_ratio = res.energy / (fn * fn / m);
  res.c1_ok = res.c1_ratio <= 1.0 + 10.0 * options.tol;
  res.c2_ok = res.c2_ratio <= 1.0 + 10.0 * options.tol;
  res.green_defect = std::abs(m * un * un + res.energy - inner(f, u)) / (fn * fn);
  return res;
}

}  // namespace homog
