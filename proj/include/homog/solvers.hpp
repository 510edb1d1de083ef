#pragma once

#include "homog/grid.hpp"
#include "homog/stencil.hpp"

namespace homog {

struct SolveOptions {
  double tol = 1e-8;  // relative residual
  int maxit = 2000;
  bool jacobi = false;  // diagonal m + row-sum preconditioner
};

struct ResolventSolveResult {
  DiscreteField u;
  int iterations = 0;
  double residual = 0.0;  // true ||(m - L)u - f|| / ||f||
  bool converged = false;
  double energy = 0.0;
  double c1_ratio = 0.0;  // m ||u|| / ||f||
  double c2_ratio = 0.0;  // energy / (||f||^2 / m)
  bool c1_ok = true;
  bool c2_ok = true;
  /// |m ||u||^2 + energy - <f, u>| / ||f||^2
  double green_defect = 0.0;
  /// Every CG step reduced the energy norm of the error.
  bool energy_monotone = true;
};

/// Matrix-free CG on u -> m u - L^eps u.
ResolventSolveResult solve_epsilon(const EpsilonStencil& stencil, double m, const DiscreteField& f,
                                   const SolveOptions& options = {});

}  // namespace homog
