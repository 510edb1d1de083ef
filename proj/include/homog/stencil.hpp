#pragma once

#include <vector>

#include "homog/coefficients.hpp"
#include "homog/grid.hpp"
#include "homog/kernels.hpp"

namespace homog {

struct StencilOptions {
  int image_radius = 8;          // lattice images |n|_inf <= R
  int subsamples = 4;            // s per axis for cell averages near the origin
  bool tail_correction = true;   // add the asymptotic sum over images beyond R
  double tail_cap = 1e-3;        // cap on the residual image-tail estimate times T^d
};

/// Discrete L^eps on a torus grid, with weights
/// w(x_i, x_j) = Lambda(x_i/eps, x_j/eps) q(x_i - x_j).
class EpsilonStencil {
 public:
  const TorusGrid& grid() const { return grid_; }
  double eps() const { return eps_; }
  int period() const { return period_; }
  int image_radius() const { return image_radius_; }

  /// q by flat offset index (offset (ox, oy) -> ox + N oy, components mod N).
  const std::vector<double>& offset_weights() const { return q_; }
  double q(int ox, int oy = 0) const { return q_[grid_.index(ox, oy)]; }
  /// Lambda on node classes (i mod P per axis), P^d x P^d row-major.
  const std::vector<double>& lambda_table() const { return lam_; }
  int node_class(std::size_t flat) const { return cls_[flat]; }
  double weight(std::size_t i, std::size_t j) const;

  /// Largest image-sum correction added to q.
  double image_tail_correction() const { return tail_correction_; }
  /// beta2-based bound on the neglected image sum (before correction).
  double image_tail_bound() const { return tail_bound_; }
  /// Estimated error left after the correction.
  double image_tail_residual() const { return tail_residual_; }

  /// h^d sum_j w_ij; the Jacobi diagonal is m + this.
  const std::vector<double>& row_sums() const { return row_sums_; }

 private:
  friend EpsilonStencil assemble_stencil(const TorusGrid&, const JumpKernel&, const PeriodicCoefficient&, double,
                                         const StencilOptions&);
  explicit EpsilonStencil(const TorusGrid& g) : grid_(g) {}

  TorusGrid grid_;
  double eps_ = 1.0;
  int period_ = 1;
  int image_radius_ = 0;
  std::vector<double> q_;
  std::vector<double> lam_;
  std::vector<int> cls_;
  std::vector<double> row_sums_;
  double tail_correction_ = 0.0;
  double tail_bound_ = 0.0;
  double tail_residual_ = 0.0;
};

/// Throws CommensurabilityError unless T/eps and eps/h are integers.
EpsilonStencil assemble_stencil(const TorusGrid& grid, const JumpKernel& kernel, const PeriodicCoefficient& coeff,
                                double eps, const StencilOptions& options = {});

/// v_i = h^d sum_j w_ij (u_j - u_i), rows distributed over OpenMP threads.
DiscreteField apply_operator(const EpsilonStencil& stencil, const DiscreteField& u);

/// Single-threaded reference; bit-identical to apply_operator.
DiscreteField apply_operator_serial(const EpsilonStencil& stencil, const DiscreteField& u);

/// 1/2 sum_{i,j} w_ij (u_i - u_j)^2 h^{2d}.
double energy_form(const EpsilonStencil& stencil, const DiscreteField& u);

/// h^{2d} sum_i sum_z g(z) (u_{i+z} - u_i)^2 with
/// g(z) = sum_n |z + T n|^{-d-alpha} 1{|z + T n| > cutoff} plus the image tail.
double fractional_energy_tail(const DiscreteField& u, double alpha, double cutoff, int image_radius = 8);

/// Sum over lattice images beyond R of k(y)|y|^{-d-alpha}, evaluated at the
/// offset z (d = 1) or as a z-independent constant (d = 2). `angular` gives
/// k; in d = 1 only k(+1) = k(-1) is used.
double image_tail_sum(int dim, double side, double alpha, int image_radius, double z,
                      const AngularDensity& angular);

}  // namespace homog
