#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "surfeit/grid.hpp"

namespace surfeit {

// Tangential derivative along the oriented boundary: spectral per component,
// multiplied by the component orientation so the result is the derivative
// with respect to the boundary orientation of the surface (surface on the
// left), independent of node storage order.  Nyquist modes are dropped.
BoundaryFunction derivative_gamma(const BoundaryFunction& f);

// Antiderivative along the oriented boundary, zero-mean normalized per
// component.  Throws NonZeroMean when a component mean of f exceeds
// 1e-10 * (1 + sup|f|): such data has no periodic antiderivative.
BoundaryFunction integrate_J(const BoundaryFunction& f);

// Per-component mean removal (projection onto mean-free functions).
BoundaryFunction project_zero_mean(const BoundaryFunction& f);

// max over derivative orders j <= l of sup_nodes |d^j f / d gamma^j|.
double cl_norm(const BoundaryFunction& f, int l);

// Dense discretization of a Dirichlet-to-Neumann map on a BoundaryGrid.
// The matrix acts on node values; it must annihilate constants, produce
// mean-free output (both against the length element), and be L2-self-adjoint,
// each within tol_dn (checked by validate()).
class DNMatrix {
 public:
  DNMatrix(GridPtr grid, Eigen::MatrixXd matrix, std::string provenance,
           double tol_dn);

  // Diagonal Fourier multiplier lambda(c, k) acting per component (k is the
  // integer mode index of the component).  The multiplier must be even in k.
  static DNMatrix from_multiplier(GridPtr grid,
                                  const std::function<double(int, int)>& lambda,
                                  std::string provenance, double tol_dn);

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& matrix() const { return a_; }
  const std::string& provenance() const { return provenance_; }
  double tol_dn() const { return tol_dn_; }

  BoundaryFunction apply(const BoundaryFunction& f) const;

  DNMatrix operator+(const DNMatrix& o) const;
  DNMatrix operator-(const DNMatrix& o) const;
  DNMatrix scaled(double a) const;

  // Residuals of the three structural invariants, normalized by the matrix
  // scale; validate() throws SolverFailure when any exceeds tol_dn.
  double constant_residual() const;
  double mean_residual() const;
  double selfadjoint_residual() const;
  void validate() const;

 private:
  GridPtr grid_;
  Eigen::MatrixXd a_;
  std::string provenance_;
  double tol_dn_;
};

BoundaryFunction apply_dn(const DNMatrix& dn, const BoundaryFunction& f);

// Operator norm H1 -> L2 of (typically a difference of) DN matrices,
// estimated on the span of modes |k| <= k_max per component.  The H1 weight
// uses physical wavenumbers kappa = 2 pi k / length.
double op_norm_h1_l2(const DNMatrix& dn, int k_max = 32);

// Real band-limited test function: random modes |k| <= k_max per component,
// mean-free per component, deterministic in seed.
BoundaryFunction random_band_function(GridPtr grid, int k_max, unsigned seed);

}  // namespace surfeit
