#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <vector>

#include "surfeit/errors.hpp"

namespace surfeit {

using Complex = std::complex<double>;

// One closed boundary curve, discretized by n equispaced nodes.  `orientation`
// is +1 when the stored node order (increasing arc parameter) agrees with the
// boundary orientation of the surface (surface on the left), -1 otherwise.
struct GridComponent {
  double length = 0.0;
  int n = 0;
  int orientation = +1;
};

class BoundaryGrid;
using GridPtr = std::shared_ptr<const BoundaryGrid>;

// Disjoint union of equispaced periodic grids, one per boundary component.
// Node (c, j) sits at arc parameter s = j * length_c / n_c.  A grid may be
// "doubled": the boundary of the orientable double cover, realized as two
// index-matched copies of every base component with a node involution, the
// projection to the base, and the ±1 sheet function sigma.
class BoundaryGrid {
 public:
  static GridPtr circle(double length, int n);
  static GridPtr make(std::vector<GridComponent> components);

  // Two copies of each base component.  Copy 0 keeps the base orientation and
  // sigma = +1; copy 1 runs against it (the deck involution reverses boundary
  // orientation) and carries sigma = -1.  The involution pairs equal node
  // indices of the two copies; the projection forgets the copy.
  static GridPtr doubled(GridPtr base);

  int num_components() const { return static_cast<int>(comps_.size()); }
  const GridComponent& component(int c) const { return comps_.at(c); }
  int size() const { return total_; }
  int offset(int c) const { return offsets_.at(c); }
  int component_of(int node) const;
  double spacing(int c) const { return comps_.at(c).length / comps_.at(c).n; }
  double max_spacing() const;
  double node_s(int c, int j) const { return spacing(c) * j; }

  bool is_doubled() const { return base_ != nullptr; }
  GridPtr base() const { return base_; }
  int involution(int node) const;
  double sigma(int node) const;
  int base_node(int node) const;
  int base_component(int c) const;

  // Trapezoid quadrature weights (the spacing of each node's component).
  const Eigen::VectorXd& weights() const { return weights_; }
  double total_length() const;
  bool same_shape(const BoundaryGrid& other) const;

 private:
  explicit BoundaryGrid(std::vector<GridComponent> components, GridPtr base);

  std::vector<GridComponent> comps_;
  std::vector<int> offsets_;
  int total_ = 0;
  Eigen::VectorXd weights_;
  GridPtr base_;  // null unless doubled
};

// Immutable complex-valued grid function with an eagerly computed Fourier
// representation per component (coefficients c_k with values v_j =
// sum_k c_k exp(2 pi i k j / n), k = -n/2 .. n/2-1 stored in FFT order).
class BoundaryFunction {
 public:
  BoundaryFunction(GridPtr grid, Eigen::VectorXcd values);
  static BoundaryFunction zero(GridPtr grid);
  static BoundaryFunction from_real(GridPtr grid, const Eigen::VectorXd& v);
  // exp(i k_phys s) on component c, zero elsewhere; k is the integer mode
  // index of the component (physical wavenumber 2 pi k / length).
  static BoundaryFunction harmonic(GridPtr grid, int c, int k);

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXcd& values() const { return v_; }
  Complex value(int node) const { return v_(node); }
  int size() const { return static_cast<int>(v_.size()); }

  // Fourier coefficients of component c, FFT index order.
  const Eigen::VectorXcd& fourier(int c) const { return hat_.at(c); }
  static BoundaryFunction from_fourier(GridPtr grid,
                                       std::vector<Eigen::VectorXcd> hat);

  Eigen::Block<const Eigen::VectorXcd, -1, 1> segment(int c) const;

  bool is_real(double tol = 1e-10) const;
  BoundaryFunction real_part() const;
  BoundaryFunction imag_part() const;
  BoundaryFunction conjugate() const;

  BoundaryFunction operator+(const BoundaryFunction& g) const;
  BoundaryFunction operator-(const BoundaryFunction& g) const;
  BoundaryFunction operator*(Complex a) const;
  BoundaryFunction pointwise(const BoundaryFunction& g) const;

  double sup_norm() const;
  double l2_norm() const;
  Complex l2_inner(const BoundaryFunction& g) const;  // int f conj(g) ds
  Complex mean(int c) const;

 private:
  void check_same_grid(const BoundaryFunction& g) const;

  GridPtr grid_;
  Eigen::VectorXcd v_;
  std::vector<Eigen::VectorXcd> hat_;
};

}  // namespace surfeit
