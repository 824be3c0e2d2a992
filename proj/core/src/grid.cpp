#include "surfeit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "spectral.hpp"

namespace surfeit {

BoundaryGrid::BoundaryGrid(std::vector<GridComponent> components, GridPtr base)
    : comps_(std::move(components)), base_(std::move(base)) {
  if (comps_.empty()) throw DegenerateParameters("grid needs at least one component");
  offsets_.reserve(comps_.size());
  for (const auto& c : comps_) {
    if (c.n < 16 || c.n % 2 != 0)
      throw DegenerateParameters("component node count must be even and >= 16");
    if (!(c.length > 0.0)) throw DegenerateParameters("component length must be positive");
    if (c.orientation != 1 && c.orientation != -1)
      throw DegenerateParameters("orientation must be +1 or -1");
    offsets_.push_back(total_);
    total_ += c.n;
  }
  weights_.resize(total_);
  for (int c = 0; c < num_components(); ++c)
    weights_.segment(offsets_[c], comps_[c].n).setConstant(spacing(c));
}

GridPtr BoundaryGrid::circle(double length, int n) {
  return make({GridComponent{length, n, +1}});
}

GridPtr BoundaryGrid::make(std::vector<GridComponent> components) {
  return GridPtr(new BoundaryGrid(std::move(components), nullptr));
}

GridPtr BoundaryGrid::doubled(GridPtr base) {
  if (!base) throw DegenerateParameters("doubled: null base grid");
  if (base->is_doubled()) throw DegenerateParameters("doubled: base is already doubled");
  std::vector<GridComponent> comps;
  comps.reserve(2 * base->num_components());
  for (int c = 0; c < base->num_components(); ++c) comps.push_back(base->component(c));
  for (int c = 0; c < base->num_components(); ++c) {
    GridComponent g = base->component(c);
    g.orientation = -g.orientation;
    comps.push_back(g);
  }
  return GridPtr(new BoundaryGrid(std::move(comps), std::move(base)));
}

int BoundaryGrid::component_of(int node) const {
  for (int c = num_components() - 1; c >= 0; --c)
    if (node >= offsets_[c]) return c;
  throw GridMismatch("node index out of range");
}

double BoundaryGrid::max_spacing() const {
  double h = 0.0;
  for (int c = 0; c < num_components(); ++c) h = std::max(h, spacing(c));
  return h;
}

int BoundaryGrid::involution(int node) const {
  if (!is_doubled()) throw GridMismatch("involution: grid is not doubled");
  const int half = total_ / 2;
  return node < half ? node + half : node - half;
}

double BoundaryGrid::sigma(int node) const {
  if (!is_doubled()) throw GridMismatch("sigma: grid is not doubled");
  return node < total_ / 2 ? 1.0 : -1.0;
}

int BoundaryGrid::base_node(int node) const {
  if (!is_doubled()) throw GridMismatch("base_node: grid is not doubled");
  const int half = total_ / 2;
  return node < half ? node : node - half;
}

int BoundaryGrid::base_component(int c) const {
  if (!is_doubled()) throw GridMismatch("base_component: grid is not doubled");
  const int nb = num_components() / 2;
  return c < nb ? c : c - nb;
}

double BoundaryGrid::total_length() const {
  double L = 0.0;
  for (const auto& c : comps_) L += c.length;
  return L;
}

bool BoundaryGrid::same_shape(const BoundaryGrid& other) const {
  if (num_components() != other.num_components()) return false;
  if (is_doubled() != other.is_doubled()) return false;
  for (int c = 0; c < num_components(); ++c) {
    const auto& a = comps_[c];
    const auto& b = other.comps_[c];
    if (a.n != b.n || a.orientation != b.orientation ||
        std::abs(a.length - b.length) > 1e-12 * std::max(a.length, b.length))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

BoundaryFunction::BoundaryFunction(GridPtr grid, Eigen::VectorXcd values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (!grid_) throw GridMismatch("BoundaryFunction: null grid");
  if (v_.size() != grid_->size()) throw GridMismatch("BoundaryFunction: size mismatch");
  hat_.reserve(grid_->num_components());
  for (int c = 0; c < grid_->num_components(); ++c)
    hat_.push_back(spectral::forward(v_.segment(grid_->offset(c), grid_->component(c).n)));
}

BoundaryFunction BoundaryFunction::zero(GridPtr grid) {
  const int n = grid->size();
  return BoundaryFunction(std::move(grid), Eigen::VectorXcd::Zero(n));
}

BoundaryFunction BoundaryFunction::from_real(GridPtr grid, const Eigen::VectorXd& v) {
  return BoundaryFunction(std::move(grid), v.cast<Complex>());
}

BoundaryFunction BoundaryFunction::harmonic(GridPtr grid, int c, int k) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid->size());
  const auto& comp = grid->component(c);
  for (int j = 0; j < comp.n; ++j) {
    const double phase = 2.0 * M_PI * k * j / comp.n;
    v(grid->offset(c) + j) = Complex(std::cos(phase), std::sin(phase));
  }
  return BoundaryFunction(std::move(grid), std::move(v));
}

BoundaryFunction BoundaryFunction::from_fourier(GridPtr grid,
                                                std::vector<Eigen::VectorXcd> hat) {
  if (static_cast<int>(hat.size()) != grid->num_components())
    throw GridMismatch("from_fourier: component count mismatch");
  Eigen::VectorXcd v(grid->size());
  for (int c = 0; c < grid->num_components(); ++c) {
    if (hat[c].size() != grid->component(c).n)
      throw GridMismatch("from_fourier: coefficient count mismatch");
    v.segment(grid->offset(c), grid->component(c).n) = spectral::inverse(hat[c]);
  }
  return BoundaryFunction(std::move(grid), std::move(v));
}

Eigen::Block<const Eigen::VectorXcd, -1, 1> BoundaryFunction::segment(int c) const {
  return v_.segment(grid_->offset(c), grid_->component(c).n);
}

bool BoundaryFunction::is_real(double tol) const {
  return v_.imag().cwiseAbs().maxCoeff() <= tol * (1.0 + sup_norm());
}

BoundaryFunction BoundaryFunction::real_part() const {
  return BoundaryFunction(grid_, v_.real().cast<Complex>());
}

BoundaryFunction BoundaryFunction::imag_part() const {
  return BoundaryFunction(grid_, v_.imag().cast<Complex>());
}

BoundaryFunction BoundaryFunction::conjugate() const {
  return BoundaryFunction(grid_, v_.conjugate());
}

BoundaryFunction BoundaryFunction::operator+(const BoundaryFunction& g) const {
  check_same_grid(g);
  return BoundaryFunction(grid_, v_ + g.v_);
}

BoundaryFunction BoundaryFunction::operator-(const BoundaryFunction& g) const {
  check_same_grid(g);
  return BoundaryFunction(grid_, v_ - g.v_);
}

BoundaryFunction BoundaryFunction::operator*(Complex a) const {
  return BoundaryFunction(grid_, v_ * a);
}

BoundaryFunction BoundaryFunction::pointwise(const BoundaryFunction& g) const {
  check_same_grid(g);
  return BoundaryFunction(grid_, v_.cwiseProduct(g.v_));
}

double BoundaryFunction::sup_norm() const {
  return v_.size() == 0 ? 0.0 : v_.cwiseAbs().maxCoeff();
}

double BoundaryFunction::l2_norm() const {
  return std::sqrt(std::real(l2_inner(*this)));
}

Complex BoundaryFunction::l2_inner(const BoundaryFunction& g) const {
  check_same_grid(g);
  return (v_.cwiseProduct(g.v_.conjugate()).cwiseProduct(
              grid_->weights().cast<Complex>()))
      .sum();
}

Complex BoundaryFunction::mean(int c) const {
  return segment(c).mean();
}

void BoundaryFunction::check_same_grid(const BoundaryFunction& g) const {
  if (grid_.get() == g.grid_.get()) return;
  if (!grid_->same_shape(*g.grid_)) throw GridMismatch("operands on different grids");
}

}  // namespace surfeit
