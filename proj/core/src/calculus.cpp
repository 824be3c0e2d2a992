#include "surfeit/calculus.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "spectral.hpp"

namespace surfeit {

namespace {

// Apply a per-mode complex factor to every component of f.
BoundaryFunction apply_symbol(
    const BoundaryFunction& f,
    const std::function<Complex(const GridComponent&, int)>& symbol) {
  const GridPtr& grid = f.grid();
  std::vector<Eigen::VectorXcd> hat;
  hat.reserve(grid->num_components());
  for (int c = 0; c < grid->num_components(); ++c) {
    const auto& comp = grid->component(c);
    Eigen::VectorXcd h = f.fourier(c);
    for (int m = 0; m < comp.n; ++m) h(m) *= symbol(comp, spectral::k_of(m, comp.n));
    hat.push_back(std::move(h));
  }
  return BoundaryFunction::from_fourier(grid, std::move(hat));
}

}  // namespace

BoundaryFunction derivative_gamma(const BoundaryFunction& f) {
  return apply_symbol(f, [](const GridComponent& comp, int k) -> Complex {
    if (2 * std::abs(k) == comp.n) return 0.0;  // drop the unpaired Nyquist mode
    const double kappa = 2.0 * M_PI * k / comp.length;
    return Complex(0.0, kappa * comp.orientation);
  });
}

BoundaryFunction integrate_J(const BoundaryFunction& f) {
  const double tol = 1e-10 * (1.0 + f.sup_norm());
  for (int c = 0; c < f.grid()->num_components(); ++c)
    if (std::abs(f.mean(c)) > tol)
      throw NonZeroMean("integrate_J: component " + std::to_string(c) +
                        " has mean " + std::to_string(std::abs(f.mean(c))));
  return apply_symbol(f, [](const GridComponent& comp, int k) -> Complex {
    if (k == 0 || 2 * std::abs(k) == comp.n) return 0.0;
    const double kappa = 2.0 * M_PI * k / comp.length;
    return 1.0 / Complex(0.0, kappa * comp.orientation);
  });
}

BoundaryFunction project_zero_mean(const BoundaryFunction& f) {
  return apply_symbol(f, [](const GridComponent&, int k) -> Complex {
    return k == 0 ? 0.0 : 1.0;
  });
}

double cl_norm(const BoundaryFunction& f, int l) {
  double norm = f.sup_norm();
  BoundaryFunction d = f;
  for (int j = 1; j <= l; ++j) {
    d = derivative_gamma(d);
    norm = std::max(norm, d.sup_norm());
  }
  return norm;
}

// ---------------------------------------------------------------------------

DNMatrix::DNMatrix(GridPtr grid, Eigen::MatrixXd matrix, std::string provenance,
                   double tol_dn)
    : grid_(std::move(grid)),
      a_(std::move(matrix)),
      provenance_(std::move(provenance)),
      tol_dn_(std::max(tol_dn, 1e-10)) {
  if (a_.rows() != grid_->size() || a_.cols() != grid_->size())
    throw GridMismatch("DNMatrix: matrix size does not match grid");
}

DNMatrix DNMatrix::from_multiplier(GridPtr grid,
                                   const std::function<double(int, int)>& lambda,
                                   std::string provenance, double tol_dn) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(grid->size(), grid->size());
  for (int c = 0; c < grid->num_components(); ++c) {
    const auto& comp = grid->component(c);
    // The block is circulant; synthesize its first column from the symbol.
    Eigen::VectorXcd sym(comp.n);
    for (int m = 0; m < comp.n; ++m) sym(m) = lambda(c, spectral::k_of(m, comp.n));
    const Eigen::VectorXcd col = spectral::inverse(sym) / static_cast<double>(comp.n);
    const int off = grid->offset(c);
    for (int j = 0; j < comp.n; ++j)
      for (int i = 0; i < comp.n; ++i)
        a(off + i, off + j) = std::real(col((i - j + comp.n) % comp.n));
  }
  return DNMatrix(std::move(grid), std::move(a), std::move(provenance), tol_dn);
}

BoundaryFunction DNMatrix::apply(const BoundaryFunction& f) const {
  if (!grid_->same_shape(*f.grid()))
    throw GridMismatch("DNMatrix::apply: function lives on a different grid");
  return BoundaryFunction(f.grid(), a_ * f.values());
}

DNMatrix DNMatrix::operator+(const DNMatrix& o) const {
  if (!grid_->same_shape(*o.grid_)) throw GridMismatch("DNMatrix sum: grid mismatch");
  return DNMatrix(grid_, a_ + o.a_, provenance_ + "+" + o.provenance_,
                  std::max(tol_dn_, o.tol_dn_));
}

DNMatrix DNMatrix::operator-(const DNMatrix& o) const {
  if (!grid_->same_shape(*o.grid_)) throw GridMismatch("DNMatrix diff: grid mismatch");
  return DNMatrix(grid_, a_ - o.a_, provenance_ + "-" + o.provenance_,
                  std::max(tol_dn_, o.tol_dn_));
}

DNMatrix DNMatrix::scaled(double s) const {
  return DNMatrix(grid_, s * a_, provenance_ + "*scaled", tol_dn_);
}

double DNMatrix::constant_residual() const {
  // The harmonic extension of the globally constant datum is constant, so the
  // all-ones vector lies in the kernel.  (Per-component constants do not: on
  // multiply connected surfaces they drive a nonzero current.)
  const double scale = std::max(a_.cwiseAbs().maxCoeff(), 1e-30);
  return (a_ * Eigen::VectorXd::Ones(grid_->size())).cwiseAbs().maxCoeff() / scale;
}

double DNMatrix::mean_residual() const {
  const double scale = std::max(a_.cwiseAbs().maxCoeff(), 1e-30);
  // total flux of every column against the length element
  const Eigen::VectorXd colsum = a_.transpose() * grid_->weights();
  return colsum.cwiseAbs().maxCoeff() / scale;
}

double DNMatrix::selfadjoint_residual() const {
  const Eigen::MatrixXd wa = grid_->weights().asDiagonal() * a_;
  const double scale = std::max(wa.cwiseAbs().maxCoeff(), 1e-30);
  return (wa - wa.transpose()).cwiseAbs().maxCoeff() / scale;
}

void DNMatrix::validate() const {
  const double c = constant_residual(), m = mean_residual(), s = selfadjoint_residual();
  if (c > tol_dn_ || m > tol_dn_ || s > tol_dn_) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "DN invariants violated (%s): constants %.3e, mean %.3e, "
                  "self-adjointness %.3e vs tol %.3e",
                  provenance_.c_str(), c, m, s, tol_dn_);
    throw SolverFailure(buf);
  }
}

BoundaryFunction apply_dn(const DNMatrix& dn, const BoundaryFunction& f) {
  return dn.apply(f);
}

double op_norm_h1_l2(const DNMatrix& dn, int k_max) {
  const GridPtr& grid = dn.grid();
  int cols = 0;
  for (int c = 0; c < grid->num_components(); ++c)
    cols += 2 * std::min(k_max, grid->component(c).n / 2 - 1) + 1;
  Eigen::MatrixXcd m(grid->size(), cols);
  const Eigen::VectorXd sqw = grid->weights().cwiseSqrt();
  int col = 0;
  for (int c = 0; c < grid->num_components(); ++c) {
    const auto& comp = grid->component(c);
    const int kc = std::min(k_max, comp.n / 2 - 1);
    for (int k = -kc; k <= kc; ++k) {
      const double kappa = 2.0 * M_PI * k / comp.length;
      const double h1 = std::sqrt(comp.length * (1.0 + kappa * kappa));
      const BoundaryFunction f = BoundaryFunction::harmonic(grid, c, k);
      m.col(col++) = dn.apply(f).values().cwiseProduct(sqw.cast<Complex>()) / h1;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

BoundaryFunction random_band_function(GridPtr grid, int k_max, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->size());
  for (int c = 0; c < grid->num_components(); ++c) {
    const auto& comp = grid->component(c);
    const int kc = std::min(k_max, comp.n / 2 - 1);
    for (int k = 1; k <= kc; ++k) {
      const double a = gauss(rng), b = gauss(rng);
      for (int j = 0; j < comp.n; ++j) {
        const double phase = 2.0 * M_PI * k * j / comp.n;
        v(grid->offset(c) + j) += a * std::cos(phase) + b * std::sin(phase);
      }
    }
  }
  return BoundaryFunction::from_real(std::move(grid), v);
}

}  // namespace surfeit
