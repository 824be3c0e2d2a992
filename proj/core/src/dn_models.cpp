#include "surfeit/dn_models.hpp"

#include <cmath>

#include "spectral.hpp"

namespace surfeit {

DNMatrix dn_disk(int n) {
  return DNMatrix::from_multiplier(
      BoundaryGrid::circle(2.0 * M_PI, n),
      [](int, int k) { return static_cast<double>(std::abs(k)); }, "analytic:disk",
      1e-10);
}

DNMatrix dn_annulus(double rho, int n, AnnulusVariant variant) {
  if (!(rho > 0.0 && rho < 1.0)) throw DegenerateParameters("annulus needs 0 < rho < 1");
  const double lt = std::log(1.0 / rho);

  if (variant == AnnulusVariant::kOuterWithInnerNeumann) {
    return DNMatrix::from_multiplier(
        BoundaryGrid::circle(2.0 * M_PI, n),
        [lt](int, int k) {
          const double m = std::abs(k);
          return m == 0.0 ? 0.0 : m * std::tanh(m * lt);
        },
        "analytic:annulus-neumann(rho)", 1e-10);
  }

  GridPtr grid = BoundaryGrid::make({GridComponent{2.0 * M_PI, n, +1},
                                     GridComponent{2.0 * M_PI * rho, n, -1}});

  // Harmonic extension of the angular mode e^{ik theta} with data (f_out, f_in):
  //   u(r) = f_out sinh(m log(r/rho))/sinh(m lt) + f_in sinh(m log(1/r))/sinh(m lt)
  // (m = |k| > 0), giving outward fluxes
  //   flux_out =  m coth(m lt) f_out - (m/sinh(m lt)) f_in
  //   flux_in  = -(m/(rho sinh(m lt))) f_out + (m/rho) coth(m lt) f_in,
  // and for k = 0 (u = a + b log r, b = (f_in - f_out)/log rho):
  //   flux_out = b, flux_in = -b/rho.
  const auto block = [&](int k, int row, int col) -> double {
    const double m = std::abs(k);
    if (m == 0.0) {
      const double inv = 1.0 / std::log(rho);
      const double b_coef = (col == 0) ? -inv : inv;  // d b / d f_col
      return row == 0 ? b_coef : -b_coef / rho;
    }
    const double coth = 1.0 / std::tanh(m * lt);
    const double csch = 1.0 / std::sinh(m * lt);
    if (row == 0) return col == 0 ? m * coth : -m * csch;
    return col == 0 ? -m * csch / rho : m * coth / rho;
  };

  // Each of the four component blocks is circulant in the angular index.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(grid->size(), grid->size());
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 2; ++col) {
      Eigen::VectorXcd sym(n);
      for (int m = 0; m < n; ++m) sym(m) = block(spectral::k_of(m, n), row, col);
      const Eigen::VectorXcd first = spectral::inverse(sym) / static_cast<double>(n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          a(grid->offset(row) + i, grid->offset(col) + j) =
              std::real(first((i - j + n) % n));
    }
  }
  return DNMatrix(std::move(grid), std::move(a), "analytic:annulus", 1e-10);
}

DNMatrix dn_mobius(double R, int n) {
  if (!(R > 1.0)) throw DegenerateParameters("mobius model needs R > 1");
  const double logR = std::log(R);
  return DNMatrix::from_multiplier(
      BoundaryGrid::circle(2.0 * M_PI * R, n),
      [R, logR](int, int k) {
        const double m = std::abs(k);
        if (m == 0.0) return 0.0;
        const double t = (k % 2 == 0) ? std::tanh(m * logR) : 1.0 / std::tanh(m * logR);
        return (m / R) * t;
      },
      "analytic:mobius", 1e-10);
}

}  // namespace surfeit
