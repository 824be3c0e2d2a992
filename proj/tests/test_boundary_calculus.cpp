#include <doctest.h>

#include <surfeit/calculus.hpp>
#include <surfeit/dn_models.hpp>

#include <cmath>

#include "derived_constants.hpp"

using namespace surfeit;

namespace {

BoundaryFunction cosine(GridPtr grid, int c, int k) {
  const BoundaryFunction e = BoundaryFunction::harmonic(grid, c, k);
  return (e + e.conjugate()) * 0.5;
}

double max_diff(const BoundaryFunction& a, const BoundaryFunction& b) {
  return (a - b).sup_norm();
}

}  // namespace

TEST_CASE("grid construction enforces invariants") {
  CHECK_THROWS_AS(BoundaryGrid::circle(2.0 * M_PI, 15), DegenerateParameters);
  CHECK_THROWS_AS(BoundaryGrid::circle(2.0 * M_PI, 14), DegenerateParameters);
  CHECK_THROWS_AS(BoundaryGrid::circle(-1.0, 32), DegenerateParameters);
  auto g = BoundaryGrid::circle(2.0 * M_PI, 32);
  CHECK(g->size() == 32);
  CHECK(g->spacing(0) == doctest::Approx(2.0 * M_PI / 32));
  CHECK(g->weights().sum() == doctest::Approx(2.0 * M_PI));
}

TEST_CASE("doubled grid pairs index-matched copies with flipped orientation") {
  auto base = BoundaryGrid::make({GridComponent{2.0 * M_PI, 32, +1},
                                  GridComponent{1.0, 16, -1}});
  auto d = BoundaryGrid::doubled(base);
  CHECK(d->num_components() == 4);
  CHECK(d->size() == 2 * base->size());
  CHECK(d->component(2).orientation == -1);
  CHECK(d->component(3).orientation == +1);
  CHECK(d->component(2).length == base->component(0).length);
  for (int node : {0, 17, 47, 95}) {
    const int t = d->involution(node);
    CHECK(t != node);
    CHECK(d->involution(t) == node);
    CHECK(d->base_node(t) == d->base_node(node));
    CHECK(d->sigma(node) == -d->sigma(t));
  }
  CHECK(d->base_component(2) == 0);
  CHECK(d->base_component(3) == 1);
}

TEST_CASE("Fourier cache round-trips to 1e-12") {
  auto g = BoundaryGrid::circle(2.0 * M_PI, 64);
  const BoundaryFunction f = random_band_function(g, 20, 7);
  const BoundaryFunction back = BoundaryFunction::from_fourier(
      g, {f.fourier(0)});
  CHECK(max_diff(f, back) <= 1e-12 * (1.0 + f.sup_norm()));
  CHECK(f.is_real(1e-12));
  CHECK(std::abs(f.mean(0)) <= 1e-12);
}

TEST_CASE("derivative_gamma is the oriented spectral derivative") {
  auto g = BoundaryGrid::circle(2.0 * M_PI, 64);
  const BoundaryFunction f = cosine(g, 0, 3);
  const BoundaryFunction df = derivative_gamma(f);
  // d/ds cos(3s) = -3 sin(3s) = (3i/2)(e^{3is} - e^{-3is})
  const BoundaryFunction expect =
      (BoundaryFunction::harmonic(g, 0, 3) - BoundaryFunction::harmonic(g, 0, -3)) *
      Complex(0.0, 1.5);
  CHECK(max_diff(df, expect) <= 1e-12);

  // physical wavenumber scales with component length
  auto g2 = BoundaryGrid::circle(4.0 * M_PI, 64);
  CHECK(derivative_gamma(cosine(g2, 0, 3)).sup_norm() == doctest::Approx(1.5).epsilon(1e-12));

  // reversed stored orientation flips the sign
  auto gr = BoundaryGrid::make({GridComponent{2.0 * M_PI, 64, -1}});
  const BoundaryFunction dfr = derivative_gamma(cosine(gr, 0, 3));
  CHECK((dfr + BoundaryFunction(gr, expect.values())).sup_norm() <= 1e-12);
}

TEST_CASE("integrate_J inverts the oriented derivative on mean-free data") {
  auto g = BoundaryGrid::circle(2.0 * M_PI, 128);
  const BoundaryFunction f = random_band_function(g, 30, 3);
  CHECK(max_diff(derivative_gamma(integrate_J(f)), f) <= 1e-10 * (1.0 + f.sup_norm()));
  CHECK(max_diff(integrate_J(derivative_gamma(f)), project_zero_mean(f)) <=
        1e-10 * (1.0 + f.sup_norm()));
  // J(cos) = sin on the unit-length-2pi circle
  CHECK(max_diff(integrate_J(cosine(g, 0, 1)),
                 (BoundaryFunction::harmonic(g, 0, 1) -
                  BoundaryFunction::harmonic(g, 0, -1)) *
                     Complex(0.0, -0.5)) <= 1e-12);
  // output is mean-free per component
  CHECK(std::abs(integrate_J(f).mean(0)) <= 1e-13);
  // constants have no periodic antiderivative
  CHECK_THROWS_AS(integrate_J(BoundaryFunction::from_real(
                      g, Eigen::VectorXd::Ones(g->size()))),
                  NonZeroMean);
}

TEST_CASE("cl_norm takes the max over derivative orders") {
  auto g = BoundaryGrid::circle(2.0 * M_PI, 64);
  const BoundaryFunction f = cosine(g, 0, 2);
  CHECK(cl_norm(f, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cl_norm(f, 3) == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("grid mismatch is detected") {
  auto a = BoundaryGrid::circle(2.0 * M_PI, 32);
  auto b = BoundaryGrid::circle(2.0 * M_PI, 64);
  const BoundaryFunction fa = BoundaryFunction::zero(a);
  const BoundaryFunction fb = BoundaryFunction::zero(b);
  CHECK_THROWS_AS(fa + fb, GridMismatch);
  CHECK_THROWS_AS(dn_disk(32).apply(fb), GridMismatch);
}

TEST_CASE("disk DN is the multiplier |k|") {
  const DNMatrix dn = dn_disk(128);
  dn.validate();
  for (int k : {1, 2, 5, 8}) {
    const BoundaryFunction f = cosine(dn.grid(), 0, k);
    CHECK(max_diff(dn.apply(f), f * static_cast<double>(k)) <= 1e-10 * k);
  }
  // constants annihilated, output mean-free, self-adjoint
  CHECK(dn.constant_residual() <= 1e-12);
  CHECK(dn.mean_residual() <= 1e-12);
  CHECK(dn.selfadjoint_residual() <= 1e-12);
}

TEST_CASE("annulus DN matches the frozen mode blocks") {
  const int n = 64;
  const DNMatrix dn = dn_annulus(oracle::annulus_rho, n);
  dn.validate();
  auto g = dn.grid();
  for (int k = 0; k <= 3; ++k) {
    for (int src = 0; src < 2; ++src) {
      const BoundaryFunction f = cosine(g, src, k);
      const BoundaryFunction out = dn.apply(f);
      for (int dst = 0; dst < 2; ++dst) {
        const BoundaryFunction expect =
            cosine(g, dst, k) * oracle::annulus_block[k][dst][src];
        const double err =
            (BoundaryFunction(g, out.values()).segment(dst) -
             expect.segment(dst))
                .cwiseAbs()
                .maxCoeff();
        CHECK(err <= 1e-10 * (1.0 + std::abs(oracle::annulus_block[k][dst][src])));
      }
    }
  }

  // trace of w(z) = z: boundary data (cos, rho cos) has flux (cos, -cos)
  Eigen::VectorXd v(g->size());
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * M_PI * j / n;
    v(j) = std::cos(th);
    v(n + j) = oracle::annulus_rho * std::cos(th);
  }
  const BoundaryFunction f = BoundaryFunction::from_real(g, v);
  const BoundaryFunction flux = dn.apply(f);
  Eigen::VectorXd expect(g->size());
  expect.head(n) = v.head(n);
  expect.tail(n) = -v.head(n);
  CHECK((flux.values().real() - expect).cwiseAbs().maxCoeff() <= 1e-10);

  const DNMatrix dnn = dn_annulus(oracle::annulus_rho, n,
                                  AnnulusVariant::kOuterWithInnerNeumann);
  dnn.validate();
  for (int k = 0; k <= 3; ++k) {
    const BoundaryFunction fk = cosine(dnn.grid(), 0, k);
    CHECK(max_diff(dnn.apply(fk), fk * oracle::annulus_neumann_lambda[k]) <= 1e-10);
  }
}

TEST_CASE("quotient model matches the frozen multipliers") {
  const DNMatrix dn = dn_mobius(oracle::mobius_R, 128);
  dn.validate();
  auto g = dn.grid();
  CHECK(g->component(0).length == doctest::Approx(2.0 * M_PI * oracle::mobius_R));
  for (int k = 0; k <= 10; ++k) {
    const BoundaryFunction f = cosine(g, 0, k);
    CHECK(max_diff(dn.apply(f), f * oracle::mobius_lambda[k]) <=
          1e-10 * (1.0 + oracle::mobius_lambda[k]));
  }
  // harmonic-conjugate identity for the symmetric embedding w1 = z - 1/z:
  // f1 = 1.5 cos(theta), J Lambda f1 = 2.5 sin(theta) = Im w1 on |z| = 2.
  const BoundaryFunction f1 = cosine(g, 0, 1) * 1.5;
  const BoundaryFunction v = integrate_J(dn.apply(f1));
  const BoundaryFunction sin1 =
      (BoundaryFunction::harmonic(g, 0, 1) - BoundaryFunction::harmonic(g, 0, -1)) *
      Complex(0.0, -0.5);
  CHECK(max_diff(v, sin1 * 2.5) <= 1e-10);
}

TEST_CASE("H1->L2 operator norm matches the frozen multiplier value") {
  const DNMatrix a = dn_disk(128);
  const DNMatrix diff = a - a.scaled(0.9);
  CHECK(op_norm_h1_l2(diff, 16) ==
        doctest::Approx(oracle::opnorm_scaled_disk).epsilon(1e-10));
  CHECK(op_norm_h1_l2(a - a, 16) <= 1e-12);
}

TEST_CASE("random band functions are deterministic, real, mean-free") {
  auto g = BoundaryGrid::make({GridComponent{2.0 * M_PI, 64, +1},
                               GridComponent{3.0, 32, -1}});
  const BoundaryFunction f1 = random_band_function(g, 8, 42);
  const BoundaryFunction f2 = random_band_function(g, 8, 42);
  CHECK(max_diff(f1, f2) == 0.0);
  CHECK(f1.is_real(1e-14));
  CHECK(std::abs(f1.mean(0)) <= 1e-13);
  CHECK(std::abs(f1.mean(1)) <= 1e-13);
  CHECK(random_band_function(g, 8, 43).sup_norm() != doctest::Approx(f1.sup_norm()));
}
