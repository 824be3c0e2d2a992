#pragma once

#include "surfeit/calculus.hpp"

namespace surfeit {

// Analytic Dirichlet-to-Neumann models, used as oracles for the FEM solver
// and as cheap exact forward models in tests and pipelines.

// Unit disk, boundary circle of length 2 pi: multiplier |k|.
DNMatrix dn_disk(int n);

enum class AnnulusVariant {
  kBothCircles,            // Gamma = both circles, coupled mode blocks
  kOuterWithInnerNeumann,  // Gamma = outer circle, insulating inner circle
};

// Concentric annulus rho <= |z| <= 1.  For kBothCircles the grid has two
// components: outer (length 2 pi, orientation +1) and inner (length 2 pi rho,
// orientation -1), with nodes of both stored in increasing polar angle.
DNMatrix dn_annulus(double rho, int n, AnnulusVariant variant = AnnulusVariant::kBothCircles);

// Quotient model of the flat Möbius band whose orientable double cover is the
// annulus 1/R <= |z| <= R with deck involution z -> -1/conj(z).  The DN map
// acts on the circle |z| = R (length 2 pi R) and is normalized against the
// Euclidean length element |dz|.  Mode k extends evenly (cosh profile) for
// even k and oddly (sinh profile) for odd k:
//   lambda_0 = 0,
//   lambda_k = (|k|/R) tanh(|k| log R)  for even k,
//   lambda_k = (|k|/R) coth(|k| log R)  for odd k.
DNMatrix dn_mobius(double R, int n);

}  // namespace surfeit
