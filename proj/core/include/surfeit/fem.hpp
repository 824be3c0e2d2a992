#pragma once

#include "surfeit/calculus.hpp"
#include "surfeit/mesh.hpp"

namespace surfeit {

// P1 Galerkin discretization of the DN map of the surface carried by `mesh`.
//
// For every boundary mode (constant, cos, sin up to wavenumber k_max per
// loop) the harmonic extension is solved with nodal Dirichlet data, and the
// DN pairing is recovered variationally: <DN f, g> = a(u_f, u_g), which makes
// the discrete operator annihilate constants, produce mean-free output, and
// stay self-adjoint at machine precision.  Meshes stored as an orientable
// double cover (non-orientable surfaces) are solved on the cover with the
// invariant lift -- equal values at involution-paired boundary vertices --
// and the quotient pairing is half the cover energy.
//
// The operator is returned on a spectral grid with n_grid nodes per boundary
// component (declared loop lengths and orientations), so it is directly
// comparable with the analytic models on matching grids.  Input functions
// are analyzed in the modal band |k| <= k_max; products of band-limited data
// remain exact as long as their bandwidth stays within k_max.
//
// tol_dn reflects the expected relative discretization error, calibrated as
// a constant times the squared chart mesh size.
DNMatrix dn_fem(const SurfaceMesh& mesh, int k_max = 16, int n_grid = 128);

}  // namespace surfeit
