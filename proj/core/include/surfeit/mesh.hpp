#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "surfeit/grid.hpp"

namespace surfeit {

// One boundary component of the surface the DN map acts on.  Vertices are
// listed in increasing arc parameter; `orientation` is +1 when that order
// agrees with the surface-on-left boundary orientation, -1 otherwise (holes
// and inner circles are stored counterclockwise in the chart and carry -1).
struct MeshLoop {
  std::vector<int> vertices;
  std::vector<double> arc;  // arc parameter of each vertex, in [0, length)
  double length = 0.0;      // declared metric length of the loop
  int orientation = +1;
};

// Deck transformation of the orientable double cover, as a vertex permutation.
struct CoverData {
  std::vector<int> tau;
};

// Triangulated surface carrying a piecewise-constant metric in one chart.
// Non-orientable surfaces are stored as their orientable double cover plus
// the involution; `loops` then describes the boundary of the quotient (one
// entry per quotient component, referencing the + copy; the - copy is the
// tau image).  A positive `period_x`/`period_y` marks that chart coordinate
// as cyclic (log-polar angle, torus square); edge vectors are then taken in
// the minimum-image convention.
struct SurfaceMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;  // chart coordinates
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;    // counterclockwise
  std::vector<Eigen::Matrix2d> metric;                // per-triangle, SPD
  std::vector<MeshLoop> loops;
  bool orientable = true;
  std::optional<CoverData> cover;
  double period_x = 0.0;  // 0 = not cyclic
  double period_y = 0.0;
  double log_k_true = 0.0;  // ground-truth sup log K of applied perturbations
  std::string family;
};

struct MeshFamily {
  // disk | annulus | mobius | mobius_with_hole | torus_with_hole |
  // klein_with_hole
  std::string name = "disk";
  double rho = 0.5;  // annulus inner radius
  double R = 2.0;    // Moebius modulus: cover annulus 1/R <= |z| <= R
};

// Structured mesh of the requested family with target chart edge length h.
// Non-orientable families produce the cover mesh with tau filled in and
// tau-compatible triangulation (tau maps triangles to triangles).
SurfaceMesh build_mesh(const MeshFamily& family, double h);

struct PerturbationSpec {
  double epsilon = 0.0;
  enum class Mode { kConformal, kShear } mode = Mode::kConformal;
  // Smooth profile in [0, 1], supported away from the boundary, with an
  // interior plateau at 1.  "bump" is the only built-in profile.
  std::string profile = "bump";
  bool preserve_boundary_length = true;
};

// Multiplies the metric by e^{eps phi} (conformal) or stretches the chart
// theta-direction by e^{eps phi} in metric length (shear).  Records the
// ground-truth sup log K in the result (0 for conformal, 2 eps sup phi for
// shear, the squared-axis-ratio convention).  eps = 0 returns the input
// unchanged.  Throws BoundaryLengthChanged when the profile support touches
// the boundary while preservation is requested.
SurfaceMesh perturb_metric(const SurfaceMesh& mesh, const PerturbationSpec& p);

// Orientable double cover.  For a stored quotient this unwraps the cover data
// into a standalone orientable mesh whose loops are the full cover boundary
// (+ copies first, then the index-matched tau copies with flipped
// orientation).  For an orientable input it is the disjoint union of the mesh
// and its chart reflection, with tau swapping the copies.
SurfaceMesh double_cover(const SurfaceMesh& mesh);

// Combinatorial Euler characteristic V - E + F of the stored complex
// (the cover complex when cover data is present).
int mesh_chi(const SurfaceMesh& mesh);

// Structural invariants: positive triangle areas, SPD metrics with
// eigenvalues in [lambda_min, lambda_max], closed consistently ordered loops,
// and, when present, a fixed-point-free involution that maps triangles to
// triangles.  Throws DegenerateParameters on violation.
void validate_mesh(const SurfaceMesh& mesh, double lambda_min = 1e-6,
                   double lambda_max = 1e6);

// Longest triangle edge in chart coordinates (minimum-image for periodic).
double max_chart_edge(const SurfaceMesh& mesh);

// Chart vector from vertex a to vertex b in the minimum-image convention of
// the mesh's chart (periodic torus square, periodic angle of a cover chart).
Eigen::Vector2d chart_edge(const SurfaceMesh& mesh, int a, int b);

}  // namespace surfeit
