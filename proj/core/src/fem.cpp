#include "surfeit/fem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <vector>

#include "surfeit/errors.hpp"

namespace surfeit {
namespace {

struct Mode {
  int loop = 0;
  int type = 0;  // 0 constant, 1 cosine, 2 sine
  int k = 0;
};

double mode_value(const Mode& m, double s, double length) {
  if (m.type == 0) return 1.0;
  const double w = 2.0 * M_PI * m.k * s / length;
  return m.type == 1 ? std::cos(w) : std::sin(w);
}

}  // namespace

DNMatrix dn_fem(const SurfaceMesh& mesh, int k_max, int n_grid) {
  if (k_max < 1) throw DegenerateParameters("dn_fem requires k_max >= 1");
  if (n_grid < 16 || n_grid % 2 != 0 || n_grid / 2 - 1 < k_max) {
    throw DegenerateParameters(
        "dn_fem requires an even n_grid with n_grid/2 - 1 >= k_max");
  }
  if (mesh.loops.empty()) throw DegenerateParameters("mesh has no boundary");
  const bool quotient = !mesh.orientable;
  if (quotient && !mesh.cover) {
    throw DegenerateParameters("non-orientable mesh requires cover data");
  }

  const int n_v = static_cast<int>(mesh.vertices.rows());
  const int n_t = static_cast<int>(mesh.triangles.rows());

  // Stiffness matrix of the chart metric: a(u, v) = grad u . g^{-1} grad v
  // sqrt(det g) per triangle (P1 gradients are constant).
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n_t) * 9);
  for (int t = 0; t < n_t; ++t) {
    const auto tri = mesh.triangles.row(t);
    const Eigen::Vector2d e1 = chart_edge(mesh, tri[0], tri[1]);
    const Eigen::Vector2d e2 = chart_edge(mesh, tri[0], tri[2]);
    const double det = e1.x() * e2.y() - e1.y() * e2.x();
    if (!(det > 0.0)) throw SolverFailure("degenerate triangle in dn_fem");
    Eigen::Matrix2d binv_t;  // inverse-transpose of [e1 e2]
    binv_t << e2.y() / det, -e1.y() / det, -e2.x() / det, e1.x() / det;
    Eigen::Matrix<double, 2, 3> grads;
    grads.col(1) = binv_t.col(0);
    grads.col(2) = binv_t.col(1);
    grads.col(0) = -grads.col(1) - grads.col(2);
    const Eigen::Matrix2d& g = mesh.metric[t];
    const double det_g = g.determinant();
    if (!(det_g > 0.0)) throw SolverFailure("metric not positive in dn_fem");
    const Eigen::Matrix2d cond =
        std::sqrt(det_g) * g.inverse() * (0.5 * det);
    const Eigen::Matrix3d local = grads.transpose() * cond * grads;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trips.emplace_back(tri[i], tri[j], local(i, j));
      }
    }
  }
  Eigen::SparseMatrix<double> stiffness(n_v, n_v);
  stiffness.setFromTriplets(trips.begin(), trips.end());

  // Dirichlet vertices: all loop vertices, plus their involution images when
  // the mesh is a quotient (the lift is value-copied onto the other sheet).
  std::vector<char> fixed(n_v, 0);
  for (const auto& loop : mesh.loops) {
    for (int v : loop.vertices) {
      fixed[v] = 1;
      if (quotient) fixed[mesh.cover->tau[v]] = 1;
    }
  }
  std::vector<int> interior;
  interior.reserve(n_v);
  std::vector<int> interior_pos(n_v, -1);
  for (int v = 0; v < n_v; ++v) {
    if (!fixed[v]) {
      interior_pos[v] = static_cast<int>(interior.size());
      interior.push_back(v);
    }
  }
  const int n_i = static_cast<int>(interior.size());

  std::vector<Eigen::Triplet<double>> trips_ii;
  for (int col = 0; col < stiffness.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness, col); it;
         ++it) {
      if (interior_pos[it.row()] >= 0 && interior_pos[it.col()] >= 0) {
        trips_ii.emplace_back(interior_pos[it.row()], interior_pos[it.col()],
                              it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> k_ii(n_i, n_i);
  k_ii.setFromTriplets(trips_ii.begin(), trips_ii.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  if (n_i > 0) {
    solver.compute(k_ii);
    if (solver.info() != Eigen::Success) {
      throw SolverFailure("interior stiffness factorization failed");
    }
  }

  // Modal Dirichlet solves.
  std::vector<Mode> modes;
  const int n_loops = static_cast<int>(mesh.loops.size());
  for (int l = 0; l < n_loops; ++l) {
    modes.push_back({l, 0, 0});
    for (int k = 1; k <= k_max; ++k) {
      modes.push_back({l, 1, k});
      modes.push_back({l, 2, k});
    }
  }
  const int n_m = static_cast<int>(modes.size());
  Eigen::MatrixXd basis(n_v, n_m);
  basis.setZero();
  for (int a = 0; a < n_m; ++a) {
    const Mode& m = modes[a];
    const MeshLoop& loop = mesh.loops[m.loop];
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_v);
    for (size_t j = 0; j < loop.vertices.size(); ++j) {
      const double val = mode_value(m, loop.arc[j], loop.length);
      u[loop.vertices[j]] = val;
      if (quotient) u[mesh.cover->tau[loop.vertices[j]]] = val;
    }
    if (n_i > 0) {
      const Eigen::VectorXd rhs_full = stiffness * u;
      Eigen::VectorXd rhs(n_i);
      for (int i = 0; i < n_i; ++i) rhs[i] = rhs_full[interior[i]];
      const Eigen::VectorXd sol = solver.solve(-rhs);
      if (solver.info() != Eigen::Success) {
        throw SolverFailure("interior solve failed");
      }
      const double resid = (k_ii * sol + rhs).norm();
      if (!(resid <= 1e-7 * (1.0 + rhs.norm()))) {
        throw NonConvergence("harmonic extension residual too large");
      }
      for (int i = 0; i < n_i; ++i) u[interior[i]] = sol[i];
    }
    if (quotient) {
      // The lifted datum is invariant, so by uniqueness the discrete solution
      // must be too; this guards the tau-compatibility of the triangulation.
      const double scale = u.cwiseAbs().maxCoeff();
      for (int v = 0; v < n_v; ++v) {
        if (std::abs(u[mesh.cover->tau[v]] - u[v]) > 1e-12 * scale) {
          throw SolverFailure(
              "cover solve is not involution-symmetric; mesh is not "
              "tau-compatible");
        }
      }
    }
    basis.col(a) = u;
  }

  // Variational flux pairing S_ab = a(u_a, u_b); half of the cover energy
  // for quotients.  Symmetrized to remove assembly roundoff.
  Eigen::MatrixXd pairing = basis.transpose() * (stiffness * basis);
  if (quotient) pairing *= 0.5;
  pairing = 0.5 * (pairing + pairing.transpose()).eval();

  // Spectral grid of the declared loops and the exact synthesis/analysis
  // factors (discrete orthogonality: ||const||^2 = L, ||cos_k||^2 = L/2).
  std::vector<GridComponent> comps;
  comps.reserve(n_loops);
  for (const auto& loop : mesh.loops) {
    comps.push_back(GridComponent{loop.length, n_grid, loop.orientation});
  }
  GridPtr grid = BoundaryGrid::make(comps);
  const int n_nodes = grid->size();
  Eigen::MatrixXd synth(n_nodes, n_m);
  synth.setZero();
  Eigen::VectorXd mass_inv(n_m);
  for (int a = 0; a < n_m; ++a) {
    const Mode& m = modes[a];
    const double length = grid->component(m.loop).length;
    for (int j = 0; j < n_grid; ++j) {
      synth(grid->offset(m.loop) + j, a) =
          mode_value(m, grid->node_s(m.loop, j), length);
    }
    mass_inv[a] = (m.type == 0 ? 1.0 : 2.0) / length;
  }
  const Eigen::MatrixXd core =
      mass_inv.asDiagonal() * pairing * mass_inv.asDiagonal();
  const Eigen::MatrixXd analysis =
      synth.transpose() * grid->weights().asDiagonal();
  Eigen::MatrixXd a_mat = synth * core * analysis;

  // Calibrated relative discretization error of the modal band.
  const double h = max_chart_edge(mesh);
  const double tol = std::max(1e-8, 12.0 * h * h);
  return DNMatrix(grid, std::move(a_mat), "fem:" + mesh.family, tol);
}

}  // namespace surfeit
