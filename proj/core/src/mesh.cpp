#include "surfeit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "surfeit/errors.hpp"

namespace surfeit {
namespace {

using Eigen::Matrix2d;
using Eigen::Vector2d;

// Minimum-image difference b - a, component-wise, for chart periods
// (period <= 0 means the coordinate is not periodic).
Vector2d min_image(const Vector2d& a, const Vector2d& b, double period_x,
                   double period_y) {
  Vector2d d = b - a;
  if (period_x > 0.0) d.x() -= period_x * std::round(d.x() / period_x);
  if (period_y > 0.0) d.y() -= period_y * std::round(d.y() / period_y);
  return d;
}

struct ChartPeriods {
  double x = 0.0;
  double y = 0.0;
};

ChartPeriods periods_of(const SurfaceMesh& mesh) {
  return {mesh.period_x, mesh.period_y};
}

Vector2d edge_vec(const SurfaceMesh& mesh, int a, int b, const ChartPeriods& p) {
  return min_image(mesh.vertices.row(a).transpose(),
                   mesh.vertices.row(b).transpose(), p.x, p.y);
}

double tri_signed_area(const SurfaceMesh& mesh, int t, const ChartPeriods& p) {
  const auto tri = mesh.triangles.row(t);
  const Vector2d e1 = edge_vec(mesh, tri[0], tri[1], p);
  const Vector2d e2 = edge_vec(mesh, tri[0], tri[2], p);
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 in between.
double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

int even_at_least(int n, int floor_value) {
  n = std::max(n, floor_value);
  return (n % 2 == 0) ? n : n + 1;
}

// ---------------------------------------------------------------------------
// Structured builders

// Triangulates the annular strip between two concentric vertex rings by a
// proportional two-pointer merge.  Both rings are counterclockwise; the
// resulting triangles are counterclockwise.
void strip_triangulate(const std::vector<int>& inner,
                       const std::vector<int>& outer,
                       std::vector<Eigen::Vector3i>* tris) {
  const int ni = static_cast<int>(inner.size());
  const int no = static_cast<int>(outer.size());
  int a = 0;
  int b = 0;
  while (a < ni || b < no) {
    bool advance_outer;
    if (b == no) {
      advance_outer = false;
    } else if (a == ni) {
      advance_outer = true;
    } else {
      advance_outer = (b + 1) * static_cast<long>(ni) <=
                      (a + 1) * static_cast<long>(no);
    }
    if (advance_outer) {
      tris->emplace_back(inner[a % ni], outer[b % no], outer[(b + 1) % no]);
      ++b;
    } else {
      tris->emplace_back(inner[a % ni], outer[b % no], inner[(a + 1) % ni]);
      ++a;
    }
  }
}

SurfaceMesh build_disk(double h) {
  const int m = std::max(3, static_cast<int>(std::lround(1.0 / h)));
  SurfaceMesh mesh;
  mesh.family = "disk";
  std::vector<Vector2d> verts;
  verts.emplace_back(0.0, 0.0);
  std::vector<std::vector<int>> rings(m + 1);
  rings[0] = {0};
  for (int i = 1; i <= m; ++i) {
    const int n_i = 6 * i;
    const double r = static_cast<double>(i) / m;
    rings[i].reserve(n_i);
    for (int j = 0; j < n_i; ++j) {
      const double th = 2.0 * M_PI * j / n_i;
      rings[i].push_back(static_cast<int>(verts.size()));
      verts.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  std::vector<Eigen::Vector3i> tris;
  for (int j = 0; j < 6; ++j) {
    tris.emplace_back(0, rings[1][j], rings[1][(j + 1) % 6]);
  }
  for (int i = 1; i < m; ++i) strip_triangulate(rings[i], rings[i + 1], &tris);

  mesh.vertices.resize(static_cast<int>(verts.size()), 2);
  for (size_t v = 0; v < verts.size(); ++v) {
    mesh.vertices.row(static_cast<int>(v)) = verts[v].transpose();
  }
  mesh.triangles.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t) {
    mesh.triangles.row(static_cast<int>(t)) = tris[t].transpose();
  }
  mesh.metric.assign(tris.size(), Matrix2d::Identity());

  MeshLoop loop;
  loop.vertices = rings[m];
  loop.length = 2.0 * M_PI;
  loop.orientation = +1;
  const int nb = static_cast<int>(loop.vertices.size());
  loop.arc.resize(nb);
  for (int j = 0; j < nb; ++j) loop.arc[j] = 2.0 * M_PI * j / nb;
  mesh.loops.push_back(std::move(loop));
  mesh.orientable = true;
  return mesh;
}

// Rectangular vertex grid triangulated quad-by-quad with a parity-chosen
// diagonal.  rows = i direction (radial / x), cols = j direction (angular),
// cols always cyclic; rows cyclic only for the torus.
struct StructuredGrid {
  int rows = 0;  // number of row lines (inclusive), or row count if cyclic
  int cols = 0;
  bool rows_cyclic = false;
  // diag_by_i: diagonal from parity of i alone (tau-compatible choice for
  // even row counts); otherwise parity of i + j.
  bool diag_by_i = false;
};

void emit_grid_triangles(const StructuredGrid& g,
                         std::vector<Eigen::Vector3i>* tris) {
  const int quad_rows = g.rows_cyclic ? g.rows : g.rows - 1;
  auto idx = [&](int i, int j) {
    const int ii = g.rows_cyclic ? (i % g.rows) : i;
    return ii * g.cols + (j % g.cols);
  };
  for (int i = 0; i < quad_rows; ++i) {
    for (int j = 0; j < g.cols; ++j) {
      const int a = idx(i, j);
      const int b = idx(i + 1, j);
      const int c = idx(i + 1, j + 1);
      const int d = idx(i, j + 1);
      const int parity = g.diag_by_i ? (i % 2) : ((i + j) % 2);
      if (parity == 0) {
        tris->emplace_back(a, b, c);
        tris->emplace_back(a, c, d);
      } else {
        tris->emplace_back(a, b, d);
        tris->emplace_back(b, c, d);
      }
    }
  }
}

void fill_matrices(const std::vector<Vector2d>& verts,
                   const std::vector<Eigen::Vector3i>& tris,
                   SurfaceMesh* mesh) {
  mesh->vertices.resize(static_cast<int>(verts.size()), 2);
  for (size_t v = 0; v < verts.size(); ++v) {
    mesh->vertices.row(static_cast<int>(v)) = verts[v].transpose();
  }
  mesh->triangles.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t) {
    mesh->triangles.row(static_cast<int>(t)) = tris[t].transpose();
  }
  mesh->metric.assign(tris.size(), Matrix2d::Identity());
}

// Annulus rho <= |z| <= 1 in the log-polar chart (x, y) = (log r, theta)
// with the flat conformal representative of the Euclidean metric.  Cells are
// uniform in the chart (anisotropy bounded by 1/rho in physical terms), and
// by conformal covariance the declared Euclidean loop lengths produce the
// |dz|-normalized DN map directly.
SurfaceMesh build_annulus(double rho, double h) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DegenerateParameters("annulus requires 0 < rho < 1");
  }
  const double depth = -std::log(rho);
  const int m_x = std::max(2, static_cast<int>(std::lround(depth / h)));
  const int n_y = std::max(16, static_cast<int>(std::lround(2.0 * M_PI / h)));
  SurfaceMesh mesh;
  {
    std::ostringstream name;
    name << "annulus(rho=" << rho << ")";
    mesh.family = name.str();
  }
  mesh.period_y = 2.0 * M_PI;
  std::vector<Vector2d> verts;
  verts.reserve(static_cast<size_t>(m_x + 1) * n_y);
  for (int i = 0; i <= m_x; ++i) {
    const double x = -depth + depth * i / m_x;  // log rho .. 0
    for (int j = 0; j < n_y; ++j) {
      verts.emplace_back(x, 2.0 * M_PI * j / n_y);
    }
  }
  std::vector<Eigen::Vector3i> tris;
  StructuredGrid g;
  g.rows = m_x + 1;
  g.cols = n_y;
  emit_grid_triangles(g, &tris);
  fill_matrices(verts, tris, &mesh);

  MeshLoop outer;
  outer.length = 2.0 * M_PI;
  outer.orientation = +1;
  MeshLoop inner;
  inner.length = 2.0 * M_PI * rho;
  inner.orientation = -1;
  for (int j = 0; j < n_y; ++j) {
    outer.vertices.push_back(m_x * n_y + j);
    outer.arc.push_back(2.0 * M_PI * j / n_y);
    inner.vertices.push_back(j);
    inner.arc.push_back(2.0 * M_PI * rho * j / n_y);
  }
  mesh.loops.push_back(std::move(outer));
  mesh.loops.push_back(std::move(inner));
  mesh.orientable = true;
  return mesh;
}

// Cover chart of the Moebius band: (x, y) in [-X, X] x [0, 2pi), X = log R,
// flat metric (the tau-invariant conformal representative), involution
// tau(x, y) = (-x, y + pi).  The quotient boundary is the x = +X circle with
// Euclidean arc s = R y (declared length 2 pi R).
SurfaceMesh build_mobius_cover(double R, double h, std::string family_name) {
  if (!(R > 1.0)) throw DegenerateParameters("mobius requires R > 1");
  const double X = std::log(R);
  const int n_x = even_at_least(static_cast<int>(std::lround(2.0 * X / h)), 4);
  const int n_y = even_at_least(static_cast<int>(std::lround(2.0 * M_PI / h)), 16);
  SurfaceMesh mesh;
  mesh.family = std::move(family_name);
  mesh.period_y = 2.0 * M_PI;
  std::vector<Vector2d> verts;
  verts.reserve(static_cast<size_t>(n_x + 1) * n_y);
  for (int i = 0; i <= n_x; ++i) {
    const double x = -X + 2.0 * X * i / n_x;
    for (int j = 0; j < n_y; ++j) {
      verts.emplace_back(x, 2.0 * M_PI * j / n_y);
    }
  }
  std::vector<Eigen::Vector3i> tris;
  StructuredGrid g;
  g.rows = n_x + 1;
  g.cols = n_y;
  g.diag_by_i = true;  // flips under i -> n_x - 1 - i (n_x even): tau maps
                       // triangles to triangles
  emit_grid_triangles(g, &tris);
  fill_matrices(verts, tris, &mesh);

  CoverData cover;
  cover.tau.resize(verts.size());
  for (int i = 0; i <= n_x; ++i) {
    for (int j = 0; j < n_y; ++j) {
      cover.tau[i * n_y + j] = (n_x - i) * n_y + ((j + n_y / 2) % n_y);
    }
  }
  mesh.cover = std::move(cover);
  mesh.orientable = false;

  MeshLoop loop;
  loop.length = 2.0 * M_PI * R;
  loop.orientation = +1;
  for (int j = 0; j < n_y; ++j) {
    loop.vertices.push_back(n_x * n_y + j);
    loop.arc.push_back(2.0 * M_PI * R * j / n_y);
  }
  mesh.loops.push_back(std::move(loop));
  return mesh;
}

SurfaceMesh build_torus(double h) {
  const int n = std::max(16, static_cast<int>(std::lround(1.0 / h)));
  SurfaceMesh mesh;
  mesh.family = "torus_with_hole";
  mesh.period_x = 1.0;
  mesh.period_y = 1.0;
  std::vector<Vector2d> verts;
  verts.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  std::vector<Eigen::Vector3i> tris;
  StructuredGrid g;
  g.rows = n;
  g.cols = n;
  g.rows_cyclic = true;
  emit_grid_triangles(g, &tris);
  fill_matrices(verts, tris, &mesh);
  mesh.orientable = true;
  return mesh;
}

// ---------------------------------------------------------------------------
// Hole carving

double dist_chart(const Vector2d& a, const Vector2d& b, const ChartPeriods& p) {
  return min_image(a, b, p.x, p.y).norm();
}

// Removes every triangle with a vertex strictly inside one of the disks,
// shaves staircase ears (triangles whose three vertices all lie on the new
// boundary, which would be rigid under relaxation), drops orphaned vertices,
// and remaps loops and the involution.
void carve_holes(SurfaceMesh* mesh, const std::vector<Vector2d>& centers,
                 double radius) {
  const ChartPeriods p = periods_of(*mesh);
  const int n_v = static_cast<int>(mesh->vertices.rows());
  std::vector<char> inside(n_v, 0);
  for (int v = 0; v < n_v; ++v) {
    const Vector2d pos = mesh->vertices.row(v).transpose();
    for (const auto& c : centers) {
      if (dist_chart(pos, c, p) < radius) {
        inside[v] = 1;
        break;
      }
    }
  }
  std::vector<Eigen::Vector3i> kept;
  kept.reserve(mesh->triangles.rows());
  std::vector<Matrix2d> kept_metric;
  for (int t = 0; t < mesh->triangles.rows(); ++t) {
    const auto tri = mesh->triangles.row(t);
    if (inside[tri[0]] || inside[tri[1]] || inside[tri[2]]) continue;
    kept.emplace_back(tri[0], tri[1], tri[2]);
    kept_metric.push_back(mesh->metric[t]);
  }

  std::vector<char> preexisting(n_v, 0);
  for (const auto& loop : mesh->loops) {
    for (int v : loop.vertices) {
      preexisting[v] = 1;
      if (mesh->cover) preexisting[mesh->cover->tau[v]] = 1;
    }
  }
  for (int round = 0; round < 32; ++round) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : kept) {
      for (int e = 0; e < 3; ++e) {
        const int a = tri[e];
        const int b = tri[(e + 1) % 3];
        edge_count[{std::min(a, b), std::max(a, b)}] += 1;
      }
    }
    std::vector<char> on_hole(n_v, 0);
    for (const auto& [key, count] : edge_count) {
      if (count != 1) continue;
      if (!preexisting[key.first]) on_hole[key.first] = 1;
      if (!preexisting[key.second]) on_hole[key.second] = 1;
    }
    std::vector<Eigen::Vector3i> next;
    std::vector<Matrix2d> next_metric;
    next.reserve(kept.size());
    for (size_t t = 0; t < kept.size(); ++t) {
      const auto& tri = kept[t];
      if (on_hole[tri[0]] && on_hole[tri[1]] && on_hole[tri[2]]) continue;
      next.push_back(tri);
      next_metric.push_back(kept_metric[t]);
    }
    const bool converged = next.size() == kept.size();
    kept = std::move(next);
    kept_metric = std::move(next_metric);
    if (converged) break;
  }
  if (kept.empty()) throw DegenerateParameters("hole removes the whole mesh");

  std::vector<char> used(n_v, 0);
  for (const auto& tri : kept) {
    used[tri[0]] = used[tri[1]] = used[tri[2]] = 1;
  }

  std::vector<int> remap(n_v, -1);
  int next = 0;
  for (int v = 0; v < n_v; ++v) {
    if (used[v]) remap[v] = next++;
  }
  Eigen::Matrix<double, Eigen::Dynamic, 2> new_verts(next, 2);
  for (int v = 0; v < n_v; ++v) {
    if (used[v]) new_verts.row(remap[v]) = mesh->vertices.row(v);
  }
  for (auto& tri : kept) {
    tri = Eigen::Vector3i(remap[tri[0]], remap[tri[1]], remap[tri[2]]);
  }
  mesh->vertices = std::move(new_verts);
  mesh->triangles.resize(static_cast<int>(kept.size()), 3);
  for (size_t t = 0; t < kept.size(); ++t) {
    mesh->triangles.row(static_cast<int>(t)) = kept[t].transpose();
  }
  mesh->metric = std::move(kept_metric);

  for (auto& loop : mesh->loops) {
    for (int& v : loop.vertices) {
      if (remap[v] < 0) {
        throw DegenerateParameters("hole intersects an existing boundary loop");
      }
      v = remap[v];
    }
  }
  if (mesh->cover) {
    std::vector<int> new_tau(next, -1);
    for (int v = 0; v < n_v; ++v) {
      if (!used[v]) continue;
      const int w = mesh->cover->tau[v];
      if (!used[w]) {
        throw DegenerateParameters("carve set is not involution-symmetric");
      }
      new_tau[remap[v]] = remap[w];
    }
    mesh->cover->tau = std::move(new_tau);
  }
}

// Undirected edge -> number of adjacent triangles, plus the directed form in
// which the (counterclockwise) triangle traverses it.
struct EdgeInfo {
  int count = 0;
  int from = -1;
  int to = -1;
};

std::map<std::pair<int, int>, EdgeInfo> edge_table(const SurfaceMesh& mesh) {
  std::map<std::pair<int, int>, EdgeInfo> edges;
  for (int t = 0; t < mesh.triangles.rows(); ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      auto& info = edges[{std::min(a, b), std::max(a, b)}];
      info.count += 1;
      info.from = a;
      info.to = b;
    }
  }
  return edges;
}

// Chains boundary edges not on an explicit loop into cycles.  The walk
// follows the surface-on-left direction; holes come out clockwise around the
// removed region.
std::vector<std::vector<int>> extract_new_loops(const SurfaceMesh& mesh) {
  std::set<std::pair<int, int>> known;
  for (const auto& loop : mesh.loops) {
    const int n = static_cast<int>(loop.vertices.size());
    for (int j = 0; j < n; ++j) {
      const int a = loop.vertices[j];
      const int b = loop.vertices[(j + 1) % n];
      known.insert({std::min(a, b), std::max(a, b)});
      if (mesh.cover) {
        const int ta = mesh.cover->tau[a];
        const int tb = mesh.cover->tau[b];
        known.insert({std::min(ta, tb), std::max(ta, tb)});
      }
    }
  }
  std::map<int, int> next;
  for (const auto& [key, info] : edge_table(mesh)) {
    if (info.count != 1 || known.count(key)) continue;
    if (next.count(info.from)) {
      throw DegenerateParameters("boundary is not a 1-manifold near a hole");
    }
    next[info.from] = info.to;
  }
  std::vector<std::vector<int>> loops;
  std::set<int> visited;
  for (const auto& [start, unused] : next) {
    (void)unused;
    if (visited.count(start)) continue;
    std::vector<int> walk;
    int v = start;
    do {
      walk.push_back(v);
      visited.insert(v);
      auto it = next.find(v);
      if (it == next.end()) {
        throw DegenerateParameters("open boundary chain near a hole");
      }
      v = it->second;
    } while (v != start);
    loops.push_back(std::move(walk));
  }
  return loops;
}

// Projects hole-loop vertices onto the carved circle, relaxes nearby interior
// vertices, and appends the finished loops (counterclockwise storage,
// orientation -1, chart polygon arc length).  `keep` selects which extracted
// loops become quotient loops (for covers only the + copy is kept).
void finish_holes(SurfaceMesh* mesh, const std::vector<Vector2d>& centers,
                  double radius, double h,
                  const std::vector<int>& keep_center_ids) {
  const ChartPeriods p = periods_of(*mesh);
  auto loops = extract_new_loops(*mesh);
  if (loops.size() != centers.size()) {
    throw DegenerateParameters("hole carving produced an unexpected boundary");
  }

  // Match each extracted loop to its hole center.
  std::vector<int> owner(loops.size(), -1);
  for (size_t l = 0; l < loops.size(); ++l) {
    double best = std::numeric_limits<double>::max();
    for (size_t c = 0; c < centers.size(); ++c) {
      double worst = 0.0;
      for (int v : loops[l]) {
        const Vector2d pos = mesh->vertices.row(v).transpose();
        worst = std::max(worst, dist_chart(pos, centers[c], p));
      }
      if (worst < best) {
        best = worst;
        owner[l] = static_cast<int>(c);
      }
    }
  }

  // Project loop vertices onto a circle through the middle of the staircase
  // band (the carved vertices sit at distance in [radius, radius + O(h)]),
  // which balances inward and outward motion.
  const double r_c = radius + 0.7 * h;
  for (size_t l = 0; l < loops.size(); ++l) {
    const Vector2d c = centers[owner[l]];
    for (int v : loops[l]) {
      const Vector2d pos = mesh->vertices.row(v).transpose();
      const Vector2d d = min_image(c, pos, p.x, p.y);
      if (d.norm() < 1e-12) {
        throw DegenerateParameters("hole vertex coincides with the center");
      }
      mesh->vertices.row(v) = (pos + (r_c / d.norm() - 1.0) * d).transpose();
    }
  }

  // Laplacian relaxation of interior vertices near the holes (Jacobi sweeps,
  // so the update commutes with the involution on tau-symmetric meshes).
  std::set<int> boundary;
  std::vector<std::vector<int>> nbors(mesh->vertices.rows());
  for (const auto& [key, info] : edge_table(*mesh)) {
    if (info.count == 1) {
      boundary.insert(key.first);
      boundary.insert(key.second);
    }
    nbors[key.first].push_back(key.second);
    nbors[key.second].push_back(key.first);
  }
  std::vector<int> relax;
  for (int v = 0; v < mesh->vertices.rows(); ++v) {
    if (boundary.count(v)) continue;
    const Vector2d pos = mesh->vertices.row(v).transpose();
    for (const auto& c : centers) {
      if (dist_chart(pos, c, p) < r_c + 4.0 * h) {
        relax.push_back(v);
        break;
      }
    }
  }
  const double omega = 0.7;  // under-relaxed Jacobi
  for (int sweep = 0; sweep < 8; ++sweep) {
    std::vector<Vector2d> updated(relax.size());
    for (size_t r = 0; r < relax.size(); ++r) {
      const int v = relax[r];
      const Vector2d pos = mesh->vertices.row(v).transpose();
      Vector2d acc = Vector2d::Zero();
      for (int w : nbors[v]) {
        const Vector2d q = mesh->vertices.row(w).transpose();
        acc += min_image(pos, q, p.x, p.y);
      }
      updated[r] = pos + (omega / static_cast<double>(nbors[v].size())) * acc;
    }
    for (size_t r = 0; r < relax.size(); ++r) {
      mesh->vertices.row(relax[r]) = updated[r].transpose();
    }
  }

  for (int t = 0; t < mesh->triangles.rows(); ++t) {
    if (tri_signed_area(*mesh, t, p) <= 0.0) {
      throw DegenerateParameters(
          "hole resolution too coarse: triangle inverted near the hole");
    }
  }

  // Store the kept loops: reverse the surface-on-left walk so holes are
  // counterclockwise, rotate to the smallest vertex index, recompute arcs
  // from the final positions.
  for (int want : keep_center_ids) {
    const auto it = std::find(owner.begin(), owner.end(), want);
    if (it == owner.end()) {
      throw DegenerateParameters("requested hole loop not found");
    }
    std::vector<int> cyc = loops[static_cast<size_t>(it - owner.begin())];
    std::reverse(cyc.begin(), cyc.end());
    const auto min_it = std::min_element(cyc.begin(), cyc.end());
    std::rotate(cyc.begin(), min_it, cyc.end());

    MeshLoop loop;
    loop.orientation = -1;
    loop.vertices = std::move(cyc);
    const int n = static_cast<int>(loop.vertices.size());
    loop.arc.resize(n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      loop.arc[j] = s;
      s += edge_vec(*mesh, loop.vertices[j], loop.vertices[(j + 1) % n], p)
               .norm();
    }
    loop.length = s;
    mesh->loops.push_back(std::move(loop));
  }
}

SurfaceMesh build_mobius_with_hole(double R, double h) {
  std::ostringstream name;
  name << "mobius_with_hole(R=" << R << ")";
  SurfaceMesh mesh = build_mobius_cover(R, h, name.str());
  // Chart-flat normalization for this family: the outer quotient loop is
  // parametrized by y itself (length 2 pi) rather than by Euclidean arc.
  mesh.loops[0].length = 2.0 * M_PI;
  const int n_y = static_cast<int>(mesh.loops[0].vertices.size());
  for (int j = 0; j < n_y; ++j) {
    mesh.loops[0].arc[j] = 2.0 * M_PI * j / n_y;
  }

  const double X = std::log(R);
  const Vector2d c_plus(0.45 * X, 0.5 * M_PI);
  const Vector2d c_minus(-0.45 * X, 0.5 * M_PI + M_PI);
  const double radius = 0.30 * X;
  if (radius < 2.5 * h) {
    throw DegenerateParameters("mobius_with_hole: h too coarse for the hole");
  }
  carve_holes(&mesh, {c_plus, c_minus}, radius);
  finish_holes(&mesh, {c_plus, c_minus}, radius, h, {0});
  return mesh;
}

SurfaceMesh build_torus_with_hole(double h) {
  SurfaceMesh mesh = build_torus(h);
  const Vector2d center(0.5, 0.5);
  const double radius = 0.2;
  if (radius < 2.5 * h) {
    throw DegenerateParameters("torus_with_hole: h too coarse for the hole");
  }
  carve_holes(&mesh, {center}, radius);
  finish_holes(&mesh, {center}, radius, h, {0});
  return mesh;
}

// Cover chart of the Klein bottle: the flat unit torus (x, y) in [0,1)^2 with
// involution tau(x, y) = (x + 1/2, -y), a fixed-point-free orientation-
// reversing isometry of the flat metric, so the quotient is the flat Klein
// bottle.  Carving one tau-symmetric disk pair leaves a single quotient
// boundary circle: the non-orientable chi = -1 surface with connected
// boundary.
SurfaceMesh build_klein_with_hole(double h) {
  int n = std::max(16, static_cast<int>(std::lround(1.0 / h)));
  // Multiple of 4 so tau sends each quad's (i+j)-parity diagonal onto the
  // mirrored diagonal of the image quad (tau maps triangles to triangles).
  n = (n + 3) / 4 * 4;
  SurfaceMesh mesh;
  mesh.family = "klein_with_hole";
  mesh.period_x = 1.0;
  mesh.period_y = 1.0;
  std::vector<Vector2d> verts;
  verts.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      verts.emplace_back(static_cast<double>(i) / n,
                         static_cast<double>(j) / n);
    }
  }
  std::vector<Eigen::Vector3i> tris;
  StructuredGrid g;
  g.rows = n;
  g.cols = n;
  g.rows_cyclic = true;
  emit_grid_triangles(g, &tris);
  fill_matrices(verts, tris, &mesh);

  CoverData cover;
  cover.tau.resize(verts.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cover.tau[i * n + j] = ((i + n / 2) % n) * n + ((n - j) % n);
    }
  }
  mesh.cover = std::move(cover);
  mesh.orientable = false;

  const Vector2d c_plus(0.25, 0.25);
  const Vector2d c_minus(0.75, 0.75);  // tau(c_plus)
  // Large hole: strong coupling between the boundary data and the cover's
  // surviving cycle keeps the obstructed directions far above mesh noise.
  const double radius = 0.28;
  if (radius < 2.5 * h) {
    throw DegenerateParameters("klein_with_hole: h too coarse for the hole");
  }
  carve_holes(&mesh, {c_plus, c_minus}, radius);
  finish_holes(&mesh, {c_plus, c_minus}, radius, h, {0});
  return mesh;
}

}  // namespace

SurfaceMesh build_mesh(const MeshFamily& family, double h) {
  if (!(h > 0.0) || h > 0.5) {
    throw DegenerateParameters("mesh size h must be in (0, 0.5]");
  }
  SurfaceMesh mesh;
  if (family.name == "disk") {
    mesh = build_disk(h);
  } else if (family.name == "annulus") {
    mesh = build_annulus(family.rho, h);
  } else if (family.name == "mobius") {
    std::ostringstream name;
    name << "mobius(R=" << family.R << ")";
    mesh = build_mobius_cover(family.R, h, name.str());
  } else if (family.name == "mobius_with_hole") {
    mesh = build_mobius_with_hole(family.R, h);
  } else if (family.name == "torus_with_hole") {
    mesh = build_torus_with_hole(h);
  } else if (family.name == "klein_with_hole") {
    mesh = build_klein_with_hole(h);
  } else {
    throw UnknownFamily("unknown mesh family: " + family.name);
  }
  validate_mesh(mesh);
  return mesh;
}

SurfaceMesh perturb_metric(const SurfaceMesh& mesh, const PerturbationSpec& p) {
  if (p.epsilon < 0.0) {
    throw DegenerateParameters("perturbation strength must be >= 0");
  }
  if (p.profile != "bump") {
    throw ConfigError("unknown perturbation profile: " + p.profile);
  }
  if (p.epsilon == 0.0) return mesh;

  const ChartPeriods per = periods_of(mesh);
  SurfaceMesh out = mesh;

  // Distance-to-boundary field sampled at triangle centroids.
  std::vector<int> boundary_verts;
  {
    std::set<int> bset;
    for (const auto& [key, info] : edge_table(mesh)) {
      if (info.count == 1) {
        bset.insert(key.first);
        bset.insert(key.second);
      }
    }
    boundary_verts.assign(bset.begin(), bset.end());
  }
  if (boundary_verts.empty()) {
    throw DegenerateParameters("perturbation requires a boundary");
  }

  const int n_t = static_cast<int>(mesh.triangles.rows());
  std::vector<Vector2d> centroids(n_t);
  for (int t = 0; t < n_t; ++t) {
    const auto tri = mesh.triangles.row(t);
    const Vector2d p0 = mesh.vertices.row(tri[0]).transpose();
    centroids[t] = p0 + (edge_vec(mesh, tri[0], tri[1], per) +
                         edge_vec(mesh, tri[0], tri[2], per)) /
                            3.0;
  }
  std::vector<double> dist(n_t, std::numeric_limits<double>::max());
  for (int t = 0; t < n_t; ++t) {
    for (int v : boundary_verts) {
      const Vector2d q = mesh.vertices.row(v).transpose();
      dist[t] = std::min(dist[t], dist_chart(centroids[t], q, per));
    }
  }
  const double d_max = *std::max_element(dist.begin(), dist.end());
  std::vector<double> phi(n_t);
  for (int t = 0; t < n_t; ++t) {
    phi[t] = smoothstep5((dist[t] - 0.3 * d_max) / (0.3 * d_max));
  }

  // Symmetrize over the involution orbit so the quotient metric stays
  // well defined.
  if (mesh.cover) {
    std::map<std::array<int, 3>, int> by_verts;
    for (int t = 0; t < n_t; ++t) {
      std::array<int, 3> key = {mesh.triangles(t, 0), mesh.triangles(t, 1),
                                mesh.triangles(t, 2)};
      std::sort(key.begin(), key.end());
      by_verts[key] = t;
    }
    std::vector<double> sym(n_t);
    for (int t = 0; t < n_t; ++t) {
      std::array<int, 3> key = {mesh.cover->tau[mesh.triangles(t, 0)],
                                mesh.cover->tau[mesh.triangles(t, 1)],
                                mesh.cover->tau[mesh.triangles(t, 2)]};
      std::sort(key.begin(), key.end());
      const auto it = by_verts.find(key);
      if (it == by_verts.end()) {
        throw DegenerateParameters("involution does not map triangles to triangles");
      }
      sym[t] = 0.5 * (phi[t] + phi[it->second]);
    }
    phi = std::move(sym);
  }

  double max_phi = 0.0;
  for (int t = 0; t < n_t; ++t) {
    max_phi = std::max(max_phi, phi[t]);
    if (phi[t] == 0.0) continue;
    Matrix2d& g = out.metric[t];
    if (p.mode == PerturbationSpec::Mode::kConformal) {
      g *= std::exp(p.epsilon * phi[t]);
    } else {
      const Vector2d w = g.col(1);  // g * theta-direction
      const double denom = g(1, 1);
      g += ((std::exp(2.0 * p.epsilon * phi[t]) - 1.0) / denom) *
           (w * w.transpose());
    }
  }

  if (p.preserve_boundary_length) {
    // A nonzero profile on a triangle with a boundary edge changes the
    // induced boundary length.
    const auto edges = edge_table(mesh);
    for (int t = 0; t < n_t; ++t) {
      if (phi[t] == 0.0) continue;
      const auto tri = mesh.triangles.row(t);
      for (int e = 0; e < 3; ++e) {
        const int a = tri[e];
        const int b = tri[(e + 1) % 3];
        const auto it = edges.find({std::min(a, b), std::max(a, b)});
        if (it != edges.end() && it->second.count == 1) {
          throw BoundaryLengthChanged(
              "perturbation profile reaches the boundary");
        }
      }
    }
  }

  if (p.mode == PerturbationSpec::Mode::kShear) {
    out.log_k_true = mesh.log_k_true + 2.0 * p.epsilon * max_phi;
  } else {
    out.log_k_true = mesh.log_k_true;
  }
  std::ostringstream tag;
  tag << (p.mode == PerturbationSpec::Mode::kConformal ? "+conformal("
                                                       : "+shear(")
      << p.epsilon << ")";
  out.family = mesh.family + tag.str();
  return out;
}

SurfaceMesh double_cover(const SurfaceMesh& mesh) {
  SurfaceMesh out;
  out.family = mesh.family + "+cover";
  out.period_x = mesh.period_x;
  out.period_y = mesh.period_y;
  out.orientable = true;
  out.log_k_true = mesh.log_k_true;
  if (mesh.cover) {
    // The stored complex already is the cover; expose its full boundary.
    out.vertices = mesh.vertices;
    out.triangles = mesh.triangles;
    out.metric = mesh.metric;
    out.cover = mesh.cover;
    out.loops = mesh.loops;
    for (const auto& loop : mesh.loops) {
      MeshLoop other = loop;
      for (size_t j = 0; j < other.vertices.size(); ++j) {
        other.vertices[j] = mesh.cover->tau[loop.vertices[j]];
      }
      other.orientation = -loop.orientation;
      out.loops.push_back(std::move(other));
    }
    return out;
  }

  // Disjoint union with the chart-reflected copy; the involution swaps them
  // and reverses orientation.
  const int n_v = static_cast<int>(mesh.vertices.rows());
  const int n_t = static_cast<int>(mesh.triangles.rows());
  out.vertices.resize(2 * n_v, 2);
  out.vertices.topRows(n_v) = mesh.vertices;
  for (int v = 0; v < n_v; ++v) {
    double y = -mesh.vertices(v, 1);
    if (mesh.period_y > 0.0) {
      y -= mesh.period_y * std::floor(y / mesh.period_y);
    }
    out.vertices(n_v + v, 0) = mesh.vertices(v, 0);
    out.vertices(n_v + v, 1) = y;
  }
  out.triangles.resize(2 * n_t, 3);
  out.triangles.topRows(n_t) = mesh.triangles;
  for (int t = 0; t < n_t; ++t) {
    out.triangles(n_t + t, 0) = n_v + mesh.triangles(t, 0);
    out.triangles(n_t + t, 1) = n_v + mesh.triangles(t, 2);
    out.triangles(n_t + t, 2) = n_v + mesh.triangles(t, 1);
  }
  out.metric.resize(2 * n_t);
  const Matrix2d F = (Matrix2d() << 1.0, 0.0, 0.0, -1.0).finished();
  for (int t = 0; t < n_t; ++t) {
    out.metric[t] = mesh.metric[t];
    out.metric[n_t + t] = F * mesh.metric[t] * F;
  }
  CoverData cover;
  cover.tau.resize(2 * n_v);
  for (int v = 0; v < n_v; ++v) {
    cover.tau[v] = n_v + v;
    cover.tau[n_v + v] = v;
  }
  out.cover = std::move(cover);
  out.loops = mesh.loops;
  for (const auto& loop : mesh.loops) {
    MeshLoop other = loop;
    for (size_t j = 0; j < other.vertices.size(); ++j) {
      other.vertices[j] = n_v + loop.vertices[j];
    }
    other.orientation = -loop.orientation;
    out.loops.push_back(std::move(other));
  }
  return out;
}

int mesh_chi(const SurfaceMesh& mesh) {
  const int v = static_cast<int>(mesh.vertices.rows());
  const int f = static_cast<int>(mesh.triangles.rows());
  std::set<std::pair<int, int>> edges;
  for (int t = 0; t < f; ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return v - static_cast<int>(edges.size()) + f;
}

void validate_mesh(const SurfaceMesh& mesh, double lambda_min,
                   double lambda_max) {
  const ChartPeriods p = periods_of(mesh);
  const int n_v = static_cast<int>(mesh.vertices.rows());
  const int n_t = static_cast<int>(mesh.triangles.rows());
  if (n_v < 3 || n_t < 1) throw DegenerateParameters("mesh is empty");
  if (static_cast<int>(mesh.metric.size()) != n_t) {
    throw DegenerateParameters("one metric tensor per triangle required");
  }
  for (int t = 0; t < n_t; ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      if (tri[e] < 0 || tri[e] >= n_v) {
        throw DegenerateParameters("triangle vertex index out of range");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw DegenerateParameters("degenerate triangle");
    }
    if (tri_signed_area(mesh, t, p) <= 0.0) {
      throw DegenerateParameters("triangle is not counterclockwise");
    }
    const Matrix2d& g = mesh.metric[t];
    const double scale = g.cwiseAbs().maxCoeff();
    if (std::abs(g(0, 1) - g(1, 0)) > 1e-12 * scale) {
      throw DegenerateParameters("metric tensor is not symmetric");
    }
    const double mean = 0.5 * (g(0, 0) + g(1, 1));
    const double disc = std::sqrt(0.25 * (g(0, 0) - g(1, 1)) * (g(0, 0) - g(1, 1)) +
                                  g(0, 1) * g(0, 1));
    const double lo = mean - disc;
    const double hi = mean + disc;
    if (!(lo >= lambda_min && hi <= lambda_max)) {
      throw DegenerateParameters("metric eigenvalues out of range");
    }
  }

  const auto edges = edge_table(mesh);
  for (const auto& [key, info] : edges) {
    (void)key;
    if (info.count > 2) {
      throw DegenerateParameters("edge shared by more than two triangles");
    }
  }
  for (const auto& loop : mesh.loops) {
    const int n = static_cast<int>(loop.vertices.size());
    if (n < 3) throw DegenerateParameters("boundary loop too short");
    if (static_cast<int>(loop.arc.size()) != n) {
      throw DegenerateParameters("loop arc table size mismatch");
    }
    if (loop.orientation != 1 && loop.orientation != -1) {
      throw DegenerateParameters("loop orientation must be +1 or -1");
    }
    if (!(loop.length > 0.0)) throw DegenerateParameters("loop length must be positive");
    for (int j = 0; j < n; ++j) {
      if (loop.arc[j] < 0.0 || loop.arc[j] >= loop.length) {
        throw DegenerateParameters("loop arc parameter out of range");
      }
      if (j > 0 && loop.arc[j] <= loop.arc[j - 1]) {
        throw DegenerateParameters("loop arc parameters must increase");
      }
      const int a = loop.vertices[j];
      const int b = loop.vertices[(j + 1) % n];
      const auto it = edges.find({std::min(a, b), std::max(a, b)});
      if (it == edges.end() || it->second.count != 1) {
        throw DegenerateParameters("loop edge is not a boundary edge");
      }
    }
  }

  if (mesh.cover) {
    const auto& tau = mesh.cover->tau;
    if (static_cast<int>(tau.size()) != n_v) {
      throw DegenerateParameters("involution size mismatch");
    }
    for (int v = 0; v < n_v; ++v) {
      if (tau[v] < 0 || tau[v] >= n_v || tau[v] == v || tau[tau[v]] != v) {
        throw DegenerateParameters("involution is not a fixed-point-free pairing");
      }
    }
    std::set<std::array<int, 3>> tri_set;
    for (int t = 0; t < n_t; ++t) {
      std::array<int, 3> key = {mesh.triangles(t, 0), mesh.triangles(t, 1),
                                mesh.triangles(t, 2)};
      std::sort(key.begin(), key.end());
      tri_set.insert(key);
    }
    for (int t = 0; t < n_t; ++t) {
      std::array<int, 3> key = {tau[mesh.triangles(t, 0)],
                                tau[mesh.triangles(t, 1)],
                                tau[mesh.triangles(t, 2)]};
      std::sort(key.begin(), key.end());
      if (!tri_set.count(key)) {
        throw DegenerateParameters("involution does not preserve the triangulation");
      }
    }
  } else if (!mesh.orientable) {
    throw DegenerateParameters("non-orientable mesh requires cover data");
  }
}

Eigen::Vector2d chart_edge(const SurfaceMesh& mesh, int a, int b) {
  return edge_vec(mesh, a, b, periods_of(mesh));
}

double max_chart_edge(const SurfaceMesh& mesh) {
  const ChartPeriods p = periods_of(mesh);
  double h = 0.0;
  for (int t = 0; t < mesh.triangles.rows(); ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      h = std::max(h, edge_vec(mesh, tri[e], tri[(e + 1) % 3], p).norm());
    }
  }
  return h;
}

}  // namespace surfeit
