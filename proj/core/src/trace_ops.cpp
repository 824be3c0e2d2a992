#include "surfeit/trace_ops.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <utility>

#include "surfeit/errors.hpp"

namespace surfeit {
namespace {

constexpr double kTiny = 1e-300;

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// J applied to the per-component mean-free part.  The discarded means are the
// period defect; frak_D re-injects them through its explicit defect term.
BoundaryFunction jhat(const BoundaryFunction& g) {
  return integrate_J(project_zero_mean(g));
}

// Per-component constant function carrying the component means of g.
BoundaryFunction component_means(const BoundaryFunction& g) {
  const GridPtr& grid = g.grid();
  Eigen::VectorXcd v(grid->size());
  for (int c = 0; c < grid->num_components(); ++c) {
    v.segment(grid->offset(c), grid->component(c).n).setConstant(g.mean(c));
  }
  return BoundaryFunction(grid, std::move(v));
}

BoundaryFunction indicator(const GridPtr& grid, int c) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid->size());
  v.segment(grid->offset(c), grid->component(c).n).setOnes();
  return BoundaryFunction(grid, std::move(v));
}

// An operator value kept as a list of terms.  sum() is the operator; the
// scale members are cancellation-free magnitude estimates (sums over terms),
// used to decide when a computed value is "zero" for this data.
struct TermSum {
  std::vector<BoundaryFunction> terms;

  void add(BoundaryFunction t) { terms.push_back(std::move(t)); }

  BoundaryFunction sum() const {
    BoundaryFunction s = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) s = s + terms[i];
    return s;
  }
  double sup_scale() const {
    double a = 0.0;
    for (const auto& t : terms) a += t.sup_norm();
    return a;
  }
  double d_sup_scale() const {
    double a = 0.0;
    for (const auto& t : terms) a += derivative_gamma(t).sup_norm();
    return a;
  }
  double l2_scale() const {
    double a = 0.0;
    for (const auto& t : terms) a += t.l2_norm();
    return a;
  }
};

TermSum n_terms(const DNMatrix& dn, const BoundaryFunction& f,
                const BoundaryFunction& lf, const BoundaryFunction& vf) {
  TermSum s;
  s.add(dn.apply(f.pointwise(f)) * Complex(0.5));
  s.add(dn.apply(vf.pointwise(vf)) * Complex(-0.5));
  s.add(f.pointwise(lf) * Complex(-1.0));
  s.add(vf.pointwise(derivative_gamma(f)) * Complex(-1.0));
  return s;
}

TermSum d_terms(const DNMatrix& dn, const BoundaryFunction& f,
                const BoundaryFunction& lf) {
  TermSum s;
  s.add(derivative_gamma(f));
  s.add(dn.apply(jhat(lf)));
  s.add(component_means(lf));
  return s;
}

TermSum q_terms(const DNMatrix& dn, const BoundaryFunction& f,
                const BoundaryFunction& lf, const BoundaryFunction& vf,
                const BoundaryFunction& dgf, const BoundaryFunction& h,
                const BoundaryFunction& lh, const BoundaryFunction& vh,
                const BoundaryFunction& dgh) {
  TermSum s;
  s.add(dn.apply(f.pointwise(h)));
  s.add(dn.apply(vf.pointwise(vh)) * Complex(-1.0));
  s.add(f.pointwise(lh) * Complex(-1.0));
  s.add(h.pointwise(lf) * Complex(-1.0));
  s.add(vf.pointwise(dgh) * Complex(-1.0));
  s.add(vh.pointwise(dgf) * Complex(-1.0));
  return s;
}

// Everything about f that the linearization of G at f reuses per direction.
struct FrozenF {
  const DNMatrix& dn;
  BoundaryFunction f, lf, vf, dgf;
  TermSum nt, dt;
  BoundaryFunction nf, df, dnf, ddf;
  double n_scale, nd_scale, d_scale, dd_scale;

  FrozenF(const DNMatrix& dn_in, const BoundaryFunction& f_in)
      : dn(dn_in),
        f(f_in),
        lf(dn_in.apply(f_in)),
        vf(jhat(lf)),
        dgf(derivative_gamma(f_in)),
        nt(n_terms(dn_in, f_in, lf, vf)),
        dt(d_terms(dn_in, f_in, lf)),
        nf(nt.sum()),
        df(dt.sum()),
        dnf(derivative_gamma(nf)),
        ddf(derivative_gamma(df)),
        n_scale(nt.sup_scale()),
        nd_scale(nt.d_sup_scale()),
        d_scale(dt.sup_scale()),
        dd_scale(dt.d_sup_scale()) {}

  BoundaryFunction g_value() const {
    return df.pointwise(dnf) - nf.pointwise(ddf);
  }
  double g_scale() const { return d_scale * nd_scale + n_scale * dd_scale; }
  // Cancellation fraction of D at f.  Near zero f is (numerically) an
  // extendable trace: there both factors of G collapse and the linearization
  // degenerates, so such points are useless as anchors.
  double d_rel() const { return df.sup_norm() / std::max(d_scale, kTiny); }

  BoundaryFunction g1_value(const BoundaryFunction& h,
                            double* scale_out = nullptr) const {
    const BoundaryFunction lh = dn.apply(h);
    const BoundaryFunction vh = jhat(lh);
    const BoundaryFunction dgh = derivative_gamma(h);
    const TermSum dth = d_terms(dn, h, lh);
    const TermSum qt = q_terms(dn, f, lf, vf, dgf, h, lh, vh, dgh);
    const BoundaryFunction dh = dth.sum();
    const BoundaryFunction q = qt.sum();
    BoundaryFunction r = dnf.pointwise(dh) - nf.pointwise(derivative_gamma(dh)) +
                         df.pointwise(derivative_gamma(q)) - ddf.pointwise(q);
    if (scale_out) {
      *scale_out = nd_scale * dth.sup_scale() + n_scale * dth.d_sup_scale() +
                   d_scale * qt.d_sup_scale() + dd_scale * qt.sup_scale();
    }
    return r;
  }
};

// Real 2n-vector of a complex grid function, rows weighted by sqrt(ds).
Eigen::VectorXd stacked(const BoundaryFunction& g, const Eigen::VectorXd& sw) {
  const int n = g.size();
  Eigen::VectorXd out(2 * n);
  out.head(n) = sw.cwiseProduct(g.values().real());
  out.tail(n) = sw.cwiseProduct(g.values().imag());
  return out;
}

BoundaryFunction combine(const GridPtr& grid,
                         const std::vector<BoundaryFunction>& basis,
                         const Eigen::VectorXd& x) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid->size());
  for (int i = 0; i < x.size(); ++i) v += x(i) * basis[i].values();
  return BoundaryFunction(grid, std::move(v));
}

struct RankSplit {
  int large = 0;       // number of singular values above the split
  bool clean = false;  // a valid split position was found
  double sigma_max = 0.0;
  double gap_ratio = std::numeric_limits<double>::infinity();
  double margin = 0.0;  // how decisively the split holds (>= 1 when clean)
  Eigen::VectorXd sv;
  Eigen::MatrixXd V;  // right singular vectors, decreasing singular value
};

// Scans the singular values of M for a clean rank split.  Position r is a
// valid split when everything below it is noise (sv(r) <= abs_floor) and,
// for interior r, the step is decisive: sv(r-1)/sv(r) >= gap_required.  The
// full-rank reading r = B is valid when even the smallest singular value
// exceeds the floor.  The smallest valid r wins.  With `throwing`, no valid
// position raises RankAmbiguous; otherwise the result has clean = false and
// large = the plain floor crossing.  A gradually descending spectrum that
// straddles the floor with no decisive step is exactly the ambiguous case.
RankSplit split_rank(const Eigen::MatrixXd& M, double abs_floor,
                     double gap_required, bool throwing, const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
  RankSplit out;
  out.sv = svd.singularValues();
  out.V = svd.matrixV();
  const int B = static_cast<int>(out.sv.size());
  out.sigma_max = B > 0 ? out.sv(0) : 0.0;
  const double floor = std::max(abs_floor, kTiny);
  for (int r = 0; r < B; ++r) {
    const double below = out.sv(r);
    if (below > floor) continue;  // noise condition fails
    const double ratio = r == 0 ? std::numeric_limits<double>::infinity()
                                : out.sv(r - 1) / std::max(below, kTiny);
    if (ratio < gap_required) continue;
    out.large = r;
    out.clean = true;
    out.gap_ratio = ratio;
    out.margin = r == 0 ? floor / std::max(out.sigma_max, kTiny)
                        : std::min(ratio / gap_required,
                                   floor / std::max(below, kTiny));
    return out;
  }
  // Full rank: every singular value sits above the floor.
  if (B == 0 || out.sv(B - 1) > floor) {
    out.large = B;
    out.clean = true;
    out.gap_ratio = std::numeric_limits<double>::infinity();
    out.margin = B == 0 ? 1.0 : out.sv(B - 1) / floor;
    return out;
  }
  if (throwing) {
    throw RankAmbiguous(std::string(what) +
                        ": no decisive singular-value split (spectrum "
                        "descends gradually through the noise floor)");
  }
  int large = 0;
  while (large < B && out.sv(large) > floor) ++large;
  out.large = large;
  out.gap_ratio = large > 0 && large < B
                      ? out.sv(large - 1) / std::max(out.sv(large), kTiny)
                      : 1.0;
  out.margin = 1.0;
  return out;
}

// Discretized D on the band with every column normalized by its own
// cancellation-free scale, so each entry of the singular spectrum reads as a
// cancellation fraction in [0, 1]: directions annihilated by D sit at the
// discretization noise level regardless of their physical wavenumber, and
// obstructed directions sit at O(1).  The split floor is then simply the
// relative zero threshold of the operator.
RankSplit d_band_split(const DNMatrix& dn, int k_max, double gap_required,
                       bool throwing, const char* what) {
  const std::vector<BoundaryFunction> band = band_basis(dn.grid(), k_max);
  const Eigen::VectorXd sw = dn.grid()->weights().cwiseSqrt();
  Eigen::MatrixXd M(2 * dn.grid()->size(), static_cast<int>(band.size()));
  for (std::size_t i = 0; i < band.size(); ++i) {
    const TermSum dt = d_terms(dn, band[i], dn.apply(band[i]));
    M.col(static_cast<int>(i)) =
        stacked(dt.sum(), sw) / std::max(dt.l2_scale(), kTiny);
  }
  return split_rank(M, null_tolerance_rel(dn), gap_required, throwing, what);
}

// Coordinate-space projector onto band functions whose DN image has zero mean
// on every component (the J-admissible slice of the band).
std::vector<Eigen::VectorXd> admissibility_rows(
    const DNMatrix& dn, const std::vector<BoundaryFunction>& basis) {
  const GridPtr& grid = dn.grid();
  const int B = static_cast<int>(basis.size());
  std::vector<Eigen::VectorXd> raw;
  for (int c = 0; c < grid->num_components(); ++c) {
    Eigen::VectorXd row(B);
    for (int i = 0; i < B; ++i) {
      row(i) = std::real(dn.apply(basis[i]).mean(c));
    }
    raw.push_back(row);
  }
  double max_norm = 0.0;
  for (const auto& r : raw) max_norm = std::max(max_norm, r.norm());
  // The component fluxes sum to zero (DN output is globally mean-free), so at
  // most b-1 of these functionals are independent; capping the count keeps
  // discretization roundoff from surviving as a spurious constraint.
  const int max_rows = grid->num_components() - 1;
  std::vector<Eigen::VectorXd> rows;
  for (Eigen::VectorXd r : raw) {
    if (static_cast<int>(rows.size()) >= max_rows) break;
    for (const auto& q : rows) r -= q.dot(r) * q;
    if (r.norm() > std::max(1e-10 * max_norm, 1e-14)) rows.push_back(r.normalized());
  }
  return rows;
}

void project_coords(Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& rows) {
  for (const auto& q : rows) x -= q.dot(x) * q;
}

// Orthonormal coordinate basis of the admissible slice: columns span the
// orthogonal complement of the admissibility rows, and each column stays as
// close to a single band element as the projection allows (the slice is cut
// out of the band one unit vector at a time).
Eigen::MatrixXd admissible_coord_basis(int B,
                                       const std::vector<Eigen::VectorXd>& rows) {
  std::vector<Eigen::VectorXd> cols;
  for (int i = 0; i < B; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(B, i);
    project_coords(v, rows);
    for (const auto& q : cols) v -= q.dot(v) * q;
    if (v.norm() > 1e-10) cols.push_back(v.normalized());
  }
  Eigen::MatrixXd P(B, static_cast<int>(cols.size()));
  for (int j = 0; j < P.cols(); ++j) P.col(j) = cols[static_cast<size_t>(j)];
  return P;
}

struct LMState {
  Eigen::VectorXd x;
  double residual_l2 = std::numeric_limits<double>::infinity();
};

// One damped Gauss-Newton (Levenberg-Marquardt) step for min ||R(x)||, given
// the residual and exact Jacobian at x.  Returns the accepted state and
// updates lambda; `normalize` re-projects iterates onto the unit sphere.
bool lm_step(const Eigen::MatrixXd& J, const Eigen::VectorXd& R, LMState& st,
             double& lambda, bool normalize,
             const std::function<double(const Eigen::VectorXd&)>& eval) {
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  const Eigen::VectorXd JtR = J.transpose() * R;
  const double diag_scale = std::max(JtJ.diagonal().maxCoeff(), kTiny);
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd A = JtJ;
    A.diagonal().array() += lambda * diag_scale;
    Eigen::VectorXd step = A.ldlt().solve(-JtR);
    Eigen::VectorXd xn = st.x + step;
    if (normalize) {
      const double nn = xn.norm();
      if (nn < 1e-12) {
        lambda *= 10.0;
        continue;
      }
      xn /= nn;
    }
    const double rn = eval(xn);
    if (rn < st.residual_l2) {
      st.x = xn;
      st.residual_l2 = rn;
      lambda = std::max(lambda / 3.0, 1e-12);
      return true;
    }
    lambda *= 10.0;
  }
  return false;
}

}  // namespace

BoundaryFunction frak_N(const DNMatrix& dn, const BoundaryFunction& f) {
  const BoundaryFunction lf = dn.apply(f);
  return n_terms(dn, f, lf, jhat(lf)).sum();
}

BoundaryFunction frak_D(const DNMatrix& dn, const BoundaryFunction& f) {
  return d_terms(dn, f, dn.apply(f)).sum();
}

BoundaryFunction frak_Q(const DNMatrix& dn, const BoundaryFunction& f,
                        const BoundaryFunction& h) {
  const BoundaryFunction lf = dn.apply(f);
  const BoundaryFunction lh = dn.apply(h);
  return q_terms(dn, f, lf, jhat(lf), derivative_gamma(f), h, lh, jhat(lh),
                 derivative_gamma(h))
      .sum();
}

BoundaryFunction g_map(const DNMatrix& dn, const BoundaryFunction& f) {
  return FrozenF(dn, f).g_value();
}

BoundaryFunction g1_linearization(const DNMatrix& dn, const BoundaryFunction& f,
                                  const BoundaryFunction& h) {
  return FrozenF(dn, f).g1_value(h);
}

BoundaryFunction g2_map(const DNMatrix& dn, const BoundaryFunction& f,
                        const BoundaryFunction& h) {
  const BoundaryFunction lf = dn.apply(f);
  const BoundaryFunction lh = dn.apply(h);
  const BoundaryFunction vf = jhat(lf);
  const BoundaryFunction vh = jhat(lh);
  const BoundaryFunction dgf = derivative_gamma(f);
  const BoundaryFunction dgh = derivative_gamma(h);
  const BoundaryFunction nh = n_terms(dn, h, lh, vh).sum();
  const BoundaryFunction df = d_terms(dn, f, lf).sum();
  const BoundaryFunction dh = d_terms(dn, h, lh).sum();
  const BoundaryFunction q =
      q_terms(dn, f, lf, vf, dgf, h, lh, vh, dgh).sum();
  return df.pointwise(derivative_gamma(nh)) - derivative_gamma(df).pointwise(nh) +
         derivative_gamma(q).pointwise(dh) - q.pointwise(derivative_gamma(dh));
}

double g_scale(const DNMatrix& dn, const BoundaryFunction& f) {
  return FrozenF(dn, f).g_scale();
}

double g1_scale(const DNMatrix& dn, const BoundaryFunction& f,
                const BoundaryFunction& h) {
  double s = 0.0;
  FrozenF(dn, f).g1_value(h, &s);
  return s;
}

double null_tolerance_rel(const DNMatrix& dn) {
  return std::max(1e-8, 5.0 * dn.tol_dn());
}

double c_ratio(const DNMatrix& dn, const BoundaryFunction& f, CRatioInfo* info) {
  if (info) *info = CRatioInfo{};
  const GridPtr& grid = dn.grid();
  // Global constants have no preferred additive normalization: c = 0.
  const Complex global_mean =
      f.l2_inner(BoundaryFunction::from_real(
          grid, Eigen::VectorXd::Ones(grid->size()))) /
      grid->total_length();
  Eigen::VectorXcd centered = f.values();
  centered.array() -= global_mean;
  if (centered.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + f.sup_norm())) {
    return 0.0;
  }

  const BoundaryFunction lf = dn.apply(f);
  const BoundaryFunction vf = jhat(lf);
  const TermSum nt = n_terms(dn, f, lf, vf);
  const TermSum dt = d_terms(dn, f, lf);
  const Eigen::VectorXd nv = nt.sum().values().real();
  const Eigen::VectorXd dv = dt.sum().values().real();

  const double tol_rel = null_tolerance_rel(dn);
  int jmax = 0;
  const double dmax = dv.cwiseAbs().maxCoeff(&jmax);
  if (dmax <= tol_rel * std::max(dt.sup_scale(), kTiny)) {
    throw DenominatorDegenerate(
        fmt("c_ratio: max |Df| = %.3e is at noise level %.3e", dmax,
            tol_rel * dt.sup_scale()));
  }

  const double pointwise = nv(jmax) / dv(jmax);
  const Eigen::VectorXd& w = grid->weights();
  const double denom = (w.array() * dv.array().square()).sum();
  const double least_squares = (w.array() * nv.array() * dv.array()).sum() / denom;

  // Both estimates of a common constant; treat values below the operator
  // noise floor as agreeing zeros.
  const double zero_floor = tol_rel * nt.sup_scale() / dmax;
  const double mag = std::max(std::abs(pointwise), std::abs(least_squares));
  const double disagreement =
      std::abs(pointwise - least_squares) / std::max(mag, kTiny);
  const bool both_zero = mag <= zero_floor;
  const bool fallback = !both_zero && disagreement > 0.10;
  if (info) {
    info->pointwise = pointwise;
    info->least_squares = least_squares;
    info->ls_fallback = fallback;
    info->disagreement = both_zero ? 0.0 : disagreement;
  }
  return fallback ? least_squares : pointwise;
}

SymmetricTraceData symmetric_trace(const DNMatrix& dn, const GridPtr& doubled,
                                   const BoundaryFunction& f,
                                   std::optional<double> c_override) {
  if (!doubled || !doubled->is_doubled()) {
    throw GridMismatch("symmetric_trace: a doubled grid is required");
  }
  if (!doubled->base()->same_shape(*dn.grid()) ||
      !f.grid()->same_shape(*dn.grid())) {
    throw GridMismatch("symmetric_trace: grid shapes disagree");
  }
  if (!f.is_real()) {
    throw NotAdmissible("symmetric_trace: the boundary datum must be real");
  }
  const BoundaryFunction v = jhat(dn.apply(f));
  const double c = c_override ? *c_override : c_ratio(dn, f);
  Eigen::VectorXcd vals(doubled->size());
  for (int idx = 0; idx < doubled->size(); ++idx) {
    const int j = doubled->base_node(idx);
    const double s = doubled->sigma(idx);
    vals(idx) = Complex(std::real(f.value(j)),
                        s * (std::real(v.value(j)) + c));
  }
  return SymmetricTraceData{BoundaryFunction(doubled, std::move(vals)), f, c};
}

BoundaryFunction orientable_trace_solve(const DNMatrix& dn,
                                        const BoundaryFunction& f) {
  const BoundaryFunction lf = dn.apply(f);
  const TermSum dt = d_terms(dn, f, lf);
  const BoundaryFunction df = dt.sum();
  const double tol_abs =
      null_tolerance_rel(dn) * std::max(dt.sup_scale(), kTiny);
  if (df.sup_norm() > tol_abs) {
    throw NotInKernel(fmt("orientable_trace_solve: ||Df|| = %.3e exceeds %.3e",
                          df.sup_norm(), tol_abs));
  }
  return f + jhat(lf) * Complex(0.0, 1.0);
}

std::vector<BoundaryFunction> band_basis(const GridPtr& grid, int k_max) {
  if (k_max < 1) throw DegenerateParameters("band_basis: k_max must be >= 1");
  for (int c = 0; c < grid->num_components(); ++c) {
    if (k_max > grid->component(c).n / 2 - 1) {
      throw DegenerateParameters(
          "band_basis: k_max exceeds the resolution of a component");
    }
  }
  std::vector<BoundaryFunction> out;
  const int b = grid->num_components();
  if (b > 1) {
    // L2-orthonormal basis of per-component constants modulo the global one.
    const double total = grid->total_length();
    for (int c = 0; c + 1 < b; ++c) {
      BoundaryFunction f = indicator(grid, c);
      const double comp_len = grid->component(c).length;
      f = f - BoundaryFunction::from_real(
                  grid, Eigen::VectorXd::Constant(grid->size(), comp_len / total));
      for (const auto& prev : out) f = f - prev * f.l2_inner(prev);
      const double nn = f.l2_norm();
      if (nn <= 1e-14) {
        throw DegenerateParameters("band_basis: degenerate constant direction");
      }
      out.push_back(f * Complex(1.0 / nn));
    }
  }
  for (int c = 0; c < b; ++c) {
    const double norm = std::sqrt(grid->component(c).length / 2.0);
    for (int k = 1; k <= k_max; ++k) {
      const BoundaryFunction ep = BoundaryFunction::harmonic(grid, c, k);
      const BoundaryFunction em = BoundaryFunction::harmonic(grid, c, -k);
      out.push_back((ep + em) * Complex(0.5 / norm));                // cosine
      out.push_back((ep - em) * Complex(0.0, -0.5 / norm));          // sine
    }
  }
  return out;
}

BoundaryFunction admissible_projection(const DNMatrix& dn,
                                       const BoundaryFunction& f) {
  const GridPtr& grid = dn.grid();
  std::vector<BoundaryFunction> q;
  double scale = 0.0;
  std::vector<BoundaryFunction> images;
  for (int c = 0; c < grid->num_components(); ++c) {
    images.push_back(dn.apply(indicator(grid, c)));
    scale = std::max(scale, images.back().l2_norm());
  }
  // The indicator images sum to the image of the global constant, which the
  // DN map annihilates, so at most b-1 are independent; the cap keeps
  // discretization roundoff (a noise direction of huge C^l norm) out of q.
  const int max_dirs = grid->num_components() - 1;
  for (BoundaryFunction g : images) {
    if (static_cast<int>(q.size()) >= max_dirs) break;
    for (const auto& p : q) g = g - p * g.l2_inner(p);
    const double nn = g.l2_norm();
    if (nn > std::max(1e-8 * scale, 1e-14)) q.push_back(g * Complex(1.0 / nn));
  }
  BoundaryFunction out = f;
  for (const auto& p : q) out = out - p * out.l2_inner(p);
  return out;
}

ProbeResult orientability_probe(const DNMatrix& dn,
                                const std::vector<BoundaryFunction>& trials,
                                double tol_orient, int k_max) {
  if (trials.empty()) {
    throw DegenerateParameters("orientability_probe: no trial functions");
  }
  // The decision threshold adapts to the noise floor of the operator itself.
  const double eff_tol = std::max(tol_orient, dn.tol_dn());

  double min_res = std::numeric_limits<double>::infinity();
  int usable = 0;
  for (const auto& trial : trials) {
    const BoundaryFunction fa = admissible_projection(dn, trial);
    if (fa.l2_norm() <= 1e-12 * (trial.l2_norm() + 1.0)) continue;
    ++usable;
    // Cancellation-relative residual: ||sum of terms|| over the sum of term
    // norms.  Unlike a C^l-normalized ratio this does not shrink with the
    // physical wavenumber of the trial, so short boundary components cannot
    // mask a non-vanishing D.
    const TermSum dt = d_terms(dn, fa, dn.apply(fa));
    const double res = dt.sum().sup_norm() / std::max(dt.sup_scale(), kTiny);
    min_res = std::min(min_res, res);
  }
  if (usable == 0) {
    throw Inconclusive("orientability_probe: all trials were inadmissible");
  }

  // The structural verdict reads the shape of the normalized band spectrum
  // of D.  Orientable: ker D has finite codimension 1 - chi (flux and
  // handle-period directions), so the spectrum splits cleanly -- either all
  // noise (codim 0) or a decisive gap onto a noise tail.  Non-orientable:
  // ker D holds constants only; every wavenumber carries an obstruction, a
  // geometric ladder that either sits entirely above the floor (resolved
  // operators) or descends through it with no decisive step.  Both of the
  // latter shapes -- clean full rank and no clean split at all -- are the
  // non-orientable signature.
  const RankSplit split = d_band_split(dn, k_max, /*gap_required=*/10.0,
                                       /*throwing=*/false,
                                       "orientability_probe");
  const int B = static_cast<int>(split.sv.size());

  ProbeResult out;
  out.kernel_codim = split.clean ? split.large : B;
  out.min_residual = min_res;
  out.orientable = split.clean && split.large < B;
  if (out.orientable) {
    // Trials need not corroborate: on positive-genus surfaces generic trials
    // carry handle-period obstructions, so a large trial residual is
    // consistent with a clean finite-codimension split.
    out.margin = split.margin;
  } else {
    // Trials must corroborate a non-orientable verdict: every admissible
    // direction is obstructed apart from constants, so a trial residual at
    // noise level would contradict the spectrum shape.
    if (min_res <= eff_tol) {
      throw Inconclusive(
          "orientability_probe: band spectrum has no finite-codimension "
          "split, yet a trial residual sits at noise level");
    }
    out.margin = min_res / eff_tol;
  }
  return out;
}

NullSpaceBasis null_space(const DNMatrix& dn, const NullSpaceOptions& opts) {
  const GridPtr& grid = dn.grid();
  const std::vector<BoundaryFunction> band = band_basis(grid, opts.k_max);
  const int B = static_cast<int>(band.size());
  const Eigen::VectorXd sw = grid->weights().cwiseSqrt();
  const double tol_rel = null_tolerance_rel(dn);
  const std::vector<Eigen::VectorXd> adm = admissibility_rows(dn, band);

  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Anchors must be non-degenerate: where D itself nearly cancels, f is a
  // numerically extendable trace, both factors of G collapse, and the
  // linearization is flat in every direction.  Such points satisfy any
  // residual tolerance without carrying kernel structure.
  constexpr double kNonDegenerate = 0.05;

  std::optional<FrozenF> anchor;
  double anchor_tol_abs = 0.0;
  // The band elements themselves come first as starts: single low modes are
  // the prototypical non-degenerate null points, while random mixes tend to
  // fall into the degenerate basin.
  for (int start = 0; start < B + opts.starts && !anchor; ++start) {
    Eigen::VectorXd x(B);
    if (start < B) {
      x.setZero();
      x(start) = 1.0;
    } else {
      for (int i = 0; i < B; ++i) x(i) = gauss(rng);
    }
    project_coords(x, adm);
    if (x.norm() < 1e-8) continue;
    x.normalize();

    const auto eval = [&](const Eigen::VectorXd& xc) {
      return stacked(FrozenF(dn, combine(grid, band, xc)).g_value(), sw).norm();
    };
    LMState st{x, eval(x)};
    double lambda = 1e-3;
    for (int iter = 0; iter < 50; ++iter) {
      FrozenF z(dn, combine(grid, band, st.x));
      const double tol_abs = tol_rel * std::max(z.g_scale(), kTiny);
      if (z.g_value().sup_norm() <= tol_abs) {
        if (z.d_rel() < kNonDegenerate) break;  // degenerate basin; next start
        anchor.emplace(std::move(z));
        anchor_tol_abs = tol_abs;
        break;
      }
      Eigen::MatrixXd J(2 * grid->size(), B);
      for (int i = 0; i < B; ++i) J.col(i) = stacked(z.g1_value(band[i]), sw);
      const Eigen::VectorXd R = stacked(z.g_value(), sw);
      if (!lm_step(J, R, st, lambda, /*normalize=*/true, eval)) break;
    }
  }
  if (!anchor) {
    throw AnchorNotFound(
        "null_space: no anchor reached the residual tolerance; the G-null set "
        "may be empty at this resolution");
  }

  // Codimension by nonlinear folding on the admissible slice.  The null set
  // is a linear space, so every obstructed band direction either cancels
  // against the obstructed directions found before it (their span meets the
  // null set in a line: same functional) or carries an independent
  // obstruction and becomes a new generator.  Direct residuals of single
  // band elements and their folds stay measurable on operators whose
  // linearization at an anchor is already noise-flooded, which is why the
  // split does not reuse the anchor Jacobian.
  const double sup_to_l2 = std::sqrt(grid->total_length());
  const Eigen::MatrixXd P = admissible_coord_basis(B, adm);
  const int Br = static_cast<int>(P.cols());
  if (Br == 0) {
    throw DegenerateParameters("null_space: admissible band slice is empty");
  }

  // Cancellation-relative residual of the (unit) band combination x.
  const auto rel_of = [&](const Eigen::VectorXd& x) {
    FrozenF z(dn, combine(grid, band, x));
    return stacked(z.g_value(), sw).norm() /
           std::max(z.g_scale() * sup_to_l2, kTiny);
  };
  // Fold floor: folded residuals concentrate below the pointwise tolerance,
  // so the classification threshold tracks the operator error directly.
  const double tol_fold = std::max(1e-8, 2.0 * dn.tol_dn());

  std::vector<double> raw(Br);
  std::vector<int> order(Br);
  for (int i = 0; i < Br; ++i) {
    raw[i] = rel_of(P.col(i));
    order[i] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return raw[a] > raw[b]; });

  // Minimize the residual over the projective line spanned by a and g.
  const auto fold_against = [&](const Eigen::VectorXd& a,
                                const Eigen::VectorXd& g) {
    const auto ev = [&](double t) {
      Eigen::VectorXd x = std::cos(t) * a + std::sin(t) * g;
      const double nn = x.norm();
      return nn < 1e-12 ? std::numeric_limits<double>::infinity()
                        : rel_of(x / nn);
    };
    const int N = 720;
    double best_t = 0.0;
    double best = ev(0.0);
    for (int s = 1; s < N; ++s) {
      const double t = M_PI * s / N;
      const double r = ev(t);
      if (r < best) {
        best = r;
        best_t = t;
      }
    }
    double lo = best_t - M_PI / N;
    double hi = best_t + M_PI / N;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double t1 = hi - gr * (hi - lo);
    double t2 = lo + gr * (hi - lo);
    double f1 = ev(t1);
    double f2 = ev(t2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        hi = t2; t2 = t1; f2 = f1;
        t1 = hi - gr * (hi - lo);
        f1 = ev(t1);
      } else {
        lo = t1; t1 = t2; f1 = f2;
        t2 = lo + gr * (hi - lo);
        f2 = ev(t2);
      }
    }
    const double tm = 0.5 * (lo + hi);
    Eigen::VectorXd x = std::cos(tm) * a + std::sin(tm) * g;
    x.normalize();
    return std::make_pair(x, std::min(best, std::min(f1, f2)));
  };

  std::vector<Eigen::VectorXd> gens;
  std::vector<double> gen_res;
  std::vector<Eigen::VectorXd> nulls;
  std::vector<double> null_res;
  for (int oi = 0; oi < Br; ++oi) {
    const int i = order[oi];
    Eigen::VectorXd x = P.col(i);
    double r = raw[i];
    for (int round = 0; round < 2 && r > tol_fold && !gens.empty(); ++round) {
      for (const auto& g : gens) {
        auto folded = fold_against(x, g);
        if (folded.second < r) {
          x = std::move(folded.first);
          r = folded.second;
        }
      }
    }
    if (r <= tol_fold) {
      nulls.push_back(std::move(x));
      null_res.push_back(r);
    } else {
      // Decisively obstructed only: a direction stuck barely above the floor
      // is indistinguishable from an under-resolved fold.
      if (r <= 3.0 * tol_fold) {
        throw RankAmbiguous(fmt(
            "null_space: direction residual %.3e straddles the fold floor "
            "%.3e (neither null nor decisively obstructed)", r, tol_fold));
      }
      gens.push_back(std::move(x));
      gen_res.push_back(r);
    }
  }

  const int m = static_cast<int>(gens.size());
  if (opts.m_hint && m != *opts.m_hint) {
    throw CodimMismatch(fmt("null_space: measured codim %.0f != hinted %.0f",
                            static_cast<double>(m),
                            static_cast<double>(*opts.m_hint)));
  }
  double max_null = 0.0;
  for (double r : null_res) max_null = std::max(max_null, r);
  double min_gen = std::numeric_limits<double>::infinity();
  for (double r : gen_res) min_gen = std::min(min_gen, r);
  const double gap_ratio = m == 0 ? std::numeric_limits<double>::infinity()
                                  : min_gen / std::max(max_null, kTiny);
  if (m > 0 && gap_ratio < opts.gap_required) {
    throw RankAmbiguous(fmt(
        "null_space: obstructed/null residual gap %.1f is below the required "
        "ratio %.1f", gap_ratio, opts.gap_required));
  }

  double sigma_max = 0.0;
  for (double r : raw) sigma_max = std::max(sigma_max, r);
  NullSpaceBasis out{anchor->f, {}, {}, sigma_max, gap_ratio, anchor_tol_abs};

  // Orthonormal kernel basis (most-null first), each vector re-validated by
  // its direct residual: the null set is linear, so combinations must stay
  // at the fold floor, and a spurious member shows up immediately.
  std::vector<int> korder(nulls.size());
  for (size_t i = 0; i < korder.size(); ++i) korder[i] = static_cast<int>(i);
  std::sort(korder.begin(), korder.end(),
            [&](int a, int b) { return null_res[a] < null_res[b]; });
  std::vector<Eigen::VectorXd> kept;
  for (int i : korder) {
    Eigen::VectorXd v = nulls[i];
    for (const auto& q : kept) v -= q.dot(v) * q;
    if (v.norm() < 0.1) continue;  // linearly dependent on earlier members
    v.normalize();
    const double r = rel_of(v);
    if (r > 3.0 * tol_fold) {
      throw NotInKernel(fmt(
          "null_space: kernel combination fails the direct residual check "
          "(%.3e > %.3e)", r, 3.0 * tol_fold));
    }
    kept.push_back(std::move(v));
  }
  for (const auto& v : kept) out.kernel.push_back(combine(grid, band, v));
  std::vector<Eigen::VectorXd> gkept;
  for (Eigen::VectorXd g : gens) {
    for (const auto& q : gkept) g -= q.dot(g) * q;
    if (g.norm() < 1e-8) continue;
    g.normalize();
    gkept.push_back(std::move(g));
  }
  for (const auto& g : gkept) out.complement.push_back(combine(grid, band, g));
  return out;
}

int euler_characteristic(const DNMatrix& dn, bool orientable, int k_max) {
  if (!orientable) {
    NullSpaceOptions opts;
    opts.k_max = k_max;
    // Parity with the orientable branch: the probe-grade certification
    // demands a decisive (x10) step, not the full kernel-threshold ratio.
    opts.gap_required = 10.0;
    return -null_space(dn, opts).codim();
  }
  const RankSplit split = d_band_split(dn, k_max, /*gap_required=*/10.0,
                                       /*throwing=*/true,
                                       "euler_characteristic");
  if (split.large == static_cast<int>(split.sv.size())) {
    throw RankAmbiguous(
        "euler_characteristic: band spectrum of D is full rank, which "
        "contradicts the orientable hypothesis");
  }
  return 1 - split.large;
}

double epsilon_metric(const DNMatrix& dn, const DNMatrix& dn_prime, int k_max,
                      int samples, unsigned seed) {
  if (!dn.grid()->same_shape(*dn_prime.grid())) {
    throw GridMismatch("epsilon_metric: operators live on different grids");
  }
  if (samples < 1) throw DegenerateParameters("epsilon_metric: samples >= 1");
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    BoundaryFunction f = random_band_function(dn.grid(), k_max, seed + i);
    const double c4 = cl_norm(f, 4);
    if (c4 <= kTiny) continue;
    f = f * Complex(1.0 / c4);
    worst = std::max(worst,
                     (g_map(dn_prime, f) - g_map(dn, f)).sup_norm());
  }
  return worst;
}

BoundaryFunction transfer_Y(const DNMatrix& dn, const DNMatrix& dn_prime,
                            const NullSpaceBasis& basis, const BoundaryFunction& f,
                            double* out_d_norm) {
  if (!dn.grid()->same_shape(*dn_prime.grid()) ||
      !f.grid()->same_shape(*dn.grid())) {
    throw GridMismatch("transfer_Y: grid shapes disagree");
  }
  if (out_d_norm) *out_d_norm = 0.0;
  // Identical operators: the transfer is the identity, exactly.
  if (dn.matrix().rows() == dn_prime.matrix().rows() &&
      (dn.matrix().array() == dn_prime.matrix().array()).all()) {
    return f;
  }
  const int m = basis.codim();
  if (m == 0) return f;

  const GridPtr& grid = dn.grid();
  const Eigen::VectorXd sw = grid->weights().cwiseSqrt();
  const double tol_rel = null_tolerance_rel(dn_prime);
  const double escape = 10.0 * std::max(f.l2_norm(), 1e-12);

  const auto shifted = [&](const Eigen::VectorXd& d) {
    BoundaryFunction g = f;
    for (int k = 0; k < m; ++k) g = g - basis.complement[k] * Complex(d(k));
    return g;
  };
  const auto eval = [&](const Eigen::VectorXd& d) {
    return stacked(FrozenF(dn_prime, shifted(d)).g_value(), sw).norm();
  };

  LMState st{Eigen::VectorXd::Zero(m), eval(Eigen::VectorXd::Zero(m))};
  double lambda = 1e-3;
  double tol_abs = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    FrozenF z(dn_prime, shifted(st.x));
    tol_abs = tol_rel * std::max(z.g_scale(), kTiny);
    if (z.g_value().sup_norm() <= tol_abs) break;
    Eigen::MatrixXd J(2 * grid->size(), m);
    for (int k = 0; k < m; ++k) {
      J.col(k) = -stacked(z.g1_value(basis.complement[k]), sw);
    }
    const Eigen::VectorXd R = stacked(z.g_value(), sw);
    const bool ok = lm_step(J, R, st, lambda, /*normalize=*/false, eval);
    if (st.x.norm() > escape) {
      throw MinimizerEscaped(fmt("transfer_Y: |d| = %.3e exceeds %.3e",
                                 st.x.norm(), escape));
    }
    if (!ok) break;
  }
  const BoundaryFunction result = shifted(st.x);
  const double final_res = g_map(dn_prime, result).sup_norm();
  if (final_res > tol_abs) {
    throw NonConvergence(fmt(
        "transfer_Y: residual %.3e did not reach the null tolerance %.3e",
        final_res, tol_abs));
  }
  if (out_d_norm) *out_d_norm = st.x.norm();
  return result;
}

SymmetricTraceData transfer_trace(const DNMatrix& dn, const DNMatrix& dn_prime,
                                  const NullSpaceBasis& basis,
                                  const SymmetricTraceData& trace) {
  const BoundaryFunction f2 = transfer_Y(dn, dn_prime, basis, trace.f);
  const double c2 = c_ratio(dn_prime, f2);
  return symmetric_trace(dn_prime, trace.eta.grid(), f2, c2);
}

}  // namespace surfeit
