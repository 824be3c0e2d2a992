#pragma once

#include <optional>
#include <vector>

#include "surfeit/calculus.hpp"

namespace surfeit {

// Boundary operator algebra built from a DN matrix.  All operators act on
// functions on the base grid of the DN map.  The antiderivative inside them
// is defect-augmented: J is applied to the mean-free part per component, and
// frak_D additionally reports the period defect sum_c mean_c(Lambda f) 1_c.
// On data whose flux periods vanish per component this coincides with the
// classical operators; elsewhere it extends them linearly, which keeps the
// rank bookkeeping of the topology probes faithful.

// N(f) = 1/2 L[f^2 - (JLf)^2] - f Lf - (JLf) d_gamma f        (quadratic)
BoundaryFunction frak_N(const DNMatrix& dn, const BoundaryFunction& f);

// D f = d_gamma f + L J L f + period defect                    (linear)
BoundaryFunction frak_D(const DNMatrix& dn, const BoundaryFunction& f);

// Q(f,h) = L[fh - (JLf)(JLh)] - f Lh - h Lf - (JLf) d_gamma h - (JLh) d_gamma f
// (the polarization of N: Q(f,f) = 2 N(f))
BoundaryFunction frak_Q(const DNMatrix& dn, const BoundaryFunction& f,
                        const BoundaryFunction& h);

// G(f) = Df * d_gamma N(f) - N(f) * d_gamma Df                 (cubic)
BoundaryFunction g_map(const DNMatrix& dn, const BoundaryFunction& f);

// Directional pieces of G(f+h) = G(f) + G1_f(h) + G2_f(h) + G(h):
// G1 linear in h, G2 quadratic in h.
BoundaryFunction g1_linearization(const DNMatrix& dn, const BoundaryFunction& f,
                                  const BoundaryFunction& h);
BoundaryFunction g2_map(const DNMatrix& dn, const BoundaryFunction& f,
                        const BoundaryFunction& h);

// Cancellation-free magnitude estimate of G(f): the sum of sup-norms of the
// individual terms.  Residual thresholds are expressed relative to this.
double g_scale(const DNMatrix& dn, const BoundaryFunction& f);
double g1_scale(const DNMatrix& dn, const BoundaryFunction& f,
                const BoundaryFunction& h);

// Relative zero threshold for G residuals under this DN map.
double null_tolerance_rel(const DNMatrix& dn);

struct CRatioInfo {
  double pointwise = 0.0;
  double least_squares = 0.0;
  bool ls_fallback = false;       // >10% disagreement; least-squares used
  double disagreement = 0.0;
};

// c_f = N(f)/Df at the node maximizing |Df| (0 for constant f).  Falls back
// to the global least-squares ratio when the pointwise and least-squares
// values disagree by more than 10%.  Throws DenominatorDegenerate when
// max|Df| is at noise level (orientable-like input).
double c_ratio(const DNMatrix& dn, const BoundaryFunction& f,
               CRatioInfo* info = nullptr);

// Boundary trace of a symmetric holomorphic function on the doubled grid:
//   eta = f о pi + i sigma ((J Lambda f) о pi + c_f),
// so that eta о tau = conj(eta) holds by construction.
struct SymmetricTraceData {
  BoundaryFunction eta;  // complex, on the doubled grid
  BoundaryFunction f;    // real datum on the base grid
  double c_f = 0.0;
};

SymmetricTraceData symmetric_trace(const DNMatrix& dn, const GridPtr& doubled,
                                   const BoundaryFunction& f,
                                   std::optional<double> c_override = {});

// eta = f + i J Lambda f (mean-free imaginary part) for f in ker D.
// Throws NotInKernel when ||Df|| exceeds the kernel tolerance.
BoundaryFunction orientable_trace_solve(const DNMatrix& dn, const BoundaryFunction& f);

// --------------------------------------------------------------------------
// Band space: real mean-free trigonometric modes k = 1..k_max per component,
// plus the per-component constant differences (dimension b-1) that carry the
// period obstructions.  Functions are L2-orthonormal.
std::vector<BoundaryFunction> band_basis(const GridPtr& grid, int k_max);

// Projection of f onto the J-admissible subspace of the band span: removes
// the components whose fluxes Lambda f obstruct the antiderivative.
BoundaryFunction admissible_projection(const DNMatrix& dn, const BoundaryFunction& f);

struct ProbeResult {
  bool orientable = false;
  // Min over trials of ||Df|| relative to the cancellation-free scale of the
  // terms of D (scale-free in the physical wavenumber of the trial).
  double min_residual = 0.0;
  double margin = 0.0;  // separation factor from the decision threshold
  // Codim of ker of the discretized D on the band: 1 - chi when the spectrum
  // splits cleanly (orientable), the full band dimension otherwise.
  int kernel_codim = 0;
};

// Reads orientability off the shape of the band spectrum of D, with each
// direction normalized by its own cancellation-free scale.  Orientable: the
// spectrum splits cleanly -- all noise (codim 0) or a decisive gap after the
// 1 - chi flux/handle directions.  Non-orientable: obstructions persist at
// every wavenumber, so the spectrum either stays above the noise floor
// entirely or descends through it with no decisive gap; this verdict must be
// corroborated by a trial residual above max(tol_orient, tol_dn), else
// Inconclusive is thrown.  Trials are projected to the admissible subspace
// first and should be low-wavenumber modes the operator resolves well.
// The verdict certifies topology only up to the operator's noise floor:
// an under-resolved discretization is indistinguishable from (and is
// reported as) a surface of lower Euler characteristic.
ProbeResult orientability_probe(const DNMatrix& dn,
                                const std::vector<BoundaryFunction>& trials,
                                double tol_orient = 1e-6, int k_max = 8);

struct NullSpaceBasis {
  BoundaryFunction anchor;                   // nonconstant f0 with G(f0) ~ 0
  std::vector<BoundaryFunction> kernel;      // basis of the null directions
  std::vector<BoundaryFunction> complement;  // h_1..h_m, L2-orthonormal
  double sigma_max = 0.0;   // largest relative G-residual over the band slice
  // min obstructed residual / max folded-null residual (inf: all kernel)
  double gap_ratio = 0.0;
  double tol_null_abs = 0.0;  // absolute residual tolerance met by the anchor
  int codim() const { return static_cast<int>(complement.size()); }
};

struct NullSpaceOptions {
  int k_max = 8;
  int starts = 16;
  unsigned seed = 1;
  double gap_required = 1e2;
  std::optional<int> m_hint;
};

// Structure of the G-null set on the J-admissible band slice (DN image
// mean-free on every component; J is defined only there).  Anchor search is a
// multistart damped Gauss-Newton on the band sphere.  The codimension is then
// measured by folding: the null set is linear, so the span of any two
// directions carrying the same obstruction functional meets it in a line,
// found by a projective line search on the direct (cancellation-relative)
// G-residual.  Directions that fold to the residual floor are null; the
// independent survivors generate the complement.  Folding reads each residual
// directly rather than through the anchor Jacobian, so it stays decisive on
// discretized operators whose linearization is noise-flooded.  Throws
// AnchorNotFound (orientable operators land here: D-degenerate anchors are
// rejected by design) / CodimMismatch / RankAmbiguous (straddling residual or
// gap_ratio below gap_required) / NotInKernel per contract.
NullSpaceBasis null_space(const DNMatrix& dn, const NullSpaceOptions& opts = {});

// chi = 1 - codim(ker D) for orientable surfaces (clean singular-value split
// of the discretized D on the band; RankAmbiguous when the spectrum has no
// decisive gap, which also covers operators too coarse to resolve the
// kernel structure), chi = -codim(G-null set) otherwise (decisive x10
// obstructed/null residual step required, as in the orientable branch).
int euler_characteristic(const DNMatrix& dn, bool orientable, int k_max = 8);

// Sampled estimate of sup over C4-normalized band functions of ||G'f - Gf||.
double epsilon_metric(const DNMatrix& dn, const DNMatrix& dn_prime, int k_max,
                      int samples, unsigned seed);

// f~ = f - sum_k d_k h_k with d minimizing ||G'(f - sum d_k h_k)||, damped
// Gauss-Newton from d = 0.  Identical DN matrices return f unchanged
// (exactly).  Throws MinimizerEscaped when |d| grows beyond C ||f||.
BoundaryFunction transfer_Y(const DNMatrix& dn, const DNMatrix& dn_prime,
                            const NullSpaceBasis& basis, const BoundaryFunction& f,
                            double* out_d_norm = nullptr);

// Transfers a symmetric trace to the perturbed operator:
// f' = Y(f), c' = c_ratio(L', f'), eta' rebuilt on the same doubled grid.
SymmetricTraceData transfer_trace(const DNMatrix& dn, const DNMatrix& dn_prime,
                                  const NullSpaceBasis& basis,
                                  const SymmetricTraceData& trace);

}  // namespace surfeit
