#!/usr/bin/env python3
"""Independent oracle for the C++ test suite.

Computes reference values for the analytic boundary models with mpmath at 60
digits and freezes them into tests/derived_constants.hpp.  Everything here is
derived from first principles (separation of variables for harmonic functions
on annuli, Cauchy integrals for the holomorphic pullbacks); nothing is computed
by the library under test.

Run from the repository root:  python3 tests/oracle/generate.py
"""

import mpmath as mp

mp.mp.dps = 60

OUT = "tests/derived_constants.hpp"


def d(x):
    """Format an mpf as a C++ double literal."""
    return mp.nstr(mp.mpf(x), 17, strip_zeros=False)


def c(z):
    z = mp.mpc(z)
    return "C(%s, %s)" % (d(z.real), d(z.imag))


lines = []
emit = lines.append

# ----------------------------------------------------------------------------
# Quotient model on |z| = R:  boundary data f lifts to (f(th), f(th+pi)) on the
# two circles |z| = R, 1/R of the covering annulus.  Mode e^{ik th} therefore
# extends with a cosh radial profile for even k and sinh for odd k, giving the
# normal derivative (w.r.t. Euclidean arc length on |z| = R):
#   lam_0 = 0,
#   lam_k = (|k|/R) tanh(|k| log R)   (k even),
#   lam_k = (|k|/R) coth(|k| log R)   (k odd).
R = mp.mpf(2)
logR = mp.log(R)


def mobius_lam(k):
    k = abs(k)
    if k == 0:
        return mp.mpf(0)
    if k % 2 == 0:
        return (k / R) * mp.tanh(k * logR)
    return (k / R) * mp.coth(k * logR)


assert abs(mobius_lam(1) - mp.mpf(5) / 6) < mp.mpf(10) ** -50
assert abs(mobius_lam(2) - mp.mpf(15) / 17) < mp.mpf(10) ** -50

# D(cos th) on the quotient model, where D = d/dgamma + Lam J Lam and the grid
# has circumference 2 pi R (so d/ds has physical wavenumber k/R):
#   d/ds cos(s/R)      = -(1/R) sin th
#   Lam cos th         = lam_1 cos th
#   J (lam_1 cos th)   = lam_1 R sin th
#   Lam (lam_1 R sin)  = lam_1^2 R sin th
#   => D cos = (lam_1^2 R - 1/R) sin th = (8/9) sin th  at R = 2.
D_cos_coeff = mobius_lam(1) ** 2 * R - 1 / R
assert abs(D_cos_coeff - mp.mpf(8) / 9) < mp.mpf(10) ** -50

# ----------------------------------------------------------------------------
# Annulus rho <= |z| <= 1, both circles: harmonic extension of mode k (|k|=m>0)
#   u(r) = f_out sinh(m log(r/rho))/sinh(m Lt) + f_in sinh(m log(1/r))/sinh(m Lt)
# with Lt = log(1/rho).  Outward normal derivatives:
#   flux_out =  m coth(m Lt) f_out - (m/sinh(m Lt)) f_in
#   flux_in  = -(m/(rho sinh(m Lt))) f_out + (m/rho) coth(m Lt) f_in
# k = 0:  u = a + b log r, b = (f_in - f_out)/log(rho):
#   flux_out = b,  flux_in = -b/rho.
rho = mp.mpf("0.5")
Lt = mp.log(1 / rho)


def annulus_block(m):
    if m == 0:
        inv = 1 / mp.log(rho)
        return [[inv * (-1), inv * (+1)],
                [inv * (1 / rho), inv * (-1 / rho)]]
    m = mp.mpf(m)
    return [[m * mp.coth(m * Lt), -m / mp.sinh(m * Lt)],
            [-m / (rho * mp.sinh(m * Lt)), (m / rho) * mp.coth(m * Lt)]]


def annulus_neumann_lam(m):
    # outer circle with insulating inner circle: lam = m tanh(m log(1/rho))
    if m == 0:
        return mp.mpf(0)
    return m * mp.tanh(m * Lt)


blk1 = annulus_block(1)
assert abs(blk1[0][0] - mp.mpf(5) / 3) < mp.mpf(10) ** -50  # coth(log 2) = 5/3
# trace of w(z) = z: f = (cos th, rho cos th) must map to flux (cos th, -cos th)
assert abs(blk1[0][0] * 1 + blk1[0][1] * rho - 1) < mp.mpf(10) ** -50
assert abs(blk1[1][0] * 1 + blk1[1][1] * rho + 1) < mp.mpf(10) ** -50

# ----------------------------------------------------------------------------
# Interior generalized-argument-principle oracle on the covering annulus
# 1/R <= |z| <= R of the quotient model, embedding w = (w1, w2),
#   w1(z) = z - 1/z,   w2(z) = i (z + 1/z)       (both symmetric: w(tau z) =
#   conj w(z) for tau(z) = -1/conj(z)).
# Direction xi = (1, 0.8 i)/sqrt(1.64):  w_dir = (a z + b/z)/n with
#   a = 1 + i*(0.8 i) = 0.2,  b = -1 + i*(0.8 i) = -1.8,  n = sqrt(1.64).
# w_dir' = (a - b/z^2)/n vanishes only at |z| = sqrt(|b/a|) = 3, outside the
# cover annulus, so the boundary image is immersed.  w_dir(z) = zeta has the
# two roots z* and b/(a z*); with z* = 1.3 the second root -9/1.3 lies outside
# the annulus, so the winding of the boundary image about zeta is exactly 1.
n = mp.sqrt(mp.mpf("1.64"))
a = mp.mpf("0.2")
b = mp.mpf("-1.8")
zs = mp.mpf("1.3")
assert abs(b / a) > R ** 2 + 1  # critical points well outside the cover


def w1(z):
    return z - 1 / z


def w2(z):
    return mp.mpc(0, 1) * (z + 1 / z)


def wd(z):
    return (a * z + b / z) / n


def w1p(z):
    return 1 + 1 / z ** 2


def w2p(z):
    return mp.mpc(0, 1) * (1 - 1 / z ** 2)


def wdp(z):
    return (a - b / z ** 2) / n


def w1pp(z):
    return -2 / z ** 3


def w2pp(z):
    return mp.mpc(0, 1) * (2 / z ** 3)


def wdpp(z):
    return (2 * b / z ** 3) / n


zeta = wd(zs)
other_root = b / (a * zs)
assert abs(other_root) > R + mp.mpf("0.5")

# distance of zeta from both image curves (sampled densely)
mind = mp.mpf(10) ** 9
for j in range(4096):
    th = 2 * mp.pi * j / 4096
    for zz in (R * mp.e ** (1j * th), (1 / R) * mp.e ** (1j * th)):
        mind = min(mind, abs(wd(zz) - zeta))
assert mind > mp.mpf("0.15"), mind

# pullback derivatives of G_k = w_k o w_dir^{-1} at zeta
G1p = w1p(zs) / wdp(zs)
G2p = w2p(zs) / wdp(zs)
G1pp = (w1pp(zs) - G1p * wdpp(zs)) / wdp(zs) ** 2
G2pp = (w2pp(zs) - G2p * wdpp(zs)) / wdp(zs) ** 2

# ----------------------------------------------------------------------------
# Near-boundary oracle: abstract boundary parameter s on the grid of length
# 2 pi R (outer circle), theta = s/R.  eta_k(s) = w_k(R e^{i s/R}).
# Straightened coordinates anchored at s0 = 0 (z0 = R):
#   z_pt(s, rho_c) = eta_dir(s) + i (d/ds eta_dir)(0) * rho_c.
s_eval = mp.mpf("0.1")
rho_c = mp.mpf("0.02")
dgamma_eta_dir_0 = mp.mpc(0, 1) * wdp(R)  # d/ds wd(R e^{is/R}) at s=0


def eta_dir(s):
    return wd(R * mp.e ** (1j * s / R))


def invert_wd(z_pt, near):
    # roots of a z^2 - (n z_pt) z + b = 0; pick the root nearest `near`
    disc = mp.sqrt((n * z_pt) ** 2 - 4 * a * b)
    r1 = (n * z_pt + disc) / (2 * a)
    r2 = (n * z_pt - disc) / (2 * a)
    return r1 if abs(r1 - near) < abs(r2 - near) else r2


z_pt = eta_dir(s_eval) + mp.mpc(0, 1) * dgamma_eta_dir_0 * rho_c
z_root = invert_wd(z_pt, R * mp.e ** (1j * s_eval / R))
assert 1 / R < abs(z_root) < R  # genuinely interior
nb_xi1 = w1(z_root)
nb_xi2 = w2(z_root)
nb_dxi1 = w1p(z_root) / wdp(z_root)  # d/dz of w1 o wd^{-1} at z_pt

# ----------------------------------------------------------------------------
# H1->L2 operator norm of the diagonal multiplier 0.1|k| on the unit circle
# with mode cutoff 16:  max_k 0.1 |k| / sqrt(1 + k^2) = 1.6/sqrt(257).
opnorm_scaled_disk = mp.mpf("1.6") / mp.sqrt(257)

# ----------------------------------------------------------------------------
emit("// Generated by tests/oracle/generate.py — do not edit by hand.")
emit("// Reference values for the analytic boundary models, computed")
emit("// independently at 60-digit precision and rounded to double.")
emit("#pragma once")
emit("#include <complex>")
emit("")
emit("namespace oracle {")
emit("using C = std::complex<double>;")
emit("")
emit("// quotient model on |z| = R = 2: Dirichlet-to-Neumann multipliers")
emit("inline constexpr double mobius_R = 2.0;")
emit("inline constexpr double mobius_lambda[11] = {")
emit("    " + ", ".join(d(mobius_lam(k)) for k in range(11)) + "};")
emit("// coefficient of sin(theta) in D(cos theta) for the quotient model")
emit("inline constexpr double mobius_D_cos_coeff = %s;" % d(D_cos_coeff))
emit("")
emit("// annulus rho = 1/2 <= |z| <= 1, mode blocks acting on (f_out, f_in)")
emit("// row 0 = outer flux, row 1 = inner flux; k = 0..3")
emit("inline constexpr double annulus_rho = 0.5;")
emit("inline constexpr double annulus_block[4][2][2] = {")
for m in range(4):
    B = annulus_block(m)
    emit("    {{%s, %s}, {%s, %s}}%s" % (d(B[0][0]), d(B[0][1]),
                                         d(B[1][0]), d(B[1][1]),
                                         "," if m < 3 else "};"))
emit("// outer circle with insulating inner circle: diagonal multipliers k=0..3")
emit("inline constexpr double annulus_neumann_lambda[4] = {")
emit("    " + ", ".join(d(annulus_neumann_lam(m)) for m in range(4)) + "};")
emit("")
emit("// interior argument-principle oracle, embedding (z - 1/z, i(z + 1/z))")
emit("// direction (1, 0.8i)/sqrt(1.64), target z* = 1.3 on the cover annulus")
emit("inline const C gap_dir_xi1 = %s;" % c(1 / n))
emit("inline const C gap_dir_xi2 = %s;" % c(mp.mpc(0, "0.8") / n))
emit("inline const C gap_zeta = %s;" % c(zeta))
emit("inline constexpr double gap_zeta_curve_dist = %s;" % d(mind))
emit("inline const C gap_xi1 = %s;" % c(w1(zs)))
emit("inline const C gap_xi2 = %s;" % c(w2(zs)))
emit("inline const C gap_dxi1 = %s;  // d/dz of w1 o wdir^{-1} at zeta" % c(G1p))
emit("inline const C gap_dxi2 = %s;" % c(G2p))
emit("inline const C gap_ddxi1 = %s;" % c(G1pp))
emit("inline const C gap_ddxi2 = %s;" % c(G2pp))
emit("")
emit("// near-boundary oracle at s0 = 0, (s, rho) = (0.1, 0.02), same embedding")
emit("inline constexpr double nb_s0 = 0.0;")
emit("inline constexpr double nb_s = %s;" % d(s_eval))
emit("inline constexpr double nb_rho = %s;" % d(rho_c))
emit("inline const C nb_point = %s;  // straightened chart point" % c(z_pt))
emit("inline const C nb_xi1 = %s;" % c(nb_xi1))
emit("inline const C nb_xi2 = %s;" % c(nb_xi2))
emit("inline const C nb_dxi1 = %s;" % c(nb_dxi1))
emit("")
emit("// H1->L2 norm of the multiplier 0.1|k| on the unit circle, K_max = 16")
emit("inline constexpr double opnorm_scaled_disk = %s;" % d(opnorm_scaled_disk))
emit("")
emit("}  // namespace oracle")
emit("")

with open(OUT, "w") as fh:
    fh.write("\n".join(lines))
print("wrote %s" % OUT)
