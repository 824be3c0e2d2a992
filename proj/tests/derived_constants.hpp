// Generated by tests/oracle/generate.py — do not edit by hand.
// Reference values for the analytic boundary models, computed
// independently at 60-digit precision and rounded to double.
#pragma once
#include <complex>

namespace oracle {
using C = std::complex<double>;

// quotient model on |z| = R = 2: Dirichlet-to-Neumann multipliers
inline constexpr double mobius_R = 2.0;
inline constexpr double mobius_lambda[11] = {
    0.0, 0.83333333333333333, 0.88235294117647059, 1.5476190476190476, 1.9844357976653696, 2.5048875855327468, 2.9985355137905785, 3.5004272721723738, 3.9998779315501167, 4.5000343324063584, 4.9999904632659309};
// coefficient of sin(theta) in D(cos theta) for the quotient model
inline constexpr double mobius_D_cos_coeff = 0.88888888888888889;

// annulus rho = 1/2 <= |z| <= 1, mode blocks acting on (f_out, f_in)
// row 0 = outer flux, row 1 = inner flux; k = 0..3
inline constexpr double annulus_rho = 0.5;
inline constexpr double annulus_block[4][2][2] = {
    {{1.4426950408889634, -1.4426950408889634}, {-2.8853900817779268, 2.8853900817779268}},
    {{1.6666666666666667, -1.3333333333333333}, {-2.6666666666666667, 3.3333333333333333}},
    {{2.2666666666666667, -1.0666666666666667}, {-2.1333333333333333, 4.5333333333333333}},
    {{3.0952380952380952, -0.76190476190476190}, {-1.5238095238095238, 6.1904761904761905}}};
// outer circle with insulating inner circle: diagonal multipliers k=0..3
inline constexpr double annulus_neumann_lambda[4] = {
    0.0, 0.60000000000000000, 1.7647058823529412, 2.9076923076923077};

// interior argument-principle oracle, embedding (z - 1/z, i(z + 1/z))
// direction (1, 0.8i)/sqrt(1.64), target z* = 1.3 on the cover annulus
inline const C gap_dir_xi1 = C(0.78086880944303033, 0.0);
inline const C gap_dir_xi2 = C(0.0, 0.62469504755442426);
inline const C gap_zeta = C(-0.87817707646593103, 0.0);
inline constexpr double gap_zeta_curve_dist = 0.48774267174441587;
inline const C gap_xi1 = C(0.53076923076923077, 0.0);
inline const C gap_xi2 = C(0.0, 2.0692307692307692);
inline const C gap_dxi1 = C(1.6112632552567224, 0.0);  // d/dz of w1 o wdir^{-1} at zeta
inline const C gap_dxi2 = C(0.0, 0.41329800971269089);
inline const C gap_ddxi1 = C(1.1797793237719079, 0.0);
inline const C gap_ddxi2 = C(0.0, 1.4747241547148849);

// near-boundary oracle at s0 = 0, (s, rho) = (0.1, 0.02), same embedding
inline constexpr double nb_s0 = 0.0;
inline constexpr double nb_s = 0.10000000000000000;
inline constexpr double nb_rho = 0.020000000000000000;
inline const C nb_point = C(-0.40009775790552630, 0.050735326726950155);  // straightened chart point
inline const C nb_xi1 = C(1.4732718753511840, 0.12372372314831817);
inline const C nb_xi2 = C(-0.073438503870545423, 2.4820587569358339);
inline const C nb_dxi1 = C(2.4362617310612536, 0.11989067631496900);

// H1->L2 norm of the multiplier 0.1|k| on the unit circle, K_max = 16
inline constexpr double opnorm_scaled_disk = 0.099805257848288855;

}  // namespace oracle
