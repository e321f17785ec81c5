// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_BESSEL_HPP
#define EM2D_BESSEL_HPP

#include <vector>

#include "em2d/constants.hpp"

namespace em2d
{

// Complex-argument Bessel/Hankel evaluation for integer orders, scoped to
// what the solver needs: orders up to ~200, |z| up to a few thousand, and
// media with Im(k) <= 0 (passive). Small arguments use the ascending series,
// large arguments the Hankel asymptotic expansions, and the awkward middle
// (order^2 > |z|) the Miller downward recurrence. Chosen over a full Amos
// port because the solver never needs arbitrary order/argument combinations.
//
// For strongly lossy media (|Im z| beyond ~700) raw J/Y values overflow the
// double range; callers must use the ratio/log-derivative entry points, which
// stay finite through the whole copper regime.

cplx cbesselj(int m, cplx z);
cplx cbessely(int m, cplx z);
cplx chankel2(int m, cplx z);  // H_m^(2), the outgoing wave for exp(+jwt)

// Both H_0^(2) and H_1^(2) in one call; the layer-potential kernels always
// need the pair.
void chankel2_01(cplx z, cplx &h0, cplx &h1);

// J_m'(z)/J_m(z) by the continued fraction of Gauss (modified Lentz).
// Robust for any z != 0 including |z| ~ 1e3 with large negative Im part.
cplx log_deriv_j(int m, cplx z);

// J_m(z1)/J_m(z2) for z1, z2 on (nearly) the same ray with |z1| <= |z2|,
// Im(z) <= 0. Underflows cleanly to 0 for deep skin-effect decay instead of
// overflowing the numerator/denominator separately.
cplx bessel_ratio_j(int m, cplx z1, cplx z2);

// J_0..J_N at complex z via Miller recurrence (one normalization pass).
std::vector<cplx> cbesselj_seq(int N, cplx z);

// J_0..J_N and Y_0..Y_N at real x > 0; forward recurrence for Y, Miller for
// J. Used in the Mie field evaluator where per-order std calls would be slow.
void besseljy_seq(int N, double x, std::vector<double> &J, std::vector<double> &Y);

}  // namespace em2d

#endif
