// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_CONSTANTS_HPP
#define EM2D_CONSTANTS_HPP

#include <complex>

namespace em2d
{

using cplx = std::complex<double>;

// Time convention is exp(+j w t) throughout: outgoing waves are H0^(2),
// passive media have Im(eps_r) <= 0, and conductivity enters as
// eps_r - j*sigma/(w*eps0).
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double eps0 = 8.8541878128e-12;   // F/m
inline constexpr double mu0 = 1.25663706212e-6;    // H/m
inline constexpr cplx jj{0.0, 1.0};

inline double c0()
{
  return 1.0 / std::sqrt(eps0 * mu0);
}

}  // namespace em2d

#endif
