// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_MIE_HPP
#define EM2D_MIE_HPP

#include <vector>

#include "em2d/constants.hpp"
#include "em2d/fem.hpp"
#include "em2d/geometry.hpp"

namespace em2d
{

// Series reference solution for a plane wave on a two-layer circular
// cylinder: core radius a_inner, coat to a_outer, embedded in a uniform
// background. Azimuthal harmonics with Bessel/Hankel radial functions,
// matched in E_z and (1/mu_r) dE/drho at both interfaces.
//
// Degenerate layerings collapse to the single-interface solution before any
// Bessel evaluation, which is what keeps conductors tractable: the interior
// radial factor is only ever formed as the ratio J_m(k r)/J_m(k a), finite
// through arbitrarily deep skin-effect decay.
struct MieSolution
{
  Vec2 center;
  double a_inner = 0.0, a_outer = 0.0;
  Material core, coat, background;
  double omega = 0.0;
  double phi_inc = 0.0;  // propagation direction of the incident wave
  double amplitude = 1.0;

  cplx kb;                 // background wavenumber
  int n_terms = 0;         // series order used (m = 0..n_terms)
  std::vector<cplx> a;     // scattering coefficients

  bool collapsed = false;  // single-interface reduction applied
  double a_eff = 0.0;      // its radius (a_outer or a_inner)
  Material interior;       // material just inside it
  std::vector<cplx> surf;  // total exterior radial factor at a_eff per order

  // generic two-interface path only:
  std::vector<cplx> bcoat, ccoat;   // coat J/Y standing-wave coefficients
  std::vector<cplx> core_at_inner;  // core radial factor at a_inner per order

  // 2D echo width, meters
  double sigma_2d(double phi) const;
  // total E_z anywhere (all three regions)
  cplx total_field(const Vec2 &p) const;
  // |sum_m eps_m (|a_m|^2 + Re a_m)| / sum_m eps_m |a_m|^2; ~0 for lossless
  // media by the forward-scattering theorem
  double optical_theorem_residual() const;
};

// Throws NumericalFailure if the series tail has not fallen below 1e-8 of
// the largest coefficient by order 200.
MieSolution mie_coated_cylinder(const Vec2 &center, double a_inner, double a_outer,
                                const Material &core, const Material &coat,
                                const Material &background, double omega, double phi_inc = 0.0,
                                double amplitude = 1.0);

}  // namespace em2d

#endif
