// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/mie.hpp"

#include <cmath>

#include "em2d/bessel.hpp"
#include "em2d/errors.hpp"

namespace em2d
{

namespace
{

// J_0..J_N and Y_0..Y_N at z; real arguments take the cheaper all-double
// path. Y by forward recurrence (the dominant solution upward, also in the
// lossy half-plane where Y ~ jH^(1)/2 grows).
void jy_pair_seq(int N, cplx z, std::vector<cplx> &J, std::vector<cplx> &Y)
{
  if (z.imag() == 0.0 && z.real() > 0.0)
  {
    std::vector<double> jr, yr;
    besseljy_seq(N, z.real(), jr, yr);
    J.assign(jr.begin(), jr.end());
    Y.assign(yr.begin(), yr.end());
    return;
  }
  J = cbesselj_seq(N, z);
  Y.assign(N + 1, 0.0);
  cplx h0, h1;
  chankel2_01(z, h0, h1);
  Y[0] = -jj * (J[0] - h0);
  if (N >= 1)
  {
    Y[1] = -jj * (J[1] - h1);
  }
  for (int k = 1; k < N; ++k)
  {
    Y[k + 1] = 2.0 * double(k) / z * Y[k] - Y[k - 1];
  }
}

// d/dz of the order-m member of a sequence
cplx seq_deriv(const std::vector<cplx> &F, int m, cplx z)
{
  return m == 0 ? -F[1] : F[m - 1] - double(m) / z * F[m];
}

}  // namespace

MieSolution mie_coated_cylinder(const Vec2 &center, double a_inner, double a_outer,
                                const Material &core, const Material &coat,
                                const Material &background, double omega, double phi_inc,
                                double amplitude)
{
  if (!(a_inner > 0.0) || !(a_outer >= a_inner))
  {
    throw ConfigError("layered cylinder needs 0 < a_inner <= a_outer");
  }

  MieSolution s;
  s.center = center;
  s.a_inner = a_inner;
  s.a_outer = a_outer;
  s.core = core;
  s.coat = coat;
  s.background = background;
  s.omega = omega;
  s.phi_inc = phi_inc;
  s.amplitude = amplitude;
  s.kb = background.wavenumber(omega);

  // Degenerate layerings drop one interface. Either way the innermost
  // material is `core`, and conductors stay representable because the
  // interior only ever appears through log-derivatives and J ratios.
  s.collapsed = (core == coat) || (coat == background);
  if (s.collapsed)
  {
    s.a_eff = (core == coat) ? a_outer : a_inner;
    s.interior = core;
  }

  const cplx mub = background.mu_r;
  int N = int(std::ceil(std::abs(s.kb) * a_outer)) + 15;

  for (;;)
  {
    s.a.assign(N + 1, 0.0);
    s.surf.assign(N + 1, 0.0);
    s.bcoat.assign(N + 1, 0.0);
    s.ccoat.assign(N + 1, 0.0);
    s.core_at_inner.assign(N + 1, 0.0);

    if (s.collapsed)
    {
      const cplx kin = s.interior.wavenumber(omega);
      const cplx zb = s.kb * s.a_eff;
      std::vector<cplx> Jb, Yb;
      jy_pair_seq(N + 1, zb, Jb, Yb);
      for (int m = 0; m <= N; ++m)
      {
        const cplx rho = kin / s.interior.mu_r * log_deriv_j(m, kin * s.a_eff);
        const cplx H2m = Jb[m] - jj * Yb[m];
        const cplx H2p = seq_deriv(Jb, m, zb) - jj * seq_deriv(Yb, m, zb);
        s.a[m] = -((s.kb / mub) * seq_deriv(Jb, m, zb) - rho * Jb[m]) /
                 ((s.kb / mub) * H2p - rho * H2m);
        s.surf[m] = Jb[m] + s.a[m] * H2m;
      }
    }
    else
    {
      const cplx k1 = core.wavenumber(omega);
      const cplx kc = coat.wavenumber(omega);
      const cplx z1 = kc * a_inner, z2 = kc * a_outer, zb = s.kb * a_outer;
      std::vector<cplx> J1, Y1, J2, Y2, Jb, Yb;
      jy_pair_seq(N + 1, z1, J1, Y1);
      jy_pair_seq(N + 1, z2, J2, Y2);
      jy_pair_seq(N + 1, zb, Jb, Yb);
      for (int m = 0; m <= N; ++m)
      {
        const cplx rho1 = k1 / core.mu_r * log_deriv_j(m, k1 * a_inner);
        const cplx kcm = kc / coat.mu_r;
        const cplx gam = -(kcm * seq_deriv(J1, m, z1) - rho1 * J1[m]) /
                         (kcm * seq_deriv(Y1, m, z1) - rho1 * Y1[m]);
        const cplx rho2 = kcm * (seq_deriv(J2, m, z2) + gam * seq_deriv(Y2, m, z2)) /
                          (J2[m] + gam * Y2[m]);
        const cplx H2m = Jb[m] - jj * Yb[m];
        const cplx H2p = seq_deriv(Jb, m, zb) - jj * seq_deriv(Yb, m, zb);
        s.a[m] = -((s.kb / mub) * seq_deriv(Jb, m, zb) - rho2 * Jb[m]) /
                 ((s.kb / mub) * H2p - rho2 * H2m);
        s.bcoat[m] = (Jb[m] + s.a[m] * H2m) / (J2[m] + gam * Y2[m]);
        s.ccoat[m] = s.bcoat[m] * gam;
        s.core_at_inner[m] = s.bcoat[m] * (J1[m] + gam * Y1[m]);
      }
    }

    double amax = 0.0;
    for (const cplx &v : s.a)
    {
      amax = std::max(amax, std::abs(v));
    }
    const double tail = amax > 0.0 ? std::abs(s.a[N]) / amax : 0.0;
    if (tail < 1e-12)
    {
      break;
    }
    if (N >= 200)
    {
      if (tail > 1e-8)
      {
        throw NumericalFailure("cylinder series not converged by order 200");
      }
      break;
    }
    N = std::min(200, N + N / 2 + 5);
  }
  s.n_terms = N;
  return s;
}

double MieSolution::sigma_2d(double phi) const
{
  cplx sum = a[0];
  for (int m = 1; m <= n_terms; ++m)
  {
    sum += 2.0 * a[m] * std::cos(m * (phi - phi_inc));
  }
  return 4.0 / std::abs(kb) * std::norm(sum);
}

double MieSolution::optical_theorem_residual() const
{
  double acc = std::norm(a[0]) + a[0].real();
  double scale = std::norm(a[0]);
  for (int m = 1; m <= n_terms; ++m)
  {
    acc += 2.0 * (std::norm(a[m]) + a[m].real());
    scale += 2.0 * std::norm(a[m]);
  }
  return scale > 0.0 ? std::abs(acc) / scale : 0.0;
}

cplx MieSolution::total_field(const Vec2 &p) const
{
  const Vec2 d = p - center;
  const double rho = norm(d);
  const double delta = std::atan2(d.y, d.x) - phi_inc;
  const int N = n_terms;

  std::vector<cplx> rad(N + 1, 0.0);
  if (!collapsed && rho >= a_outer)
  {
    std::vector<cplx> J, Y;
    jy_pair_seq(N, kb * rho, J, Y);
    for (int m = 0; m <= N; ++m)
    {
      rad[m] = J[m] + a[m] * (J[m] - jj * Y[m]);
    }
  }
  else if (!collapsed && rho >= a_inner)
  {
    std::vector<cplx> J, Y;
    jy_pair_seq(N, coat.wavenumber(omega) * rho, J, Y);
    for (int m = 0; m <= N; ++m)
    {
      rad[m] = bcoat[m] * J[m] + ccoat[m] * Y[m];
    }
  }
  else if (!collapsed)
  {
    const cplx k1 = core.wavenumber(omega);
    for (int m = 0; m <= N; ++m)
    {
      rad[m] = core_at_inner[m] * bessel_ratio_j(m, k1 * rho, k1 * a_inner);
    }
  }
  else if (rho >= a_eff)
  {
    std::vector<cplx> J, Y;
    jy_pair_seq(N, kb * rho, J, Y);
    for (int m = 0; m <= N; ++m)
    {
      rad[m] = J[m] + a[m] * (J[m] - jj * Y[m]);
    }
  }
  else
  {
    const cplx kin = interior.wavenumber(omega);
    for (int m = 0; m <= N; ++m)
    {
      rad[m] = surf[m] * bessel_ratio_j(m, kin * rho, kin * a_eff);
    }
  }

  cplx tot = rad[0];
  cplx mj = 1.0;  // (-j)^m
  for (int m = 1; m <= N; ++m)
  {
    mj *= -jj;
    tot += 2.0 * mj * rad[m] * std::cos(m * delta);
  }
  // phase of the incident wave at the expansion center
  const cplx phase0 =
      std::exp(-jj * kb * (center.x * std::cos(phi_inc) + center.y * std::sin(phi_inc)));
  return amplitude * phase0 * tot;
}

}  // namespace em2d
