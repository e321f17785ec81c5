// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/bessel.hpp"

#include <cmath>
#include <cstdlib>
#include <type_traits>

#include "em2d/errors.hpp"

namespace em2d
{

namespace
{

constexpr double series_cut = 14.0;  // ascending series below, expansions above

// Ascending series, adequate to |z| ~ 14 for any order (terms stay well
// inside double range there).
cplx j_series(int m, cplx z)
{
  cplx u2 = 0.25 * z * z;
  // (z/2)^m / m!
  cplx term = 1.0;
  for (int i = 1; i <= m; ++i)
  {
    term *= 0.5 * z / double(i);
  }
  cplx sum = term;
  for (int k = 1; k < 80; ++k)
  {
    term *= -u2 / double(k * (m + k));
    sum += term;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300))
    {
      break;
    }
  }
  return sum;
}

// Y0 and Y1 by their log-type series (A&S 9.1.88/89 rearranged with
// harmonic numbers).
void y01_series(cplx z, cplx &y0, cplx &y1)
{
  const double euler = 0.57721566490153286;
  const cplx lg = std::log(0.5 * z) + euler;
  const cplx u2 = 0.25 * z * z;

  cplx j0 = j_series(0, z), j1 = j_series(1, z);

  // sum over k of (-1)^(k-1) H_k (z/2)^(2k) / (k!)^2, hence -= below
  cplx term = 1.0, sum0 = 0.0;
  double hk = 0.0;
  for (int k = 1; k < 80; ++k)
  {
    term *= -u2 / double(k * k);
    hk += 1.0 / double(k);
    sum0 -= term * hk;
    if (std::abs(term) < 1e-18)
    {
      break;
    }
  }
  y0 = (2.0 / pi) * (lg * j0 + sum0);

  // sum over k of (-1)^k (H_k + H_{k+1}) (z/2)^{2k+1} / (k! (k+1)!)
  term = 0.5 * z;
  hk = 0.0;
  double hk1 = 1.0;
  cplx sum1 = term * (hk + hk1);
  for (int k = 1; k < 80; ++k)
  {
    term *= -u2 / double(k * (k + 1));
    hk += 1.0 / double(k);
    hk1 += 1.0 / double(k + 1);
    sum1 += term * (hk + hk1);
    if (std::abs(term) < 1e-18)
    {
      break;
    }
  }
  y1 = (2.0 / pi) * (lg * j1 - 1.0 / z) - sum1 / pi;
}

// Hankel asymptotic expansion, sign = +1 for H^(1), -1 for H^(2).
// Caller guarantees m*m <= ~0.6*|z| so the series reaches ~1e-12 before
// its terms turn around.
cplx hankel_asym(int m, cplx z, int sign)
{
  const cplx iw = jj * double(sign) * (z - (0.5 * m + 0.25) * pi);
  const cplx pref = std::sqrt(2.0 / (pi * z)) * std::exp(iw);
  const double mm4 = 4.0 * double(m) * double(m);

  cplx term = 1.0, sum = 1.0;
  double last = 1e300;
  for (int k = 1; k < 40; ++k)
  {
    const double odd = double(2 * k - 1);
    term *= (mm4 - odd * odd) / (8.0 * double(k)) * (double(sign) * jj / z);
    const double mag = std::abs(term);
    if (mag > last)
    {
      break;  // divergent tail reached; best accuracy already in sum
    }
    sum += term;
    last = mag;
    if (mag < 1e-17)
    {
      break;
    }
  }
  return pref * sum;
}

bool asym_ok(int m, cplx z)
{
  return double(m) * double(m) <= 0.6 * std::abs(z);
}

// Miller downward recurrence for J_0..J_N, normalized with
// J_0 + 2 J_2 + 2 J_4 + ... = 1 (valid for complex z).
template <typename Scalar>
std::vector<Scalar> miller_seq(int N, Scalar z)
{
  const double az = std::abs(z);
  if (az == 0.0)
  {
    std::vector<Scalar> out(N + 1, Scalar(0));
    out[0] = Scalar(1);
    return out;
  }
  const int base = std::max(N, int(az) + 1);
  const int M = base + 16 + int(2.0 * std::sqrt(double(base)));

  std::vector<Scalar> f(N + 1, Scalar(0));
  Scalar fk1 = Scalar(0);        // f_{k+1}
  Scalar fk = Scalar(1e-280);    // f_k, arbitrary tiny seed
  Scalar norm = Scalar(0);
  const Scalar two_over_z = Scalar(2) / z;

  for (int k = M; k >= 1; --k)
  {
    Scalar fm1 = double(k) * two_over_z * fk - fk1;
    fk1 = fk;
    fk = fm1;
    if (k - 1 <= N)
    {
      f[k - 1] = fk;
    }
    if (((k - 1) & 1) == 0)
    {
      norm += (k - 1 == 0) ? fk : Scalar(2) * fk;
    }
    if (std::abs(fk) > 1e250)
    {
      const Scalar s = Scalar(1e-250);
      fk *= s;
      fk1 *= s;
      norm *= s;
      for (auto &v : f)
      {
        v *= s;
      }
    }
  }
  // The unit-sum normalizer adds terms of size ~exp(|Im z|) that collapse
  // to 1, so off the real axis it costs that factor in accuracy. Anchor on
  // J_0 from the series/asymptotics instead (J_0 has no complex zeros, so
  // f[0] cannot vanish there).
  if constexpr (std::is_same_v<Scalar, cplx>)
  {
    if (std::abs(z.imag()) > 1.0 && std::abs(f[0]) > 0.0)
    {
      const cplx j0 = az <= series_cut
                          ? j_series(0, z)
                          : 0.5 * (hankel_asym(0, z, +1) + hankel_asym(0, z, -1));
      const cplx s = j0 / f[0];
      for (auto &v : f)
      {
        v *= s;
      }
      return f;
    }
  }
  if (std::abs(norm) == 0.0)
  {
    throw NumericalFailure("Bessel Miller recurrence failed to normalize");
  }
  for (auto &v : f)
  {
    v /= norm;
  }
  return f;
}

}  // namespace

cplx cbesselj(int m, cplx z)
{
  if (m < 0)
  {
    cplx v = cbesselj(-m, z);
    return (m & 1) ? -v : v;
  }
  const double az = std::abs(z);
  if (az <= series_cut)
  {
    return j_series(m, z);
  }
  if (asym_ok(m, z))
  {
    return 0.5 * (hankel_asym(m, z, +1) + hankel_asym(m, z, -1));
  }
  return miller_seq<cplx>(m, z)[m];
}

cplx cbessely(int m, cplx z)
{
  const double az = std::abs(z);
  cplx y0, y1;
  if (az <= series_cut)
  {
    y01_series(z, y0, y1);
  }
  else
  {
    y0 = (hankel_asym(0, z, +1) - hankel_asym(0, z, -1)) / (2.0 * jj);
    y1 = (hankel_asym(1, z, +1) - hankel_asym(1, z, -1)) / (2.0 * jj);
  }
  if (m == 0)
  {
    return y0;
  }
  cplx ym1 = y0, yk = y1;
  for (int k = 1; k < m; ++k)
  {
    cplx yk1 = 2.0 * double(k) / z * yk - ym1;
    ym1 = yk;
    yk = yk1;
  }
  return yk;
}

cplx chankel2(int m, cplx z)
{
  const double az = std::abs(z);
  if (az > series_cut && asym_ok(m, z))
  {
    return hankel_asym(m, z, -1);
  }
  // Oscillatory-lossy corner: J - jY cancels at ~exp(2|Im z|) wherever
  // |H2| << |J|, while the self-truncating asymptotic sum still carries
  // most of its digits up to about m^2 ~ 2|z|. Past that (m near or above
  // |z|) |H2| ~ |Y| again and the combination is safe.
  if (az > series_cut && z.imag() < -2.0 && double(m) * double(m) <= 2.0 * az)
  {
    return hankel_asym(m, z, -1);
  }
  // Series/recurrence route. For small |z| with strongly negative Im z the
  // remaining cancellation is bounded by ~exp(2 * series_cut) in the worst
  // case and is harmless against the kernel scales this feeds (see header
  // note).
  return cbesselj(m, z) - jj * cbessely(m, z);
}

void chankel2_01(cplx z, cplx &h0, cplx &h1)
{
  if (std::abs(z) > series_cut)
  {
    h0 = hankel_asym(0, z, -1);
    h1 = hankel_asym(1, z, -1);
    return;
  }
  cplx y0, y1;
  y01_series(z, y0, y1);
  h0 = j_series(0, z) - jj * y0;
  h1 = j_series(1, z) - jj * y1;
}

cplx log_deriv_j(int m, cplx z)
{
  if (z == 0.0)
  {
    throw NumericalFailure("log_deriv_j at z = 0");
  }
  // r = J_{m+1}/J_m = u / ((m+1) - u^2/((m+2) - u^2/(...))), u = z/2,
  // evaluated with modified Lentz.
  const cplx u = 0.5 * z;
  const cplx a2 = -u * u;
  cplx f = 1e-30, c = f, d = 0.0;
  const int kmax = 20000;
  for (int k = 1; k <= kmax; ++k)
  {
    const cplx a = (k == 1) ? u : a2;
    const cplx b = double(m + k);
    d = b + a * d;
    if (d == 0.0)
    {
      d = 1e-30;
    }
    c = b + a / c;
    if (c == 0.0)
    {
      c = 1e-30;
    }
    d = 1.0 / d;
    const cplx delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-15)
    {
      return double(m) / z - f;
    }
  }
  throw NumericalFailure("log_deriv_j continued fraction did not converge");
}

cplx bessel_ratio_j(int m, cplx z1, cplx z2)
{
  const double a1 = std::abs(z1), a2 = std::abs(z2);
  if (a2 <= series_cut)
  {
    cplx den = j_series(m, z2);
    if (den == 0.0)
    {
      throw NumericalFailure("bessel_ratio_j: zero denominator");
    }
    return j_series(m, z1) / den;
  }
  if (-z1.imag() >= 20.0 && asym_ok(m, z1) && asym_ok(m, z2))
  {
    // Both arguments deep in the lossy regime: J ~ H^(1)/2 on both sides and
    // the ratio collapses to sqrt(z2/z1) * exp(j(z1-z2)) * S(z1)/S(z2) with
    // S the (normalized) asymptotic sums. The exponent has a nonpositive
    // real part here, so this underflows gracefully instead of overflowing.
    const cplx s1 = hankel_asym(m, z1, +1) / (std::sqrt(2.0 / (pi * z1)) *
                                              std::exp(jj * (z1 - (0.5 * m + 0.25) * pi)));
    const cplx s2 = hankel_asym(m, z2, +1) / (std::sqrt(2.0 / (pi * z2)) *
                                              std::exp(jj * (z2 - (0.5 * m + 0.25) * pi)));
    return std::sqrt(z2 / z1) * std::exp(jj * (z1 - z2)) * s1 / s2;
  }
  if (a1 <= series_cut)
  {
    // Tiny numerator against a large (possibly huge) denominator.
    if (-z2.imag() > 650.0)
    {
      return 0.0;  // denominator beyond double range but ratio is ~0 anyway
    }
    cplx den = cbesselj(m, z2);
    if (den == 0.0)
    {
      throw NumericalFailure("bessel_ratio_j: zero denominator");
    }
    return j_series(m, z1) / den;
  }
  if (-z2.imag() > 650.0)
  {
    throw NumericalFailure("bessel_ratio_j outside supported domain (|Im z| too large for "
                           "direct evaluation at this order)");
  }
  cplx den = cbesselj(m, z2);
  if (den == 0.0)
  {
    throw NumericalFailure("bessel_ratio_j: zero denominator");
  }
  return cbesselj(m, z1) / den;
}

std::vector<cplx> cbesselj_seq(int N, cplx z)
{
  return miller_seq<cplx>(N, z);
}

void besseljy_seq(int N, double x, std::vector<double> &J, std::vector<double> &Y)
{
  if (!(x > 0.0))
  {
    throw NumericalFailure("besseljy_seq needs x > 0");
  }
  J = miller_seq<double>(N, x);
  Y.assign(N + 1, 0.0);
  cplx y0, y1;
  if (x <= series_cut)
  {
    y01_series(cplx(x, 0.0), y0, y1);
  }
  else
  {
    y0 = (hankel_asym(0, x, +1) - hankel_asym(0, x, -1)) / (2.0 * jj);
    y1 = (hankel_asym(1, x, +1) - hankel_asym(1, x, -1)) / (2.0 * jj);
  }
  Y[0] = y0.real();
  if (N >= 1)
  {
    Y[1] = y1.real();
  }
  for (int k = 1; k < N; ++k)
  {
    Y[k + 1] = 2.0 * double(k) / x * Y[k] - Y[k - 1];
  }
}

}  // namespace em2d
