// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/bem.hpp"

#include <algorithm>
#include <cmath>

#include "em2d/bessel.hpp"

namespace em2d
{

namespace
{

// Gauss-Legendre on [-1,1]
const double gl8_x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                         -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                         0.7966664774136267,  0.9602898564975363};
const double gl8_w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                         0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                         0.2223810344533745, 0.1012285362903763};
const double gl12_x[12] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
                           -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
                           0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
                           0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
const double gl12_w[12] = {0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
                           0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
                           0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                           0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

// e-folding cutoff: exp(-46) ~ 1e-20, far below every tolerance in use
constexpr double decay_cut = 46.0;

struct SegIntegrals
{
  cplx s[2]{0.0, 0.0};  // single layer tested with N0, N1
  cplx d[2]{0.0, 0.0};  // double layer tested with N0, N1
};

// int_0^u ln sqrt(h^2+s^2) ds  and  int_0^u s ln sqrt(h^2+s^2) ds
double log_prim_a(double u, double h)
{
  if (u == 0.0)
  {
    return 0.0;
  }
  const double r = std::sqrt(h * h + u * u);
  double t = u * std::log(r) - u;
  if (h != 0.0)
  {
    t += h * std::atan(u / h);
  }
  return t;
}

double log_prim_b(double u, double h)
{
  const double r2 = h * h + u * u;
  if (r2 == 0.0)
  {
    return 0.0;
  }
  return 0.5 * r2 * (0.5 * std::log(r2) - 0.5);
}

// Inner integral of both kernels times both hat functions over one segment,
// for an arbitrary evaluation point x (on or off the contour).
SegIntegrals integrate_segment(const Vec2 &x, const Contour &c, int seg, cplx k)
{
  SegIntegrals out;
  const Vec2 p0 = c.a(seg), p1 = c.b(seg);
  const double l = c.seg_length(seg);
  const Vec2 t{(p1.x - p0.x) / l, (p1.y - p0.y) / l};
  const Vec2 n{t.y, -t.x};

  const double tp = dot(x - p0, t);  // foot of x along the segment
  const double h = dot(x - p0, n);   // signed offset; n.(y-x) = -h on the line
  const double ah = std::abs(h);
  const double kim = std::max(0.0, -k.imag());
  const double kabs = std::abs(k);

  double dmin = ah;
  if (tp < 0.0)
  {
    dmin = norm(x - p0);
  }
  else if (tp > l)
  {
    dmin = norm(x - p1);
  }
  if (kim * dmin > decay_cut)
  {
    return out;
  }

  auto accumulate = [&](double tau, double d, double wgt)
  {
    cplx h0, h1;
    chankel2_01(k * d, h0, h1);
    const cplx g = -0.25 * jj * h0;
    const cplx dg = (d > 0.0) ? 0.25 * jj * k * h1 * (-h / d) : cplx{0.0, 0.0};
    const double n0 = 1.0 - tau / l, n1 = tau / l;
    out.s[0] += wgt * g * n0;
    out.s[1] += wgt * g * n1;
    out.d[0] += wgt * dg * n0;
    out.d[1] += wgt * dg * n1;
  };

  // Far and smooth: one Gauss pass over the whole segment.
  if (dmin >= 1.5 * l && kabs * l <= 6.0)
  {
    for (int q = 0; q < 8; ++q)
    {
      const double tau = 0.5 * l * (1.0 + gl8_x[q]);
      const Vec2 y = p0 + t * tau;
      accumulate(tau, norm(y - x), 0.5 * l * gl8_w[q]);
    }
    return out;
  }

  const double cap = (kabs > 0.0) ? 6.0 / kabs : l;

  // One side of the foot: |xi| in [m0, m1], walking away from the
  // singularity in geometrically growing pieces.
  auto side = [&](double m0, double m1, double dir)
  {
    if (!(m1 > m0))
    {
      return;
    }
    const double d0 = std::sqrt(h * h + m0 * m0);
    double w0 = std::min({m1 - m0, cap, std::max(2.0 * d0, 1e-4 * l)});
    double u0 = m0;
    bool first = true;
    for (int piece = 0; piece < 40 && u0 < m1; ++piece)
    {
      const double u1 = std::min(m1, u0 + w0);
      if (kim * std::sqrt(h * h + u0 * u0) > decay_cut)
      {
        break;
      }
      const bool sub_log = first && m0 == 0.0 && ah <= 0.25 * (u1 - u0);
      if (sub_log)
      {
        // Numerical part: kernel with its log removed. The double-layer
        // kernel needs no subtraction (bounded), so it accumulates as-is.
        for (int q = 0; q < 12; ++q)
        {
          const double u = u0 + 0.5 * (u1 - u0) * (1.0 + gl12_x[q]);
          const double wgt = 0.5 * (u1 - u0) * gl12_w[q];
          const double d = std::sqrt(h * h + u * u);
          const double tau = tp + dir * u;
          cplx h0k, h1k;
          chankel2_01(k * d, h0k, h1k);
          const cplx g_reg = -0.25 * jj * h0k + std::log(d) / (2.0 * pi);
          const cplx dg = 0.25 * jj * k * h1k * (-h / d);
          const double n0 = 1.0 - tau / l, n1 = tau / l;
          out.s[0] += wgt * g_reg * n0;
          out.s[1] += wgt * g_reg * n1;
          out.d[0] += wgt * dg * n0;
          out.d[1] += wgt * dg * n1;
        }
        // Analytic part of -(1/2pi) int ln d(u) phi(u) du with
        // phi(u) = phi_a + phi_b u from each hat function.
        const double da = log_prim_a(u1, h) - log_prim_a(u0, h);
        const double db = log_prim_b(u1, h) - log_prim_b(u0, h);
        const double c0a = 1.0 - tp / l, c0b = -dir / l;  // N0
        const double c1a = tp / l, c1b = dir / l;         // N1
        out.s[0] += (-1.0 / (2.0 * pi)) * (c0a * da + c0b * db);
        out.s[1] += (-1.0 / (2.0 * pi)) * (c1a * da + c1b * db);
      }
      else
      {
        for (int q = 0; q < 12; ++q)
        {
          const double u = u0 + 0.5 * (u1 - u0) * (1.0 + gl12_x[q]);
          const double wgt = 0.5 * (u1 - u0) * gl12_w[q];
          accumulate(tp + dir * u, std::sqrt(h * h + u * u), wgt);
        }
      }
      u0 = u1;
      w0 = std::min(2.0 * w0, cap);
      first = false;
    }
  };

  // tau in [0,l] maps to xi = tau - tp around the foot
  side(std::max(0.0, -tp), std::max(0.0, l - tp), +1.0);  // tau > tp part
  side(std::max(0.0, tp - l), std::max(0.0, tp), -1.0);   // tau < tp part
  return out;
}

double seg_pair_distance(const Contour &ca, int sa, const Contour &cb, int sb)
{
  const Vec2 a0 = ca.a(sa), a1 = ca.b(sa), b0 = cb.a(sb), b1 = cb.b(sb);
  double d = point_segment_distance(a0, b0, b1);
  d = std::min(d, point_segment_distance(a1, b0, b1));
  d = std::min(d, point_segment_distance(b0, a0, a1));
  d = std::min(d, point_segment_distance(b1, a0, a1));
  return d;
}

}  // namespace

BemBlocks assemble_layer_blocks(const Contour &rows, const Contour &cols, cplx k)
{
  const int mr = rows.size(), mc = cols.size();
  BemBlocks out;
  out.S = Eigen::MatrixXcd::Zero(mr, mc);
  out.D = Eigen::MatrixXcd::Zero(mr, mc);

  const double kim = std::max(0.0, -k.imag());
  const double kabs = std::abs(k);

  for (int s = 0; s < mr; ++s)
  {
    const double ls = rows.seg_length(s);
    const Vec2 p0 = rows.a(s), p1 = rows.b(s);
    const int row0 = s, row1 = (s + 1) % mr;

    const int npc = (kabs * ls <= 6.0) ? 1 : std::min(64, int(std::ceil(kabs * ls / 6.0)));
    for (int tseg = 0; tseg < mc; ++tseg)
    {
      if (kim > 0.0 && kim * seg_pair_distance(rows, s, cols, tseg) > decay_cut)
      {
        continue;
      }
      const int col0 = tseg, col1 = (tseg + 1) % mc;
      cplx acc_s[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      cplx acc_d[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      for (int pc = 0; pc < npc; ++pc)
      {
        const double ta = ls * double(pc) / npc, tb = ls * double(pc + 1) / npc;
        for (int q = 0; q < 8; ++q)
        {
          const double tau = ta + 0.5 * (tb - ta) * (1.0 + gl8_x[q]);
          const double wgt = 0.5 * (tb - ta) * gl8_w[q];
          const Vec2 x{p0.x + (p1.x - p0.x) * tau / ls, p0.y + (p1.y - p0.y) * tau / ls};
          const SegIntegrals si = integrate_segment(x, cols, tseg, k);
          const double n0 = 1.0 - tau / ls, n1 = tau / ls;
          for (int b = 0; b < 2; ++b)
          {
            acc_s[0][b] += wgt * n0 * si.s[b];
            acc_s[1][b] += wgt * n1 * si.s[b];
            acc_d[0][b] += wgt * n0 * si.d[b];
            acc_d[1][b] += wgt * n1 * si.d[b];
          }
        }
      }
      const int rr[2] = {row0, row1}, cc[2] = {col0, col1};
      for (int a = 0; a < 2; ++a)
      {
        for (int b = 0; b < 2; ++b)
        {
          out.S(rr[a], cc[b]) += acc_s[a][b];
          out.D(rr[a], cc[b]) += acc_d[a][b];
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd contour_gram(const Contour &c)
{
  const int m = c.size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (int s = 0; s < m; ++s)
  {
    const double l = c.seg_length(s);
    const int i = s, j = (s + 1) % m;
    g(i, i) += l / 3.0;
    g(j, j) += l / 3.0;
    g(i, j) += l / 6.0;
    g(j, i) += l / 6.0;
  }
  return g;
}

cplx eval_single_layer(const Contour &c, const Eigen::VectorXcd &q, cplx k, const Vec2 &x)
{
  cplx acc = 0.0;
  for (int s = 0; s < c.size(); ++s)
  {
    const SegIntegrals si = integrate_segment(x, c, s, k);
    acc += si.s[0] * q[s] + si.s[1] * q[(s + 1) % c.size()];
  }
  return acc;
}

cplx eval_double_layer(const Contour &c, const Eigen::VectorXcd &e, cplx k, const Vec2 &x)
{
  cplx acc = 0.0;
  for (int s = 0; s < c.size(); ++s)
  {
    const SegIntegrals si = integrate_segment(x, c, s, k);
    acc += si.d[0] * e[s] + si.d[1] * e[(s + 1) % c.size()];
  }
  return acc;
}

}  // namespace em2d
