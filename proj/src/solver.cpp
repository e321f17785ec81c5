// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/solver.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>
#include <unordered_set>

#include <Eigen/SparseLU>

#include "em2d/bem.hpp"
#include "em2d/errors.hpp"

namespace em2d
{

namespace
{

double seconds_since(const std::chrono::steady_clock::time_point &t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

long peak_rss_kb()
{
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss;
}

}  // namespace

CoupledSystem assemble_coupled_system(const Eigen::SparseMatrix<cplx> &K,
                                      const Eigen::VectorXcd &rhs,
                                      std::vector<DomainCoupling> domains, double omega,
                                      const std::function<cplx(const Vec2 &)> &incident)
{
  CoupledSystem sys;
  sys.rhs = rhs;
  sys.domains = std::move(domains);

  std::unordered_set<int> claimed;
  std::vector<Eigen::Triplet<cplx>> trips;
  const cplx load = jj * omega * mu0;

  for (const DomainCoupling &d : sys.domains)
  {
    for (int g : d.T.global)
    {
      if (!claimed.insert(g).second)
        throw CouplingError("admittance domains overlap at volume node " + std::to_string(g));
    }

    // small dense products first (m and m_s are both O(contour nodes))
    const Eigen::MatrixXd Td = Eigen::MatrixXd(d.T.T);
    const Eigen::MatrixXcd GY = load * (d.op->gram * d.op->Ys);
    const Eigen::MatrixXcd C = Td.transpose() * GY * Td;

    const int m = d.T.rows();
    Eigen::VectorXcd e_inc(m);
    for (int i = 0; i < m; ++i)
      e_inc[i] = incident(d.op->contour.a(i));
    const Eigen::VectorXcd b = Td.transpose() * (GY * e_inc);

    const int ms = d.T.cols();
    for (int r = 0; r < ms; ++r)
    {
      sys.rhs[d.T.global[r]] -= b[r];
      for (int c = 0; c < ms; ++c)
        trips.emplace_back(d.T.global[r], d.T.global[c], C(r, c));
    }
  }

  Eigen::SparseMatrix<cplx> Cs(K.rows(), K.cols());
  Cs.setFromTriplets(trips.begin(), trips.end());
  sys.A = K + Cs;
  return sys;
}

FieldSolution solve(const CoupledSystem &sys)
{
  FieldSolution out;
  out.report.unknowns = static_cast<int>(sys.A.rows());
  out.report.nnz = sys.A.nonZeros();

  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  auto t0 = std::chrono::steady_clock::now();
  lu.compute(sys.A);
  out.report.t_factor = seconds_since(t0);
  if (lu.info() != Eigen::Success)
    throw NumericalFailure("coupled system factorization failed (singular?)");

  t0 = std::chrono::steady_clock::now();
  out.e = lu.solve(sys.rhs);
  out.report.t_solve = seconds_since(t0);

  const double rhs_norm = sys.rhs.norm();
  out.report.residual =
      rhs_norm > 0.0 ? (sys.A * out.e - sys.rhs).norm() / rhs_norm : out.e.norm();
  if (!(out.report.residual < 1e-10))
    throw NumericalFailure("direct solve residual " + std::to_string(out.report.residual) +
                           " exceeds 1e-10");
  out.report.peak_rss_kb = peak_rss_kb();
  return out;
}

Eigen::VectorXcd extract_boundary_trace(const Eigen::VectorXcd &e_sc, const DomainCoupling &d,
                                        const std::function<cplx(const Vec2 &)> &incident)
{
  Eigen::VectorXcd e1 = apply_connection(d.T, e_sc);
  for (int i = 0; i < e1.size(); ++i)
    e1[i] += incident(d.op->contour.a(i));
  return e1;
}

namespace
{

double mean_segment_length(const Contour &c)
{
  return c.total_length() / c.size();
}

double contour_distance(const Contour &c, const Vec2 &p)
{
  double d = std::numeric_limits<double>::infinity();
  for (int s = 0; s < c.size(); ++s)
    d = std::min(d, point_segment_distance(p, c.a(s), c.b(s)));
  return d;
}

}  // namespace

InteriorSamples recover_interior_fields(const Dsao &op, const Eigen::VectorXcd &e1,
                                        const std::vector<Vec2> &points)
{
  InteriorSamples out;
  out.values.resize(static_cast<int>(points.size()));
  out.near_boundary.assign(points.size(), 0);

  const Eigen::VectorXcd q1 = op.q_outer_map * e1;  // d/dn E just inside the contour
  const cplx k_in = op.inclusion.wavenumber(op.omega);
  const double band_outer = mean_segment_length(op.contour);

  Eigen::VectorXcd e_i, q_i;
  cplx k_core = 0.0;
  double band_inner = 0.0;
  if (op.layered)
  {
    e_i = op.layered->e_inner_map * e1;
    q_i = op.layered->q_inner_map * e1;
    k_core = op.layered->core.wavenumber(op.omega);
    band_inner = mean_segment_length(op.layered->inner);
  }

  for (size_t n = 0; n < points.size(); ++n)
  {
    const Vec2 &p = points[n];
    bool near = contour_distance(op.contour, p) < band_outer || !op.contour.contains(p);

    if (op.layered && op.layered->inner.contains(p))
    {
      // core region; its normal derivative rescales by the permeability jump
      const cplx scale = op.layered->core.mu_r / op.inclusion.mu_r;
      out.values[n] = eval_single_layer(op.layered->inner, Eigen::VectorXcd(scale * q_i),
                                        k_core, p) -
                      eval_double_layer(op.layered->inner, e_i, k_core, p);
      near = contour_distance(op.layered->inner, p) < band_inner;
    }
    else if (op.layered)
    {
      // coat annulus: outer contour contributes positively, inner negatively
      // (its outward normal points into the annulus)
      out.values[n] = eval_single_layer(op.contour, q1, k_in, p) -
                      eval_double_layer(op.contour, e1, k_in, p) -
                      eval_single_layer(op.layered->inner, q_i, k_in, p) +
                      eval_double_layer(op.layered->inner, e_i, k_in, p);
      near = near || contour_distance(op.layered->inner, p) < band_inner;
    }
    else
    {
      out.values[n] =
          eval_single_layer(op.contour, q1, k_in, p) - eval_double_layer(op.contour, e1, k_in, p);
    }
    out.near_boundary[n] = near ? 1 : 0;
  }
  return out;
}

double condition_estimate(const Eigen::SparseMatrix<cplx> &A)
{
  const int n = static_cast<int>(A.rows());
  double norm_a = 0.0;
  for (int c = 0; c < A.outerSize(); ++c)
  {
    double s = 0.0;
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(A, c); it; ++it)
      s += std::abs(it.value());
    norm_a = std::max(norm_a, s);
  }

  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    return std::numeric_limits<double>::infinity();

  // Hager's estimator for ||A^-1||_1 with the complex sign vector
  Eigen::VectorXcd x = Eigen::VectorXcd::Constant(n, cplx(1.0 / n, 0.0));
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter)
  {
    const Eigen::VectorXcd y = lu.solve(x);
    const double ny = y.lpNorm<1>();
    if (iter > 0 && ny <= est)
      break;
    est = ny;

    Eigen::VectorXcd xi(n);
    for (int i = 0; i < n; ++i)
      xi[i] = std::abs(y[i]) > 0.0 ? y[i] / std::abs(y[i]) : cplx(1.0, 0.0);
    const Eigen::VectorXcd z = lu.adjoint().solve(xi);

    int j = 0;
    double zmax = 0.0;
    for (int i = 0; i < n; ++i)
    {
      if (std::abs(z[i]) > zmax)
      {
        zmax = std::abs(z[i]);
        j = i;
      }
    }
    if (iter > 0 && zmax <= std::abs(z.dot(x)))
      break;
    x.setZero();
    x[j] = 1.0;
  }
  return norm_a * est;
}

}  // namespace em2d
