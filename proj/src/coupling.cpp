// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/coupling.hpp"

#include <string>
#include <unordered_map>

#include "em2d/errors.hpp"

namespace em2d
{

EdgeWeights interp_1d_weights(const Vec2 &r1, const Vec2 &r2, const Vec2 &r)
{
  const double l = norm(r2 - r1);
  if (l <= 0.0)
    throw CouplingError("degenerate segment in 1-D interpolation");
  EdgeWeights w;
  w.w1 = norm(r2 - r) / l;
  w.w2 = norm(r - r1) / l;
  return w;
}

ConnectionMatrix build_connection_matrix(const TriMesh &mesh, const PointLocator &locator,
                                         const Contour &contour, const PmlSpec *pml,
                                         double snap)
{
  const int m = contour.size();
  ConnectionMatrix out;
  out.global.reserve(3 * m);

  std::unordered_map<int, int> local;  // volume node -> column, first-encounter order
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * m);

  for (int i = 0; i < m; ++i)
  {
    const Vec2 p = contour.a(i);
    if (pml && pml->in_shell(p))
      throw CouplingError("contour node " + std::to_string(i) +
                          " lies in the absorbing shell");
    const auto hit = locator.locate(p);
    if (!hit)
      throw CouplingError("contour node " + std::to_string(i) +
                          " is outside the volume mesh");

    double w[3] = {hit->L[0], hit->L[1], hit->L[2]};
    double sum = 0.0;
    for (double &x : w)
    {
      if (x < snap)
        x = 0.0;
      sum += x;
    }
    // sum is within snap*3 of 1 already; renormalizing makes coincident
    // nodes exact unit rows
    for (int v = 0; v < 3; ++v)
    {
      if (w[v] == 0.0)
        continue;
      const int g = mesh.tris[hit->elem].v[v];
      auto [it, fresh] = local.emplace(g, static_cast<int>(out.global.size()));
      if (fresh)
        out.global.push_back(g);
      trips.emplace_back(i, it->second, w[v] / sum);
    }
  }

  out.T.resize(m, static_cast<int>(out.global.size()));
  out.T.setFromTriplets(trips.begin(), trips.end());
  out.conformal = detect_conformal(out);
  return out;
}

bool detect_conformal(const ConnectionMatrix &T, double tol)
{
  for (int r = 0; r < T.T.outerSize(); ++r)
  {
    int nnz = 0;
    double w = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(T.T, r); it; ++it)
    {
      ++nnz;
      w = it.value();
    }
    if (nnz != 1 || std::abs(w - 1.0) > tol)
      return false;
  }
  return true;
}

Eigen::VectorXcd apply_connection(const ConnectionMatrix &T, const Eigen::VectorXcd &full)
{
  Eigen::VectorXcd packed(T.cols());
  for (int s = 0; s < T.cols(); ++s)
    packed[s] = full[T.global[s]];
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(T.rows());
  for (int r = 0; r < T.T.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(T.T, r); it; ++it)
      out[r] += it.value() * packed[it.col()];
  return out;
}

}  // namespace em2d
