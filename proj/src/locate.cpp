// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "em2d/errors.hpp"
#include "em2d/mesh.hpp"

namespace em2d
{

namespace
{
// Barycentric tolerance for "inside": dimensionless, so it scales with the
// element automatically.
constexpr double inside_tol = 1e-10;
}  // namespace

PointLocator::PointLocator(const TriMesh &mesh) : mesh_(mesh)
{
  if (mesh.tris.empty())
  {
    throw MeshFormatError("PointLocator on empty mesh");
  }
  geo_.reserve(mesh.tris.size());
  for (size_t e = 0; e < mesh.tris.size(); ++e)
  {
    geo_.push_back(ElementGeometry::from(mesh, int(e)));
  }

  double xmin = mesh.nodes[0].x, xmax = xmin, ymin = mesh.nodes[0].y, ymax = ymin;
  for (const Vec2 &p : mesh.nodes)
  {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  // Bin size tied to the largest element so every element overlaps only a
  // few bins even on strongly graded meshes.
  cell_ = std::max(mesh.max_diameter(), 1e-300);
  x0_ = xmin;
  y0_ = ymin;
  nx_ = std::max(1, int((xmax - xmin) / cell_) + 1);
  ny_ = std::max(1, int((ymax - ymin) / cell_) + 1);
  bins_.assign(size_t(nx_) * ny_, {});

  for (size_t e = 0; e < mesh.tris.size(); ++e)
  {
    const auto &t = mesh.tris[e];
    double exmin = mesh.nodes[t.v[0]].x, exmax = exmin;
    double eymin = mesh.nodes[t.v[0]].y, eymax = eymin;
    for (int k = 1; k < 3; ++k)
    {
      exmin = std::min(exmin, mesh.nodes[t.v[k]].x);
      exmax = std::max(exmax, mesh.nodes[t.v[k]].x);
      eymin = std::min(eymin, mesh.nodes[t.v[k]].y);
      eymax = std::max(eymax, mesh.nodes[t.v[k]].y);
    }
    const int i0 = std::clamp(int((exmin - x0_) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(int((exmax - x0_) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(int((eymin - y0_) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(int((eymax - y0_) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
    {
      for (int i = i0; i <= i1; ++i)
      {
        bins_[size_t(j) * nx_ + i].push_back(int(e));
      }
    }
  }
  // Ascending order makes the shared-edge tie-break (lowest element index
  // wins) a plain first-hit scan.
  for (auto &b : bins_)
  {
    std::sort(b.begin(), b.end());
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Vec2 &p) const
{
  // Clamp instead of rejecting so queries exactly on the top/right domain
  // boundary (which round into the next bin) still find their element; the
  // barycentric test rejects genuine outsiders.
  const int i = std::clamp(int((p.x - x0_) / cell_), 0, nx_ - 1);
  const int j = std::clamp(int((p.y - y0_) / cell_), 0, ny_ - 1);
  for (int e : bins_[size_t(j) * nx_ + i])
  {
    double L[3];
    geo_[e].barycentric(p, L);
    if (L[0] >= -inside_tol && L[1] >= -inside_tol && L[2] >= -inside_tol)
    {
      Hit h;
      h.elem = e;
      double sum = 0.0;
      for (int k = 0; k < 3; ++k)
      {
        h.L[k] = std::max(0.0, L[k]);
        sum += h.L[k];
      }
      for (int k = 0; k < 3; ++k)
      {
        h.L[k] /= sum;
      }
      return h;
    }
  }
  return std::nullopt;
}

}  // namespace em2d
