// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "em2d/constants.hpp"
#include "em2d/errors.hpp"

namespace em2d
{

void TriMesh::validate() const
{
  const int n = int(nodes.size());
  if (n < 3 || tris.empty())
  {
    throw MeshFormatError("mesh has fewer than 3 nodes or no triangles");
  }
  for (size_t e = 0; e < tris.size(); ++e)
  {
    for (int k = 0; k < 3; ++k)
    {
      const int v = tris[e].v[k];
      if (v < 0 || v >= n)
      {
        throw MeshFormatError("triangle " + std::to_string(e) + " references node " +
                              std::to_string(v) + " out of range");
      }
    }
    const Vec2 &p0 = nodes[tris[e].v[0]];
    const Vec2 &p1 = nodes[tris[e].v[1]];
    const Vec2 &p2 = nodes[tris[e].v[2]];
    const double a2 = cross(p1 - p0, p2 - p0);
    if (!(a2 > 0.0))
    {
      throw MeshFormatError("triangle " + std::to_string(e) +
                            " is degenerate or not counterclockwise");
    }
  }
}

double TriMesh::max_diameter() const
{
  double d = 0.0;
  for (const Tri &t : tris)
  {
    for (int k = 0; k < 3; ++k)
    {
      d = std::max(d, norm(nodes[t.v[k]] - nodes[t.v[(k + 1) % 3]]));
    }
  }
  return d;
}

Vec2 TriMesh::centroid(int e) const
{
  const Tri &t = tris[e];
  const Vec2 s = nodes[t.v[0]] + nodes[t.v[1]] + nodes[t.v[2]];
  return s * (1.0 / 3.0);
}

void TriMesh::retag(const std::function<int(const Vec2 &)> &by_centroid)
{
  for (size_t e = 0; e < tris.size(); ++e)
  {
    tris[e].tag = by_centroid(centroid(int(e)));
  }
}

ElementGeometry ElementGeometry::from(const TriMesh &mesh, int e)
{
  const auto &t = mesh.tris[e];
  const Vec2 p[3] = {mesh.nodes[t.v[0]], mesh.nodes[t.v[1]], mesh.nodes[t.v[2]]};
  ElementGeometry g;
  for (int i = 0; i < 3; ++i)
  {
    const Vec2 &pj = p[(i + 1) % 3];
    const Vec2 &pk = p[(i + 2) % 3];
    g.a[i] = pj.x * pk.y - pj.y * pk.x;
    g.b[i] = pj.y - pk.y;
    g.c[i] = pk.x - pj.x;
  }
  g.area2 = g.b[0] * g.c[1] - g.b[1] * g.c[0];
  return g;
}

void ElementGeometry::barycentric(const Vec2 &p, double L[3]) const
{
  for (int i = 0; i < 3; ++i)
  {
    L[i] = (a[i] + b[i] * p.x + c[i] * p.y) / area2;
  }
}

Vec2 Contour::tangent(int seg) const
{
  const Vec2 d = b(seg) - a(seg);
  const double l = norm(d);
  return {d.x / l, d.y / l};
}

Vec2 Contour::outward_normal(int seg) const
{
  const Vec2 t = tangent(seg);
  return {t.y, -t.x};
}

double Contour::signed_area() const
{
  double s = 0.0;
  for (int i = 0; i < size(); ++i)
  {
    s += cross(a(i), b(i));
  }
  return 0.5 * s;
}

double Contour::total_length() const
{
  double s = 0.0;
  for (int i = 0; i < size(); ++i)
  {
    s += seg_length(i);
  }
  return s;
}

bool Contour::contains(const Vec2 &p) const
{
  bool in = false;
  for (int i = 0; i < size(); ++i)
  {
    const Vec2 &u = a(i), &v = b(i);
    if ((u.y > p.y) != (v.y > p.y))
    {
      const double xint = u.x + (p.y - u.y) / (v.y - u.y) * (v.x - u.x);
      if (p.x < xint)
      {
        in = !in;
      }
    }
  }
  return in;
}

void Contour::validate() const
{
  if (size() < 3)
  {
    throw MeshFormatError("contour needs at least 3 nodes");
  }
  for (int i = 0; i < size(); ++i)
  {
    if (!(seg_length(i) > 0.0))
    {
      throw MeshFormatError("contour has a zero-length segment at node " + std::to_string(i));
    }
  }
  if (!(signed_area() > 0.0))
  {
    throw MeshFormatError("contour is not counterclockwise");
  }
}

TriMesh build_rect_mesh(double x0, double y0, double x1, double y1, double h, int tag)
{
  if (!(x1 > x0) || !(y1 > y0) || !(h > 0.0))
  {
    throw MeshFormatError("build_rect_mesh: bad extents or spacing");
  }
  const int nx = std::max(1, int(std::lround((x1 - x0) / h)));
  const int ny = std::max(1, int(std::lround((y1 - y0) / h)));

  TriMesh m;
  m.nodes.reserve(size_t(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
  {
    for (int i = 0; i <= nx; ++i)
    {
      m.nodes.push_back({x0 + (x1 - x0) * double(i) / nx, y0 + (y1 - y0) * double(j) / ny});
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.tris.reserve(size_t(2) * nx * ny);
  for (int j = 0; j < ny; ++j)
  {
    for (int i = 0; i < nx; ++i)
    {
      m.tris.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}, tag});
      m.tris.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}, tag});
    }
  }
  return m;
}

TriMesh build_polar_mesh(const Vec2 &center, const std::vector<double> &rings, int n_theta,
                         bool fill_center, double morph_start_r)
{
  if (rings.size() < (fill_center ? 1u : 2u) || n_theta < 3)
  {
    throw MeshFormatError("build_polar_mesh: need at least two radial levels");
  }
  for (size_t i = 1; i < rings.size(); ++i)
  {
    if (!(rings[i] > rings[i - 1]))
    {
      throw MeshFormatError("build_polar_mesh: ring radii must increase");
    }
  }
  const double rmax = rings.back();
  const bool morph = morph_start_r >= 0.0 && morph_start_r < rmax;

  TriMesh m;
  if (fill_center)
  {
    m.nodes.push_back(center);
  }
  for (double r : rings)
  {
    double lam = 0.0;
    if (morph && r >= morph_start_r)
    {
      lam = (r - morph_start_r) / (rmax - morph_start_r);
    }
    for (int i = 0; i < n_theta; ++i)
    {
      const double th = 2.0 * pi * double(i) / n_theta;
      const double c = std::cos(th), s = std::sin(th);
      // blend toward the square of half-width rmax: on the square, the ray at
      // angle th exits at distance rmax / max(|cos|,|sin|)
      const double f = 1.0 - lam + lam / std::max(std::abs(c), std::abs(s));
      m.nodes.push_back({center.x + r * f * c, center.y + r * f * s});
    }
  }

  const int base = fill_center ? 1 : 0;
  auto id = [&](int ring, int i) { return base + ring * n_theta + (i % n_theta); };
  if (fill_center)
  {
    for (int i = 0; i < n_theta; ++i)
    {
      m.tris.push_back({{0, id(0, i), id(0, i + 1)}, 0});
    }
  }
  for (int k = 0; k + 1 < int(rings.size()); ++k)
  {
    for (int i = 0; i < n_theta; ++i)
    {
      // outward-then-around keeps the winding counterclockwise
      m.tris.push_back({{id(k, i), id(k + 1, i), id(k + 1, i + 1)}, 0});
      m.tris.push_back({{id(k, i), id(k + 1, i + 1), id(k, i + 1)}, 0});
    }
  }
  return m;
}

std::vector<double> geometric_rings(double r0, double r1, double dr0, double ratio)
{
  if (!(r1 > r0) || !(dr0 > 0.0) || !(ratio >= 1.0))
  {
    throw MeshFormatError("geometric_rings: bad parameters");
  }
  std::vector<double> rings{r0};
  double dr = dr0;
  while (rings.back() + dr < r1 - 0.25 * dr)
  {
    rings.push_back(rings.back() + dr);
    dr *= ratio;
  }
  rings.push_back(r1);
  return rings;
}

Contour circle_contour(const Vec2 &center, double r, int m)
{
  if (m < 3 || !(r > 0.0))
  {
    throw MeshFormatError("circle_contour: bad parameters");
  }
  Contour c;
  c.nodes.reserve(m);
  for (int i = 0; i < m; ++i)
  {
    const double th = 2.0 * pi * double(i) / m;
    c.nodes.push_back({center.x + r * std::cos(th), center.y + r * std::sin(th)});
  }
  return c;
}

Contour square_contour(const Vec2 &center, double side, int per_side)
{
  if (per_side < 1 || !(side > 0.0))
  {
    throw MeshFormatError("square_contour: bad parameters");
  }
  const double hw = 0.5 * side;
  const Vec2 corners[4] = {{center.x - hw, center.y - hw},
                           {center.x + hw, center.y - hw},
                           {center.x + hw, center.y + hw},
                           {center.x - hw, center.y + hw}};
  Contour c;
  for (int s = 0; s < 4; ++s)
  {
    const Vec2 &p = corners[s];
    const Vec2 &q = corners[(s + 1) % 4];
    for (int i = 0; i < per_side; ++i)
    {
      const double t = double(i) / per_side;
      c.nodes.push_back({p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t});
    }
  }
  return c;
}

Contour sector_contour(const Vec2 &center, double r_hub, double r_out, double th0, double th1,
                       double h)
{
  if (!(r_out > r_hub) || !(r_hub > 0.0) || !(th1 > th0) || !(h > 0.0))
  {
    throw MeshFormatError("sector_contour: bad parameters");
  }
  Contour c;
  auto arc = [&](double r, double a0, double a1, bool skip_last)
  {
    const int n = std::max(2, int(std::ceil(std::abs(a1 - a0) * r / h)) + 1);
    for (int i = 0; i < n - (skip_last ? 1 : 0); ++i)
    {
      const double th = a0 + (a1 - a0) * double(i) / (n - 1);
      c.nodes.push_back({center.x + r * std::cos(th), center.y + r * std::sin(th)});
    }
  };
  auto radial = [&](double th, double ra, double rb, bool skip_last)
  {
    const int n = std::max(2, int(std::ceil(std::abs(rb - ra) / h)) + 1);
    for (int i = 0; i < n - (skip_last ? 1 : 0); ++i)
    {
      const double r = ra + (rb - ra) * double(i) / (n - 1);
      c.nodes.push_back({center.x + r * std::cos(th), center.y + r * std::sin(th)});
    }
  };
  arc(r_out, th0, th1, true);       // outer arc, CCW
  radial(th1, r_out, r_hub, true);  // inward
  arc(r_hub, th1, th0, true);       // inner arc, back
  radial(th0, r_hub, r_out, true);  // outward, closes the loop
  return c;
}

}  // namespace em2d
