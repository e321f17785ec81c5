// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_MESH_HPP
#define EM2D_MESH_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "em2d/geometry.hpp"

namespace em2d
{

// Linear triangle mesh. Triangles are CCW (positive signed area); validate()
// enforces that rather than silently reorienting.
struct TriMesh
{
  struct Tri
  {
    std::array<int, 3> v;
    int tag = 0;
  };

  std::vector<Vec2> nodes;
  std::vector<Tri> tris;

  void validate() const;
  double max_diameter() const;
  Vec2 centroid(int e) const;
  void retag(const std::function<int(const Vec2 &)> &by_centroid);
};

// Shape-function coefficients of one element: N_i = (a_i + b_i x + c_i y)/(2A)
// with a1 = x2 y3 - y2 x3, b1 = y2 - y3, c1 = x3 - x2 (indices cyclic) and
// 2A = b1 c2 - b2 c1.
struct ElementGeometry
{
  double a[3], b[3], c[3];
  double area2;  // 2A, positive for CCW elements

  static ElementGeometry from(const TriMesh &mesh, int e);
  void barycentric(const Vec2 &p, double L[3]) const;
};

// Closed CCW polygonal contour; node p belongs to segments p-1 and p.
struct Contour
{
  std::vector<Vec2> nodes;

  int size() const { return int(nodes.size()); }
  const Vec2 &a(int seg) const { return nodes[seg]; }
  const Vec2 &b(int seg) const { return nodes[(seg + 1) % nodes.size()]; }
  double seg_length(int seg) const { return norm(b(seg) - a(seg)); }
  Vec2 tangent(int seg) const;
  Vec2 outward_normal(int seg) const;  // (t.y, -t.x): points away from the interior
  double signed_area() const;
  double total_length() const;
  bool contains(const Vec2 &p) const;  // even-odd crossing test
  void validate() const;
};

// Structured rectangle mesh; each cell split along its (low,low)-(high,high)
// diagonal. h is adjusted to divide the extents evenly.
TriMesh build_rect_mesh(double x0, double y0, double x1, double y1, double h, int tag = 0);

// Rings of n_theta nodes at given radii around center, quad-split into
// triangles, optionally fanned to a center node. Rings at radius >=
// morph_start_r are blended from the circle toward the square of half-width
// rings.back(), reaching the exact square on the last ring (use n_theta
// divisible by 8 so the square corners are hit). morph_start_r < 0 disables.
TriMesh build_polar_mesh(const Vec2 &center, const std::vector<double> &rings, int n_theta,
                         bool fill_center, double morph_start_r = -1.0);

// Geometric ring ladder for build_polar_mesh: spacing dr0 at r0 growing by
// `ratio` per ring until r1 is reached (last ring snapped to r1 exactly).
std::vector<double> geometric_rings(double r0, double r1, double dr0, double ratio);

Contour circle_contour(const Vec2 &center, double r, int m);
Contour square_contour(const Vec2 &center, double side, int per_side);
// Annular sector [r_hub, r_out] x [th0, th1], CCW, targeting node spacing h.
Contour sector_contour(const Vec2 &center, double r_hub, double r_out, double th0, double th1,
                       double h);

// Containing element + barycentric coordinates. Queries on shared edges or
// vertices resolve to the lowest containing element index; coordinates are
// clamped to [0,1] and renormalized. Backed by a uniform bin grid so batch
// queries stay near O(1) each.
class PointLocator
{
public:
  explicit PointLocator(const TriMesh &mesh);

  struct Hit
  {
    int elem;
    double L[3];
  };
  std::optional<Hit> locate(const Vec2 &p) const;

private:
  const TriMesh &mesh_;
  std::vector<ElementGeometry> geo_;
  double cell_ = 0.0;
  double x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> bins_;
};

// Text formats (see README):  "mesh2d 1" / "nodes N" / "triangles M" and
// "contour 1" / "nodes m". Writers emit 17 significant digits.
TriMesh read_mesh(const std::string &path);
void write_mesh(const TriMesh &mesh, const std::string &path);
Contour read_contour(const std::string &path);
void write_contour(const Contour &c, const std::string &path);

}  // namespace em2d

#endif
