// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_GEOMETRY_HPP
#define EM2D_GEOMETRY_HPP

#include <cmath>

namespace em2d
{

struct Vec2
{
  double x = 0.0, y = 0.0;

  Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }

// Distance from p to the segment [a, b], and the unclamped projection
// parameter t in units of the segment length (t may fall outside [0, 1]).
inline double point_segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b, double *t_out = nullptr)
{
  const Vec2 ab = b - a;
  const double l2 = dot(ab, ab);
  double t = (l2 > 0.0) ? dot(p - a, ab) / l2 : 0.0;
  if (t_out)
  {
    *t_out = t;
  }
  const double tc = std::fmin(1.0, std::fmax(0.0, t));
  const Vec2 q = a + ab * tc;
  return norm(p - q);
}

}  // namespace em2d

#endif
