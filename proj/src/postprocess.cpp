// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "em2d/errors.hpp"

namespace em2d
{

namespace
{

void check_angles(const std::vector<double> &angles)
{
  if (angles.empty())
  {
    throw ConfigError("empty observation-angle list");
  }
  for (std::size_t i = 0; i < angles.size(); ++i)
  {
    if (!std::isfinite(angles[i]) || angles[i] < 0.0 || angles[i] >= 2.0 * pi)
    {
      throw ConfigError("observation angles must lie in [0, 2pi)");
    }
    if (i > 0 && angles[i] <= angles[i - 1])
    {
      throw ConfigError("observation angles must be strictly increasing");
    }
  }
}

double to_dbm(double sigma_m)
{
  return 10.0 * std::log10(std::max(sigma_m, 1e-30));
}

struct Probe
{
  cplx value;
  double h;  // local element size sqrt(2 area)
};

Probe interp_scattered(const TriMesh &mesh, const PointLocator &loc,
                       const Eigen::VectorXcd &e_sc, const Vec2 &p, const char *what)
{
  const auto hit = loc.locate(p);
  if (!hit)
  {
    throw ConfigError(std::string(what) + " point is outside the volume mesh");
  }
  const auto &t = mesh.tris[hit->elem].v;
  cplx v = 0.0;
  for (int k = 0; k < 3; ++k)
  {
    v += hit->L[k] * e_sc[t[k]];
  }
  const Vec2 &a = mesh.nodes[t[0]], &b = mesh.nodes[t[1]], &c = mesh.nodes[t[2]];
  const double area2 = std::abs(cross(b - a, c - a));
  return {v, std::sqrt(area2)};
}

}  // namespace

Eigen::VectorXcd equivalent_current(const Dsao &op, const Eigen::VectorXcd &e1)
{
  if (e1.size() != op.Ys.rows())
  {
    throw ConfigError("boundary trace length does not match the admittance operator");
  }
  return op.Ys * e1;
}

FieldGrid near_field_grid(const TriMesh &mesh, const PointLocator &loc,
                          const Eigen::VectorXcd &e_sc,
                          const std::vector<DomainCoupling> &domains,
                          const std::function<cplx(const Vec2 &)> &incident, const Vec2 &origin,
                          double dx, double dy, int nx, int ny, const PmlSpec *pml)
{
  if (nx < 1 || ny < 1 || !(dx > 0.0) || !(dy > 0.0))
  {
    throw ConfigError("near-field grid needs positive spacing and extent");
  }

  FieldGrid g;
  g.origin = origin;
  g.dx = dx;
  g.dy = dy;
  g.nx = nx;
  g.ny = ny;
  g.e.assign(std::size_t(nx) * ny, 0.0);
  g.region.assign(std::size_t(nx) * ny, 0);

  // Interior points are recovered in one batch per domain so each domain
  // factors its boundary system once.
  std::vector<std::vector<Vec2>> inside_pts(domains.size());
  std::vector<std::vector<std::size_t>> inside_idx(domains.size());

  for (int iy = 0; iy < ny; ++iy)
  {
    for (int ix = 0; ix < nx; ++ix)
    {
      const Vec2 p = g.point(ix, iy);
      const std::size_t at = std::size_t(iy) * nx + ix;
      if (pml && pml->in_shell(p))
      {
        throw ConfigError("near-field grid reaches into the absorbing shell");
      }
      int owner = -1;
      for (std::size_t d = 0; d < domains.size(); ++d)
      {
        if (domains[d].op->contour.contains(p))
        {
          owner = int(d);
          break;
        }
      }
      if (owner >= 0)
      {
        inside_pts[owner].push_back(p);
        inside_idx[owner].push_back(at);
        g.region[at] = 1 + owner;
      }
      else
      {
        g.e[at] = interp_scattered(mesh, loc, e_sc, p, "near-field grid").value + incident(p);
      }
    }
  }

  for (std::size_t d = 0; d < domains.size(); ++d)
  {
    if (inside_pts[d].empty())
    {
      continue;
    }
    const Eigen::VectorXcd e1 = extract_boundary_trace(e_sc, domains[d], incident);
    const InteriorSamples rec = recover_interior_fields(*domains[d].op, e1, inside_pts[d]);
    for (std::size_t k = 0; k < inside_idx[d].size(); ++k)
    {
      g.e[inside_idx[d][k]] = rec.values[Eigen::Index(k)];
    }
  }
  return g;
}

RcsCurve rcs_from_huygens(const TriMesh &mesh, const PointLocator &loc,
                          const Eigen::VectorXcd &e_sc, const PlaneWave &wave,
                          const HuygensRect &rect, const std::vector<double> &angles,
                          const std::vector<DomainCoupling> &domains, const PmlSpec *pml)
{
  check_angles(angles);
  if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1))
  {
    throw ConfigError("degenerate far-field collection rectangle");
  }
  const Vec2 corners[4] = {{rect.x0, rect.y0}, {rect.x1, rect.y0}, {rect.x1, rect.y1},
                           {rect.x0, rect.y1}};
  if (pml)
  {
    for (const Vec2 &c : corners)
    {
      if (pml->in_shell(c))
      {
        throw ConfigError("far-field collection rectangle reaches into the absorbing shell");
      }
    }
  }
  for (std::size_t d = 0; d < domains.size(); ++d)
  {
    for (const Vec2 &p : domains[d].op->contour.nodes)
    {
      if (!(p.x > rect.x0 && p.x < rect.x1 && p.y > rect.y0 && p.y < rect.y1))
      {
        throw CouplingError("far-field collection rectangle must enclose admittance domain " +
                            std::to_string(d));
      }
    }
  }

  const double k = std::abs(wave.background.wavenumber(wave.omega));
  const double lambda = 2.0 * pi / k;

  // One precomputed sample list: midpoint rule per side, enough points to
  // track both the field and the exp(jk rhat.y) factor.
  struct Sample
  {
    Vec2 y, n;
    double w;
    cplx e, dedn;
  };
  std::vector<Sample> samples;
  for (int side = 0; side < 4; ++side)
  {
    const Vec2 a = corners[side], b = corners[(side + 1) % 4];
    const Vec2 ab = b - a;
    const double len = norm(ab);
    const Vec2 t{ab.x / len, ab.y / len};
    const Vec2 n{t.y, -t.x};  // outward for the counterclockwise corner walk
    const int nseg = std::max(24, int(std::ceil(10.0 * len / lambda)));
    for (int i = 0; i < nseg; ++i)
    {
      Sample s;
      s.y = a + ab * ((i + 0.5) / nseg);
      s.n = n;
      s.w = len / nseg;
      const Probe at = interp_scattered(mesh, loc, e_sc, s.y, "far-field collection");
      const double eps = 1e-3 * at.h;
      const Probe up = interp_scattered(mesh, loc, e_sc, s.y + n * eps, "far-field collection");
      const Probe dn = interp_scattered(mesh, loc, e_sc, s.y - n * eps, "far-field collection");
      s.e = at.value;
      s.dedn = (up.value - dn.value) / (2.0 * eps);
      samples.push_back(s);
    }
  }

  RcsCurve rcs;
  rcs.angles = angles;
  rcs.frequency = wave.omega / (2.0 * pi);
  rcs.sigma_dbm.reserve(angles.size());
  const double e0 = wave.amplitude;
  for (double phi : angles)
  {
    const Vec2 rhat{std::cos(phi), std::sin(phi)};
    cplx p = 0.0;
    for (const Sample &s : samples)
    {
      const cplx phase = std::exp(jj * (k * dot(rhat, s.y)));
      p += s.w * phase * (jj * k * dot(rhat, s.n) * s.e - s.dedn);
    }
    rcs.sigma_dbm.push_back(to_dbm(std::norm(p) / (4.0 * k * e0 * e0)));
  }
  return rcs;
}

RcsCurve rcs_from_current(const std::vector<DomainCoupling> &domains,
                          const std::vector<Eigen::VectorXcd> &currents, const PlaneWave &wave,
                          const std::vector<double> &angles)
{
  check_angles(angles);
  if (currents.size() != domains.size())
  {
    throw ConfigError("one current vector per admittance domain required");
  }
  const double k = std::abs(wave.background.wavenumber(wave.omega));
  const cplx load = -jj * wave.omega * mu0;
  const double e0 = wave.amplitude;
  const double gp = 0.5 / std::sqrt(3.0);

  RcsCurve rcs;
  rcs.angles = angles;
  rcs.frequency = wave.omega / (2.0 * pi);
  rcs.sigma_dbm.reserve(angles.size());
  for (double phi : angles)
  {
    const Vec2 rhat{std::cos(phi), std::sin(phi)};
    cplx p = 0.0;
    for (std::size_t d = 0; d < domains.size(); ++d)
    {
      const Contour &c = domains[d].op->contour;
      const Eigen::VectorXcd &q = currents[d];
      if (q.size() != Eigen::Index(c.nodes.size()))
      {
        throw ConfigError("current vector length does not match contour " + std::to_string(d));
      }
      const int m = int(c.nodes.size());
      for (int s = 0; s < m; ++s)
      {
        const Vec2 a = c.a(s), b = c.b(s);
        const double half = 0.5 * c.seg_length(s);
        const cplx ja = q[s], jb = q[(s + 1) % m];
        for (double t : {0.5 - gp, 0.5 + gp})
        {
          const Vec2 y = a + (b - a) * t;
          p += half * ((1.0 - t) * ja + t * jb) * std::exp(jj * (k * dot(rhat, y)));
        }
      }
    }
    p *= load;
    rcs.sigma_dbm.push_back(to_dbm(std::norm(p) / (4.0 * k * e0 * e0)));
  }
  return rcs;
}

std::vector<Vec2> graded_conductor_lattice(const Contour &c, double delta, double max_depth)
{
  if (!(delta > 0.0) || !(max_depth > 0.0))
  {
    throw ConfigError("conductor lattice needs positive skin depth and depth range");
  }
  const int m = int(c.nodes.size());
  std::vector<Vec2> pts;
  for (int i = 0; i < m; ++i)
  {
    // inward direction at a node: mean of the two adjacent segment normals
    const Vec2 n0 = c.outward_normal((i + m - 1) % m);
    const Vec2 n1 = c.outward_normal(i);
    Vec2 nin{-(n0.x + n1.x), -(n0.y + n1.y)};
    const double nn = norm(nin);
    if (nn == 0.0)
    {
      continue;  // straight-through fold; skip the degenerate node
    }
    nin = nin * (1.0 / nn);
    for (double d = delta / 8.0; d <= max_depth; d *= 1.5)
    {
      pts.push_back(c.nodes[i] + nin * d);
    }
  }
  return pts;
}

CurrentDensityMap current_density_map(const Dsao &op, const Eigen::VectorXcd &e1, double sigma_sm,
                                      const std::vector<Vec2> &lattice)
{
  const Contour &conductor = op.layered ? op.layered->inner : op.contour;

  CurrentDensityMap out;
  out.points = lattice;
  out.abs_j.assign(lattice.size(), 0.0);
  if (sigma_sm <= 0.0)
  {
    return out;  // not a conductor; the map is identically zero
  }

  std::vector<Vec2> inside;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < lattice.size(); ++i)
  {
    if (conductor.contains(lattice[i]))
    {
      inside.push_back(lattice[i]);
      idx.push_back(i);
    }
  }
  if (!inside.empty())
  {
    const InteriorSamples rec = recover_interior_fields(op, e1, inside);
    for (std::size_t k = 0; k < idx.size(); ++k)
    {
      out.abs_j[idx[k]] = sigma_sm * std::abs(rec.values[Eigen::Index(k)]);
    }
  }
  for (std::size_t i = 0; i < lattice.size(); ++i)
  {
    if (out.abs_j[i] > out.peak)
    {
      out.peak = out.abs_j[i];
      out.peak_at = lattice[i];
    }
  }
  return out;
}

namespace
{

template <typename GetC, typename GetR>
double re_metric(std::size_t n, std::size_t nr, GetC calc, GetR ref)
{
  if (n == 0 || n != nr)
  {
    throw ConfigError("relative-error inputs must be equal-length and nonempty");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    num += std::norm(calc(i) - ref(i));
    den += std::norm(ref(i));
  }
  if (den == 0.0)
  {
    throw ConfigError("relative-error reference is identically zero");
  }
  return num / den;
}

}  // namespace

double relative_error(const std::vector<double> &calc, const std::vector<double> &ref)
{
  return re_metric(
      calc.size(), ref.size(), [&](std::size_t i) { return cplx(calc[i], 0.0); },
      [&](std::size_t i) { return cplx(ref[i], 0.0); });
}

double relative_error(const Eigen::VectorXcd &calc, const Eigen::VectorXcd &ref)
{
  return re_metric(
      std::size_t(calc.size()), std::size_t(ref.size()),
      [&](std::size_t i) { return calc[Eigen::Index(i)]; },
      [&](std::size_t i) { return ref[Eigen::Index(i)]; });
}

NearFieldError near_field_relative_error(const FieldGrid &calc, const FieldGrid &ref)
{
  if (calc.nx != ref.nx || calc.ny != ref.ny || calc.e.size() != ref.e.size() ||
      calc.e.empty())
  {
    throw ConfigError("near-field error needs two identical nonempty grids");
  }
  double maxref = 0.0;
  for (const cplx &v : ref.e)
  {
    maxref = std::max(maxref, std::abs(v));
  }
  if (maxref == 0.0)
  {
    throw ConfigError("near-field error reference is identically zero");
  }

  NearFieldError out;
  out.err.resize(calc.e.size());
  std::size_t n3 = 0, n5 = 0;
  for (std::size_t i = 0; i < calc.e.size(); ++i)
  {
    const double e = std::abs(calc.e[i] - ref.e[i]) / maxref;
    out.err[i] = e;
    out.max_err = std::max(out.max_err, e);
    n3 += e < 0.03;
    n5 += e < 0.05;
  }
  out.frac_below_3pct = double(n3) / double(calc.e.size());
  out.frac_below_5pct = double(n5) / double(calc.e.size());
  return out;
}

RcsCurve rcs_from_mie(const MieSolution &mie, const std::vector<double> &angles)
{
  check_angles(angles);
  RcsCurve rcs;
  rcs.angles = angles;
  rcs.frequency = mie.omega / (2.0 * pi);
  rcs.sigma_dbm.reserve(angles.size());
  for (double phi : angles)
  {
    rcs.sigma_dbm.push_back(to_dbm(mie.sigma_2d(phi)));
  }
  return rcs;
}

namespace
{

std::FILE *open_csv(const std::string &path)
{
  std::FILE *f = std::fopen(path.c_str(), "wb");
  if (!f)
  {
    throw ConfigError("cannot write '" + path + "'");
  }
  return f;
}

}  // namespace

void write_rcs_csv(const std::string &path, const RcsCurve &rcs)
{
  std::FILE *f = open_csv(path);
  std::fprintf(f, "angle_deg,sigma_dbm\n");
  for (std::size_t i = 0; i < rcs.angles.size(); ++i)
  {
    std::fprintf(f, "%.17g,%.17g\n", rcs.angles[i] * 180.0 / pi, rcs.sigma_dbm[i]);
  }
  std::fclose(f);
}

void write_nearfield_csv(const std::string &path, const FieldGrid &g)
{
  std::FILE *f = open_csv(path);
  std::fprintf(f, "x,y,re,im,abs,region\n");
  for (int iy = 0; iy < g.ny; ++iy)
  {
    for (int ix = 0; ix < g.nx; ++ix)
    {
      const Vec2 p = g.point(ix, iy);
      const cplx v = g.at(ix, iy);
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", p.x, p.y, v.real(), v.imag(),
                   std::abs(v), g.region[std::size_t(iy) * g.nx + ix]);
    }
  }
  std::fclose(f);
}

void write_current_csv(const std::string &path, const CurrentDensityMap &m)
{
  std::FILE *f = open_csv(path);
  std::fprintf(f, "x,y,abs_J\n");
  for (std::size_t i = 0; i < m.points.size(); ++i)
  {
    std::fprintf(f, "%.17g,%.17g,%.17g\n", m.points[i].x, m.points[i].y, m.abs_j[i]);
  }
  std::fclose(f);
}

void write_metrics_csv(const std::string &path,
                       const std::vector<std::pair<std::string, double>> &rows)
{
  std::FILE *f = open_csv(path);
  std::fprintf(f, "name,value\n");
  for (const auto &[name, value] : rows)
  {
    std::fprintf(f, "%s,%.17g\n", name.c_str(), value);
  }
  std::fclose(f);
}

}  // namespace em2d
