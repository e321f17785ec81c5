// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/fem.hpp"

#include <cmath>
#include <unordered_map>

#include "em2d/errors.hpp"

namespace em2d
{

cplx Material::wavenumber(double omega) const
{
  cplx k = omega * std::sqrt(mu0 * eps0) * std::sqrt(eps_r * mu_r);
  if (k.imag() > 0.0)
  {
    k = -k;  // passive branch
  }
  return k;
}

cplx PmlSpec::stretch_x(const Vec2 &p, double omega) const
{
  double d = 0.0;
  if (p.x < x0)
  {
    d = x0 - p.x;
  }
  else if (p.x > x1)
  {
    d = p.x - x1;
  }
  if (d <= 0.0)
  {
    return 1.0;
  }
  const double sig = sigma_max * std::pow(std::min(d, thickness) / thickness, power);
  return cplx{1.0, -sig / (omega * eps0)};
}

cplx PmlSpec::stretch_y(const Vec2 &p, double omega) const
{
  double d = 0.0;
  if (p.y < y0)
  {
    d = y0 - p.y;
  }
  else if (p.y > y1)
  {
    d = p.y - y1;
  }
  if (d <= 0.0)
  {
    return 1.0;
  }
  const double sig = sigma_max * std::pow(std::min(d, thickness) / thickness, power);
  return cplx{1.0, -sig / (omega * eps0)};
}

bool PmlSpec::in_shell(const Vec2 &p) const
{
  return p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1;
}

PmlSpec make_pml(double x0, double y0, double x1, double y1, double thickness, double power,
                 double r0)
{
  PmlSpec s;
  s.x0 = x0;
  s.y0 = y0;
  s.x1 = x1;
  s.y1 = y1;
  s.thickness = thickness;
  s.power = power;
  s.sigma_max = -(power + 1.0) * eps0 * c0() * std::log(r0) / (2.0 * thickness);
  return s;
}

cplx PlaneWave::field(const Vec2 &p) const
{
  const cplx k = background.wavenumber(omega);
  return amplitude * std::exp(-jj * k * (p.x * std::cos(phi) + p.y * std::sin(phi)));
}

void PlaneWave::gradient(const Vec2 &p, cplx &gx, cplx &gy) const
{
  const cplx k = background.wavenumber(omega);
  const cplx e = field(p);
  gx = -jj * k * std::cos(phi) * e;
  gy = -jj * k * std::sin(phi) * e;
}

Eigen::SparseMatrix<cplx> assemble_helmholtz(const TriMesh &mesh, const MaterialField &mat,
                                             double omega, const PmlSpec *pml)
{
  const int n = int(mesh.nodes.size());
  const double k0 = omega * std::sqrt(mu0 * eps0);
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(mesh.tris.size() * 9);

  for (size_t e = 0; e < mesh.tris.size(); ++e)
  {
    const ElementGeometry g = ElementGeometry::from(mesh, int(e));
    const Vec2 c = mesh.centroid(int(e));
    const Material m = mat(c);

    cplx sx{1.0, 0.0}, sy{1.0, 0.0};
    if (pml)
    {
      sx = pml->stretch_x(c, omega);
      sy = pml->stretch_y(c, omega);
    }
    const cplx ax = sy / sx / m.mu_r;  // weights d/dx terms
    const cplx ay = sx / sy / m.mu_r;
    const cplx mz = k0 * k0 * m.eps_r * sx * sy;

    const double A = 0.5 * g.area2;
    const auto &v = mesh.tris[e].v;
    for (int p = 0; p < 3; ++p)
    {
      for (int q = 0; q < 3; ++q)
      {
        const cplx stiff = (ax * g.b[p] * g.b[q] + ay * g.c[p] * g.c[q]) / (2.0 * g.area2);
        const double mass = (p == q) ? A / 6.0 : A / 12.0;
        trip.emplace_back(v[p], v[q], stiff - mz * mass);
      }
    }
  }
  Eigen::SparseMatrix<cplx> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Eigen::VectorXcd assemble_contrast_rhs(const TriMesh &mesh, const MaterialField &mat,
                                       const Material &background, const PlaneWave &inc)
{
  const int n = int(mesh.nodes.size());
  const double k0 = inc.omega * std::sqrt(mu0 * eps0);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);

  for (size_t e = 0; e < mesh.tris.size(); ++e)
  {
    const ElementGeometry g = ElementGeometry::from(mesh, int(e));
    const Vec2 c = mesh.centroid(int(e));
    const Material m = mat(c);
    const cplx dmu = 1.0 / background.mu_r - 1.0 / m.mu_r;
    const cplx deps = background.eps_r - m.eps_r;
    if (dmu == 0.0 && deps == 0.0)
    {
      continue;
    }

    const auto &v = mesh.tris[e].v;
    const Vec2 &p0 = mesh.nodes[v[0]];
    const Vec2 &p1 = mesh.nodes[v[1]];
    const Vec2 &p2 = mesh.nodes[v[2]];
    // edge-midpoint rule, exact through degree 2
    const Vec2 gp[3] = {{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)},
                        {0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)},
                        {0.5 * (p2.x + p0.x), 0.5 * (p2.y + p0.y)}};
    const double w = 0.5 * g.area2 / 3.0;

    for (int q = 0; q < 3; ++q)
    {
      cplx gx, gy;
      inc.gradient(gp[q], gx, gy);
      const cplx ei = inc.field(gp[q]);
      double L[3];
      g.barycentric(gp[q], L);
      for (int p = 0; p < 3; ++p)
      {
        const cplx grad_term = dmu * (gx * g.b[p] + gy * g.c[p]) / g.area2;
        const cplx mass_term = k0 * k0 * deps * ei * L[p];
        rhs[v[p]] += w * (grad_term - mass_term);
      }
    }
  }
  return rhs;
}

std::vector<int> boundary_nodes(const TriMesh &mesh)
{
  std::unordered_map<long long, int> edge_count;
  auto key = [](int a, int b)
  {
    if (a > b)
    {
      std::swap(a, b);
    }
    return (long long)(a) << 32 | (unsigned)(b);
  };
  for (const auto &t : mesh.tris)
  {
    for (int k = 0; k < 3; ++k)
    {
      ++edge_count[key(t.v[k], t.v[(k + 1) % 3])];
    }
  }
  std::vector<char> on(mesh.nodes.size(), 0);
  for (const auto &[k, cnt] : edge_count)
  {
    if (cnt == 1)
    {
      on[size_t(k >> 32)] = 1;
      on[size_t(k & 0xffffffff)] = 1;
    }
  }
  std::vector<int> out;
  for (size_t i = 0; i < on.size(); ++i)
  {
    if (on[i])
    {
      out.push_back(int(i));
    }
  }
  return out;
}

void apply_dirichlet(Eigen::SparseMatrix<cplx> &K, Eigen::VectorXcd &rhs,
                     const std::vector<int> &nodes)
{
  std::vector<char> fixed(K.rows(), 0);
  for (int i : nodes)
  {
    fixed[i] = 1;
    rhs[i] = 0.0;
  }
  for (int col = 0; col < K.outerSize(); ++col)
  {
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(K, col); it; ++it)
    {
      if (fixed[it.row()] || fixed[it.col()])
      {
        it.valueRef() = (it.row() == it.col()) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
      }
    }
  }
  K.prune([](int, int, const cplx &v) { return v != cplx{0.0, 0.0}; });
}

}  // namespace em2d
