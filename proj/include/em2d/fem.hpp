// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_FEM_HPP
#define EM2D_FEM_HPP

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "em2d/constants.hpp"
#include "em2d/mesh.hpp"

namespace em2d
{

// Relative material constants. Passive media have Im(eps_r) <= 0 under the
// exp(+jwt) convention; conductivity folds into the permittivity.
struct Material
{
  cplx eps_r{1.0, 0.0};
  cplx mu_r{1.0, 0.0};

  static Material conductor(double sigma_sm, double omega)
  {
    Material m;
    m.eps_r = cplx{1.0, 0.0} - jj * sigma_sm / (omega * eps0);
    return m;
  }

  bool operator==(const Material &o) const { return eps_r == o.eps_r && mu_r == o.mu_r; }

  // k = w sqrt(mu0 eps0 mu_r eps_r) on the Im(k) <= 0 branch.
  cplx wavenumber(double omega) const;
};

// Position-dependent material assignment, sampled at element centroids.
using MaterialField = std::function<Material(const Vec2 &)>;

// Uniaxial absorbing shell outside the inner (physical) box. Stretch
// s = 1 - j sigma(d)/(w eps0) with sigma(d) = sigma_max (d/t)^p, evaluated
// per element at its centroid.
struct PmlSpec
{
  double x0, y0, x1, y1;  // inner box
  double thickness;
  double power = 3.0;
  double sigma_max = 0.0;

  cplx stretch_x(const Vec2 &p, double omega) const;
  cplx stretch_y(const Vec2 &p, double omega) const;
  bool in_shell(const Vec2 &p) const;
};

// sigma_max chosen for a target normal-incidence reflection R0 through a
// shell of the given thickness: sigma_max = -(p+1) eps0 c ln(R0) / (2 t).
PmlSpec make_pml(double x0, double y0, double x1, double y1, double thickness, double power = 3.0,
                 double r0 = 1e-6);

// Incident plane wave in the (lossless) background material:
// E = A exp(-j k (x cos phi + y sin phi)).
struct PlaneWave
{
  double amplitude = 1.0;
  double phi = 0.0;  // propagation direction, radians from +x
  Material background;
  double omega = 0.0;

  cplx field(const Vec2 &p) const;
  void gradient(const Vec2 &p, cplx &gx, cplx &gy) const;
};

// Stiffness - k0^2 mass for div((1/mu_r) grad E) + k0^2 eps_r E = 0, with
// the PML stretches folded in where a shell is given.
Eigen::SparseMatrix<cplx> assemble_helmholtz(const TriMesh &mesh, const MaterialField &mat,
                                             double omega, const PmlSpec *pml = nullptr);

// Scattered-field excitation from material contrast against the (uniform)
// reference background:
//   b_p = sum_e int [ (1/mu_bg - 1/mu_r) grad(Einc).grad(N_p)
//                     - k0^2 (eps_bg - eps_r) Einc N_p ] dA
// with 3-point (edge midpoint) Gauss. Regions replaced by surface admittance
// models must carry the background material here; only true volumetric
// contrast (sheaths, graded fills) belongs in `mat`.
Eigen::VectorXcd assemble_contrast_rhs(const TriMesh &mesh, const MaterialField &mat,
                                       const Material &background, const PlaneWave &inc);

// Nodes on the outer boundary (edges used by exactly one triangle).
std::vector<int> boundary_nodes(const TriMesh &mesh);

// Homogeneous Dirichlet rows/columns: unit diagonal, zero couplings, zero rhs.
void apply_dirichlet(Eigen::SparseMatrix<cplx> &K, Eigen::VectorXcd &rhs,
                     const std::vector<int> &nodes);

}  // namespace em2d

#endif
