// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_POSTPROCESS_HPP
#define EM2D_POSTPROCESS_HPP

#include <string>
#include <utility>
#include <vector>

#include "em2d/mie.hpp"
#include "em2d/solver.hpp"

namespace em2d
{

// Bistatic 2D echo width over a set of observation angles.
struct RcsCurve
{
  std::vector<double> angles;     // radians, strictly increasing within [0, 2pi)
  std::vector<double> sigma_dbm;  // 10 log10(echo width / 1 m)
  double frequency = 0.0;         // Hz
};

// Regular sample grid of the total field with per-point provenance:
// region 0 = interpolated from the volume solution, 1+d = recovered inside
// admittance domain d.
struct FieldGrid
{
  Vec2 origin{0.0, 0.0};
  double dx = 0.0, dy = 0.0;
  int nx = 0, ny = 0;
  std::vector<cplx> e;      // row-major, iy*nx + ix
  std::vector<int> region;

  Vec2 point(int ix, int iy) const { return {origin.x + ix * dx, origin.y + iy * dy}; }
  cplx at(int ix, int iy) const { return e[std::size_t(iy) * nx + ix]; }
};

// |J| = sigma |E| samples inside a conductor; zero outside it.
struct CurrentDensityMap
{
  std::vector<Vec2> points;
  std::vector<double> abs_j;  // A/m^2
  double peak = 0.0;
  Vec2 peak_at{0.0, 0.0};
};

struct NearFieldError
{
  std::vector<double> err;  // |calc - ref| / max|ref|, same layout as the grids
  double max_err = 0.0;
  double frac_below_3pct = 0.0;
  double frac_below_5pct = 0.0;
};

// Equivalent surface current from the total boundary trace (A/m, nodal).
Eigen::VectorXcd equivalent_current(const Dsao &op, const Eigen::VectorXcd &e1);

// Total field on a regular grid: volume points by barycentric interpolation
// of scattered + incident, points inside an admittance contour by interior
// recovery. The grid must stay out of the absorbing shell (ConfigError) and
// on the volume mesh.
FieldGrid near_field_grid(const TriMesh &mesh, const PointLocator &loc,
                          const Eigen::VectorXcd &e_sc,
                          const std::vector<DomainCoupling> &domains,
                          const std::function<cplx(const Vec2 &)> &incident, const Vec2 &origin,
                          double dx, double dy, int nx, int ny, const PmlSpec *pml = nullptr);

// Axis-aligned collection rectangle for the near-to-far-field transform.
struct HuygensRect
{
  double x0, y0, x1, y1;
};

// Echo width from equivalent sources on a rectangle in the homogeneous
// background: far pattern P(phi) = loop of [jk (rhat.n) E_sc - dE_sc/dn]
// exp(jk rhat.y) dGamma, with the normal derivative taken by central
// differences a thousandth of the local element size to each side, and
// sigma = |P|^2 / (4 k |E0|^2). The rectangle must enclose every admittance
// contour (CouplingError) and stay out of the absorbing shell (ConfigError).
RcsCurve rcs_from_huygens(const TriMesh &mesh, const PointLocator &loc,
                          const Eigen::VectorXcd &e_sc, const PlaneWave &wave,
                          const HuygensRect &rect, const std::vector<double> &angles,
                          const std::vector<DomainCoupling> &domains,
                          const PmlSpec *pml = nullptr);

// Echo width radiated by the equivalent surface currents themselves:
// P(phi) = -j w mu0 * loop of J(y) exp(jk rhat.y) dGamma summed over
// domains. An independent route to the same far field as rcs_from_huygens.
RcsCurve rcs_from_current(const std::vector<DomainCoupling> &domains,
                          const std::vector<Eigen::VectorXcd> &currents, const PlaneWave &wave,
                          const std::vector<double> &angles);

// Sample points walking inward from each contour node along the inward
// normal, geometrically graded so the first steps resolve delta/4 and the
// walk stops at max_depth.
std::vector<Vec2> graded_conductor_lattice(const Contour &c, double delta, double max_depth);

// sigma |E| on the lattice; points outside the conductive region (the core
// for layered operators, the whole interior otherwise) report zero.
CurrentDensityMap current_density_map(const Dsao &op, const Eigen::VectorXcd &e1, double sigma_sm,
                                      const std::vector<Vec2> &lattice);

// Squared-norm error ratio  sum|calc-ref|^2 / sum|ref|^2  (no square root).
double relative_error(const std::vector<double> &calc, const std::vector<double> &ref);
double relative_error(const Eigen::VectorXcd &calc, const Eigen::VectorXcd &ref);

// Pointwise |calc - ref| / max|ref| on identical grids, with the fractions
// of points under the 3% and 5% marks.
NearFieldError near_field_relative_error(const FieldGrid &calc, const FieldGrid &ref);

// Sample the separation-of-variables reference on the same angle grid.
RcsCurve rcs_from_mie(const MieSolution &mie, const std::vector<double> &angles);

// CSV emitters: header row, 17-significant-digit floats, '\n' endings.
void write_rcs_csv(const std::string &path, const RcsCurve &rcs);
void write_nearfield_csv(const std::string &path, const FieldGrid &grid);
void write_current_csv(const std::string &path, const CurrentDensityMap &map);
void write_metrics_csv(const std::string &path,
                       const std::vector<std::pair<std::string, double>> &rows);

}  // namespace em2d

#endif
