// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one line per criterion, exit code = number of failures.
// With arguments it runs only the named criteria: `em2d_acceptance A3 A9`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "em2d/constants.hpp"
#include "em2d/coupling.hpp"
#include "em2d/dsao.hpp"
#include "em2d/errors.hpp"
#include "em2d/fem.hpp"
#include "em2d/mesh.hpp"
#include "em2d/mie.hpp"
#include "em2d/postprocess.hpp"
#include "em2d/scenario.hpp"
#include "em2d/solver.hpp"

using namespace em2d;
namespace fs = std::filesystem;

namespace
{

struct Crit
{
  std::vector<std::string> fails;

  void check(bool ok, const std::string &msg)
  {
    if (!ok)
      fails.push_back(msg);
  }
  void checkf(bool ok, const char *fmt, double a, double b)
  {
    if (!ok)
    {
      char buf[256];
      std::snprintf(buf, sizeof buf, fmt, a, b);
      fails.emplace_back(buf);
    }
  }
};

fs::path scratch(const std::string &crit)
{
  const fs::path p = fs::temp_directory_path() / "em2d_acceptance" / crit;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double metric(const RunArtifacts &art, const std::string &key, Crit &c)
{
  for (const auto &kv : art.metric_rows)
    if (kv.first == key)
      return kv.second;
  c.check(false, "missing metric row '" + key + "'");
  return std::nan("");
}

// P1 mass action on a uniformly sampled circle of radius r.
Eigen::VectorXcd circle_mass_apply(double r, const Eigen::VectorXcd &v)
{
  const int m = int(v.size());
  const double L = 2.0 * r * std::sin(pi / m);
  Eigen::VectorXcd out(m);
  for (int i = 0; i < m; ++i)
    out[i] = L * (2.0 / 3.0 * v[i] + v[(i + m - 1) % m] / 6.0 + v[(i + 1) % m] / 6.0);
  return out;
}

cplx modal_quotient(const Eigen::MatrixXcd &A, double r, int mode)
{
  const int m = int(A.rows());
  Eigen::VectorXcd v(m);
  for (int i = 0; i < m; ++i)
    v[i] = std::exp(jj * double(mode) * (2.0 * pi * double(i) / m));
  return v.dot(A * v) / v.dot(circle_mass_apply(r, v));
}

cplx interp_at(const TriMesh &mesh, const PointLocator &loc, const Eigen::VectorXcd &e,
               const Vec2 &p)
{
  const auto hit = loc.locate(p);
  if (!hit)
    return cplx{std::nan(""), 0.0};
  cplx v{0.0, 0.0};
  for (int k = 0; k < 3; ++k)
    v += hit->L[k] * e[mesh.tris[hit->elem].v[k]];
  return v;
}

// ---------------------------------------------------------------- criterion A1

void a1_connection_properties(Crit &c)
{
  std::mt19937 rng(20240817u);
  std::uniform_real_distribution<double> uh(0.08, 0.3), uc(-0.25, 0.25), ur(0.2, 0.55);
  std::uniform_int_distribution<int> um(12, 80), ukind(0, 2);

  for (int trial = 0; trial < 50; ++trial)
  {
    const double h = uh(rng);
    const TriMesh mesh = build_rect_mesh(-1.0, -1.0, 1.0, 1.0, h);
    const PointLocator loc(mesh);
    const Vec2 center{uc(rng), uc(rng)};
    const int m = um(rng);

    Contour contour;
    switch (ukind(rng))
    {
      case 0:
        contour = circle_contour(center, ur(rng), m);
        break;
      case 1:
        contour = square_contour(center, 2.0 * ur(rng), std::max(2, m / 4));
        break;
      default:
        for (int i = 0; i < m; ++i)
        {
          const double th = 2.0 * pi * double(i) / m;
          const double r = 0.35 * (1.0 + 0.2 * std::cos(th));
          contour.nodes.push_back({center.x + r * std::cos(th), center.y + r * std::sin(th)});
        }
    }

    const ConnectionMatrix T = build_connection_matrix(mesh, loc, contour);
    for (int r = 0; r < T.rows(); ++r)
    {
      double sum = 0.0;
      int nnz = 0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(T.T, r); it; ++it)
      {
        c.check(it.value() >= -1e-12 && it.value() <= 1.0 + 1e-12,
                "trial " + std::to_string(trial) + ": weight outside [0,1]");
        sum += it.value();
        ++nnz;
      }
      c.check(nnz >= 1 && nnz <= 3, "trial " + std::to_string(trial) + ": row nnz not in 1..3");
      c.check(std::abs(sum - 1.0) <= 1e-12,
              "trial " + std::to_string(trial) + ": row sum off by " + std::to_string(sum - 1.0));
      if (c.fails.size() > 20)
        return;  // enough evidence
    }

    Eigen::VectorXcd affine(mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i)
      affine[i] = cplx{0.7 - 0.3 * mesh.nodes[i].x + 1.1 * mesh.nodes[i].y,
                       -0.2 + 0.9 * mesh.nodes[i].x};
    const Eigen::VectorXcd got = apply_connection(T, affine);
    for (int i = 0; i < contour.size(); ++i)
    {
      const Vec2 &p = contour.nodes[i];
      const cplx want{0.7 - 0.3 * p.x + 1.1 * p.y, -0.2 + 0.9 * p.x};
      c.check(std::abs(got[i] - want) <= 1e-12,
              "trial " + std::to_string(trial) + ": affine field not reproduced");
    }
  }
}

// ---------------------------------------------------------------- criterion A2

void a2_conformal_degeneration(Crit &c)
{
  // (a) operator identity on a conformal polar disc
  std::vector<double> rings;
  for (int i = 1; i <= 20; ++i)
    rings.push_back(0.05 * i);  // 0.05 * 8 == 0.4 bitwise
  const int n = 64;
  const TriMesh mesh = build_polar_mesh({0.0, 0.0}, rings, n, true);
  const PointLocator loc(mesh);
  const Contour contour = circle_contour({0.0, 0.0}, 0.4, n);
  const double omega = 2.0 * pi * 3e8;
  const Material diel{cplx{4.0, 0.0}, cplx{1.0, 0.0}};
  const Material vac;

  DomainCoupling d;
  d.T = build_connection_matrix(mesh, loc, contour);
  c.check(detect_conformal(d.T), "shared-node contour not detected as conformal");
  d.op = std::make_shared<Dsao>(assemble_dsao(contour, diel, vac, omega));

  const Eigen::SparseMatrix<cplx> K =
      assemble_helmholtz(mesh, [](const Vec2 &) { return Material{}; }, omega);
  PlaneWave inc;
  inc.background = vac;
  inc.omega = omega;
  const Eigen::VectorXcd rhs0 = Eigen::VectorXcd::Zero(K.rows());
  const CoupledSystem sys = assemble_coupled_system(
      K, rhs0, {d}, omega, [&](const Vec2 &p) { return inc.field(p); });

  // direct conformal construction: j w mu0 G Ys dropped on the contour DOFs
  std::vector<int> dof(n, -1);
  for (int r = 0; r < n; ++r)
  {
    Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(d.T.T, r);
    dof[r] = d.T.global[it.index()];
  }
  const Eigen::MatrixXcd GY = jj * omega * mu0 * (d.op->gram * d.op->Ys);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      trips.emplace_back(dof[i], dof[j], GY(i, j));
  Eigen::SparseMatrix<cplx> C(K.rows(), K.cols());
  C.setFromTriplets(trips.begin(), trips.end());
  const Eigen::SparseMatrix<cplx> direct = K + C;

  double amax = 0.0;
  for (int k = 0; k < direct.outerSize(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(direct, k); it; ++it)
      amax = std::max(amax, std::abs(it.value()));
  Eigen::SparseMatrix<cplx> diff = sys.A - direct;
  double dmax = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(diff, k); it; ++it)
      dmax = std::max(dmax, std::abs(it.value()));
  c.checkf(dmax <= 1e-14 * amax, "K+C vs direct placement: |diff| %.3e > 1e-14 * %.3e", dmax,
           amax);

  Eigen::VectorXcd e1_inc(n);
  for (int i = 0; i < n; ++i)
    e1_inc[i] = inc.field(contour.nodes[i]);
  Eigen::VectorXcd rhs_direct = Eigen::VectorXcd::Zero(K.rows());
  const Eigen::VectorXcd load = GY * e1_inc;
  for (int i = 0; i < n; ++i)
    rhs_direct[dof[i]] -= load[i];
  c.checkf((sys.rhs - rhs_direct).norm() <= 1e-14 * rhs_direct.norm(),
           "rhs compensation differs: %.3e vs scale %.3e", (sys.rhs - rhs_direct).norm(),
           rhs_direct.norm());

  // (b) end to end: conformal formulation vs nonconformal assembly on the
  // same polar mesh gives the same echo width curve
  const fs::path tmp = scratch("A2");
  Scenario s = preset("coated-circle");
  s.h_pde = 0.1;
  s.domains[0].h = 0.03;
  s.nearfield.active = false;
  s.metrics = {};
  s.formulation = Formulation::HybridConformal;
  s.out_dir = (tmp / "conformal").string();
  const RunArtifacts conf = run_scenario(s);

  s.formulation = Formulation::HybridNonconformal;
  s.layout = MeshLayout::Polar;  // same mesh, interpolation path
  s.out_dir = (tmp / "nonconformal").string();
  const RunArtifacts nonc = run_scenario(s);

  if (!conf.rcs || !nonc.rcs || conf.rcs->sigma_dbm.size() != nonc.rcs->sigma_dbm.size())
  {
    c.check(false, "echo width curves missing or mismatched");
    return;
  }
  double rmax = 0.0;
  for (size_t i = 0; i < conf.rcs->sigma_dbm.size(); ++i)
    rmax = std::max(rmax, std::abs(conf.rcs->sigma_dbm[i] - nonc.rcs->sigma_dbm[i]));
  c.checkf(rmax <= 1e-10, "echo width curves differ by %.3e dB (budget %.1e)", rmax, 1e-10);
}

// ---------------------------------------------------------------- criterion A3

void a3_dtn_oracle(Crit &c)
{
  // 0.4 m circle, eps 4, 300 MHz, 256 nodes; frozen k J'_m(ka)/J_m(ka)
  const double frozen[9] = {-24.802999520134074, 3.8755348900061411, -119.96065273685234,
                            -6.2345425511627045, 1.5134805712210336, 6.1333620213218939,
                            9.8376598994644136,  13.131919969979182, 16.201806681794407};
  const double a = 0.4, omega = 2.0 * pi * 3e8;
  const int n = 256;
  const Material diel{cplx{4.0, 0.0}, cplx{1.0, 0.0}};
  const Contour contour = circle_contour({0.0, 0.0}, a, n);

  const Eigen::MatrixXcd bem = dtn_interior_bem(contour, diel, omega);
  for (int m = 0; m <= 8; ++m)
  {
    const cplx got = modal_quotient(bem, a, m);
    c.checkf(std::abs(got - frozen[m]) < 0.01 * std::abs(frozen[m]),
             "mode eigenvalue %.6g vs frozen %.6g off by >1%%", got.real(), frozen[m]);
  }

  // backend agreement on the admittance the backends exist to produce (the
  // raw flux maps differ at the Nyquist band; that part cancels here)
  std::vector<double> rings;
  for (int i = 1; i <= 80; ++i)
    rings.push_back(a * (double(i) / 80.0));
  const TriMesh interior = build_polar_mesh({0.0, 0.0}, rings, n, true);
  const Material vac;
  const Dsao db = assemble_dsao(contour, diel, vac, omega, DtnBackend::LayerPotential);
  const Dsao df = assemble_dsao(contour, diel, vac, omega, DtnBackend::InteriorFem, &interior);
  c.checkf((db.Ys - df.Ys).norm() < 0.03 * db.Ys.norm(),
           "FEM Schur vs BEM admittance: %.3e > 3%% of %.3e", (db.Ys - df.Ys).norm(),
           db.Ys.norm());
}

// ---------------------------------------------------------------- criterion A4

void a4_coated_circle_convergence(Crit &c)
{
  const fs::path tmp = scratch("A4");
  Scenario s = preset("coated-circle");
  s.nearfield.active = false;
  s.metrics = {"mie-rcs"};
  s.out_dir = (tmp / "desk").string();

  const RunArtifacts desk = run_scenario(s);
  const double re_desk = metric(desk, "re_rcs_mie", c);
  c.checkf(re_desk < 0.05, "desk-scale RE %.4f >= %.2f", re_desk, 0.05);
  c.check(desk.cost.elements > 15000 && desk.cost.elements < 25000,
          "desk run should land near 2e4 elements, got " + std::to_string(desk.cost.elements));

  Scenario lad = s;
  lad.out_dir = (tmp / "ladder").string();
  const auto rows = convergence_sweep(lad, {8000, 20000, 45000});
  bool decreasing = rows.size() == 3;
  for (size_t i = 1; i < rows.size(); ++i)
    decreasing = decreasing && rows[i].re < rows[i - 1].re;
  std::string ladder;
  for (const auto &r : rows)
    ladder += " " + std::to_string(r.re);
  c.check(decreasing, "refinement ladder RE not strictly decreasing:" + ladder);

  // the paper-resolution rung (~1e5 elements)
  Scenario fine = s;
  const double scale = std::sqrt(2.0 * 25.0 / 1e5) / s.h_pde;
  fine.h_pde = s.h_pde * scale;
  fine.domains[0].h = s.domains[0].h * scale;
  fine.out_dir = (tmp / "fine").string();
  const RunArtifacts f = run_scenario(fine);
  const double re_fine = metric(f, "re_rcs_mie", c);
  c.checkf(re_fine < 0.01, "1e5-element RE %.4f >= %.3f", re_fine, 0.01);
  c.check(f.cost.elements > 80000, "fine run should reach ~1e5 elements, got " +
                                       std::to_string(f.cost.elements));
}

// ---------------------------------------------------------------- criterion A5

void a5_near_field_error(Crit &c)
{
  const fs::path tmp = scratch("A5");
  Scenario s = preset("coated-circle");
  s.rcs.active = true;
  s.metrics = {"mie-nearfield"};
  s.out_dir = tmp.string();

  const RunArtifacts art = run_scenario(s);
  c.check(art.nearfield.has_value() && art.nearfield->nx == 200 && art.nearfield->ny == 200,
          "near-field grid is not 200x200");
  const double mx = metric(art, "nf_max_err", c);
  const double f5 = metric(art, "nf_frac_5pct", c);
  c.checkf(mx < 0.08, "max pointwise near-field error %.4f >= %.2f", mx, 0.08);
  c.checkf(f5 >= 0.90, "only %.3f of points under 5%% (need %.2f)", f5, 0.90);
}

// ---------------------------------------------------------------- criterion A6

void a6_skin_effect(Crit &c)
{
  const fs::path tmp = scratch("A6");
  const double sigma = 5.8e7, a = 2e-3, omega = 2.0 * pi * 3e8;
  const double delta = std::sqrt(2.0 / (omega * mu0 * sigma));

  Scenario s = preset("copper-cylinder");
  s.out_dir = (tmp / "circle").string();
  const RunArtifacts art = run_scenario(s);
  if (art.currents.empty())
  {
    c.check(false, "no current density map produced");
    return;
  }
  const CurrentDensityMap &map = art.currents[0];
  const int n = s.domains[0].h > 0 ? int(std::lround(2.0 * pi * a / s.domains[0].h / 8.0) * 8)
                                   : 0;
  const int m_nodes = 248;
  c.check(n == m_nodes, "expected a 248-node contour, spacing gives " + std::to_string(n));
  const int nd = int(map.points.size()) / m_nodes;
  c.check(int(map.points.size()) == nd * m_nodes, "lattice is not node-blocked");

  // radial cut at phi = pi (node 124): recovered |J| vs the series oracle
  const Material cu = Material::conductor(sigma, omega);
  const MieSolution mie =
      mie_coated_cylinder({0.0, 0.0}, a, a, cu, cu, Material{}, omega, 0.0);
  std::vector<double> calc, ref, depth;
  for (int k = 124 * nd; k < 125 * nd; ++k)
  {
    const Vec2 &p = map.points[k];
    calc.push_back(map.abs_j[k]);
    ref.push_back(sigma * std::abs(mie.total_field(p)));
    depth.push_back(a - std::sqrt(p.x * p.x + p.y * p.y));
  }
  const double re = relative_error(calc, ref);
  c.checkf(std::sqrt(re) < 0.02, "radial |J| cut: rel error %.4f >= %.3f", std::sqrt(re), 0.02);

  // e-folding length from a log-linear fit over the first three skin depths
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (size_t k = 0; k < depth.size(); ++k)
  {
    if (depth[k] > 3.0 * delta || calc[k] <= 0.0)
      continue;
    sx += depth[k];
    sy += std::log(calc[k]);
    sxx += depth[k] * depth[k];
    sxy += depth[k] * std::log(calc[k]);
    ++cnt;
  }
  if (cnt < 4)
  {
    c.check(false, "too few lattice points inside three skin depths");
  }
  else
  {
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    const double efold = -1.0 / slope;
    c.checkf(std::abs(efold - delta) < 0.1 * delta, "e-folding %.3e vs skin depth %.3e off >10%%",
             efold, delta);
  }

  // sector cable: conformal vs nonconformal peak |J|
  Scenario cab = preset("single-cable");
  cab.out_dir = (tmp / "cable-nonconformal").string();
  const RunArtifacts nc = run_scenario(cab);
  cab.formulation = Formulation::HybridConformal;
  cab.out_dir = (tmp / "cable-conformal").string();
  const RunArtifacts cf = run_scenario(cab);

  double peak_nc = 0.0, peak_cf = 0.0;
  for (const auto &mapd : nc.currents)
    peak_nc = std::max(peak_nc, mapd.peak);
  for (const auto &mapd : cf.currents)
    peak_cf = std::max(peak_cf, mapd.peak);
  const double rel = std::abs(peak_nc - peak_cf) / std::max(peak_nc, peak_cf);
  c.checkf(rel < 0.005, "sector peak |J| differs by %.4f (budget %.3f)", rel, 0.005);
}

// ---------------------------------------------------------------- criterion A7

void a7_cost_ordering(Crit &c)
{
  const fs::path tmp = scratch("A7");
  Scenario s = preset("single-cable");
  s.current.active = false;  // cost comparison only

  s.out_dir = (tmp / "nonconformal").string();
  const RunArtifacts nc = run_scenario(s);

  Scenario sc = s;
  sc.formulation = Formulation::HybridConformal;
  sc.out_dir = (tmp / "conformal").string();
  const RunArtifacts cf = run_scenario(sc);

  Scenario sr = s;
  sr.formulation = Formulation::ReferenceFem;
  sr.out_dir = (tmp / "reference").string();
  const RunArtifacts rf = run_scenario(sr);

  const double un = nc.cost.unknowns, uc = cf.cost.unknowns, ur = rf.cost.unknowns;
  c.checkf(un <= 0.5 * uc, "nonconformal unknowns %.0f > 50%% of conformal %.0f", un, uc);
  c.checkf(un <= 0.05 * ur, "nonconformal unknowns %.0f > 5%% of reference %.0f", un, ur);

  const double tn = nc.cost.t_fill_solve_s(), tc = cf.cost.t_fill_solve_s(),
               tr = rf.cost.t_fill_solve_s();
  c.checkf(tn < tc, "fill+solve: nonconformal %.3f s not under conformal %.3f s", tn, tc);
  c.checkf(tc < tr, "fill+solve: conformal %.3f s not under reference %.3f s", tc, tr);
}

// ---------------------------------------------------------------- criterion A8

void a8_dsao_reuse(Crit &c)
{
  const fs::path tmp = scratch("A8");
  Scenario s = preset("cable-array");
  s.out_dir = tmp.string();
  const RunArtifacts art = run_scenario(s);

  c.check(art.dsao_builds == 1,
          "expected one operator build, got " + std::to_string(art.dsao_builds));
  c.check(art.dsao_hits == 3, "expected three cache hits, got " + std::to_string(art.dsao_hits));

  if (art.currents.size() != 4)
  {
    c.check(false, "expected four per-cable current maps");
    return;
  }
  for (int i = 1; i < 4; ++i)
  {
    if (art.currents[i].abs_j.size() != art.currents[0].abs_j.size())
    {
      c.check(false, "cable lattices differ in size");
      return;
    }
    const double re = relative_error(art.currents[i].abs_j, art.currents[0].abs_j);
    c.checkf(std::sqrt(re) < 0.01, "cable pattern %.0f differs from cable 0 by %.4f", double(i),
             std::sqrt(re));
  }
}

// ---------------------------------------------------------------- criterion A9

double manufactured_error(double h)
{
  const TriMesh mesh = build_rect_mesh(0.0, 0.0, 1.0, 1.0, h);
  const Material vac;
  const double omega = 2.0 * pi * c0();
  PlaneWave wave;
  wave.phi = 0.5;
  wave.background = vac;
  wave.omega = omega;

  Eigen::SparseMatrix<cplx> K =
      assemble_helmholtz(mesh, [&](const Vec2 &) { return Material{}; }, omega);
  const auto bnodes = boundary_nodes(mesh);
  Eigen::VectorXcd gb = Eigen::VectorXcd::Zero(K.rows());
  for (int b : bnodes)
    gb[b] = wave.field(mesh.nodes[b]);
  Eigen::VectorXcd rhs = -(K * gb);
  apply_dirichlet(K, rhs, bnodes);
  for (int b : bnodes)
    rhs[b] = gb[b];

  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(K);
  const Eigen::VectorXcd u = lu.solve(rhs);
  std::vector<char> is_b(mesh.nodes.size(), 0);
  for (int b : bnodes)
    is_b[b] = 1;
  double err = 0.0;
  for (size_t i = 0; i < mesh.nodes.size(); ++i)
    if (!is_b[i])
      err = std::max(err, std::abs(u[i] - wave.field(mesh.nodes[i])));
  return err;
}

std::vector<cplx> point_source_ring(double half, double h, double r_ring)
{
  const TriMesh mesh = build_rect_mesh(-half, -half, half, half, h);
  const PointLocator loc(mesh);
  const double t = 10.0 * h;  // ten absorbing layers
  const PmlSpec pml = make_pml(-half + t, -half + t, half - t, half - t, t, 3.0, 1e-6);
  const double omega = 2.0 * pi * c0();  // one-meter wavelength

  Eigen::SparseMatrix<cplx> K =
      assemble_helmholtz(mesh, [](const Vec2 &) { return Material{}; }, omega, &pml);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(K.rows());
  const auto hit = loc.locate({0.0, 0.0});
  int src = mesh.tris[hit->elem].v[0];
  for (int k = 1; k < 3; ++k)
    if (hit->L[k] > hit->L[0])
      src = mesh.tris[hit->elem].v[k];
  rhs[src] = cplx{1.0, 0.0};
  apply_dirichlet(K, rhs, boundary_nodes(mesh));

  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(K);
  const Eigen::VectorXcd e = lu.solve(rhs);

  std::vector<cplx> out;
  for (int i = 0; i < 16; ++i)
  {
    const double th = 2.0 * pi * double(i) / 16.0;
    out.push_back(interp_at(mesh, loc, e, {r_ring * std::cos(th), r_ring * std::sin(th)}));
  }
  return out;
}

void a9_null_contrast_suite(Crit &c)
{
  // (a) zero-contrast admittance leaves the solution identical to plain FEM
  const TriMesh mesh = build_rect_mesh(-1.0, -1.0, 1.0, 1.0, 0.1);
  const PointLocator loc(mesh);
  const Material vac;
  const double omega = 2.0 * pi * 3e8;
  Eigen::SparseMatrix<cplx> K =
      assemble_helmholtz(mesh, [](const Vec2 &) { return Material{}; }, omega);
  Eigen::VectorXcd rhs(K.rows());
  for (int i = 0; i < K.rows(); ++i)
    rhs[i] = cplx{std::sin(0.3 * i), std::cos(0.2 * i)};
  const auto bnodes = boundary_nodes(mesh);

  DomainCoupling d;
  d.T = build_connection_matrix(mesh, loc, circle_contour({0.0, 0.0}, 0.5, 48));
  d.op = std::make_shared<Dsao>(assemble_dsao(circle_contour({0.0, 0.0}, 0.5, 48), vac, vac,
                                              omega));
  CoupledSystem sys = assemble_coupled_system(K, rhs, {d}, omega,
                                              [](const Vec2 &) { return cplx{1.0, 0.0}; });
  apply_dirichlet(sys.A, sys.rhs, bnodes);
  const FieldSolution with_ys = solve(sys);

  Eigen::SparseMatrix<cplx> K2 = K;
  Eigen::VectorXcd rhs2 = rhs;
  apply_dirichlet(K2, rhs2, bnodes);
  CoupledSystem plain;
  plain.A = K2;
  plain.rhs = rhs2;
  const FieldSolution bare = solve(plain);
  const double dsol = (with_ys.e - bare.e).norm() / bare.e.norm();
  c.checkf(dsol <= 1e-12, "zero-contrast solution differs from FEM by %.3e (budget %.1e)", dsol,
           1e-12);

  // (b) second-order convergence on the manufactured plane wave
  const double e1 = manufactured_error(0.1), e2 = manufactured_error(0.05);
  const double rate = std::log2(e1 / e2);
  c.checkf(rate >= 1.8, "observed convergence rate %.2f < %.1f", rate, 1.8);

  // (c) absorbing-shell reflection: a point source in a small box against the
  // same discretization in a much larger box; the difference is the
  // boundary treatment
  const auto small = point_source_ring(1.0, 0.05, 0.35);
  const auto large = point_source_ring(3.0, 0.05, 0.35);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i)
    worst = std::max(worst, std::abs(small[i] - large[i]) / std::abs(large[i]));
  c.checkf(worst < 0.01, "shell reflection %.4f >= %.3f", worst, 0.01);
}

// -------------------------------------------------------------------- runner

struct Criterion
{
  const char *id;
  const char *title;
  double budget_s;  // 0: no cap in the acceptance text
  std::function<void(Crit &)> run;
};

}  // namespace

int main(int argc, char **argv)
{
  const std::vector<Criterion> all = {
      {"A1", "connection-matrix properties", 5.0, a1_connection_properties},
      {"A2", "conformal degeneration", 30.0, a2_conformal_degeneration},
      {"A3", "interior DtN oracle", 60.0, a3_dtn_oracle},
      {"A4", "coated-circle echo width convergence", 900.0, a4_coated_circle_convergence},
      {"A5", "near-field error bounds", 180.0, a5_near_field_error},
      {"A6", "skin effect and sector peaks", 300.0, a6_skin_effect},
      {"A7", "cost ordering across formulations", 600.0, a7_cost_ordering},
      {"A8", "admittance operator reuse", 0.0, a8_dsao_reuse},
      {"A9", "null contrast, rate and reflection", 120.0, a9_null_contrast_suite},
  };

  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto &crit : all)
  {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), crit.id) == wanted.end())
      continue;

    Crit c;
    const auto t0 = std::chrono::steady_clock::now();
    try
    {
      crit.run(c);
    }
    catch (const std::exception &e)
    {
      c.check(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (crit.budget_s > 0.0 && secs > crit.budget_s)
    {
      char buf[128];
      std::snprintf(buf, sizeof buf, "runtime %.1f s exceeds the %.0f s budget", secs,
                    crit.budget_s);
      c.fails.emplace_back(buf);
    }

    std::printf("%s %s (%.1f s) %s\n", crit.id, c.fails.empty() ? "PASS" : "FAIL", secs,
                crit.title);
    for (const auto &f : c.fails)
      std::printf("  - %s\n", f.c_str());
    std::fflush(stdout);
    if (!c.fails.empty())
      ++failures;
  }
  return failures;
}
