// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <doctest.h>

#include "em2d/errors.hpp"
#include "em2d/fem.hpp"
#include "em2d/mie.hpp"

using em2d::cplx;
using em2d::Material;
using em2d::MieSolution;
using em2d::Vec2;

namespace
{

constexpr double pi = 3.14159265358979323846;
constexpr double f300 = 2.0 * pi * 300e6;

Material eps(double er) { return Material{cplx{er, 0.0}, cplx{1.0, 0.0}}; }

Vec2 polar(double r, double theta_deg)
{
  const double t = theta_deg * pi / 180.0;
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace

// Dielectric circle of radius 0.4 (eps 4) in a 0.6 sheath (eps 2.3),
// vacuum outside, 300 MHz, unit wave along +x. References frozen from a
// 50-digit mpmath evaluation of the layered separation-of-variables
// solution.
TEST_CASE("layered dielectric cylinder: echo width")
{
  const MieSolution s =
      em2d::mie_coated_cylinder({0, 0}, 0.4, 0.6, eps(4.0), eps(2.3), eps(1.0), f300);
  CHECK(!s.collapsed);
  CHECK(s.n_terms >= 16);
  CHECK(s.n_terms <= 30);
  CHECK(std::abs(s.a[s.n_terms]) / std::abs(s.a[0]) < 1e-12);

  const struct
  {
    double phi_deg, sigma;
  } ref[] = {
      {0, 6.7712911950135034},   {45, 4.6523975553691974},  {90, 2.5332254350782007},
      {135, 1.2227877838042123}, {180, 1.2003080151877017},
  };
  for (const auto &r : ref)
  {
    CHECK(s.sigma_2d(r.phi_deg * pi / 180.0) == doctest::Approx(r.sigma).epsilon(1e-8));
  }

  // lossless, so scattered power balances the forward-amplitude theorem
  CHECK(s.optical_theorem_residual() < 1e-10);
}

TEST_CASE("layered dielectric cylinder: field pins in every region")
{
  const MieSolution s =
      em2d::mie_coated_cylinder({0, 0}, 0.4, 0.6, eps(4.0), eps(2.3), eps(1.0), f300);
  const struct
  {
    double rho, theta_deg, re, im;
  } ref[] = {
      {0.2, 30, 0.485003855673382427, 0.961829195802647493},    // core
      {0.5, 120, 0.180079293628889391, 0.994451524037263525},   // sheath
      {0.8, 200, 0.109653929205811271, -0.975008853489861745},  // outside
      {0.61, 0, -1.5753088038748247, -1.33191988310229913},     // just outside
      {0.35, 275, -0.288344629724510079, -1.01975001370244917}  // core, near interface
  };
  for (const auto &r : ref)
  {
    const cplx e = s.total_field(polar(r.rho, r.theta_deg));
    CHECK(std::abs(e - cplx{r.re, r.im}) < 5e-8);
  }
}

// Copper cylinder, radius 2 mm, 300 MHz: |k a| ~ 741 with equal real and
// imaginary parts, the regime the J-ratio evaluation exists for. |J| decays
// by e per skin depth (3.8154 um) walking inward from the lit surface.
TEST_CASE("copper cylinder: echo width, coefficients, interior current")
{
  const double a = 2e-3, sig = 5.8e7;
  const Material cu = Material::conductor(sig, f300);
  const MieSolution s = em2d::mie_coated_cylinder({0, 0}, a, a, cu, cu, eps(1.0), f300);
  CHECK(s.collapsed);
  CHECK(s.a_eff == a);

  CHECK(std::abs(s.a[0] - cplx{-0.10897138, 0.311497059}) < 5e-8);

  const double delta = std::sqrt(2.0 / (f300 * em2d::mu0 * sig));
  CHECK(std::abs(delta - 3.8154477e-6) < 1e-6 * delta);
  // for a good conductor the wavenumber is (1 - j)/delta
  CHECK(std::abs(-1.0 / s.interior.wavenumber(f300).imag() - delta) < 1e-8 * delta);

  const struct
  {
    double phi_deg, sigma;
  } rcs[] = {
      {0, 0.069381556351812842},
      {90, 0.069283224654848315},
      {180, 0.069184978862183315},
  };
  for (const auto &r : rcs)
  {
    CHECK(s.sigma_2d(r.phi_deg * pi / 180.0) == doctest::Approx(r.sigma).epsilon(1e-8));
  }

  const struct
  {
    double r_over_a, phi_rad, absj, rtol;
  } cur[] = {
      {1.0, pi, 17182.4206429, 2e-6},        // lit surface
      {0.98, pi, 0.485802475744, 1e-4},      // ~10.5 skin depths in
      {0.95, pi, 7.30623461529e-8, 1e-4},    // ~26 in
      {0.9, pi, 3.11103825388e-19, 1e-4},    // ~52 in
      {1.0, 0.0, 15895.3269713, 2e-6},       // shadow-side surface
      {1.0, pi / 2, 16457.5511773, 2e-6},
  };
  for (const auto &c : cur)
  {
    const Vec2 p{c.r_over_a * a * std::cos(c.phi_rad), c.r_over_a * a * std::sin(c.phi_rad)};
    const double j = sig * std::abs(s.total_field(p));
    // plain relative check; the magnitudes span 23 decades
    CHECK(std::abs(j - c.absj) < c.rtol * c.absj);
  }
}

// With no contrast anywhere the expansion must reproduce the plane wave
// itself; this pins the (-j)^m J_m cos(m dtheta) bookkeeping and the phase
// reference of an off-origin center against the closed form.
TEST_CASE("contrast-free cylinder reproduces the incident plane wave")
{
  const double phi = 0.7;
  em2d::PlaneWave pw;
  pw.phi = phi;
  pw.background = eps(1.0);
  pw.omega = f300;

  const MieSolution s = em2d::mie_coated_cylinder({0.3, -0.2}, 0.25, 0.4, eps(1.0), eps(1.0),
                                                  eps(1.0), f300, phi);
  CHECK(std::abs(s.a[0]) < 1e-14);

  const Vec2 pts[] = {{0.3, -0.2}, {0.45, -0.1}, {0.0, 0.0}, {0.9, 0.4}, {0.31, -0.55}};
  for (const Vec2 &p : pts)
  {
    CHECK(std::abs(s.total_field(p) - pw.field(p)) < 1e-10);
  }
}

// A sheath whose material matches one neighbour is not really there. The
// explicit two-interface path with a nearly-degenerate sheath must agree
// with the single-interface solution it limits to.
TEST_CASE("degenerate sheath limits")
{
  const Material er4 = eps(4.0), vac = eps(1.0);
  const double angs[] = {0.0, 0.9, 2.2, pi};

  // sheath ~ core: behaves as one eps-4 circle of the outer radius
  const Material near4 = eps(4.0 * (1.0 + 1e-13));
  const MieSolution gen1 = em2d::mie_coated_cylinder({0, 0}, 0.4, 0.6, er4, near4, vac, f300);
  const MieSolution col1 = em2d::mie_coated_cylinder({0, 0}, 0.6, 0.6, er4, er4, vac, f300);
  CHECK(!gen1.collapsed);
  CHECK(col1.collapsed);
  for (double a : angs)
  {
    CHECK(gen1.sigma_2d(a) == doctest::Approx(col1.sigma_2d(a)).epsilon(1e-9));
  }
  CHECK(std::abs(gen1.total_field({0.5, 0.1}) - col1.total_field({0.5, 0.1})) < 1e-9);

  // sheath ~ background: behaves as one eps-4 circle of the inner radius
  const Material nearvac = eps(1.0 + 1e-13);
  const MieSolution gen2 = em2d::mie_coated_cylinder({0, 0}, 0.4, 0.6, er4, nearvac, vac, f300);
  const MieSolution col2 = em2d::mie_coated_cylinder({0, 0}, 0.4, 0.6, er4, vac, vac, f300);
  CHECK(!gen2.collapsed);
  CHECK(col2.collapsed);
  CHECK(col2.a_eff == doctest::Approx(0.4));
  for (double a : angs)
  {
    CHECK(gen2.sigma_2d(a) == doctest::Approx(col2.sigma_2d(a)).epsilon(1e-9));
  }
}

TEST_CASE("cylinder solver rejects bad radii and hopeless sizes")
{
  CHECK_THROWS_AS(em2d::mie_coated_cylinder({0, 0}, -0.1, 0.6, eps(4.0), eps(2.3), eps(1.0), f300),
                  em2d::ConfigError);
  CHECK_THROWS_AS(em2d::mie_coated_cylinder({0, 0}, 0.6, 0.4, eps(4.0), eps(2.3), eps(1.0), f300),
                  em2d::ConfigError);
  // ~ 32 m at 300 MHz needs more than 200 azimuthal orders
  CHECK_THROWS_AS(em2d::mie_coated_cylinder({0, 0}, 32.0, 32.0, eps(4.0), eps(4.0), eps(1.0), f300),
                  em2d::NumericalFailure);
}
