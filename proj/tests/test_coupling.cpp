// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "em2d/constants.hpp"
#include "em2d/coupling.hpp"
#include "em2d/errors.hpp"
#include "em2d/mesh.hpp"

using namespace em2d;

TEST_CASE("segment weights follow the endpoint convention")
{
  const Vec2 r1{0.0, 0.0}, r2{2.0, 0.0};
  auto w = interp_1d_weights(r1, r2, r1);
  CHECK(w.w1 == doctest::Approx(1.0));
  CHECK(w.w2 == doctest::Approx(0.0));
  w = interp_1d_weights(r1, r2, {0.5, 0.0});
  CHECK(w.w1 == doctest::Approx(0.75));
  CHECK(w.w2 == doctest::Approx(0.25));
}

TEST_CASE("connection matrix rows are convex barycentric combinations")
{
  const TriMesh mesh = build_rect_mesh(-1.0, -1.0, 1.0, 1.0, 0.125);
  const PointLocator loc(mesh);
  const Contour c = circle_contour({0.1, -0.05}, 0.6, 97);  // incommensurate with grid
  const ConnectionMatrix T = build_connection_matrix(mesh, loc, c);

  CHECK(T.rows() == 97);
  CHECK(static_cast<int>(T.global.size()) == T.cols());
  for (int s : T.global)
  {
    CHECK(s >= 0);
    CHECK(s < static_cast<int>(mesh.nodes.size()));
  }

  for (int r = 0; r < T.rows(); ++r)
  {
    double sum = 0.0;
    int nnz = 0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(T.T, r); it; ++it)
    {
      CHECK(it.value() >= -1e-12);
      CHECK(it.value() <= 1.0 + 1e-12);
      sum += it.value();
      ++nnz;
    }
    CHECK(nnz >= 1);
    CHECK(nnz <= 3);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_FALSE(detect_conformal(T));
}

TEST_CASE("interpolation reproduces linear fields exactly")
{
  const TriMesh mesh = build_rect_mesh(-1.0, -1.0, 1.0, 1.0, 0.2);
  const PointLocator loc(mesh);
  const Contour c = circle_contour({0.0, 0.0}, 0.73, 41);
  const ConnectionMatrix T = build_connection_matrix(mesh, loc, c);

  Eigen::VectorXcd full(mesh.nodes.size());
  for (size_t i = 0; i < mesh.nodes.size(); ++i)
    full[i] = cplx{1.5 + 2.0 * mesh.nodes[i].x, -3.0 * mesh.nodes[i].y};
  const Eigen::VectorXcd on_contour = apply_connection(T, full);
  REQUIRE(on_contour.size() == 41);
  for (int i = 0; i < 41; ++i)
  {
    const cplx want{1.5 + 2.0 * c.nodes[i].x, -3.0 * c.nodes[i].y};
    CHECK(std::abs(on_contour[i] - want) < 1e-12);
  }
}

TEST_CASE("conformal contours degenerate to selection")
{
  // A polar mesh whose innermost ring was generated with the same formula as
  // the circle contour: shared nodes are bitwise equal, so every row snaps
  // to a single unit entry.
  const std::vector<double> rings{0.5, 0.75, 1.0};
  const TriMesh mesh = build_polar_mesh({0.0, 0.0}, rings, 64, true, 2.0);
  const PointLocator loc(mesh);
  const Contour c = circle_contour({0.0, 0.0}, 0.5, 64);
  const ConnectionMatrix T = build_connection_matrix(mesh, loc, c);
  CHECK(detect_conformal(T));
  for (int r = 0; r < T.rows(); ++r)
  {
    CHECK(T.T.innerVector(r).nonZeros() == 1);
    CHECK(Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator(T.T, r).value() == 1.0);
  }

  // A nudge far below the snap tolerance must not break the detection.
  Contour nudged = c;
  nudged.nodes[3].x += 1e-15;
  const ConnectionMatrix Tn = build_connection_matrix(mesh, loc, nudged);
  CHECK(detect_conformal(Tn));
}

TEST_CASE("contour nodes outside the mesh or inside the shell are rejected")
{
  const TriMesh mesh = build_rect_mesh(-1.0, -1.0, 1.0, 1.0, 0.25);
  const PointLocator loc(mesh);

  const Contour out = circle_contour({0.0, 0.0}, 1.4, 16);
  CHECK_THROWS_AS(build_connection_matrix(mesh, loc, out), CouplingError);

  // 0.3-thick absorbing shell: radius 0.9 pokes into it near the axes
  const PmlSpec pml = make_pml(-0.7, -0.7, 0.7, 0.7, 0.3);
  const Contour brush = circle_contour({0.0, 0.0}, 0.9, 16);
  CHECK_THROWS_AS(build_connection_matrix(mesh, loc, brush, &pml), CouplingError);
  CHECK_NOTHROW(build_connection_matrix(mesh, loc, brush));  // fine without the shell
}
