// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_COUPLING_HPP
#define EM2D_COUPLING_HPP

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "em2d/constants.hpp"
#include "em2d/fem.hpp"
#include "em2d/mesh.hpp"

namespace em2d
{

// Interpolation operator joining an independently meshed contour to the
// volume mesh: e1 = T * e_tilde, where e_tilde collects only the volume
// nodes that appear under some contour node ("involved" nodes, numbered in
// first-encounter order). Each row holds the barycentric weights of the
// contour node's host triangle: at most three entries, all in [0,1],
// summing to one.
struct ConnectionMatrix
{
  Eigen::SparseMatrix<double, Eigen::RowMajor> T;  // m x m_s
  std::vector<int> global;  // column s of T refers to volume node global[s]
  bool conformal = false;

  int rows() const { return static_cast<int>(T.rows()); }
  int cols() const { return static_cast<int>(T.cols()); }
};

struct EdgeWeights
{
  double w1, w2;
};

// Linear interpolation along the segment r1-r2 evaluated at r. The weight of
// an endpoint is proportional to the distance from r to the *other* endpoint
// so that w1(r1) = 1; assigning the distances the other way round (as
// sometimes printed) fails that trivial check.
EdgeWeights interp_1d_weights(const Vec2 &r1, const Vec2 &r2, const Vec2 &r);

// Build T for one contour. Weights below `snap` are zeroed and the row
// renormalized, which turns a contour node sitting exactly on a volume node
// into a clean single-entry row. Throws CouplingError (naming the node
// index) if a contour node lies outside the mesh, or inside the absorbing
// shell when `pml` is given.
ConnectionMatrix build_connection_matrix(const TriMesh &mesh, const PointLocator &locator,
                                         const Contour &contour, const PmlSpec *pml = nullptr,
                                         double snap = 1e-12);

// True when every row is a single unit entry, i.e. the contour nodes are a
// subset of the volume nodes and interpolation degenerates to selection.
bool detect_conformal(const ConnectionMatrix &T, double tol = 1e-12);

// Gather the involved entries of a full volume vector and apply T.
Eigen::VectorXcd apply_connection(const ConnectionMatrix &T, const Eigen::VectorXcd &full);

}  // namespace em2d

#endif
