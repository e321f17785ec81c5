// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_BEM_HPP
#define EM2D_BEM_HPP

#include <Eigen/Dense>

#include "em2d/constants.hpp"
#include "em2d/mesh.hpp"

namespace em2d
{

// Galerkin layer-potential matrices on P1 (hat) bases over closed polygonal
// contours, kernel G_k(x,y) = -(j/4) H0^(2)(k|x-y|):
//   S[p][q] = oint oint psi_p(x) G_k(x,y)            psi_q(y) dg(y) dg(x)
//   D[p][q] = oint oint psi_p(x) d/dn(y) G_k(x,y)    psi_q(y) dg(y) dg(x)  (PV)
// `rows` and `cols` may be different contours (cross blocks of layered
// geometries). Quadrature: per outer point the inner integral splits at the
// projection foot, walks geometric pieces away from it (scaled by 1/|k| once
// |k| l is large), and subtracts the -(1/2pi) ln d part analytically on the
// touching piece. Pairs beyond the kernel's exponential reach (lossy k) are
// skipped outright.
struct BemBlocks
{
  Eigen::MatrixXcd S, D;
};
BemBlocks assemble_layer_blocks(const Contour &rows, const Contour &cols, cplx k);

// Cyclic tridiagonal Gram (mass) matrix of the contour's P1 basis.
Eigen::MatrixXd contour_gram(const Contour &c);

// Potentials at a free point x from nodal densities; same adaptive inner
// quadrature, so x may sit close to (but not on) the contour.
cplx eval_single_layer(const Contour &c, const Eigen::VectorXcd &q, cplx k, const Vec2 &x);
cplx eval_double_layer(const Contour &c, const Eigen::VectorXcd &e, cplx k, const Vec2 &x);

}  // namespace em2d

#endif
