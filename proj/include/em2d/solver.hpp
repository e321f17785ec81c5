// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_SOLVER_HPP
#define EM2D_SOLVER_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "em2d/constants.hpp"
#include "em2d/coupling.hpp"
#include "em2d/dsao.hpp"
#include "em2d/fem.hpp"

namespace em2d
{

// One embedded inclusion: its admittance operator and the interpolation onto
// the volume mesh it lives in.
struct DomainCoupling
{
  ConnectionMatrix T;
  std::shared_ptr<const Dsao> op;
};

struct CoupledSystem
{
  Eigen::SparseMatrix<cplx> A;  // volume operator plus admittance loads
  Eigen::VectorXcd rhs;
  std::vector<DomainCoupling> domains;
};

// Fold the admittance loads into K and the rhs:
//   A   = K + sum_d  j w mu0 T_d' G_d Ys_d T_d   (scattered to volume nodes)
//   rhs = rhs - sum_d j w mu0 T_d' G_d Ys_d e1_inc,d
// The compensation term appears because the volume unknown is the scattered
// field while the admittance acts on the total trace. Domains must not share
// volume nodes (CouplingError otherwise). Dirichlet conditions are the
// caller's business, after this step.
CoupledSystem assemble_coupled_system(const Eigen::SparseMatrix<cplx> &K,
                                      const Eigen::VectorXcd &rhs,
                                      std::vector<DomainCoupling> domains, double omega,
                                      const std::function<cplx(const Vec2 &)> &incident);

struct SolveReport
{
  int unknowns = 0;
  long long nnz = 0;       // factor-input nonzeros
  double t_factor = 0.0;   // seconds
  double t_solve = 0.0;
  double residual = 0.0;   // ||A e - rhs|| / ||rhs||
  long peak_rss_kb = 0;    // process high-water mark after the solve
};

struct FieldSolution
{
  Eigen::VectorXcd e;  // scattered field on volume nodes
  SolveReport report;
};

// Sparse direct solve. Throws NumericalFailure on a singular factorization
// or when the residual exceeds 1e-10.
FieldSolution solve(const CoupledSystem &sys);

// Total-field trace on a domain's contour: T * e_sc + e_inc(nodes).
Eigen::VectorXcd extract_boundary_trace(const Eigen::VectorXcd &e_sc, const DomainCoupling &d,
                                        const std::function<cplx(const Vec2 &)> &incident);

struct InteriorSamples
{
  Eigen::VectorXcd values;
  // set when the sample sits within one mean segment length of a bounding
  // contour, where the layer-potential evaluation loses accuracy
  std::vector<char> near_boundary;
};

// Fields inside an inclusion from its total boundary trace, via the interior
// Green representation at the material wavenumber. Layered operators
// reconstruct the coat annulus and the core separately; points outside the
// contour get the nearest region's formula and a near_boundary flag.
InteriorSamples recover_interior_fields(const Dsao &op, const Eigen::VectorXcd &e1,
                                        const std::vector<Vec2> &points);

// 1-norm condition estimate of A (Hager's method on the factorized matrix).
double condition_estimate(const Eigen::SparseMatrix<cplx> &A);

}  // namespace em2d

#endif
