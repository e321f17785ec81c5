// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_DSAO_HPP
#define EM2D_DSAO_HPP

#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "em2d/fem.hpp"
#include "em2d/mesh.hpp"

namespace em2d
{

// Tested-flux interior Dirichlet-to-Neumann matrix on a contour: maps the
// nodal trace e to f_p = oint psi_p (1/mu_r) dE/dn dg (n outward). Layer
// potential realization: Dtn = (1/mu_r) G S^{-1} (D + G/2) at the interior
// wavenumber.
Eigen::MatrixXcd dtn_interior_bem(const Contour &c, const Material &m, double omega);

// Cross-check realization: P1 FEM Schur complement A_BB - A_BI A_II^{-1} A_IB
// on an interior mesh whose boundary nodes coincide with the contour nodes in
// order (matched by position).
Eigen::MatrixXcd dtn_interior_fem(const Contour &c, const TriMesh &interior, const Material &m,
                                  double omega);

enum class DtnBackend
{
  LayerPotential,
  InteriorFem
};

// Differential surface admittance operator of one embedded inclusion, plus
// the operators needed later to reconstruct fields inside it.
struct Dsao
{
  Contour contour;  // embedding (outer) contour
  Eigen::MatrixXcd Ys;
  Eigen::MatrixXd gram;
  Material inclusion;  // material just inside `contour` (coat for layered)
  Material background;
  double omega = 0.0;

  // nodal d/dn E on the inclusion side of `contour` from the outer trace
  Eigen::MatrixXcd q_outer_map;

  struct Layered
  {
    Contour inner;
    Material core;
    Eigen::MatrixXcd e_inner_map;  // inner trace from outer trace
    Eigen::MatrixXcd q_inner_map;  // coat-side d/dn E on inner contour from outer trace
  };
  std::optional<Layered> layered;
};

// Ys = (Dtn_inclusion - Dtn_background) / (j w mu0) on the contour. The FEM
// backend needs the interior mesh; it is a verification path, not the default.
Dsao assemble_dsao(const Contour &c, const Material &inclusion, const Material &background,
                   double omega, DtnBackend backend = DtnBackend::LayerPotential,
                   const TriMesh *interior = nullptr);

// Coated inclusion: the core's operator is eliminated through the coat layer
// (annulus Green identities), then differenced against the background at the
// outer contour. Equal core/coat delegates to the single-interface path.
Dsao assemble_dsao_nested(const Contour &outer, const Contour &inner, const Material &core,
                          const Material &coat, const Material &background, double omega);

// Congruence key: segment-length/turning-angle sequence quantized at 1e-9
// relative, reduced to its lexicographically minimal cyclic rotation, plus
// the absolute scale, material pair, and frequency. Congruent contours
// (translates/rotations with matching node order) share a key; the stored
// rotation offset re-labels cached operators onto the local node numbering.
struct ShapeKey
{
  std::vector<long long> blob;
  int rotation = 0;  // this contour's offset against the canonical rotation

  bool operator==(const ShapeKey &o) const { return blob == o.blob; }
};
ShapeKey shape_key(const Contour &c, const Material &inclusion, const Material &background,
                   double omega);

// Read-through cache over assemble_dsao keyed by shape; thread-safe.
class DsaoCache
{
public:
  std::shared_ptr<const Dsao> get_single(const Contour &c, const Material &inclusion,
                                         const Material &background, double omega);
  std::shared_ptr<const Dsao> get_nested(const Contour &outer, const Contour &inner,
                                         const Material &core, const Material &coat,
                                         const Material &background, double omega);
  long hits() const { return hits_; }
  long builds() const { return builds_; }

private:
  struct BlobHash
  {
    size_t operator()(const std::vector<long long> &b) const;
  };
  std::shared_ptr<const Dsao> lookup(const ShapeKey &key,
                                     const std::function<Dsao()> &build, const Contour &local,
                                     const Contour *local_inner = nullptr);

  mutable std::mutex mu_;
  std::unordered_map<std::vector<long long>, std::pair<int, std::shared_ptr<const Dsao>>, BlobHash>
      map_;  // canonical rotation + operator
  long hits_ = 0, builds_ = 0;
};

// Binary admittance dump: magic "dsao1", uint32 m, then m*m row-major
// (re, im) little-endian doubles.
void write_dsao_matrix(const std::string &path, const Eigen::MatrixXcd &ys);
Eigen::MatrixXcd read_dsao_matrix(const std::string &path);

}  // namespace em2d

#endif
