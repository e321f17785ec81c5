// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/dsao.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "em2d/bem.hpp"
#include "em2d/errors.hpp"

namespace em2d
{

Eigen::MatrixXcd dtn_interior_bem(const Contour &c, const Material &m, double omega)
{
  const cplx k = m.wavenumber(omega);
  const BemBlocks bl = assemble_layer_blocks(c, c, k);
  const Eigen::MatrixXcd g = contour_gram(c).cast<cplx>();

  Eigen::MatrixXcd rhs = bl.D + 0.5 * g;
  Eigen::PartialPivLU<Eigen::MatrixXcd> slu(bl.S);
  // S is singular only exactly at an interior Dirichlet resonance of the
  // contour; rcond degradation near one shows up in the eigenvalue checks.
  return (1.0 / m.mu_r) * (g * slu.solve(rhs));
}

Eigen::MatrixXcd dtn_interior_fem(const Contour &c, const TriMesh &interior, const Material &m,
                                  double omega)
{
  const int mb = c.size();
  const int n = int(interior.nodes.size());

  // match contour nodes to mesh boundary nodes by position
  const double tol = 1e-9 * std::max(1.0, interior.max_diameter());
  std::vector<int> bidx(mb, -1);
  for (int p = 0; p < mb; ++p)
  {
    for (int i = 0; i < n; ++i)
    {
      if (norm(interior.nodes[i] - c.nodes[p]) <= tol)
      {
        bidx[p] = i;
        break;
      }
    }
    if (bidx[p] < 0)
    {
      throw MeshFormatError("interior mesh has no node matching contour node " +
                            std::to_string(p));
    }
  }

  Eigen::SparseMatrix<cplx> A =
      assemble_helmholtz(interior, [&](const Vec2 &) { return m; }, omega, nullptr);

  std::vector<int> perm(n, -1);  // mesh node -> position in [boundary | interior]
  for (int p = 0; p < mb; ++p)
  {
    perm[bidx[p]] = p;
  }
  int next = mb;
  for (int i = 0; i < n; ++i)
  {
    if (perm[i] < 0)
    {
      perm[i] = next++;
    }
  }

  std::vector<Eigen::Triplet<cplx>> tbb, tbi, tib, tii;
  for (int col = 0; col < A.outerSize(); ++col)
  {
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(A, col); it; ++it)
    {
      const int r = perm[it.row()], q = perm[it.col()];
      if (r < mb && q < mb)
      {
        tbb.emplace_back(r, q, it.value());
      }
      else if (r < mb)
      {
        tbi.emplace_back(r, q - mb, it.value());
      }
      else if (q < mb)
      {
        tib.emplace_back(r - mb, q, it.value());
      }
      else
      {
        tii.emplace_back(r - mb, q - mb, it.value());
      }
    }
  }
  const int ni = n - mb;
  Eigen::SparseMatrix<cplx> Abb(mb, mb), Abi(mb, ni), Aib(ni, mb), Aii(ni, ni);
  Abb.setFromTriplets(tbb.begin(), tbb.end());
  Abi.setFromTriplets(tbi.begin(), tbi.end());
  Aib.setFromTriplets(tib.begin(), tib.end());
  Aii.setFromTriplets(tii.begin(), tii.end());

  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu(Aii);
  if (lu.info() != Eigen::Success)
  {
    throw NumericalFailure("interior FEM factorization failed in DtN Schur complement");
  }
  Eigen::MatrixXcd X = lu.solve(Eigen::MatrixXcd(Aib));
  return Eigen::MatrixXcd(Abb) - Eigen::MatrixXcd(Abi) * X;
}

namespace
{

struct LayeredReduction
{
  Eigen::MatrixXcd dtn;          // at the outer contour
  Eigen::MatrixXcd e_inner_map;  // from outer trace
  Eigen::MatrixXcd q_inner_map;
};

// Coat-region (annulus) elimination. With S/D blocks of the coat wavenumber
// between outer (o) and inner (i) contours, Gram matrices G_o, G_i, and the
// inner region operator Dtn_in:
//   W  = mu_c G_i^{-1} Dtn_in          (coat-side q_i = W e_i)
//   Z  = G_i/2 - D_ii + S_ii W
//   Sh = S_oo - (S_oi W - D_oi) Z^{-1} S_io
//   Dh = (G_o/2 + D_oo) - (S_oi W - D_oi) Z^{-1} D_io
//   Dtn = (1/mu_c) G_o Sh^{-1} Dh
LayeredReduction reduce_through_coat(const Contour &outer, const Contour &inner,
                                     const Eigen::MatrixXcd &dtn_in, const Material &coat,
                                     double omega)
{
  const cplx kc = coat.wavenumber(omega);
  const BemBlocks oo = assemble_layer_blocks(outer, outer, kc);
  const BemBlocks oi = assemble_layer_blocks(outer, inner, kc);
  const BemBlocks io = assemble_layer_blocks(inner, outer, kc);
  const BemBlocks ii = assemble_layer_blocks(inner, inner, kc);
  const Eigen::MatrixXcd go = contour_gram(outer).cast<cplx>();
  const Eigen::MatrixXcd gi = contour_gram(inner).cast<cplx>();

  Eigen::PartialPivLU<Eigen::MatrixXcd> gilu(gi);
  const Eigen::MatrixXcd W = coat.mu_r * gilu.solve(dtn_in);
  const Eigen::MatrixXcd Z = 0.5 * gi - ii.D + ii.S * W;
  Eigen::PartialPivLU<Eigen::MatrixXcd> zlu(Z);
  const Eigen::MatrixXcd zs = zlu.solve(io.S);  // Z^{-1} S_io
  const Eigen::MatrixXcd zd = zlu.solve(io.D);  // Z^{-1} D_io
  const Eigen::MatrixXcd u = oi.S * W - oi.D;

  const Eigen::MatrixXcd sh = oo.S - u * zs;
  const Eigen::MatrixXcd dh = (0.5 * go + oo.D) - u * zd;
  Eigen::PartialPivLU<Eigen::MatrixXcd> shlu(sh);
  const Eigen::MatrixXcd qo_map = shlu.solve(dh);  // q_o from e_o

  LayeredReduction out;
  out.dtn = (1.0 / coat.mu_r) * (go * qo_map);
  out.e_inner_map = zs * qo_map - zd;
  out.q_inner_map = W * out.e_inner_map;
  return out;
}

}  // namespace

Dsao assemble_dsao(const Contour &c, const Material &inclusion, const Material &background,
                   double omega, DtnBackend backend, const TriMesh *interior)
{
  c.validate();
  // Both flux maps must come from the same backend: their high-order
  // discretization error is identical and cancels in the difference below,
  // which is what makes the two backends interchangeable.
  Eigen::MatrixXcd dtn_in, dtn_bg;
  if (backend == DtnBackend::LayerPotential)
  {
    dtn_in = dtn_interior_bem(c, inclusion, omega);
    dtn_bg = dtn_interior_bem(c, background, omega);
  }
  else
  {
    if (!interior)
    {
      throw ConfigError("InteriorFem admittance backend needs an interior mesh");
    }
    dtn_in = dtn_interior_fem(c, *interior, inclusion, omega);
    dtn_bg = dtn_interior_fem(c, *interior, background, omega);
  }

  Dsao d;
  d.contour = c;
  d.gram = contour_gram(c);
  d.inclusion = inclusion;
  d.background = background;
  d.omega = omega;
  d.Ys = (dtn_in - dtn_bg) / (jj * omega * mu0);
  Eigen::PartialPivLU<Eigen::MatrixXcd> glu(d.gram.cast<cplx>());
  d.q_outer_map = inclusion.mu_r * glu.solve(dtn_in);
  return d;
}

Dsao assemble_dsao_nested(const Contour &outer, const Contour &inner, const Material &core,
                          const Material &coat, const Material &background, double omega)
{
  if (core == coat)
  {
    // the elimination is exact but needlessly ill-conditioned in this case
    return assemble_dsao(outer, core, background, omega);
  }
  outer.validate();
  inner.validate();

  const Eigen::MatrixXcd dtn_core = dtn_interior_bem(inner, core, omega);
  const LayeredReduction red = reduce_through_coat(outer, inner, dtn_core, coat, omega);
  const Eigen::MatrixXcd dtn_bg = dtn_interior_bem(outer, background, omega);

  Dsao d;
  d.contour = outer;
  d.gram = contour_gram(outer);
  d.inclusion = coat;
  d.background = background;
  d.omega = omega;
  d.Ys = (red.dtn - dtn_bg) / (jj * omega * mu0);
  Eigen::PartialPivLU<Eigen::MatrixXcd> glu(d.gram.cast<cplx>());
  d.q_outer_map = coat.mu_r * glu.solve(red.dtn);
  d.layered = Dsao::Layered{inner, core, red.e_inner_map, red.q_inner_map};
  return d;
}

ShapeKey shape_key(const Contour &c, const Material &inclusion, const Material &background,
                   double omega)
{
  const int m = c.size();
  const double scale = c.total_length();

  // quantized (relative length, turning angle) pairs per node
  std::vector<std::pair<long long, long long>> seq(m);
  for (int i = 0; i < m; ++i)
  {
    const Vec2 tp = c.tangent((i + m - 1) % m);
    const Vec2 tc = c.tangent(i);
    const double turn = std::atan2(cross(tp, tc), dot(tp, tc));
    seq[i] = {llround(c.seg_length(i) / scale * 1e9), llround(turn * 1e9)};
  }

  // lexicographically minimal rotation (m is small; the direct scan is fine)
  int best = 0;
  for (int r = 1; r < m; ++r)
  {
    for (int i = 0; i < m; ++i)
    {
      const auto &a = seq[(r + i) % m];
      const auto &b = seq[(best + i) % m];
      if (a != b)
      {
        if (a < b)
        {
          best = r;
        }
        break;
      }
    }
  }

  ShapeKey key;
  key.rotation = best;
  key.blob.reserve(2 * m + 12);
  key.blob.push_back(m);
  int e = 0;
  const double f = std::frexp(scale, &e);
  key.blob.push_back(e);
  key.blob.push_back(llround(f * 2e9));
  auto push_d = [&key](double v)
  {
    long long bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    key.blob.push_back(bits);
  };
  push_d(inclusion.eps_r.real());
  push_d(inclusion.eps_r.imag());
  push_d(inclusion.mu_r.real());
  push_d(inclusion.mu_r.imag());
  push_d(background.eps_r.real());
  push_d(background.eps_r.imag());
  push_d(background.mu_r.real());
  push_d(background.mu_r.imag());
  push_d(omega);
  for (int i = 0; i < m; ++i)
  {
    key.blob.push_back(seq[(best + i) % m].first);
    key.blob.push_back(seq[(best + i) % m].second);
  }
  return key;
}

size_t DsaoCache::BlobHash::operator()(const std::vector<long long> &b) const
{
  size_t h = 1469598103934665603ull;
  for (long long v : b)
  {
    h ^= size_t(v);
    h *= 1099511628211ull;
  }
  return h;
}

namespace
{

// Re-label a cached operator (stored in canonical node rotation) onto a local
// contour whose nodes start `rot` positions later.
Eigen::MatrixXcd rotate_matrix(const Eigen::MatrixXcd &a, int rot)
{
  if (rot == 0)
  {
    return a;
  }
  const int m = int(a.rows());
  Eigen::MatrixXcd out(m, a.cols());
  const bool square = a.cols() == m;
  for (int i = 0; i < m; ++i)
  {
    for (int j = 0; j < a.cols(); ++j)
    {
      out((i + rot) % m, square ? (j + rot) % m : j) = a(i, j);
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const Dsao> DsaoCache::lookup(const ShapeKey &key,
                                              const std::function<Dsao()> &build,
                                              const Contour &local, const Contour *local_inner)
{
  {
    std::lock_guard<std::mutex> g(mu_);
    auto it = map_.find(key.blob);
    if (it != map_.end())
    {
      const auto &[canon_rot, canon] = it->second;
      const int m = local.size();
      const int shift = ((key.rotation - canon_rot) % m + m) % m;
      // A layered operator reused under a node rotation would also need its
      // inner rows re-labeled; no preset produces that, so rebuild instead of
      // guessing.
      if (!(canon->layered && shift != 0))
      {
        ++hits_;
        auto d = std::make_shared<Dsao>(*canon);
        d->contour = local;
        if (d->layered && local_inner)
        {
          d->layered->inner = *local_inner;
        }
        if (shift != 0)
        {
          d->Ys = rotate_matrix(d->Ys, shift);
          d->q_outer_map = rotate_matrix(d->q_outer_map, shift);
          d->gram = contour_gram(local);
        }
        return d;
      }
    }
  }
  auto built = std::make_shared<Dsao>(build());
  {
    std::lock_guard<std::mutex> g(mu_);
    ++builds_;
    map_.emplace(key.blob, std::make_pair(key.rotation, built));
  }
  return built;
}

std::shared_ptr<const Dsao> DsaoCache::get_single(const Contour &c, const Material &inclusion,
                                                  const Material &background, double omega)
{
  const ShapeKey key = shape_key(c, inclusion, background, omega);
  return lookup(key, [&] { return assemble_dsao(c, inclusion, background, omega); }, c);
}

std::shared_ptr<const Dsao> DsaoCache::get_nested(const Contour &outer, const Contour &inner,
                                                  const Material &core, const Material &coat,
                                                  const Material &background, double omega)
{
  ShapeKey key = shape_key(outer, coat, background, omega);
  // fold the inner geometry, core material and inner placement in so
  // distinct coatings never collide
  const ShapeKey ik = shape_key(inner, core, coat, omega);
  key.blob.push_back(-1);
  key.blob.insert(key.blob.end(), ik.blob.begin(), ik.blob.end());
  const Vec2 off = inner.a(0) - outer.a(0);
  key.blob.push_back(llround(off.x * 1e12));
  key.blob.push_back(llround(off.y * 1e12));
  return lookup(
      key, [&] { return assemble_dsao_nested(outer, inner, core, coat, background, omega); },
      outer, &inner);
}

void write_dsao_matrix(const std::string &path, const Eigen::MatrixXcd &ys)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw ConfigError("cannot write '" + path + "'");
  }
  out.write("dsao1", 5);
  const uint32_t m = uint32_t(ys.rows());
  out.write(reinterpret_cast<const char *>(&m), 4);
  for (uint32_t i = 0; i < m; ++i)
  {
    for (uint32_t j = 0; j < m; ++j)
    {
      const double re = ys(i, j).real(), im = ys(i, j).imag();
      out.write(reinterpret_cast<const char *>(&re), 8);
      out.write(reinterpret_cast<const char *>(&im), 8);
    }
  }
}

Eigen::MatrixXcd read_dsao_matrix(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ConfigError("cannot open '" + path + "'");
  }
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "dsao1", 5) != 0)
  {
    throw ConfigError("'" + path + "' is not an admittance dump");
  }
  uint32_t m = 0;
  in.read(reinterpret_cast<char *>(&m), 4);
  Eigen::MatrixXcd ys(m, m);
  for (uint32_t i = 0; i < m; ++i)
  {
    for (uint32_t j = 0; j < m; ++j)
    {
      double re, im;
      in.read(reinterpret_cast<char *>(&re), 8);
      in.read(reinterpret_cast<char *>(&im), 8);
      ys(i, j) = cplx{re, im};
    }
  }
  if (!in)
  {
    throw ConfigError("'" + path + "' truncated");
  }
  return ys;
}

}  // namespace em2d
