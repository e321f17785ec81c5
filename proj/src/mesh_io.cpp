// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <sstream>

#include "em2d/errors.hpp"
#include "em2d/mesh.hpp"

namespace em2d
{

namespace
{

std::ifstream open_in(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MeshFormatError("cannot open '" + path + "'");
  }
  return in;
}

void expect_word(std::istream &in, const std::string &want, const std::string &path)
{
  std::string got;
  if (!(in >> got) || got != want)
  {
    throw MeshFormatError("'" + path + "': expected '" + want + "', got '" + got + "'");
  }
}

long expect_count(std::istream &in, const std::string &what, const std::string &path)
{
  long n = -1;
  if (!(in >> n) || n < 0)
  {
    throw MeshFormatError("'" + path + "': bad " + what + " count");
  }
  return n;
}

}  // namespace

TriMesh read_mesh(const std::string &path)
{
  std::ifstream in = open_in(path);
  expect_word(in, "mesh2d", path);
  expect_word(in, "1", path);
  expect_word(in, "nodes", path);
  const long nn = expect_count(in, "node", path);

  TriMesh m;
  m.nodes.resize(nn);
  for (long i = 0; i < nn; ++i)
  {
    if (!(in >> m.nodes[i].x >> m.nodes[i].y))
    {
      throw MeshFormatError("'" + path + "': truncated node list at " + std::to_string(i));
    }
  }
  expect_word(in, "triangles", path);
  const long nt = expect_count(in, "triangle", path);
  m.tris.resize(nt);
  for (long e = 0; e < nt; ++e)
  {
    auto &t = m.tris[e];
    if (!(in >> t.v[0] >> t.v[1] >> t.v[2] >> t.tag))
    {
      throw MeshFormatError("'" + path + "': truncated triangle list at " + std::to_string(e));
    }
  }
  m.validate();
  return m;
}

void write_mesh(const TriMesh &mesh, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw MeshFormatError("cannot write '" + path + "'");
  }
  out << "mesh2d 1\n";
  out << "nodes " << mesh.nodes.size() << "\n";
  char buf[80];
  for (const Vec2 &p : mesh.nodes)
  {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  out << "triangles " << mesh.tris.size() << "\n";
  for (const auto &t : mesh.tris)
  {
    out << t.v[0] << " " << t.v[1] << " " << t.v[2] << " " << t.tag << "\n";
  }
}

Contour read_contour(const std::string &path)
{
  std::ifstream in = open_in(path);
  expect_word(in, "contour", path);
  expect_word(in, "1", path);
  expect_word(in, "nodes", path);
  const long nn = expect_count(in, "node", path);
  Contour c;
  c.nodes.resize(nn);
  for (long i = 0; i < nn; ++i)
  {
    if (!(in >> c.nodes[i].x >> c.nodes[i].y))
    {
      throw MeshFormatError("'" + path + "': truncated node list at " + std::to_string(i));
    }
  }
  c.validate();
  return c;
}

void write_contour(const Contour &c, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw MeshFormatError("cannot write '" + path + "'");
  }
  out << "contour 1\n";
  out << "nodes " << c.nodes.size() << "\n";
  char buf[80];
  for (const Vec2 &p : c.nodes)
  {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
}

}  // namespace em2d
