// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#include "em2d/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "em2d/coupling.hpp"
#include "em2d/dsao.hpp"
#include "em2d/errors.hpp"
#include "em2d/solver.hpp"

namespace em2d
{

double Scenario::omega() const
{
  return 2.0 * pi * frequency;
}

namespace
{

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double seconds_since(const clock_type::time_point &t0)
{
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// ---------------------------------------------------------------- text utils

std::string trim(const std::string &s)
{
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
    ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
    --b;
  return s.substr(a, b - a);
}

double to_num(const std::string &ctx, const std::string &v)
{
  try
  {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return x;
  }
  catch (const std::exception &)
  {
    throw ConfigError(ctx + ": not a number '" + v + "'");
  }
}

long to_int(const std::string &ctx, const std::string &v)
{
  try
  {
    size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return x;
  }
  catch (const std::exception &)
  {
    throw ConfigError(ctx + ": not an integer '" + v + "'");
  }
}

bool to_bool(const std::string &ctx, const std::string &v)
{
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  throw ConfigError(ctx + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string &v)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ','))
  {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

std::vector<double> to_nums(const std::string &ctx, const std::string &v, size_t need)
{
  const auto items = split_list(v);
  if (items.size() != need)
    throw ConfigError(ctx + ": expected " + std::to_string(need) + " comma-separated numbers");
  std::vector<double> out;
  for (const auto &it : items)
    out.push_back(to_num(ctx, it));
  return out;
}

std::string num(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::string &path, const std::string &body)
{
  std::FILE *f = std::fopen(path.c_str(), "wb");
  if (!f)
    throw ConfigError("cannot write '" + path + "'");
  std::fwrite(body.data(), 1, body.size(), f);
  std::fclose(f);
}

// --------------------------------------------------------------- validation

const char *formulation_name(Formulation f)
{
  switch (f)
  {
    case Formulation::HybridNonconformal: return "hybrid-nonconformal";
    case Formulation::HybridConformal: return "hybrid-conformal";
    case Formulation::ReferenceFem: return "reference-fem";
  }
  return "?";
}

const char *layout_name(MeshLayout l)
{
  switch (l)
  {
    case MeshLayout::Auto: return "auto";
    case MeshLayout::Rect: return "rect";
    case MeshLayout::Polar: return "polar";
  }
  return "?";
}

void check_material(const std::string &ctx, const Material &m)
{
  if (m.eps_r.imag() > 0.0 || m.mu_r.imag() > 0.0)
    throw ConfigError(ctx + ": passive media need Im(eps_r) <= 0 and Im(mu_r) <= 0");
  if (!(m.eps_r.real() > 0.0) || !(m.mu_r.real() > 0.0))
    throw ConfigError(ctx + ": Re(eps_r) and Re(mu_r) must be positive");
}

// radius of the smallest origin-centered circle covering the shape
double bound_radius(const SieShape &d)
{
  switch (d.kind)
  {
    case SieShape::Kind::Circle: return d.radius;
    case SieShape::Kind::Square: return d.side * std::sqrt(0.5);
    case SieShape::Kind::SectorSet: return d.r_out;
    case SieShape::Kind::PolygonFile: return 0.0;  // checked against the file later
  }
  return 0.0;
}

void validate_scenario(Scenario &s)
{
  if (s.name.empty())
    s.name = "scenario";
  if (!(s.frequency > 0.0))
    throw ConfigError("[scenario] frequency must be positive");
  if (s.threads < 1)
    throw ConfigError("[scenario] threads must be at least 1");
  if (!(s.x1 > s.x0) || !(s.y1 > s.y0))
    throw ConfigError("[box] needs x1 > x0 and y1 > y0");
  if (!(s.h_pde > 0.0))
    throw ConfigError("[box] h_pde must be positive");
  if (s.pml_layers < 0)
    throw ConfigError("[box] pml_layers must be >= 0");
  if (!(s.pml_power >= 1.0))
    throw ConfigError("[box] pml_power must be >= 1");
  if (!(s.pml_r0 > 0.0) || !(s.pml_r0 < 1.0))
    throw ConfigError("[box] pml_r0 must lie in (0, 1)");

  check_material("[background]", s.background);
  if (s.background.eps_r.imag() != 0.0 || s.background.mu_r.imag() != 0.0)
    throw ConfigError("[background] the incident wave needs a lossless background");
  if (s.graded && (!(s.eps_lo > 0.0) || !(s.eps_hi > 0.0)))
    throw ConfigError("[background] graded profile needs positive eps_lo and eps_hi");

  const double t = s.pml_thickness();
  if (2.0 * t >= s.x1 - s.x0 || 2.0 * t >= s.y1 - s.y0)
    throw ConfigError("[box] the absorbing shell swallows the whole box");

  for (size_t i = 0; i < s.domains.size(); ++i)
  {
    const std::string ctx = "[domain " + std::to_string(i) + "]";
    SieShape &d = s.domains[i];
    switch (d.kind)
    {
      case SieShape::Kind::Circle:
        if (!(d.radius > 0.0))
          throw ConfigError(ctx + " radius must be positive");
        if (d.core_radius < 0.0 || d.core_radius >= d.radius)
          throw ConfigError(ctx + " core_radius must lie in [0, radius)");
        break;
      case SieShape::Kind::Square:
        if (!(d.side > 0.0))
          throw ConfigError(ctx + " side must be positive");
        if (d.core_side < 0.0 || d.core_side >= d.side)
          throw ConfigError(ctx + " core_side must lie in [0, side)");
        break;
      case SieShape::Kind::SectorSet:
        if (!(d.r_hub > 0.0) || !(d.r_out > d.r_hub))
          throw ConfigError(ctx + " needs 0 < r_hub < r_out");
        if (d.count < 1)
          throw ConfigError(ctx + " count must be at least 1");
        if (!(d.gap_deg > 0.0) || d.gap_deg * d.count >= 360.0)
          throw ConfigError(ctx + " gap_deg must be positive and leave room for conductors");
        break;
      case SieShape::Kind::PolygonFile:
        if (d.path.empty())
          throw ConfigError(ctx + " needs a path");
        break;
    }
    if (d.kind != SieShape::Kind::PolygonFile && !(d.h > 0.0))
      throw ConfigError(ctx + " h must be positive");

    check_material(ctx + " material", d.material);
    check_material(ctx + " embed", d.embed);
    const bool layered = d.core_radius > 0.0 || d.core_side > 0.0;
    if (layered)
      check_material(ctx + " core", d.core_material);
    if (!layered && d.core_sigma > 0.0)
      throw ConfigError(ctx + " core material given without core geometry");

    const double b = bound_radius(d);
    if (b > 0.0)
    {
      if (d.center.x - b <= s.x0 + t + s.h_pde || d.center.x + b >= s.x1 - t - s.h_pde ||
          d.center.y - b <= s.y0 + t + s.h_pde || d.center.y + b >= s.y1 - t - s.h_pde)
        throw ConfigError(ctx + " shape reaches the absorbing shell");
    }
  }

  for (size_t i = 0; i < s.inclusions.size(); ++i)
  {
    const std::string ctx = "[inclusion " + std::to_string(i) + "]";
    const VolumeInclusion &v = s.inclusions[i];
    if (!(v.radius > 0.0))
      throw ConfigError(ctx + " radius must be positive");
    check_material(ctx, v.material);
    if (v.center.x - v.radius < s.x0 + t || v.center.x + v.radius > s.x1 - t ||
        v.center.y - v.radius < s.y0 + t || v.center.y + v.radius > s.y1 - t)
      throw ConfigError(ctx + " disk reaches the absorbing shell");
  }

  if (s.rcs.active)
  {
    if (s.rcs.n_angles < 1)
      throw ConfigError("[output] rcs_angles must be at least 1");
    // default collection rectangle: inner box pulled in by two volume cells
    if (s.rcs.rect.x0 == s.rcs.rect.x1 && s.rcs.rect.y0 == s.rcs.rect.y1)
      s.rcs.rect = {s.x0 + t + 2.0 * s.h_pde, s.y0 + t + 2.0 * s.h_pde,
                    s.x1 - t - 2.0 * s.h_pde, s.y1 - t - 2.0 * s.h_pde};
    if (!(s.rcs.rect.x1 > s.rcs.rect.x0) || !(s.rcs.rect.y1 > s.rcs.rect.y0))
      throw ConfigError("[output] rcs_rect is degenerate");
  }
  if (s.nearfield.active)
  {
    if (s.nearfield.nx < 2 || s.nearfield.ny < 2)
      throw ConfigError("[output] near-field grid needs nx, ny >= 2");
    if (!(s.nearfield.x1 > s.nearfield.x0) || !(s.nearfield.y1 > s.nearfield.y0))
      throw ConfigError("[output] nearfield_rect is degenerate");
  }
  if (s.current.active && !(s.current.depth_skin > 0.0))
    throw ConfigError("[output] current_depth_skin must be positive");

  bool want_mie = false;
  for (const std::string &m : s.metrics)
  {
    if (m != "mie-rcs" && m != "mie-nearfield")
      throw ConfigError("[output] metrics: unknown metric '" + m + "'");
    want_mie = true;
    if (m == "mie-rcs" && !s.rcs.active)
      throw ConfigError("[output] metrics: mie-rcs needs rcs = true");
    if (m == "mie-nearfield" && !s.nearfield.active)
      throw ConfigError("[output] metrics: mie-nearfield needs nearfield = true");
  }
  if (want_mie)
  {
    // the separation-of-variables oracle exists for a single circular shape
    // in the uniform background only
    if (s.domains.size() != 1 || s.domains[0].kind != SieShape::Kind::Circle ||
        s.graded || !s.inclusions.empty() || !(s.domains[0].embed == s.background))
      throw ConfigError("[output] metrics: mie oracles need a single circle embedded directly "
                        "in the uniform background");
  }

  if (s.formulation == Formulation::HybridConformal && s.layout == MeshLayout::Rect)
    throw ConfigError("[scenario] hybrid-conformal needs the polar layout");
  if (s.out_dir.empty())
    throw ConfigError("[output] dir must not be empty");
}

// ------------------------------------------------------------ config parsing

struct RawMat
{
  double eps_r = 1.0, eps_i = 0.0, mu_r = 1.0, sigma = 0.0;
  bool touched = false;
};

Material make_material(const std::string &ctx, const RawMat &r, double omega)
{
  if (r.sigma > 0.0)
  {
    if (r.eps_r != 1.0 || r.eps_i != 0.0)
      throw ConfigError(ctx + ": give either a permittivity or a conductivity, not both");
    Material m = Material::conductor(r.sigma, omega);
    m.mu_r = cplx(r.mu_r, 0.0);
    return m;
  }
  if (r.sigma < 0.0)
    throw ConfigError(ctx + ": sigma must be >= 0");
  return Material{cplx(r.eps_r, r.eps_i), cplx(r.mu_r, 0.0)};
}

SieShape::Kind parse_kind(const std::string &ctx, const std::string &v)
{
  if (v == "circle")
    return SieShape::Kind::Circle;
  if (v == "square")
    return SieShape::Kind::Square;
  if (v == "sector-set")
    return SieShape::Kind::SectorSet;
  if (v == "polygon-file")
    return SieShape::Kind::PolygonFile;
  throw ConfigError(ctx + ": unknown shape '" + v +
                    "' (circle | square | sector-set | polygon-file)");
}

Formulation parse_formulation(const std::string &ctx, const std::string &v)
{
  if (v == "hybrid-nonconformal")
    return Formulation::HybridNonconformal;
  if (v == "hybrid-conformal")
    return Formulation::HybridConformal;
  if (v == "reference-fem")
    return Formulation::ReferenceFem;
  throw ConfigError(ctx + ": unknown formulation '" + v +
                    "' (hybrid-nonconformal | hybrid-conformal | reference-fem)");
}

MeshLayout parse_layout(const std::string &ctx, const std::string &v)
{
  if (v == "auto")
    return MeshLayout::Auto;
  if (v == "rect")
    return MeshLayout::Rect;
  if (v == "polar")
    return MeshLayout::Polar;
  throw ConfigError(ctx + ": unknown layout '" + v + "' (auto | rect | polar)");
}

}  // namespace

Scenario parse_config(const std::string &text)
{
  Scenario s;
  RawMat bg;
  std::vector<RawMat> dom_mat, dom_core, dom_embed;
  std::vector<bool> dom_core_set;
  std::vector<RawMat> inc_mat;

  std::string sect;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  while (std::getline(in, line))
  {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;

    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[')
    {
      if (line.back() != ']')
        throw ConfigError(where + ": unterminated section header");
      sect = trim(line.substr(1, line.size() - 2));
      if (sect == "domain")
      {
        s.domains.emplace_back();
        dom_mat.emplace_back();
        dom_core.emplace_back();
        dom_embed.emplace_back();
        dom_core_set.push_back(false);
      }
      else if (sect == "inclusion")
      {
        s.inclusions.emplace_back();
        inc_mat.emplace_back();
      }
      else if (sect != "scenario" && sect != "background" && sect != "box" && sect != "output")
      {
        throw ConfigError(where + ": unknown section [" + sect + "]");
      }
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (sect.empty())
      throw ConfigError(where + ": key outside any [section]");
    const std::string ctx = "[" + sect + "] " + key;

    if (sect == "scenario")
    {
      if (key == "name")
        s.name = val;
      else if (key == "frequency")
        s.frequency = to_num(ctx, val);
      else if (key == "incidence_deg")
        s.incidence_deg = to_num(ctx, val);
      else if (key == "formulation")
        s.formulation = parse_formulation(ctx, val);
      else if (key == "layout")
        s.layout = parse_layout(ctx, val);
      else if (key == "threads")
        s.threads = static_cast<int>(to_int(ctx, val));
      else if (key == "estimate_condition")
        s.estimate_condition = to_bool(ctx, val);
      else if (key == "dump_dsao")
        s.dump_dsao = to_bool(ctx, val);
      else
        throw ConfigError(ctx + ": unknown key");
    }
    else if (sect == "background")
    {
      if (key == "eps_r")
        bg.eps_r = to_num(ctx, val);
      else if (key == "eps_i")
        bg.eps_i = to_num(ctx, val);
      else if (key == "mu_r")
        bg.mu_r = to_num(ctx, val);
      else if (key == "graded")
        s.graded = to_bool(ctx, val);
      else if (key == "eps_lo")
        s.eps_lo = to_num(ctx, val);
      else if (key == "eps_hi")
        s.eps_hi = to_num(ctx, val);
      else
        throw ConfigError(ctx + ": unknown key");
    }
    else if (sect == "box")
    {
      if (key == "x0")
        s.x0 = to_num(ctx, val);
      else if (key == "y0")
        s.y0 = to_num(ctx, val);
      else if (key == "x1")
        s.x1 = to_num(ctx, val);
      else if (key == "y1")
        s.y1 = to_num(ctx, val);
      else if (key == "h_pde")
        s.h_pde = to_num(ctx, val);
      else if (key == "pml_layers")
        s.pml_layers = static_cast<int>(to_int(ctx, val));
      else if (key == "pml_power")
        s.pml_power = to_num(ctx, val);
      else if (key == "pml_r0")
        s.pml_r0 = to_num(ctx, val);
      else
        throw ConfigError(ctx + ": unknown key");
    }
    else if (sect == "domain")
    {
      SieShape &d = s.domains.back();
      RawMat &m = dom_mat.back();
      RawMat &c = dom_core.back();
      RawMat &e = dom_embed.back();
      if (key == "shape")
        d.kind = parse_kind(ctx, val);
      else if (key == "center")
      {
        const auto v = to_nums(ctx, val, 2);
        d.center = {v[0], v[1]};
      }
      else if (key == "h")
        d.h = to_num(ctx, val);
      else if (key == "radius")
        d.radius = to_num(ctx, val);
      else if (key == "core_radius")
        d.core_radius = to_num(ctx, val);
      else if (key == "side")
        d.side = to_num(ctx, val);
      else if (key == "core_side")
        d.core_side = to_num(ctx, val);
      else if (key == "r_hub")
        d.r_hub = to_num(ctx, val);
      else if (key == "r_out")
        d.r_out = to_num(ctx, val);
      else if (key == "count")
        d.count = static_cast<int>(to_int(ctx, val));
      else if (key == "gap_deg")
        d.gap_deg = to_num(ctx, val);
      else if (key == "start_deg")
        d.start_deg = to_num(ctx, val);
      else if (key == "path")
        d.path = val;
      else if (key == "eps_r")
        m.eps_r = to_num(ctx, val);
      else if (key == "eps_i")
        m.eps_i = to_num(ctx, val);
      else if (key == "mu_r")
        m.mu_r = to_num(ctx, val);
      else if (key == "sigma")
        m.sigma = to_num(ctx, val);
      else if (key == "core_eps_r")
        c.eps_r = to_num(ctx, val);
      else if (key == "core_eps_i")
        c.eps_i = to_num(ctx, val);
      else if (key == "core_mu_r")
        c.mu_r = to_num(ctx, val);
      else if (key == "core_sigma")
        c.sigma = to_num(ctx, val);
      else if (key == "embed_eps_r")
      {
        e.eps_r = to_num(ctx, val);
        e.touched = true;
      }
      else if (key == "embed_eps_i")
      {
        e.eps_i = to_num(ctx, val);
        e.touched = true;
      }
      else if (key == "embed_mu_r")
      {
        e.mu_r = to_num(ctx, val);
        e.touched = true;
      }
      else
        throw ConfigError(ctx + ": unknown key");
    }
    else if (sect == "inclusion")
    {
      VolumeInclusion &v = s.inclusions.back();
      RawMat &m = inc_mat.back();
      if (key == "center")
      {
        const auto c = to_nums(ctx, val, 2);
        v.center = {c[0], c[1]};
      }
      else if (key == "radius")
        v.radius = to_num(ctx, val);
      else if (key == "eps_r")
        m.eps_r = to_num(ctx, val);
      else if (key == "eps_i")
        m.eps_i = to_num(ctx, val);
      else if (key == "mu_r")
        m.mu_r = to_num(ctx, val);
      else
        throw ConfigError(ctx + ": unknown key");
    }
    else if (sect == "output")
    {
      if (key == "dir")
        s.out_dir = val;
      else if (key == "rcs")
        s.rcs.active = to_bool(ctx, val);
      else if (key == "rcs_angles")
        s.rcs.n_angles = static_cast<int>(to_int(ctx, val));
      else if (key == "rcs_rect")
      {
        const auto v = to_nums(ctx, val, 4);
        s.rcs.rect = {v[0], v[1], v[2], v[3]};
      }
      else if (key == "nearfield")
        s.nearfield.active = to_bool(ctx, val);
      else if (key == "nearfield_rect")
      {
        const auto v = to_nums(ctx, val, 4);
        s.nearfield.x0 = v[0];
        s.nearfield.y0 = v[1];
        s.nearfield.x1 = v[2];
        s.nearfield.y1 = v[3];
      }
      else if (key == "nearfield_nx")
        s.nearfield.nx = static_cast<int>(to_int(ctx, val));
      else if (key == "nearfield_ny")
        s.nearfield.ny = static_cast<int>(to_int(ctx, val));
      else if (key == "current")
        s.current.active = to_bool(ctx, val);
      else if (key == "current_depth_skin")
        s.current.depth_skin = to_num(ctx, val);
      else if (key == "metrics")
      {
        s.metrics = split_list(val);
        if (s.metrics.size() == 1 && s.metrics[0] == "none")
          s.metrics.clear();
      }
      else
        throw ConfigError(ctx + ": unknown key");
    }
  }

  if (!(s.frequency > 0.0))
    throw ConfigError("[scenario] frequency must be positive");
  const double omega = s.omega();

  if (bg.sigma != 0.0)
    throw ConfigError("[background] the incident wave needs a lossless background");
  s.background = make_material("[background]", bg, omega);

  for (size_t i = 0; i < s.domains.size(); ++i)
  {
    const std::string ctx = "[domain " + std::to_string(i) + "]";
    SieShape &d = s.domains[i];
    d.material = make_material(ctx + " material", dom_mat[i], omega);
    d.sigma = dom_mat[i].sigma;
    d.core_material = make_material(ctx + " core", dom_core[i], omega);
    d.core_sigma = dom_core[i].sigma;
    d.embed = dom_embed[i].touched ? make_material(ctx + " embed", dom_embed[i], omega)
                                   : s.background;
  }
  for (size_t i = 0; i < s.inclusions.size(); ++i)
    s.inclusions[i].material =
        make_material("[inclusion " + std::to_string(i) + "]", inc_mat[i], omega);

  validate_scenario(s);
  return s;
}

Scenario parse_config_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// --------------------------------------------------------------- serializer

namespace
{

void emit_material(std::ostringstream &o, const std::string &prefix, const Material &m,
                   double sigma)
{
  if (sigma > 0.0)
  {
    o << prefix << "sigma = " << num(sigma) << "\n";
    if (m.mu_r.real() != 1.0)
      o << prefix << "mu_r = " << num(m.mu_r.real()) << "\n";
    return;
  }
  o << prefix << "eps_r = " << num(m.eps_r.real()) << "\n";
  if (m.eps_r.imag() != 0.0)
    o << prefix << "eps_i = " << num(m.eps_r.imag()) << "\n";
  if (m.mu_r.real() != 1.0)
    o << prefix << "mu_r = " << num(m.mu_r.real()) << "\n";
}

}  // namespace

std::string config_text(const Scenario &s)
{
  std::ostringstream o;
  o << "[scenario]\n";
  o << "name = " << s.name << "\n";
  o << "frequency = " << num(s.frequency) << "\n";
  o << "incidence_deg = " << num(s.incidence_deg) << "\n";
  o << "formulation = " << formulation_name(s.formulation) << "\n";
  o << "layout = " << layout_name(s.layout) << "\n";
  o << "threads = " << s.threads << "\n";
  o << "estimate_condition = " << (s.estimate_condition ? "true" : "false") << "\n";
  o << "dump_dsao = " << (s.dump_dsao ? "true" : "false") << "\n";

  o << "\n[background]\n";
  o << "eps_r = " << num(s.background.eps_r.real()) << "\n";
  if (s.background.mu_r.real() != 1.0)
    o << "mu_r = " << num(s.background.mu_r.real()) << "\n";
  if (s.graded)
  {
    o << "graded = true\n";
    o << "eps_lo = " << num(s.eps_lo) << "\n";
    o << "eps_hi = " << num(s.eps_hi) << "\n";
  }

  o << "\n[box]\n";
  o << "x0 = " << num(s.x0) << "\n";
  o << "y0 = " << num(s.y0) << "\n";
  o << "x1 = " << num(s.x1) << "\n";
  o << "y1 = " << num(s.y1) << "\n";
  o << "h_pde = " << num(s.h_pde) << "\n";
  o << "pml_layers = " << s.pml_layers << "\n";
  o << "pml_power = " << num(s.pml_power) << "\n";
  o << "pml_r0 = " << num(s.pml_r0) << "\n";

  for (const SieShape &d : s.domains)
  {
    o << "\n[domain]\n";
    switch (d.kind)
    {
      case SieShape::Kind::Circle:
        o << "shape = circle\n";
        o << "radius = " << num(d.radius) << "\n";
        if (d.core_radius > 0.0)
          o << "core_radius = " << num(d.core_radius) << "\n";
        break;
      case SieShape::Kind::Square:
        o << "shape = square\n";
        o << "side = " << num(d.side) << "\n";
        if (d.core_side > 0.0)
          o << "core_side = " << num(d.core_side) << "\n";
        break;
      case SieShape::Kind::SectorSet:
        o << "shape = sector-set\n";
        o << "r_hub = " << num(d.r_hub) << "\n";
        o << "r_out = " << num(d.r_out) << "\n";
        o << "count = " << d.count << "\n";
        o << "gap_deg = " << num(d.gap_deg) << "\n";
        o << "start_deg = " << num(d.start_deg) << "\n";
        break;
      case SieShape::Kind::PolygonFile:
        o << "shape = polygon-file\n";
        o << "path = " << d.path << "\n";
        break;
    }
    o << "center = " << num(d.center.x) << ", " << num(d.center.y) << "\n";
    if (d.kind != SieShape::Kind::PolygonFile)
      o << "h = " << num(d.h) << "\n";
    emit_material(o, "", d.material, d.sigma);
    if (d.core_radius > 0.0 || d.core_side > 0.0)
      emit_material(o, "core_", d.core_material, d.core_sigma);
    o << "embed_eps_r = " << num(d.embed.eps_r.real()) << "\n";
    if (d.embed.eps_r.imag() != 0.0)
      o << "embed_eps_i = " << num(d.embed.eps_r.imag()) << "\n";
    if (d.embed.mu_r.real() != 1.0)
      o << "embed_mu_r = " << num(d.embed.mu_r.real()) << "\n";
  }

  for (const VolumeInclusion &v : s.inclusions)
  {
    o << "\n[inclusion]\n";
    o << "center = " << num(v.center.x) << ", " << num(v.center.y) << "\n";
    o << "radius = " << num(v.radius) << "\n";
    o << "eps_r = " << num(v.material.eps_r.real()) << "\n";
    if (v.material.eps_r.imag() != 0.0)
      o << "eps_i = " << num(v.material.eps_r.imag()) << "\n";
    if (v.material.mu_r.real() != 1.0)
      o << "mu_r = " << num(v.material.mu_r.real()) << "\n";
  }

  o << "\n[output]\n";
  o << "dir = " << s.out_dir << "\n";
  o << "rcs = " << (s.rcs.active ? "true" : "false") << "\n";
  if (s.rcs.active)
  {
    o << "rcs_angles = " << s.rcs.n_angles << "\n";
    o << "rcs_rect = " << num(s.rcs.rect.x0) << ", " << num(s.rcs.rect.y0) << ", "
      << num(s.rcs.rect.x1) << ", " << num(s.rcs.rect.y1) << "\n";
  }
  o << "nearfield = " << (s.nearfield.active ? "true" : "false") << "\n";
  if (s.nearfield.active)
  {
    o << "nearfield_rect = " << num(s.nearfield.x0) << ", " << num(s.nearfield.y0) << ", "
      << num(s.nearfield.x1) << ", " << num(s.nearfield.y1) << "\n";
    o << "nearfield_nx = " << s.nearfield.nx << "\n";
    o << "nearfield_ny = " << s.nearfield.ny << "\n";
  }
  o << "current = " << (s.current.active ? "true" : "false") << "\n";
  if (s.current.active)
    o << "current_depth_skin = " << num(s.current.depth_skin) << "\n";
  if (!s.metrics.empty())
  {
    o << "metrics = ";
    for (size_t i = 0; i < s.metrics.size(); ++i)
      o << (i ? ", " : "") << s.metrics[i];
    o << "\n";
  }
  return o.str();
}

// ------------------------------------------------------------------ presets

namespace
{

Material dielectric(double eps_r)
{
  return Material{cplx(eps_r, 0.0), cplx(1.0, 0.0)};
}

Scenario preset_coated_circle()
{
  Scenario s;
  s.name = "coated-circle";
  s.frequency = 3e8;
  s.x0 = s.y0 = -2.5;
  s.x1 = s.y1 = 2.5;
  s.h_pde = 0.05;

  SieShape d;
  d.kind = SieShape::Kind::Circle;
  d.h = 0.015;
  d.radius = 0.6;
  d.core_radius = 0.4;
  d.material = dielectric(2.3);
  d.core_material = dielectric(4.0);
  d.embed = s.background;
  s.domains = {d};

  s.rcs.active = true;
  s.rcs.n_angles = 360;
  s.rcs.rect = {-1.4, -1.4, 1.4, 1.4};
  s.nearfield = {true, -1.3, -1.3, 1.3, 1.3, 200, 200};
  s.metrics = {"mie-rcs", "mie-nearfield"};
  s.out_dir = "out/coated-circle";
  return s;
}

Scenario preset_coated_square()
{
  Scenario s = preset_coated_circle();
  s.name = "coated-square";
  SieShape &d = s.domains[0];
  d.kind = SieShape::Kind::Square;
  d.radius = d.core_radius = 0.0;
  d.side = 1.2;
  d.core_side = 0.6;
  s.nearfield.active = false;
  s.metrics.clear();
  s.out_dir = "out/coated-square";
  return s;
}

Scenario preset_copper_cylinder()
{
  Scenario s;
  s.name = "copper-cylinder";
  s.frequency = 3e8;
  s.x0 = s.y0 = -5e-3;
  s.x1 = s.y1 = 5e-3;
  s.h_pde = 2e-4;

  SieShape d;
  d.kind = SieShape::Kind::Circle;
  d.h = 5e-5;
  d.radius = 2e-3;
  d.sigma = 5.8e7;
  d.material = Material::conductor(d.sigma, s.omega());
  d.embed = s.background;
  s.domains = {d};

  s.rcs.active = true;
  s.rcs.n_angles = 360;
  s.rcs.rect = {-2.8e-3, -2.8e-3, 2.8e-3, 2.8e-3};
  s.current.active = true;
  s.metrics = {"mie-rcs"};
  s.out_dir = "out/copper-cylinder";
  return s;
}

Scenario preset_single_cable()
{
  Scenario s;
  s.name = "single-cable";
  s.frequency = 3e8;
  s.incidence_deg = 270.0;  // travelling along -y, against the permittivity grade
  s.graded = true;
  s.eps_lo = 1.0;
  s.eps_hi = 4.0;
  s.x0 = s.y0 = -4e-3;
  s.x1 = s.y1 = 4e-3;
  s.h_pde = 7.5e-5;

  SieShape d;
  d.kind = SieShape::Kind::SectorSet;
  d.h = 1.875e-5;  // = h_pde / 4
  d.r_hub = 1.2e-3;
  d.r_out = 2e-3;
  d.count = 3;
  d.gap_deg = 14.0;
  d.start_deg = 90.0;
  d.sigma = 5.8e7;
  d.material = Material::conductor(d.sigma, s.omega());
  d.embed = dielectric(2.3);
  s.domains = {d};

  VolumeInclusion sheath;
  sheath.radius = 2.5e-3;
  sheath.material = dielectric(2.3);
  s.inclusions = {sheath};

  s.current.active = true;
  s.out_dir = "out/single-cable";
  return s;
}

Scenario preset_cable_array()
{
  Scenario s;
  s.name = "cable-array";
  s.frequency = 3e8;
  s.incidence_deg = 270.0;
  s.graded = true;
  s.eps_lo = 1.0;
  s.eps_hi = 4.0;
  s.x0 = -14e-3;
  s.x1 = 14e-3;
  s.y0 = -4e-3;
  s.y1 = 4e-3;
  s.h_pde = 7e-5;  // the 7 mm cable pitch is an exact multiple

  const double xs[4] = {-10.5e-3, -3.5e-3, 3.5e-3, 10.5e-3};
  for (double x : xs)
  {
    SieShape d;
    d.kind = SieShape::Kind::Circle;
    d.center = {x, 0.0};
    d.h = 1.75e-5;
    d.radius = 2e-3;
    d.sigma = 5.8e7;
    d.material = Material::conductor(d.sigma, s.omega());
    d.embed = dielectric(2.3);
    s.domains.push_back(d);

    VolumeInclusion sheath;
    sheath.center = {x, 0.0};
    sheath.radius = 2.5e-3;
    sheath.material = dielectric(2.3);
    s.inclusions.push_back(sheath);
  }

  s.current.active = true;
  s.out_dir = "out/cable-array";
  return s;
}

}  // namespace

std::vector<std::string> preset_names()
{
  return {"coated-circle", "coated-square", "copper-cylinder", "single-cable", "cable-array"};
}

Scenario preset(const std::string &name)
{
  if (name == "coated-circle")
    return preset_coated_circle();
  if (name == "coated-square")
    return preset_coated_square();
  if (name == "copper-cylinder")
    return preset_copper_cylinder();
  if (name == "single-cable")
    return preset_single_cable();
  if (name == "cable-array")
    return preset_cable_array();
  std::string all;
  for (const auto &n : preset_names())
    all += (all.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (available: " + all + ")");
}

// ------------------------------------------------------- geometry construction

namespace
{

long round_to_multiple(double x, long base)
{
  long k = std::lround(x / double(base));
  if (k < 1)
    k = 1;
  return k * base;
}

// common angular pitch count shared by every circular contour and the polar
// mesh, so conformal runs land contour nodes exactly on mesh nodes
long angular_base(const Scenario &s)
{
  long b = 8;  // the polar morph needs its corners on the lattice
  for (const SieShape &d : s.domains)
    if (d.kind == SieShape::Kind::SectorSet)
      b = std::lcm(b, static_cast<long>(d.count));
  return b;
}

long angular_count(const Scenario &s)
{
  const long base = angular_base(s);
  long n = 0;
  for (const SieShape &d : s.domains)
  {
    double r = 0.0;
    if (d.kind == SieShape::Kind::Circle)
      r = d.radius;
    else if (d.kind == SieShape::Kind::SectorSet)
      r = d.r_out;
    if (r > 0.0)
      n = std::max(n, round_to_multiple(2.0 * pi * r / d.h, base));
  }
  return n;
}

// node on the angular lattice; the expression matches the polar mesh
// generator bit for bit so conformal snapping is exact
Vec2 ring_node(const Vec2 &center, double r, long i, long n)
{
  const long k = ((i % n) + n) % n;
  const double th = 2.0 * pi * double(k) / n;
  return {center.x + r * std::cos(th), center.y + r * std::sin(th)};
}

struct SectorGrid
{
  long n = 0;    // full-circle pitch count
  long per = 0;  // pitches per sector
  long gp = 0;   // pitches consumed by each gap (even)
  long g0 = 0;   // pitch index of the first gap center
  long n_r = 0;  // radial subdivisions of the conductor band
  double dr = 0.0;
};

SectorGrid sector_grid(const SieShape &d, long n_ang)
{
  SectorGrid g;
  g.n = n_ang;
  g.per = n_ang / d.count;
  g.gp = 2 * std::max(1l, std::lround(d.gap_deg / 360.0 * n_ang / 2.0));
  if (g.gp >= g.per)
    throw ConfigError("[domain] gap_deg: the gaps consume the whole sector pitch");
  g.g0 = std::lround(d.start_deg / 360.0 * n_ang);
  g.n_r = std::max(1l, std::lround((d.r_out - d.r_hub) / d.h));
  g.dr = (d.r_out - d.r_hub) / g.n_r;
  return g;
}

Contour sector_lattice_contour(const SieShape &d, const SectorGrid &g, int k)
{
  const long s0 = g.g0 + k * g.per + g.gp / 2;
  const long s1 = g.g0 + (k + 1) * g.per - g.gp / 2;
  Contour c;
  for (long i = s0; i <= s1; ++i)  // outer arc, counterclockwise
    c.nodes.push_back(ring_node(d.center, d.r_out, i, g.n));
  for (long i = g.n_r - 1; i >= 1; --i)  // trailing radial edge, inward
    c.nodes.push_back(ring_node(d.center, d.r_hub + i * g.dr, s1, g.n));
  for (long i = s1; i >= s0; --i)  // hub arc, clockwise in angle
    c.nodes.push_back(ring_node(d.center, d.r_hub, i, g.n));
  for (long i = 1; i <= g.n_r - 1; ++i)  // leading radial edge, outward
    c.nodes.push_back(ring_node(d.center, d.r_hub + i * g.dr, s0, g.n));
  c.validate();
  return c;
}

Contour polygon_from_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("[domain] path: cannot read '" + path + "'");
  Contour c;
  std::string line;
  while (std::getline(in, line))
  {
    line = trim(line);
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream row(line);
    double x, y;
    if (!(row >> x >> y))
      throw MeshFormatError("polygon file '" + path + "': expected 'x y' per line");
    c.nodes.push_back({x, y});
  }
  c.validate();
  return c;
}

// one shape expanded into its operator-ready contours plus the analytic
// region tests the reference formulation paints with
struct Built
{
  int shape = 0;  // index into Scenario::domains
  int piece = 0;  // sector index within a sector-set
  Contour outer;
  std::optional<Contour> inner;
  Material mat, core_mat, embed;
  double sigma = 0.0, core_sigma = 0.0;

  SieShape::Kind kind = SieShape::Kind::Circle;
  Vec2 center{0.0, 0.0};
  double radius = 0.0, core_radius = 0.0;
  double side = 0.0, core_side = 0.0;
  double r_hub = 0.0, r_out = 0.0;
  double th_lo = 0.0, th_hi = 0.0;  // sector span, th_hi > th_lo
};

bool built_contains(const Built &b, const Vec2 &p)
{
  const Vec2 d{p.x - b.center.x, p.y - b.center.y};
  switch (b.kind)
  {
    case SieShape::Kind::Circle:
      return norm(d) <= b.radius;
    case SieShape::Kind::Square:
      return std::max(std::abs(d.x), std::abs(d.y)) <= 0.5 * b.side;
    case SieShape::Kind::SectorSet:
    {
      const double r = norm(d);
      if (r < b.r_hub || r > b.r_out)
        return false;
      double a = std::fmod(std::atan2(d.y, d.x) - b.th_lo, 2.0 * pi);
      if (a < 0.0)
        a += 2.0 * pi;
      return a <= b.th_hi - b.th_lo;
    }
    case SieShape::Kind::PolygonFile:
      return b.outer.contains(p);
  }
  return false;
}

bool core_contains(const Built &b, const Vec2 &p)
{
  if (!b.inner)
    return false;
  const Vec2 d{p.x - b.center.x, p.y - b.center.y};
  if (b.kind == SieShape::Kind::Circle)
    return norm(d) <= b.core_radius;
  return std::max(std::abs(d.x), std::abs(d.y)) <= 0.5 * b.core_side;
}

std::vector<Built> build_domains(const Scenario &s, long n_ang)
{
  std::vector<Built> out;
  const double t = s.pml_thickness();
  for (size_t di = 0; di < s.domains.size(); ++di)
  {
    const SieShape &d = s.domains[di];
    Built proto;
    proto.shape = static_cast<int>(di);
    proto.kind = d.kind;
    proto.center = d.center;
    proto.mat = d.material;
    proto.core_mat = d.core_material;
    proto.embed = d.embed;
    proto.sigma = d.sigma;
    proto.core_sigma = d.core_sigma;
    proto.radius = d.radius;
    proto.core_radius = d.core_radius;
    proto.side = d.side;
    proto.core_side = d.core_side;
    proto.r_hub = d.r_hub;
    proto.r_out = d.r_out;

    switch (d.kind)
    {
      case SieShape::Kind::Circle:
      {
        Built b = proto;
        b.outer = circle_contour(d.center, d.radius, static_cast<int>(n_ang));
        if (d.core_radius > 0.0)
          b.inner = circle_contour(d.center, d.core_radius, static_cast<int>(n_ang));
        out.push_back(std::move(b));
        break;
      }
      case SieShape::Kind::Square:
      {
        Built b = proto;
        b.outer = square_contour(d.center, d.side, std::max(1l, std::lround(d.side / d.h)));
        if (d.core_side > 0.0)
          b.inner =
              square_contour(d.center, d.core_side, std::max(1l, std::lround(d.core_side / d.h)));
        out.push_back(std::move(b));
        break;
      }
      case SieShape::Kind::SectorSet:
      {
        const SectorGrid g = sector_grid(d, n_ang);
        for (int k = 0; k < d.count; ++k)
        {
          Built b = proto;
          b.piece = k;
          b.outer = sector_lattice_contour(d, g, k);
          b.th_lo = 2.0 * pi * double(g.g0 + k * g.per + g.gp / 2) / g.n;
          b.th_hi = 2.0 * pi * double(g.g0 + (k + 1) * g.per - g.gp / 2) / g.n;
          out.push_back(std::move(b));
        }
        break;
      }
      case SieShape::Kind::PolygonFile:
      {
        Built b = proto;
        b.outer = polygon_from_file(d.path);
        for (const Vec2 &p : b.outer.nodes)
        {
          if (p.x <= s.x0 + t || p.x >= s.x1 - t || p.y <= s.y0 + t || p.y >= s.y1 - t)
            throw ConfigError("[domain " + std::to_string(di) +
                              "] polygon reaches the absorbing shell");
        }
        out.push_back(std::move(b));
        break;
      }
    }
  }
  return out;
}

// point just outside the shape where the painted medium must equal `embed`
Vec2 embed_probe(const Built &b, double h_pde)
{
  const double off = 0.5 * h_pde;
  switch (b.kind)
  {
    case SieShape::Kind::Circle:
      return {b.center.x + b.radius + off, b.center.y};
    case SieShape::Kind::Square:
      return {b.center.x + 0.5 * b.side + off, b.center.y};
    case SieShape::Kind::SectorSet:
    {
      const double th = 0.5 * (b.th_lo + b.th_hi);
      const double r = b.r_out + off;
      return {b.center.x + r * std::cos(th), b.center.y + r * std::sin(th)};
    }
    case SieShape::Kind::PolygonFile:
    {
      const Vec2 n = b.outer.outward_normal(0);
      const Vec2 a = b.outer.a(0);
      return {a.x + off * n.x, a.y + off * n.y};
    }
  }
  return b.center;
}

// ----------------------------------------------------------------- painting

struct Painter
{
  Material bg;
  bool graded = false;
  double eps_lo = 1.0, eps_hi = 1.0, gy0 = 0.0, gy1 = 1.0;
  struct Disk
  {
    Vec2 c;
    double r;
    Material m;
  };
  std::vector<Disk> disks;
  const std::vector<Built> *regions = nullptr;  // reference formulation only

  Material operator()(const Vec2 &p) const
  {
    if (regions)
    {
      for (const Built &b : *regions)
      {
        if (built_contains(b, p))
          return core_contains(b, p) ? b.core_mat : b.mat;
      }
    }
    for (const Disk &d : disks)
    {
      if (norm(Vec2{p.x - d.c.x, p.y - d.c.y}) <= d.r)
        return d.m;
    }
    if (graded)
    {
      Material m = bg;
      m.eps_r = cplx(eps_lo + (eps_hi - eps_lo) * (p.y - gy0) / (gy1 - gy0), 0.0);
      return m;
    }
    return bg;
  }
};

Painter make_painter(const Scenario &s, const std::vector<Built> *regions)
{
  Painter p;
  p.bg = s.background;
  p.graded = s.graded;
  p.eps_lo = s.eps_lo;
  p.eps_hi = s.eps_hi;
  p.gy0 = s.y0;
  p.gy1 = s.y1;
  for (const VolumeInclusion &v : s.inclusions)
    p.disks.push_back({v.center, v.radius, v.material});
  p.regions = regions;
  return p;
}

// ------------------------------------------------------------- polar layout

struct Anchor
{
  double r;
  double h;
};

// ring ladder: local target spacing is the tightest anchor demand, radii in
// `musts` are landed on exactly (they carry contours and material interfaces)
std::vector<double> ring_ladder(double hw, double h_cap, std::vector<double> musts,
                                const std::vector<Anchor> &anchors)
{
  std::sort(musts.begin(), musts.end());
  musts.erase(std::unique(musts.begin(), musts.end()), musts.end());

  auto local_h = [&](double r) {
    double h = h_cap;
    for (const Anchor &a : anchors)
      h = std::min(h, a.h + 0.35 * std::abs(r - a.r));
    return h;
  };

  std::vector<double> rings;
  double r = 0.0;
  size_t m = 0;
  while (r < hw)
  {
    const double h = local_h(r);
    const double target = m < musts.size() ? musts[m] : hw;
    if (r + 1.45 * h >= target)
    {
      r = target;
      if (m < musts.size())
        ++m;
    }
    else
    {
      r += h;
    }
    rings.push_back(r);
  }
  return rings;
}

struct PolarPlan
{
  Vec2 center{0.0, 0.0};
  long n_theta = 0;
  std::vector<double> rings;
  double morph_start = 0.0;
};

PolarPlan plan_polar(const Scenario &s, const std::vector<Built> &builts, long n_ang,
                     bool reference, double omega)
{
  if (s.domains.empty())
    throw ConfigError("the polar layout needs at least one shape");
  PolarPlan plan;
  plan.center = s.domains[0].center;

  const double hw = 0.5 * (s.x1 - s.x0);
  const double tol = 1e-9 * hw;
  if (std::abs((s.x1 - s.x0) - (s.y1 - s.y0)) > tol ||
      std::abs(0.5 * (s.x0 + s.x1) - plan.center.x) > tol ||
      std::abs(0.5 * (s.y0 + s.y1) - plan.center.y) > tol)
    throw ConfigError("the polar layout needs a square box centered on the shapes");
  for (const SieShape &d : s.domains)
    if (std::abs(d.center.x - plan.center.x) > tol || std::abs(d.center.y - plan.center.y) > tol)
      throw ConfigError("the polar layout needs all shapes on a common center");
  for (const VolumeInclusion &v : s.inclusions)
    if (std::abs(v.center.x - plan.center.x) > tol || std::abs(v.center.y - plan.center.y) > tol)
      throw ConfigError("the polar layout needs inclusions on the common center");

  std::vector<double> musts;
  std::vector<Anchor> anchors;
  long n_fine = n_ang;
  const long unit = n_ang > 0 ? n_ang : angular_base(s);

  for (const SieShape &d : s.domains)
  {
    switch (d.kind)
    {
      case SieShape::Kind::Circle:
        musts.push_back(d.radius);
        anchors.push_back({d.radius, d.h});
        if (d.core_radius > 0.0)
        {
          musts.push_back(d.core_radius);
          anchors.push_back({d.core_radius, d.h});
        }
        break;
      case SieShape::Kind::SectorSet:
      {
        const SectorGrid g = sector_grid(d, n_ang);
        for (long i = 0; i <= g.n_r; ++i)
          musts.push_back(d.r_hub + i * g.dr);
        anchors.push_back({d.r_hub, d.h});
        anchors.push_back({d.r_out, d.h});
        break;
      }
      default:
        break;  // squares and polygons never conform to the polar lattice
    }

    if (reference)
    {
      // resolve the conductor skin radially; tangentially the pitch count
      // rises to ~one skin depth per arc (capped, and kept a multiple of the
      // contour pitch so sector gap edges stay on the lattice)
      auto skin_refine = [&](double r_surf, double sigma) {
        if (!(sigma > 0.0) || r_surf <= 0.0)
          return;
        const double delta = std::sqrt(2.0 / (omega * mu0 * sigma));
        anchors.push_back({r_surf, 0.5 * delta});
        const double arc = std::max(delta, 2.0 * pi * r_surf / 4096.0);
        const long want = static_cast<long>(std::ceil(2.0 * pi * r_surf / arc / unit)) * unit;
        n_fine = std::max(n_fine, want);
      };
      if (d.kind == SieShape::Kind::Circle)
      {
        skin_refine(d.radius, d.sigma);
        skin_refine(d.core_radius, d.core_sigma);
      }
      else if (d.kind == SieShape::Kind::SectorSet)
      {
        skin_refine(d.r_out, d.sigma);
        skin_refine(d.r_hub, d.sigma);
      }
    }
  }

  for (const VolumeInclusion &v : s.inclusions)
  {
    musts.push_back(v.radius);
    anchors.push_back({v.radius, 0.5 * s.h_pde});
  }

  if (n_fine < 8)
    throw ConfigError("the polar layout needs a circular or sector shape");
  plan.n_theta = n_fine;
  plan.rings = ring_ladder(hw, s.h_pde, musts, anchors);

  const double last_must = musts.empty() ? 0.25 * hw : *std::max_element(musts.begin(), musts.end());
  plan.morph_start = last_must + 0.2 * (hw - last_must);
  (void)builts;
  return plan;
}

// ----------------------------------------------------------------- reporting

std::string format_report(const Scenario &s, MeshLayout lay, const CostReport &c,
                          double residual, long builds, long hits, bool have_cond,
                          double condition)
{
  std::ostringstream o;
  char buf[64];
  auto kv_t = [&](const char *k, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.3f\n", k, v);
    o << buf;
  };
  o << "name=" << s.name << "\n";
  o << "formulation=" << formulation_name(s.formulation) << "\n";
  o << "layout=" << layout_name(lay) << "\n";
  o << "unknowns=" << c.unknowns << "\n";
  o << "elements=" << c.elements << "\n";
  o << "nodes=" << c.nodes << "\n";
  o << "nnz=" << c.nonzeros << "\n";
  o << "factor_bytes=" << c.factor_bytes << "\n";
  o << "memory_source=rss_highwater\n";
  std::snprintf(buf, sizeof buf, "residual=%.3e\n", residual);
  o << buf;
  o << "dsao_builds=" << builds << "\n";
  o << "dsao_hits=" << hits << "\n";
  o << "threads=" << s.threads << "\n";
  kv_t("t_mesh_s", c.t_mesh_s);
  kv_t("t_assemble_s", c.t_assemble_s);
  kv_t("t_dsao_s", c.t_dsao_s);
  kv_t("t_factor_s", c.t_factor_s);
  kv_t("t_solve_s", c.t_solve_s);
  kv_t("t_post_s", c.t_post_s);
  kv_t("t_fill_solve_s", c.t_fill_solve_s());
  kv_t("t_total_s", c.t_total_s);
  if (have_cond)
  {
    std::snprintf(buf, sizeof buf, "condition=%.6e\n", condition);
    o << buf;
  }
  return o.str();
}

}  // namespace

// ------------------------------------------------------------------ the run

RunArtifacts run_scenario(const Scenario &in)
{
  const auto t_start = clock_type::now();
  Scenario s = in;
  validate_scenario(s);

  if (const char *env = std::getenv("EM2D_THREADS"))
  {
    const std::string v(env);
    long n = 0;
    try
    {
      size_t used = 0;
      n = std::stol(v, &used);
      if (used != v.size())
        n = 0;
    }
    catch (const std::exception &)
    {
      n = 0;
    }
    if (n < 1)
      throw ConfigError("EM2D_THREADS must be a positive integer, got '" + v + "'");
    s.threads = static_cast<int>(n);
  }
  Eigen::setNbThreads(s.threads);

  const double omega = s.omega();
  const bool hybrid = s.formulation != Formulation::ReferenceFem;
  MeshLayout lay = s.layout;
  if (lay == MeshLayout::Auto)
    lay = s.formulation == Formulation::HybridNonconformal ? MeshLayout::Rect : MeshLayout::Polar;

  RunArtifacts art;
  CostReport cost;

  try
  {
    fs::create_directories(s.out_dir);
  }
  catch (const fs::filesystem_error &e)
  {
    throw ConfigError("cannot create output directory '" + s.out_dir + "': " + e.what());
  }
  auto out_path = [&](const char *leaf) { return (fs::path(s.out_dir) / leaf).string(); };

  PlaneWave wave;
  wave.phi = s.incidence_deg * pi / 180.0;
  wave.background = s.background;
  wave.omega = omega;
  auto incident = [&wave](const Vec2 &p) { return wave.field(p); };

  // ---- meshes and contours ----
  auto t0 = clock_type::now();
  const long n_ang = angular_count(s);
  std::vector<Built> builts = build_domains(s, n_ang);

  TriMesh mesh;
  if (lay == MeshLayout::Rect)
  {
    mesh = build_rect_mesh(s.x0, s.y0, s.x1, s.y1, s.h_pde);
  }
  else
  {
    const PolarPlan plan =
        plan_polar(s, builts, n_ang, s.formulation == Formulation::ReferenceFem, omega);
    mesh = build_polar_mesh(plan.center, plan.rings, static_cast<int>(plan.n_theta), true,
                            plan.morph_start);
  }
  mesh.validate();
  PointLocator loc(mesh);
  cost.t_mesh_s = seconds_since(t0);
  cost.elements = static_cast<long>(mesh.tris.size());
  cost.nodes = static_cast<long>(mesh.nodes.size());

  std::optional<PmlSpec> pml;
  if (s.pml_layers > 0)
  {
    const double t = s.pml_thickness();
    pml = make_pml(s.x0 + t, s.y0 + t, s.x1 - t, s.y1 - t, t, s.pml_power, s.pml_r0);
  }
  const PmlSpec *pmlp = pml ? &*pml : nullptr;

  const Painter paint = make_painter(s, hybrid ? nullptr : &builts);

  // ---- surface admittance operators ----
  DsaoCache cache;
  std::vector<std::shared_ptr<const Dsao>> ops;
  if (hybrid)
  {
    t0 = clock_type::now();
    for (const Built &b : builts)
    {
      const Vec2 probe = embed_probe(b, s.h_pde);
      if (!(paint(probe) == b.embed))
        throw ConfigError("[domain " + std::to_string(b.shape) +
                          "] embed material disagrees with the medium painted around the shape");
      if (b.inner)
        ops.push_back(cache.get_nested(b.outer, *b.inner, b.core_mat, b.mat, b.embed, omega));
      else
        ops.push_back(cache.get_single(b.outer, b.mat, b.embed, omega));
    }
    cost.t_dsao_s = seconds_since(t0);
    art.dsao_builds = cache.builds();
    art.dsao_hits = cache.hits();
  }

  // ---- assembly ----
  t0 = clock_type::now();
  Eigen::SparseMatrix<cplx> K = assemble_helmholtz(mesh, paint, omega, pmlp);
  Eigen::VectorXcd rhs = assemble_contrast_rhs(mesh, paint, s.background, wave);

  CoupledSystem sys;
  if (hybrid)
  {
    std::vector<DomainCoupling> domains;
    for (size_t i = 0; i < builts.size(); ++i)
    {
      ConnectionMatrix T = build_connection_matrix(mesh, loc, builts[i].outer, pmlp);
      if (s.formulation == Formulation::HybridConformal && !detect_conformal(T))
        throw CouplingError("[domain " + std::to_string(builts[i].shape) +
                            "] the polar mesh does not conform to the contour");
      domains.push_back({std::move(T), ops[i]});
    }
    sys = assemble_coupled_system(K, rhs, std::move(domains), omega, incident);
  }
  else
  {
    sys.A = std::move(K);
    sys.rhs = std::move(rhs);
  }
  apply_dirichlet(sys.A, sys.rhs, boundary_nodes(mesh));
  cost.t_assemble_s = seconds_since(t0);

  // ---- solve ----
  FieldSolution sol = solve(sys);
  cost.unknowns = sol.report.unknowns;
  cost.nonzeros = sol.report.nnz;
  cost.t_factor_s = sol.report.t_factor;
  cost.t_solve_s = sol.report.t_solve;
  cost.factor_bytes = sol.report.peak_rss_kb * 1024ll;
  art.residual = sol.report.residual;

  // ---- postprocess ----
  t0 = clock_type::now();
  if (s.estimate_condition)
  {
    art.condition = condition_estimate(sys.A);
    art.metric_rows.emplace_back("condition", art.condition);
  }

  if (hybrid)
  {
    for (size_t i = 0; i < sys.domains.size(); ++i)
    {
      art.traces.push_back(extract_boundary_trace(sol.e, sys.domains[i], incident));
      art.surface_currents.push_back(equivalent_current(*ops[i], art.traces.back()));
    }
  }

  std::optional<MieSolution> mie;
  const bool want_mie_rcs =
      std::find(s.metrics.begin(), s.metrics.end(), std::string("mie-rcs")) != s.metrics.end();
  const bool want_mie_nf = std::find(s.metrics.begin(), s.metrics.end(),
                                     std::string("mie-nearfield")) != s.metrics.end();
  if (want_mie_rcs || want_mie_nf)
  {
    const SieShape &d = s.domains[0];
    const double a1 = d.core_radius > 0.0 ? d.core_radius : d.radius;
    const Material core = d.core_radius > 0.0 ? d.core_material : d.material;
    mie = mie_coated_cylinder(d.center, a1, d.radius, core, d.material, s.background, omega,
                              wave.phi);
  }

  if (s.rcs.active)
  {
    std::vector<double> angles(s.rcs.n_angles);
    for (int i = 0; i < s.rcs.n_angles; ++i)
      angles[i] = 2.0 * pi * i / s.rcs.n_angles;
    art.rcs = rcs_from_huygens(mesh, loc, sol.e, wave, s.rcs.rect, angles, sys.domains, pmlp);
    write_rcs_csv(out_path("rcs.csv"), *art.rcs);
    art.files.push_back(out_path("rcs.csv"));

    if (want_mie_rcs)
    {
      std::vector<double> calc(angles.size()), ref(angles.size());
      for (size_t i = 0; i < angles.size(); ++i)
      {
        calc[i] = std::pow(10.0, art.rcs->sigma_dbm[i] / 10.0);
        ref[i] = mie->sigma_2d(angles[i]);
      }
      art.metric_rows.emplace_back("re_rcs_mie", relative_error(calc, ref));
    }
  }

  if (s.nearfield.active)
  {
    const double dx = (s.nearfield.x1 - s.nearfield.x0) / (s.nearfield.nx - 1);
    const double dy = (s.nearfield.y1 - s.nearfield.y0) / (s.nearfield.ny - 1);
    art.nearfield = near_field_grid(mesh, loc, sol.e, sys.domains, incident,
                                    {s.nearfield.x0, s.nearfield.y0}, dx, dy, s.nearfield.nx,
                                    s.nearfield.ny, pmlp);
    write_nearfield_csv(out_path("nearfield.csv"), *art.nearfield);
    art.files.push_back(out_path("nearfield.csv"));

    if (want_mie_nf)
    {
      FieldGrid ref = *art.nearfield;
      for (int iy = 0; iy < ref.ny; ++iy)
        for (int ix = 0; ix < ref.nx; ++ix)
          ref.e[std::size_t(iy) * ref.nx + ix] = mie->total_field(ref.point(ix, iy));
      const NearFieldError nf = near_field_relative_error(*art.nearfield, ref);
      art.metric_rows.emplace_back("nf_max_err", nf.max_err);
      art.metric_rows.emplace_back("nf_frac_3pct", nf.frac_below_3pct);
      art.metric_rows.emplace_back("nf_frac_5pct", nf.frac_below_5pct);
    }
  }

  if (s.current.active)
  {
    CurrentDensityMap merged;
    for (size_t i = 0; i < builts.size(); ++i)
    {
      const Built &b = builts[i];
      const bool core_cond = b.core_sigma > 0.0;
      const double sg = core_cond ? b.core_sigma : b.sigma;
      if (!(sg > 0.0))
        continue;
      const Contour &cont = core_cond ? *b.inner : b.outer;
      const double delta = std::sqrt(2.0 / (omega * mu0 * sg));
      double feature = 0.0;
      switch (b.kind)
      {
        case SieShape::Kind::Circle: feature = core_cond ? b.core_radius : b.radius; break;
        case SieShape::Kind::Square: feature = 0.5 * (core_cond ? b.core_side : b.side); break;
        case SieShape::Kind::SectorSet: feature = b.r_out - b.r_hub; break;
        case SieShape::Kind::PolygonFile: feature = std::sqrt(std::abs(cont.signed_area())); break;
      }
      const double depth = std::min(s.current.depth_skin * delta, 0.4 * feature);
      const std::vector<Vec2> lattice = graded_conductor_lattice(cont, delta, depth);

      CurrentDensityMap map;
      if (hybrid)
      {
        map = current_density_map(*ops[i], art.traces[i], sg, lattice);
      }
      else
      {
        map.points = lattice;
        map.abs_j.resize(lattice.size(), 0.0);
        for (size_t n = 0; n < lattice.size(); ++n)
        {
          const auto hit = loc.locate(lattice[n]);
          if (!hit)
            continue;
          cplx e = incident(lattice[n]);
          for (int v = 0; v < 3; ++v)
            e += hit->L[v] * sol.e[mesh.tris[hit->elem].v[v]];
          map.abs_j[n] = sg * std::abs(e);
          if (map.abs_j[n] > map.peak)
          {
            map.peak = map.abs_j[n];
            map.peak_at = lattice[n];
          }
        }
      }
      art.metric_rows.emplace_back("peak_j_" + std::to_string(i), map.peak);
      merged.points.insert(merged.points.end(), map.points.begin(), map.points.end());
      merged.abs_j.insert(merged.abs_j.end(), map.abs_j.begin(), map.abs_j.end());
      if (map.peak > merged.peak)
      {
        merged.peak = map.peak;
        merged.peak_at = map.peak_at;
      }
      art.currents.push_back(std::move(map));
    }
    write_current_csv(out_path("current.csv"), merged);
    art.files.push_back(out_path("current.csv"));
  }

  if (s.dump_dsao && hybrid)
  {
    for (size_t i = 0; i < ops.size(); ++i)
    {
      const std::string p = out_path(("ys_" + std::to_string(i) + ".bin").c_str());
      write_dsao_matrix(p, ops[i]->Ys);
      art.files.push_back(p);
    }
  }

  if (!art.metric_rows.empty())
  {
    write_metrics_csv(out_path("metrics.csv"), art.metric_rows);
    art.files.push_back(out_path("metrics.csv"));
  }
  cost.t_post_s = seconds_since(t0);

  write_text(out_path("config.ini"), config_text(s));
  art.files.push_back(out_path("config.ini"));

  cost.t_total_s = seconds_since(t_start);
  write_text(out_path("report.txt"),
             format_report(s, lay, cost, art.residual, art.dsao_builds, art.dsao_hits,
                           s.estimate_condition, art.condition));
  art.files.push_back(out_path("report.txt"));

  art.cost = cost;
  return art;
}

// ------------------------------------------------------------------- sweeps

std::vector<SweepRow> convergence_sweep(const Scenario &base, const std::vector<long> &elements)
{
  if (elements.empty())
    throw ConfigError("sweep needs at least one element count");
  for (size_t i = 1; i < elements.size(); ++i)
    if (elements[i] <= elements[i - 1])
      throw ConfigError("sweep element counts must increase strictly");
  if (std::find(base.metrics.begin(), base.metrics.end(), std::string("mie-rcs")) ==
      base.metrics.end())
    throw ConfigError("sweep needs the mie-rcs metric to measure against");

  const double area = (base.x1 - base.x0) * (base.y1 - base.y0);
  std::vector<SweepRow> rows;
  for (long n : elements)
  {
    Scenario s = base;
    s.h_pde = std::sqrt(2.0 * area / double(n));  // rect: two triangles per cell
    for (SieShape &d : s.domains)
      d.h *= s.h_pde / base.h_pde;  // keep the contour/volume ratio
    s.estimate_condition = true;
    s.out_dir = base.out_dir + "/rung-" + std::to_string(n);

    const RunArtifacts art = run_scenario(s);
    SweepRow row;
    row.elements = n;
    row.actual = art.cost.elements;
    row.condition = art.condition;
    row.re = -1.0;
    for (const auto &kv : art.metric_rows)
      if (kv.first == "re_rcs_mie")
        row.re = kv.second;
    if (row.re < 0.0)
      throw NumericalFailure("sweep rung " + std::to_string(n) + " produced no oracle error");
    rows.push_back(row);
  }

  try
  {
    fs::create_directories(base.out_dir);
  }
  catch (const fs::filesystem_error &e)
  {
    throw ConfigError("cannot create output directory '" + base.out_dir + "': " + e.what());
  }

  std::ostringstream csv;
  csv << "elements,re,condition\n";
  for (const SweepRow &r : rows)
    csv << r.actual << "," << num(r.re) << "," << num(r.condition) << "\n";
  write_text(base.out_dir + "/sweep.csv", csv.str());

  bool re_dec = true, cond_inc = true;
  for (size_t i = 1; i < rows.size(); ++i)
  {
    re_dec = re_dec && rows[i].re < rows[i - 1].re;
    cond_inc = cond_inc && rows[i].condition >= rows[i - 1].condition;
  }
  std::ostringstream mono;
  mono << "re_strictly_decreasing=" << (re_dec ? "true" : "false") << "\n";
  mono << "condition_nondecreasing=" << (cond_inc ? "true" : "false") << "\n";
  write_text(base.out_dir + "/monotonicity.txt", mono.str());
  return rows;
}

}  // namespace em2d
