// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run configs, run built-in presets, sweep element
// ladders, inspect mesh files. Exit codes: 0 ok, 2 config error, 3 numerical
// failure, 4 geometry (mesh/coupling) error.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "em2d/errors.hpp"
#include "em2d/mesh.hpp"
#include "em2d/scenario.hpp"

namespace
{

void print_run(const em2d::RunArtifacts &art)
{
  const em2d::CostReport &c = art.cost;
  std::printf("unknowns=%d elements=%ld nnz=%lld residual=%.3e\n", c.unknowns, c.elements,
              c.nonzeros, art.residual);
  std::printf("t_mesh=%.3fs t_dsao=%.3fs t_assemble=%.3fs t_factor=%.3fs t_solve=%.3fs "
              "t_post=%.3fs t_total=%.3fs\n",
              c.t_mesh_s, c.t_dsao_s, c.t_assemble_s, c.t_factor_s, c.t_solve_s, c.t_post_s,
              c.t_total_s);
  for (const auto &kv : art.metric_rows)
    std::printf("%s=%.17g\n", kv.first.c_str(), kv.second);
  for (const std::string &f : art.files)
    std::printf("wrote %s\n", f.c_str());
}

std::vector<long> parse_ladder(const std::string &text)
{
  std::vector<long> out;
  std::string item;
  std::stringstream in(text);
  while (std::getline(in, item, ','))
  {
    try
    {
      size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1)
        throw std::invalid_argument(item);
      out.push_back(v);
    }
    catch (const std::exception &)
    {
      throw em2d::ConfigError("--elements: not a positive integer '" + item + "'");
    }
  }
  if (out.empty())
    throw em2d::ConfigError("--elements: empty ladder");
  return out;
}

int dispatch(int argc, char **argv)
{
  CLI::App app{"2D TM hybrid surface-admittance / FEM scattering solver"};
  app.require_subcommand(1);

  std::string config_path;
  auto *run = app.add_subcommand("run", "run a scenario config file");
  run->add_option("config", config_path, "config file")->required();

  std::string preset_name, preset_out;
  bool preset_print = false;
  auto *pre = app.add_subcommand("preset", "run a built-in scenario");
  pre->add_option("name", preset_name, "preset name")->required();
  pre->add_option("--out", preset_out, "output directory override");
  pre->add_flag("--print", preset_print, "print the preset's config text and exit");

  std::string sweep_path, sweep_elems;
  auto *swp = app.add_subcommand("sweep", "convergence sweep over an element-count ladder");
  swp->add_option("config", sweep_path, "config file")->required();
  swp->add_option("--elements", sweep_elems, "comma list of element counts")->required();

  std::string mesh_path;
  auto *mi = app.add_subcommand("mesh-info", "summarize a mesh file");
  mi->add_option("meshfile", mesh_path, "mesh file")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp &e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError &e)
  {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  if (run->parsed())
  {
    print_run(em2d::run_scenario(em2d::parse_config_file(config_path)));
    return 0;
  }
  if (pre->parsed())
  {
    em2d::Scenario s = em2d::preset(preset_name);
    if (!preset_out.empty())
      s.out_dir = preset_out;
    if (preset_print)
    {
      std::fputs(em2d::config_text(s).c_str(), stdout);
      return 0;
    }
    print_run(em2d::run_scenario(s));
    return 0;
  }
  if (swp->parsed())
  {
    const em2d::Scenario s = em2d::parse_config_file(sweep_path);
    const auto rows = em2d::convergence_sweep(s, parse_ladder(sweep_elems));
    std::printf("elements,re,condition\n");
    for (const auto &r : rows)
      std::printf("%ld,%.17g,%.17g\n", r.actual, r.re, r.condition);
    return 0;
  }
  if (mi->parsed())
  {
    const em2d::TriMesh m = em2d::read_mesh(mesh_path);
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    if (!m.nodes.empty())
    {
      x0 = x1 = m.nodes[0].x;
      y0 = y1 = m.nodes[0].y;
      for (const em2d::Vec2 &p : m.nodes)
      {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
      }
    }
    std::printf("nodes=%zu\nelements=%zu\n", m.nodes.size(), m.tris.size());
    std::printf("x0=%.17g\ny0=%.17g\nx1=%.17g\ny1=%.17g\n", x0, y0, x1, y1);
    std::printf("max_diameter=%.17g\n", m.max_diameter());
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  try
  {
    return dispatch(argc, argv);
  }
  catch (const em2d::ConfigError &e)
  {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  catch (const em2d::NumericalFailure &e)
  {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  }
  catch (const em2d::MeshFormatError &e)
  {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  }
  catch (const em2d::CouplingError &e)
  {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
