// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_SCENARIO_HPP
#define EM2D_SCENARIO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "em2d/fem.hpp"
#include "em2d/mesh.hpp"
#include "em2d/postprocess.hpp"

namespace em2d
{

// hybrid-* solve the volume with embedded admittance operators; the conformal
// variant constrains the volume mesh to share the contour nodes. reference-fem
// drops the operators and meshes every shape volumetrically, resolving the
// skin depth of conductors.
enum class Formulation
{
  HybridNonconformal,
  HybridConformal,
  ReferenceFem
};

// Volume mesh layout. Auto picks rect for hybrid-nonconformal and the
// contour-aligned polar layout otherwise; forcing polar lets the nonconformal
// assembly path run on a conformal mesh.
enum class MeshLayout
{
  Auto,
  Rect,
  Polar
};

// One shape replaced by a surface admittance operator (or, under
// reference-fem, meshed and painted volumetrically).
struct SieShape
{
  enum class Kind
  {
    Circle,
    Square,
    SectorSet,
    PolygonFile
  };

  Kind kind = Kind::Circle;
  Vec2 center{0.0, 0.0};
  double h = 0.0;  // target contour node spacing

  double radius = 0.0;       // circle
  double core_radius = 0.0;  // > 0: layered circle
  double side = 0.0;         // square
  double core_side = 0.0;    // > 0: layered square
  double r_hub = 0.0;        // sector-set
  double r_out = 0.0;
  int count = 0;
  double gap_deg = 0.0;
  double start_deg = 90.0;  // angle of the first gap center
  std::string path;         // polygon-from-file

  Material material;       // shape material (coat when layered)
  Material core_material;  // layered core
  Material embed;          // surrounding medium the operator differences against
  double sigma = 0.0;      // conductivity behind `material`, 0 for dielectrics
  double core_sigma = 0.0;
};

// Material disk painted into the volume (a sheath, say) — volumetric
// contrast, not an admittance domain.
struct VolumeInclusion
{
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
  Material material;
};

struct RcsRequest
{
  bool active = false;
  int n_angles = 360;
  HuygensRect rect{0.0, 0.0, 0.0, 0.0};
};

struct NearFieldRequest
{
  bool active = false;
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  int nx = 0, ny = 0;
};

struct CurrentRequest
{
  bool active = false;
  double depth_skin = 12.0;  // lattice depth in skin depths of each conductor
};

struct Scenario
{
  std::string name;
  double frequency = 0.0;
  double incidence_deg = 0.0;
  Formulation formulation = Formulation::HybridNonconformal;
  MeshLayout layout = MeshLayout::Auto;
  int threads = 1;

  Material background;  // reference medium of the incident wave
  bool graded = false;  // eps_r varies linearly in y across the box
  double eps_lo = 1.0, eps_hi = 1.0;

  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;  // volume box
  double h_pde = 0.0;
  int pml_layers = 10;
  double pml_power = 3.0;
  double pml_r0 = 1e-6;

  std::vector<SieShape> domains;
  std::vector<VolumeInclusion> inclusions;

  RcsRequest rcs;
  NearFieldRequest nearfield;
  CurrentRequest current;
  std::vector<std::string> metrics;  // "mie-rcs", "mie-nearfield"
  bool dump_dsao = false;
  bool estimate_condition = false;
  std::string out_dir = "out";

  double omega() const;
  double pml_thickness() const { return pml_layers * h_pde; }
};

// INI-like text: [section] headers, key = value lines, comma arrays, '#'
// comments. Unknown sections or keys are rejected with their path.
Scenario parse_config(const std::string &text);
Scenario parse_config_file(const std::string &path);

// Code-defined scenarios; name outside the list -> ConfigError.
std::vector<std::string> preset_names();
Scenario preset(const std::string &name);

// Render a scenario back into parseable config text (round-trips through
// parse_config); run_scenario drops a copy next to its outputs.
std::string config_text(const Scenario &s);

struct CostReport
{
  int unknowns = 0;
  long elements = 0;  // volume mesh triangles
  long nodes = 0;
  long long nonzeros = 0;
  long long factor_bytes = 0;  // resident-set high water, see report.txt label
  double t_mesh_s = 0.0;
  double t_assemble_s = 0.0;
  double t_dsao_s = 0.0;
  double t_factor_s = 0.0;
  double t_solve_s = 0.0;
  double t_post_s = 0.0;
  double t_total_s = 0.0;

  double t_fill_solve_s() const { return t_assemble_s + t_factor_s + t_solve_s; }
};

// Everything a run produced, both on disk (files) and in memory for callers
// that want to compare runs without reparsing CSVs.
struct RunArtifacts
{
  CostReport cost;
  std::vector<std::string> files;

  std::optional<RcsCurve> rcs;
  std::optional<FieldGrid> nearfield;
  std::vector<CurrentDensityMap> currents;       // one per conductive domain
  std::vector<Eigen::VectorXcd> traces;          // total boundary trace per domain
  std::vector<Eigen::VectorXcd> surface_currents;  // Ys e1 per domain (hybrid only)
  long dsao_builds = 0;
  long dsao_hits = 0;
  double residual = 0.0;
  double condition = 0.0;  // when estimate_condition
  std::vector<std::pair<std::string, double>> metric_rows;
};

RunArtifacts run_scenario(const Scenario &s);

struct SweepRow
{
  long elements = 0;    // requested rung
  long actual = 0;      // elements of the built mesh
  double re = 0.0;      // scenario's oracle metric
  double condition = 0.0;
};

// Re-runs the scenario with h scaled to hit each element-count rung; requires
// a mie metric to measure RE against. Writes sweep.csv and monotonicity.txt
// under the scenario's output directory.
std::vector<SweepRow> convergence_sweep(const Scenario &s, const std::vector<long> &elements);

}  // namespace em2d

#endif
