#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slbm/domain.hpp"
#include "slbm/exchange.hpp"
#include "slbm/geometry_io.hpp"

namespace slbm {

/// Parameters shared by the run and sweep commands.
///
/// Geometries: couette (moving lid at the high y face, periodic in x and z),
/// channel (periodic in x, no-slip walls, uniform initial velocity), bed and
/// riverbed (periodic in x and y, floor at low z, moving lid at high z),
/// mask:PATH (voxel mask, no-slip box with a moving lid on the last axis).
struct RunConfig {
  std::string geometry = "couette";
  Extent dims{32, 32, 32};
  Extent block{16, 16, 16};
  std::string layout = "sparse";  // sparse | dense | hybrid | hybrid:PHI
  std::string pattern = "pull";   // pull | aa
  bool overlap = false;
  FrameWidth frame{1, 1, 1};
  std::string stencil = "D3Q19";
  double omega = 0.0;  // wins over nu when > 0
  double nu = 1.0 / 6.0;
  bool trt = false;
  std::uint64_t steps = 100;
  int workers = 1;
  std::uint64_t seed = 1;
  double u_wall = 0.05;
  double porosity = 0.36;  // bed target
  double bed_fraction = 0.5;
  double diameter = 8.0;
  double bandwidth = 1361e9;
  bool vtk = false;
  std::string out = ".";
};

LayoutPolicy parse_layout(const std::string& text);
Pattern parse_pattern(const std::string& text);

Geometry make_geometry(const RunConfig& cfg, const Stencil& stencil);
/// Partitioned, balanced domain initialized at equilibrium.
Domain build_domain(const RunConfig& cfg);
RunRecord make_record(const Domain& domain, const std::string& run_id, double geometry_porosity, std::uint64_t steps,
                      double bandwidth, double wall_seconds);

/// Builds and runs one simulation. Writes VTK when requested.
RunRecord execute_run(const RunConfig& cfg, std::ostream& log);
/// Random-obstacle domains at each porosity, run with sparse, dense and hybrid layouts.
std::vector<RunRecord> sweep_porosity(const RunConfig& cfg, const std::vector<double>& phis, std::ostream& log);

/// Process exit code for an exception thrown by a command.
int exit_code(const std::exception& e);

/// Full command line entry point (args exclude the program name).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slbm
