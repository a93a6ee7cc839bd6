#include "slbm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "slbm/error.hpp"
#include "slbm/perf_model.hpp"

namespace slbm {

namespace {

Extent parse_extent(const std::string& text, const char* what) {
  Extent e{1, 1, 1};
  int* fields[3] = {&e.x, &e.y, &e.z};
  std::string t = text;
  for (char& ch : t)
    if (ch == 'x' || ch == ',') ch = ' ';
  std::istringstream is(t);
  int n = 0;
  int v;
  while (n < 3 && is >> v) *fields[n++] = v;
  std::string rest;
  if (n == 0 || (is >> rest) || !is.eof() || e.x < 1 || e.y < 1 || e.z < 1)
    throw ConfigError(std::string("bad ") + what + " '" + text + "', expected NXxNYxNZ");
  if (n == 1) e.y = e.z = e.x;
  return e;
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

Structure structure_of(LayoutKind k) { return k == LayoutKind::Dense ? Structure::Dense : Structure::Sparse; }

std::string pattern_name(Pattern p) { return p == Pattern::Pull ? "pull" : "aa"; }

/// TRT with magic parameter 3/16.
CollisionParams trt_params(double omega) {
  const double lambda_even = 1.0 / omega - 0.5;
  return CollisionParams::trt(omega, 1.0 / (3.0 / 16.0 / lambda_even + 0.5));
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  return dir;
}

}  // namespace

LayoutPolicy parse_layout(const std::string& text) {
  if (text == "sparse") return LayoutPolicy::sparse();
  if (text == "dense") return LayoutPolicy::dense();
  if (text == "hybrid") return LayoutPolicy::hybrid();
  if (text.rfind("hybrid:", 0) == 0) {
    std::size_t used = 0;
    double phi = -1;
    try {
      phi = std::stod(text.substr(7), &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 7 || phi < 0 || phi > 1)
      throw ConfigError("bad hybrid threshold in '" + text + "'");
    return LayoutPolicy::hybrid(phi);
  }
  throw ConfigError("unknown layout '" + text + "'");
}

Pattern parse_pattern(const std::string& text) {
  if (text == "pull") return Pattern::Pull;
  if (text == "aa") return Pattern::AA;
  throw ConfigError("unknown pattern '" + text + "'");
}

Geometry make_geometry(const RunConfig& cfg, const Stencil& s) {
  Extent dims = cfg.dims;
  if (s.dim == 2) dims.z = 1;
  const Vec3 lid{cfg.u_wall, 0, 0};
  const int up = s.dim == 2 ? 1 : 2;  // vertical axis
  auto lid_box = [&](Geometry g) {
    g.set_face(2 * up + 1, g.add_wall_velocity(lid));
    return g;
  };
  if (cfg.geometry == "couette") {
    Geometry g(dims, s.dim);
    g.set_periodic(0, true);
    if (s.dim == 3) g.set_periodic(2, true);
    g.set_face(3, g.add_wall_velocity(lid));
    return g;
  }
  if (cfg.geometry == "channel") {
    Geometry g(dims, s.dim);
    g.set_periodic(0, true);
    return g;
  }
  if (cfg.geometry == "bed" || cfg.geometry == "riverbed") {
    if (s.dim != 3) throw ConfigError(cfg.geometry + " needs a 3D stencil");
    VoxelMask mask;
    if (cfg.geometry == "bed") {
      BedOptions opt;
      opt.dims = dims;
      opt.diameter = cfg.diameter;
      opt.target_porosity = cfg.porosity;
      opt.seed = cfg.seed;
      mask = voxelize(generate_particle_bed(opt), dims);
    } else {
      mask = make_riverbed(dims, cfg.bed_fraction, cfg.porosity, cfg.seed, cfg.diameter);
    }
    Geometry g = lid_box(geometry_from_mask(mask, 3));
    g.set_periodic(0, true);
    g.set_periodic(1, true);
    return g;
  }
  if (cfg.geometry.rfind("mask:", 0) == 0) {
    const VoxelMask mask = read_voxel_mask(cfg.geometry.substr(5));
    const int dim = mask.dims.z == 1 ? 2 : 3;
    if (dim != s.dim) throw ConfigError("mask dimensionality does not match stencil " + s.name);
    return lid_box(geometry_from_mask(mask, dim));
  }
  throw ConfigError("unknown geometry '" + cfg.geometry + "'");
}

Domain build_domain(const RunConfig& cfg) {
  const Stencil s = make_stencil(cfg.stencil);
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  const Geometry geo = make_geometry(cfg, s);
  DomainOptions opt;
  opt.block_size = cfg.block;
  opt.policy = parse_layout(cfg.layout);
  opt.pattern = parse_pattern(cfg.pattern);
  const double omega = cfg.omega > 0 ? cfg.omega : omega_from_viscosity(cfg.nu);
  opt.params = cfg.trt ? trt_params(omega) : CollisionParams::srt(omega);
  if (cfg.overlap) opt.frame_width = cfg.frame;
  Domain d = partition(geo, s, opt);
  balance(d, cfg.workers);
  const Vec3 u0 = cfg.geometry == "channel" ? Vec3{cfg.u_wall, 0, 0} : Vec3{0, 0, 0};
  init_equilibrium(d, 1.0, u0);
  return d;
}

RunRecord make_record(const Domain& d, const std::string& run_id, double geometry_porosity, std::uint64_t steps,
                      double bandwidth, double wall_seconds) {
  RunRecord r;
  r.run_id = run_id;
  r.layout = d.policy.name();
  r.pattern = pattern_name(d.pattern);
  r.porosity = geometry_porosity;
  r.blocks = d.blocks.size();
  r.cells = d.n_cells();
  r.fluid_cells = d.n_fluid();
  r.steps = steps;
  const KernelCounters k = d.kernel_totals();
  r.cell_visits = k.cell_visits;
  r.fluid_visits = k.fluid_visits;
  r.pdf_accesses = k.pdf_reads + k.pdf_writes;
  r.idx_reads = k.idx_reads;
  r.exchanged_values = d.exchange.values;
  double bytes = 0, memory = 0;
  for (const auto& b : d.blocks) {
    const TrafficModel m{Arch::GPU, structure_of(b.kind), d.pattern, d.stencil.q};
    const double visited = b.kind == LayoutKind::Dense ? double(b.size.cells()) : double(b.n_fluid);
    bytes += bytes_per_cell(m) * visited;
    memory += memory_total(double(b.size.cells()), b.porosity, m);
  }
  r.model_bytes_per_cell = r.fluid_cells ? bytes / double(r.fluid_cells) : 0.0;
  r.model_memory_bytes = memory;
  r.model_roofline_flups = r.model_bytes_per_cell > 0 ? bandwidth / r.model_bytes_per_cell : 0.0;
  r.wall_seconds = wall_seconds;
  r.fluid_updates_per_s = wall_seconds > 0 ? double(r.fluid_cells) * double(steps) / wall_seconds : 0.0;
  return r;
}

namespace {

double timed_run(Domain& d, std::uint64_t steps, const RunConfig& cfg) {
  StepOptions opt;
  opt.schedule = cfg.overlap ? Schedule::Overlapped : Schedule::Sequential;
  opt.workers = cfg.workers;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run(d, steps, opt);
  } catch (const NumericalInstability& e) {
    throw NumericalInstability("step " + std::to_string(d.steps_done + 1) + ": " + e.what());
  }
  settle(d);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '"' || ch == '\n') ch = '_';
  return s;
}

}  // namespace

RunRecord execute_run(const RunConfig& cfg, std::ostream& log) {
  Domain d = build_domain(cfg);
  const Stencil s = make_stencil(cfg.stencil);
  const double phi = make_geometry(cfg, s).porosity();
  log << "domain: " << d.blocks.size() << " blocks of " << cfg.block.x << 'x' << cfg.block.y << 'x'
      << d.block_size.z << ", " << d.n_fluid() << " fluid cells, layout " << d.policy.name() << ", pattern "
      << pattern_name(d.pattern) << '\n';
  const double wall = timed_run(d, cfg.steps, cfg);
  std::ostringstream id;
  id << sanitize(cfg.geometry) << '-' << d.policy.name() << '-' << pattern_name(d.pattern) << "-s" << cfg.seed;
  RunRecord r = make_record(d, id.str(), phi, cfg.steps, cfg.bandwidth, wall);
  log << "steps " << r.steps << ", fluid visits " << r.fluid_visits << ", cell visits " << r.cell_visits
      << ", pdf accesses " << r.pdf_accesses << ", idx reads " << r.idx_reads << ", exchanged " << r.exchanged_values
      << '\n';
  log << "fluid updates/s " << std::scientific << std::setprecision(3) << r.fluid_updates_per_s << " (model roofline "
      << r.model_roofline_flups << ")" << std::defaultfloat << '\n';
  if (cfg.vtk) write_vtk(d, ensure_dir(cfg.out) / "vtk");
  return r;
}

std::vector<RunRecord> sweep_porosity(const RunConfig& cfg, const std::vector<double>& phis, std::ostream& log) {
  const Stencil s = make_stencil(cfg.stencil);
  Extent dims = cfg.dims;
  if (s.dim == 2) dims.z = 1;
  std::vector<RunRecord> out;
  for (double phi : phis) {
    const VoxelMask mask = random_obstacles(dims, phi, cfg.seed);
    Geometry geo = geometry_from_mask(mask, s.dim);
    for (int a = 0; a < s.dim; ++a) geo.set_periodic(a, true);
    for (const std::string layout : {"sparse", "dense", "hybrid"}) {
      DomainOptions opt;
      opt.block_size = cfg.block;
      opt.policy = layout == std::string("hybrid") && cfg.layout.rfind("hybrid:", 0) == 0 ? parse_layout(cfg.layout)
                                                                                          : parse_layout(layout);
      opt.pattern = parse_pattern(cfg.pattern);
      const double omega = cfg.omega > 0 ? cfg.omega : omega_from_viscosity(cfg.nu);
      opt.params = cfg.trt ? trt_params(omega) : CollisionParams::srt(omega);
      if (cfg.overlap) opt.frame_width = cfg.frame;
      Domain d = partition(geo, s, opt);
      balance(d, cfg.workers);
      init_equilibrium(d, 1.0, {cfg.u_wall, 0, 0});
      const double wall = timed_run(d, cfg.steps, cfg);
      std::ostringstream id;
      id << "phi" << phi << '-' << layout << "-s" << cfg.seed;
      out.push_back(make_record(d, id.str(), mask.porosity(), cfg.steps, cfg.bandwidth, wall));
      log << id.str() << ": " << out.back().fluid_visits << " fluid visits, " << std::scientific << std::setprecision(3)
          << out.back().fluid_updates_per_s << " fluid updates/s" << std::defaultfloat << '\n';
    }
  }
  return out;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return 5;
  if (dynamic_cast<const ConfigError*>(&e)) return 3;
  return 4;
}

namespace {

const char* category(int code) {
  switch (code) {
    case 2: return "usage";
    case 3: return "config";
    case 5: return "io";
    default: return "runtime";
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-structured lattice Boltzmann solver with sparse, dense and hybrid layouts", "slbm"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());

  RunConfig cfg;
  std::string dims = "32x32x32", block = "16x16x16", frame = "1x1x1";
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "Output directory");
  app.add_option("--geometry", cfg.geometry, "couette | channel | bed | riverbed | mask:PATH");
  app.add_option("--dims", dims, "Domain size NXxNYxNZ");
  app.add_option("--block", block, "Block size NXxNYxNZ");
  app.add_option("--layout", cfg.layout, "sparse | dense | hybrid | hybrid:PHI")
      ->check(CLI::Validator(
          [](std::string& v) {
            try {
              parse_layout(v);
            } catch (const ConfigError& e) {
              return std::string(e.what());
            }
            return std::string();
          },
          "LAYOUT"));
  app.add_option("--pattern", cfg.pattern, "pull | aa")->check(CLI::IsMember({"pull", "aa"}));
  app.add_flag("--overlap", cfg.overlap, "Hide communication behind interior cells");
  app.add_option("--frame", frame, "Frame widths for --overlap");
  app.add_option("--stencil", cfg.stencil, "D2Q9 | D3Q19 | D3Q27")->check(CLI::IsMember({"D2Q5", "D2Q9", "D3Q19", "D3Q27"}));
  app.add_option("--omega", cfg.omega, "Relaxation rate (overrides --nu)");
  app.add_option("--nu", cfg.nu, "Kinematic viscosity");
  app.add_flag("--trt", cfg.trt, "Two-relaxation-time collision");
  app.add_option("--steps", cfg.steps, "Time steps");
  app.add_option("--u-wall", cfg.u_wall, "Lid or initial velocity");
  app.add_option("--porosity", cfg.porosity, "Particle bed porosity target");
  app.add_option("--bed-fraction", cfg.bed_fraction, "Riverbed height fraction");
  app.add_option("--diameter", cfg.diameter, "Particle diameter");
  app.add_option("--bandwidth", cfg.bandwidth, "Memory bandwidth for the model columns (bytes/s)");
  app.add_flag("--vtk", cfg.vtk, "Write VTK output to OUT/vtk");

  auto* run_cmd = app.add_subcommand("run", "Run one simulation and write OUT/run.csv");
  auto* sweep_cmd = app.add_subcommand("sweep-porosity", "Random-obstacle porosity sweep, writes OUT/sweep.csv");
  std::vector<double> phis{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  sweep_cmd->add_option("--phis", phis, "Porosities")->delimiter(',');
  auto* info_cmd = app.add_subcommand("info", "Print the memory-traffic model");
  int q = 19;
  double b_pdf = 8, b_idx = 4;
  bool csv = false;
  info_cmd->add_option("--q", q, "Stencil size");
  info_cmd->add_option("--b-pdf", b_pdf, "Bytes per PDF");
  info_cmd->add_option("--b-idx", b_idx, "Bytes per index");
  info_cmd->add_flag("--csv", csv, "Print CSV instead of the table");
  auto* convert_cmd = app.add_subcommand("convert", "bed|riverbed|MASK -> MASK file or .vtk preview");
  std::string src, dst;
  convert_cmd->add_option("source", src, "bed, riverbed or a voxel mask file")->required();
  convert_cmd->add_option("target", dst, "Output mask file, or .vtk for a preview")->required();

  std::vector<std::string> argv_store{"slbm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const bool config = dynamic_cast<const CLI::FileError*>(&e) != nullptr;
    const int code = config ? 5 : 2;
    err << "error[" << category(code) << "]: " << one_line(e.what()) << '\n';
    return code;
  }

  try {
    cfg.dims = parse_extent(dims, "dims");
    cfg.block = parse_extent(block, "block");
    const Extent f = parse_extent(frame, "frame");
    cfg.frame = {f.x, f.y, f.z};
    if (*run_cmd) {
      const RunRecord r = execute_run(cfg, out);
      write_csv_records({r}, ensure_dir(cfg.out) / "run.csv");
    } else if (*sweep_cmd) {
      const auto records = sweep_porosity(cfg, phis, out);
      write_csv_records(records, ensure_dir(cfg.out) / "sweep.csv");
    } else if (*info_cmd) {
      out << (csv ? model_report_csv(q, b_pdf, b_idx, cfg.bandwidth) : model_report(q, b_pdf, b_idx, cfg.bandwidth));
    } else if (*convert_cmd) {
      VoxelMask mask;
      if (src == "bed") {
        BedOptions opt;
        opt.dims = cfg.dims;
        opt.diameter = cfg.diameter;
        opt.target_porosity = cfg.porosity;
        opt.seed = cfg.seed;
        mask = voxelize(generate_particle_bed(opt), cfg.dims);
      } else if (src == "riverbed") {
        mask = make_riverbed(cfg.dims, cfg.bed_fraction, cfg.porosity, cfg.seed, cfg.diameter);
      } else {
        mask = read_voxel_mask(src);
      }
      if (std::filesystem::path(dst).extension() == ".vtk")
        write_mask_vtk(mask, dst);
      else
        write_voxel_mask(dst, mask);
      out << "wrote " << dst << ": " << mask.dims.x << 'x' << mask.dims.y << 'x' << mask.dims.z << ", porosity "
          << mask.porosity() << '\n';
    }
  } catch (const std::exception& e) {
    const int code = exit_code(e);
    err << "error[" << category(code) << "]: " << one_line(e.what()) << '\n';
    return code;
  }
  return 0;
}

}  // namespace slbm
