#include "slbm/geometry_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "slbm/error.hpp"
#include "slbm/exchange.hpp"

namespace slbm {

std::size_t VoxelMask::count_fluid() const { return std::size_t(std::count(fluid.begin(), fluid.end(), true)); }

double VoxelMask::porosity() const { return fluid.empty() ? 0.0 : double(count_fluid()) / double(fluid.size()); }

namespace {

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

/// Marks the cells whose centers lie inside the sphere; returns how many were
/// fluid before.
std::size_t carve(VoxelMask& mask, const Sphere& s, const Vec3& scale) {
  const double r = 0.5 * s.diameter;
  int lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, int(std::floor((s.center[a] - r) * scale[a] - 0.5)));
    hi[a] = std::min(mask.dims[a] - 1, int(std::ceil((s.center[a] + r) * scale[a] - 0.5)));
  }
  std::size_t n = 0;
  for (int z = lo[2]; z <= hi[2]; ++z)
    for (int y = lo[1]; y <= hi[1]; ++y)
      for (int x = lo[0]; x <= hi[0]; ++x) {
        const double dx = (x + 0.5) / scale[0] - s.center[0];
        const double dy = (y + 0.5) / scale[1] - s.center[1];
        const double dz = (z + 0.5) / scale[2] - s.center[2];
        if (dx * dx + dy * dy + dz * dz >= r * r) continue;
        auto bit = mask.fluid[mask.linear(x, y, z)];
        if (bit) {
          bit = false;
          ++n;
        }
      }
  return n;
}

}  // namespace

SpherePack generate_particle_bed(const BedOptions& opt) {
  const Extent& e = opt.dims;
  if (e.x < 1 || e.y < 1 || e.z < 1) throw ConfigError("bed extent must be positive");
  if (opt.diameter <= 0 || opt.diameter >= std::min({e.x, e.y, e.z}))
    throw ConfigError("particle diameter must be positive and below the smallest extent");

  SpherePack pack;
  pack.extent = {double(e.x), double(e.y), double(e.z)};
  pack.seed = opt.seed;
  std::mt19937_64 rng(opt.seed);

  // FCC sites with nearest-neighbor spacing 1.04 d; jitter keeps a gap.
  const double d = opt.diameter;
  const double a = std::sqrt(2.0) * 1.04 * d;
  const double jitter = 0.011 * d;
  static constexpr double basis[4][3] = {{0, 0, 0}, {0.5, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0.5}};
  std::vector<Vec3> sites;
  const int nx = int(std::ceil(e.x / a)) + 1, ny = int(std::ceil(e.y / a)) + 1, nz = int(std::ceil(e.z / a)) + 1;
  const Vec3 shift{uniform01(rng) * a, uniform01(rng) * a, uniform01(rng) * a};
  for (int k = -1; k < nz; ++k)
    for (int j = -1; j < ny; ++j)
      for (int i = -1; i < nx; ++i)
        for (const auto& b : basis) {
          Vec3 p{(i + b[0]) * a + shift[0], (j + b[1]) * a + shift[1], (k + b[2]) * a + shift[2]};
          for (int ax = 0; ax < 3; ++ax) p[ax] += (2 * uniform01(rng) - 1) * jitter;
          const double r = 0.5 * d;
          if (p[0] < -r || p[0] >= e.x + r || p[1] < -r || p[1] >= e.y + r || p[2] < -r || p[2] >= e.z + r)
            continue;
          sites.push_back(p);
        }
  std::shuffle(sites.begin(), sites.end(), rng);

  VoxelMask mask(e, true);
  const Vec3 scale{1, 1, 1};
  std::size_t fluid = mask.fluid.size();
  const double n = double(mask.fluid.size());
  for (const auto& p : sites) {
    if (opt.count > 0 ? pack.spheres.size() >= opt.count : double(fluid) / n <= opt.target_porosity) break;
    const Sphere s{p, d};
    fluid -= carve(mask, s, scale);
    pack.spheres.push_back(s);
  }
  pack.achieved_porosity = double(fluid) / n;
  if (opt.count > 0) {
    if (pack.spheres.size() < opt.count)
      throw ConfigError("only " + std::to_string(sites.size()) + " particle sites fit, requested " +
                        std::to_string(opt.count));
  } else if (pack.achieved_porosity > opt.target_porosity + opt.tolerance) {
    throw ConfigError("porosity target " + std::to_string(opt.target_porosity) + " unreachable, densest bed reaches " +
                      std::to_string(pack.achieved_porosity));
  }
  return pack;
}

VoxelMask voxelize(const SpherePack& pack, Extent dims) {
  VoxelMask mask(dims, true);
  if (pack.spheres.empty()) return mask;
  const Vec3 scale{dims.x / pack.extent[0], dims.y / pack.extent[1], dims.z / pack.extent[2]};
  for (const auto& s : pack.spheres) carve(mask, s, scale);
  return mask;
}

VoxelMask make_riverbed(Extent dims, double bed_fraction, double bed_porosity, std::uint64_t seed, double diameter) {
  if (bed_fraction < 0 || bed_fraction > 1) throw ConfigError("bed fraction must lie in [0, 1]");
  VoxelMask mask(dims, true);
  const int h = int(std::lround(bed_fraction * dims.z));
  if (h == 0) return mask;
  BedOptions opt;
  opt.dims = {dims.x, dims.y, h};
  opt.diameter = diameter;
  opt.target_porosity = bed_porosity;
  opt.seed = seed;
  const VoxelMask bed = voxelize(generate_particle_bed(opt), opt.dims);
  for (int z = 0; z < h; ++z)
    for (int y = 0; y < dims.y; ++y)
      for (int x = 0; x < dims.x; ++x) mask.fluid[mask.linear(x, y, z)] = bed.fluid[bed.linear(x, y, z)];
  return mask;
}

VoxelMask random_obstacles(Extent dims, double phi, std::uint64_t seed) {
  if (phi < 0 || phi > 1) throw ConfigError("porosity must lie in [0, 1]");
  VoxelMask mask(dims, true);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < mask.fluid.size(); ++i) mask.fluid[i] = uniform01(rng) < phi;
  return mask;
}

// --- voxel mask files

namespace {

constexpr char kMagic[8] = {'S', 'L', 'B', 'M', 'V', 'O', 'X', '1'};
constexpr std::size_t kHeader = 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_voxel_mask(const VoxelMask& mask) {
  if (mask.fluid.size() != mask.dims.cells()) throw ConfigError("mask size does not match its dims");
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_u32(out, std::uint32_t(mask.dims.x));
  put_u32(out, std::uint32_t(mask.dims.y));
  put_u32(out, std::uint32_t(mask.dims.z));
  out.resize(kHeader + (mask.fluid.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < mask.fluid.size(); ++i)
    if (mask.fluid[i]) out[kHeader + i / 8] |= std::uint8_t(0x80u >> (i % 8));
  return out;
}

VoxelMask decode_voxel_mask(const std::vector<std::uint8_t>& bytes) {
  for (std::size_t i = 0; i < 8; ++i) {
    if (i >= bytes.size()) throw FormatError("truncated voxel mask header", bytes.size());
    if (bytes[i] != std::uint8_t(kMagic[i])) throw FormatError("bad voxel mask magic", i);
  }
  if (bytes.size() < kHeader) throw FormatError("truncated voxel mask header", bytes.size());
  const std::uint32_t x = get_u32(bytes, 8), y = get_u32(bytes, 12), z = get_u32(bytes, 16);
  if (x == 0 || y == 0 || z == 0 || x > (1u << 20) || y > (1u << 20) || z > (1u << 20))
    throw FormatError("bad voxel mask dimensions", 8);
  VoxelMask mask(Extent{int(x), int(y), int(z)}, false);
  const std::size_t need = kHeader + (mask.fluid.size() + 7) / 8;
  if (bytes.size() < need) throw FormatError("truncated voxel mask payload", bytes.size());
  if (bytes.size() > need) throw FormatError("trailing bytes after voxel mask", need);
  for (std::size_t i = 0; i < mask.fluid.size(); ++i) mask.fluid[i] = (bytes[kHeader + i / 8] >> (7 - i % 8)) & 1u;
  return mask;
}

void write_voxel_mask(const std::filesystem::path& path, const VoxelMask& mask) {
  const auto bytes = encode_voxel_mask(mask);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

VoxelMask read_voxel_mask(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_voxel_mask(bytes);
}

Geometry geometry_from_mask(const VoxelMask& mask, int dim) {
  Geometry g(mask.dims, dim);
  for (int z = 0; z < mask.dims.z; ++z)
    for (int y = 0; y < mask.dims.y; ++y)
      for (int x = 0; x < mask.dims.x; ++x)
        g.set({x, y, z}, mask.fluid[mask.linear(x, y, z)] ? tag::kFluid : tag::kNoSlip);
  return g;
}

// --- VTK

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  return os;
}

}  // namespace

void write_vtk(Domain& domain, const std::filesystem::path& dir) {
  settle(domain);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto manifest = open_out(dir / "manifest.txt");
  const Stencil& s = domain.stencil;
  for (const auto& b : domain.blocks) {
    const Extent& n = b.size;
    std::vector<double> rho(n.cells(), 0.0);
    std::vector<Vec3> u(n.cells(), Vec3{0, 0, 0});
    auto lin = [&](const Coord& c) { return std::size_t(c[0]) + std::size_t(n.x) * (c[1] + std::size_t(n.y) * c[2]); };
    if (b.kind == LayoutKind::Dense) {
      const auto f = dense_macroscopic_field(*b.dense, b.flags, s);
      rho = f.rho;
      u = f.u;
    } else {
      const auto m = sparse_macroscopics(*b.sparse, s);
      for (std::size_t i = 0; i < m.size(); ++i) {
        rho[lin(b.sparse->cell_coords[i])] = m[i].rho;
        u[lin(b.sparse->cell_coords[i])] = m[i].u;
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "block_%05d.vtk", b.id);
    auto os = open_out(dir / name);
    os << "# vtk DataFile Version 3.0\nblock " << b.id << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << n.x << ' ' << n.y << ' ' << n.z << '\n';
    os << "ORIGIN " << b.origin[0] << ' ' << b.origin[1] << ' ' << b.origin[2] << '\n';
    os << "SPACING 1 1 1\nPOINT_DATA " << n.cells() << '\n';
    os << std::setprecision(12);
    os << "SCALARS density double 1\nLOOKUP_TABLE default\n";
    for (double r : rho) os << r << '\n';
    os << "VECTORS velocity double\n";
    for (const auto& v : u) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    if (!os) throw IoError("write failed: " + (dir / name).string());
    manifest << name << ' ' << b.origin[0] << ' ' << b.origin[1] << ' ' << b.origin[2] << ' '
             << (b.kind == LayoutKind::Dense ? "dense" : "sparse") << '\n';
  }
  if (!manifest) throw IoError("write failed: manifest.txt");
}

void write_mask_vtk(const VoxelMask& mask, const std::filesystem::path& file) {
  auto os = open_out(file);
  os << "# vtk DataFile Version 3.0\nvoxel mask\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << mask.dims.x << ' ' << mask.dims.y << ' ' << mask.dims.z << '\n';
  os << "ORIGIN 0 0 0\nSPACING 1 1 1\nPOINT_DATA " << mask.fluid.size() << '\n';
  os << "SCALARS fluid unsigned_char 1\nLOOKUP_TABLE default\n";
  for (bool f : mask.fluid) os << (f ? '1' : '0') << '\n';
  if (!os) throw IoError("write failed: " + file.string());
}

// --- CSV

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "run_id",         "layout",       "pattern",       "porosity",          "blocks",
      "cells",          "fluid_cells",  "steps",         "cell_visits",       "fluid_visits",
      "pdf_accesses",   "idx_reads",    "exchanged_values", "model_bytes_per_cell", "model_memory_bytes",
      "model_roofline_flups", "wall_seconds", "fluid_updates_per_s"};
  return cols;
}

std::string format_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n' << std::setprecision(17);
  for (const auto& r : records) {
    for (const std::string* s : {&r.run_id, &r.layout, &r.pattern})
      if (s->find_first_of(",\n\"") != std::string::npos) throw ConfigError("CSV text field contains a separator: " + *s);
    os << r.run_id << ',' << r.layout << ',' << r.pattern << ',' << r.porosity << ',' << r.blocks << ',' << r.cells
       << ',' << r.fluid_cells << ',' << r.steps << ',' << r.cell_visits << ',' << r.fluid_visits << ','
       << r.pdf_accesses << ',' << r.idx_reads << ',' << r.exchanged_values << ',' << r.model_bytes_per_cell << ','
       << r.model_memory_bytes << ',' << r.model_roofline_flups << ',' << r.wall_seconds << ','
       << r.fluid_updates_per_s << '\n';
  }
  return os.str();
}

std::vector<RunRecord> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::uint64_t offset = 0;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(is, line)) throw FormatError("empty CSV", 0);
  if (split(line) != csv_columns()) throw FormatError("CSV header does not match the schema", 0);
  offset += line.size() + 1;
  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    const auto f = split(line);
    if (f.size() != csv_columns().size()) throw FormatError("CSV row has " + std::to_string(f.size()) + " fields", offset);
    try {
      RunRecord r;
      r.run_id = f[0];
      r.layout = f[1];
      r.pattern = f[2];
      r.porosity = std::stod(f[3]);
      std::uint64_t* ints[] = {&r.blocks, &r.cells, &r.fluid_cells, &r.steps, &r.cell_visits, &r.fluid_visits,
                               &r.pdf_accesses, &r.idx_reads, &r.exchanged_values};
      for (std::size_t i = 0; i < 9; ++i) *ints[i] = std::stoull(f[4 + i]);
      r.model_bytes_per_cell = std::stod(f[13]);
      r.model_memory_bytes = std::stod(f[14]);
      r.model_roofline_flups = std::stod(f[15]);
      r.wall_seconds = std::stod(f[16]);
      r.fluid_updates_per_s = std::stod(f[17]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("bad number in CSV row", offset);
    }
    offset += line.size() + 1;
  }
  return out;
}

void write_csv_records(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  const std::string text = format_csv(records);
  auto os = open_out(path);
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<RunRecord> read_csv_records(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace slbm
