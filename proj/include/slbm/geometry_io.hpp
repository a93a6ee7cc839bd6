#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slbm/domain.hpp"

namespace slbm {

struct Sphere {
  Vec3 center;
  double diameter;
};

struct SpherePack {
  Vec3 extent{0, 0, 0};
  std::vector<Sphere> spheres;
  std::uint64_t seed = 0;
  double achieved_porosity = 1.0;  // after voxelization at generation resolution
};

/// Binary fluid/solid voxel mask, x fastest.
struct VoxelMask {
  Extent dims;
  std::vector<bool> fluid;

  VoxelMask() = default;
  explicit VoxelMask(Extent d, bool value = true) : dims(d), fluid(d.cells(), value) {}
  std::size_t linear(int x, int y, int z) const {
    return std::size_t(x) + std::size_t(dims.x) * (std::size_t(y) + std::size_t(dims.y) * std::size_t(z));
  }
  std::size_t count_fluid() const;
  double porosity() const;
};

struct BedOptions {
  Extent dims{64, 64, 64};  // voxel resolution, one lattice unit per voxel
  double diameter = 8.0;
  double target_porosity = 0.36;
  std::size_t count = 0;  // > 0: place exactly this many spheres instead
  std::uint64_t seed = 1;
  double tolerance = 0.02;
};

/// Deterministic non-overlapping sphere bed. Candidate sites form a jittered
/// FCC lattice visited in seeded random order; spheres are added until the
/// voxelized porosity reaches the target. Throws ConfigError if the target
/// is below what the lattice can reach.
SpherePack generate_particle_bed(const BedOptions& opt);

/// Cell is solid iff its center lies inside a sphere. Lattice units are
/// scaled so that pack.extent maps onto `dims`.
VoxelMask voxelize(const SpherePack& pack, Extent dims);

/// Lower `bed_fraction` of the z extent is a particle bed, the rest fluid.
VoxelMask make_riverbed(Extent dims, double bed_fraction, double bed_porosity, std::uint64_t seed,
                        double diameter = 8.0);

/// Cell-wise Bernoulli obstacles: each cell is solid with probability 1 - phi.
VoxelMask random_obstacles(Extent dims, double phi, std::uint64_t seed);

/// Binary format: "SLBMVOX1", three little-endian u32 dims, then the bitset
/// (bit set = fluid, MSB first, x fastest) padded to a whole byte.
void write_voxel_mask(const std::filesystem::path& path, const VoxelMask& mask);
VoxelMask read_voxel_mask(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_voxel_mask(const VoxelMask& mask);
VoxelMask decode_voxel_mask(const std::vector<std::uint8_t>& bytes);

/// Wraps a mask into a geometry (solid cells NoSlip).
Geometry geometry_from_mask(const VoxelMask& mask, int dim = 3);

/// One legacy-VTK ASCII structured-points file per block (density, velocity)
/// plus manifest.txt listing them. Solid cells get density 0.
void write_vtk(Domain& domain, const std::filesystem::path& dir);
void write_mask_vtk(const VoxelMask& mask, const std::filesystem::path& file);

struct RunRecord {
  std::string run_id;
  std::string layout;
  std::string pattern;
  double porosity = 0;
  std::uint64_t blocks = 0;
  std::uint64_t cells = 0;
  std::uint64_t fluid_cells = 0;
  std::uint64_t steps = 0;
  std::uint64_t cell_visits = 0;
  std::uint64_t fluid_visits = 0;
  std::uint64_t pdf_accesses = 0;
  std::uint64_t idx_reads = 0;
  std::uint64_t exchanged_values = 0;
  double model_bytes_per_cell = 0;
  double model_memory_bytes = 0;
  double model_roofline_flups = 0;
  // wall-clock columns, always last
  double wall_seconds = 0;
  double fluid_updates_per_s = 0;
};

/// Column list of the CSV schema, in order.
const std::vector<std::string>& csv_columns();
std::string format_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_csv(const std::string& text);
void write_csv_records(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> read_csv_records(const std::filesystem::path& path);

}  // namespace slbm
