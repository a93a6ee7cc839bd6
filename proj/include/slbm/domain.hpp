#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slbm/dense_engine.hpp"
#include "slbm/flag_field.hpp"
#include "slbm/lbm_core.hpp"
#include "slbm/sparse_engine.hpp"
#include "slbm/stencil.hpp"

namespace slbm {

/// Global voxel geometry. Cells outside the box wrap on periodic axes and take
/// the face tag otherwise.
class Geometry {
 public:
  Geometry() = default;
  Geometry(Extent dims, int dim);

  const Extent& dims() const { return dims_; }
  int dim() const { return dim_; }

  Tag at(const Coord& c) const;
  void set(const Coord& c, Tag t) { tags_[linear(c)] = t; }
  std::size_t linear(const Coord& c) const {
    return std::size_t(c[0]) + std::size_t(dims_.x) * (std::size_t(c[1]) + std::size_t(dims_.y) * std::size_t(c[2]));
  }

  Tag add_wall_velocity(const Vec3& u);
  const std::vector<Vec3>& wall_velocities() const { return wall_velocity_; }

  void set_periodic(int axis, bool on) { periodic_[axis] = on; }
  bool periodic(int axis) const { return periodic_[axis]; }
  /// Tag for cells beyond face 2*axis (low side) or 2*axis+1 (high side).
  void set_face(int face, Tag t) { face_[face] = t; }
  Tag face(int face) const { return face_[face]; }

  std::size_t count_fluid() const;
  double porosity() const;

 private:
  Extent dims_{};
  int dim_ = 3;
  std::vector<Tag> tags_;
  std::vector<Vec3> wall_velocity_;
  std::array<bool, 3> periodic_{false, false, false};
  std::array<Tag, 6> face_{tag::kNoSlip, tag::kNoSlip, tag::kNoSlip, tag::kNoSlip, tag::kNoSlip, tag::kNoSlip};
};

enum class LayoutKind { Dense, Sparse };

struct LayoutPolicy {
  enum class Mode { AllSparse, AllDense, Hybrid } mode = Mode::AllSparse;
  double threshold = 0.8;  // phi_S, hybrid only

  static LayoutPolicy sparse() { return {Mode::AllSparse, 0.8}; }
  static LayoutPolicy dense() { return {Mode::AllDense, 0.8}; }
  static LayoutPolicy hybrid(double phi_s = 0.8) { return {Mode::Hybrid, phi_s}; }
  std::string name() const;
};

/// Precomputed ghost-exchange pairs for one neighbor offset of a block.
///
/// `send` lists (cell, dir) pairs of this block's own cells whose PDF streams
/// into the neighbor at this offset; `recv` lists (ghost cell, dir) pairs of
/// this block's ghost ring at this offset streaming into the block. Both are
/// ordered by cell position (z, y, x) then direction, so a sender's send list
/// and the receiver's recv list for the opposite offset match entry by entry.
/// `*_link` marks pairs connecting two fluid cells.
struct FaceLinks {
  struct Pair {
    std::uint32_t cell;  // padded cell index
    std::uint8_t dir;
  };
  std::vector<Pair> send, recv;
  std::vector<std::uint8_t> send_link, recv_link;
  std::vector<Slot> send_slots, recv_slots;  // sparse only, link pairs
  std::size_t send_link_count = 0, recv_link_count = 0;
};

struct Block {
  int id = 0;
  Coord grid_coord{};
  Coord origin{};
  Extent size{};
  LayoutKind kind = LayoutKind::Sparse;
  double porosity = 0.0;
  std::size_t n_fluid = 0;
  int worker = 0;

  FlagField flags;
  std::optional<DenseField> dense;
  std::optional<SparseLists> sparse;
  std::array<int, 27> neighbor;  // block id, or -1
  std::array<FaceLinks, 27> faces;
  KernelCounters counters;
};

struct ExchangeCounters {
  std::uint64_t messages = 0;
  std::uint64_t values = 0;        // payload values between distinct blocks
  std::uint64_t local_values = 0;  // periodic self-copies
  std::uint64_t forward_rounds = 0;
  std::uint64_t reverse_rounds = 0;
};

struct DomainOptions {
  Extent block_size{16, 16, 16};
  LayoutPolicy policy = LayoutPolicy::sparse();
  Pattern pattern = Pattern::Pull;
  CollisionParams params;
  std::optional<FrameWidth> frame_width;  // builds split lists when set
};

struct Domain {
  Stencil stencil;
  CollisionParams params;
  Pattern pattern = Pattern::Pull;
  LayoutPolicy policy;
  std::optional<FrameWidth> frame_width;
  Extent block_size{};
  Extent global_dims{};  // after padding
  std::array<int, 3> grid{1, 1, 1};
  std::vector<Block> blocks;
  int n_workers = 1;

  Parity parity = Parity::Even;
  std::uint64_t steps_done = 0;
  bool reverse_pending = false;
  ExchangeCounters exchange;
  double overlap_ratio = 0.0;

  std::size_t n_fluid() const;
  std::size_t n_cells() const;
  KernelCounters kernel_totals() const;
  void reset_counters();
};

/// Cuts the geometry into uniform blocks, drops all-solid blocks, builds the
/// neighbor tables, flags, payloads (per policy) and exchange registries. The
/// geometry is padded to a multiple of the block size with the tag of the
/// high face on each non-periodic axis.
Domain partition(const Geometry& geometry, const Stencil& stencil, const DomainOptions& options);

double porosity(const Block& block);

/// Assigns block kinds by porosity (Dense iff phi >= phi_s) and (re)builds the
/// payloads of blocks whose kind changed. New payloads start at rest.
void classify(Domain& domain, double phi_s);

/// Block workload in bytes per step: (2Q B_pdf + (Q-1) B_idx) phi N for sparse,
/// 2Q B_pdf N for dense.
double workload(const Block& block, int q, int b_pdf = 8, int b_idx = 4);

/// Position of a block coordinate on a 3D Hilbert curve covering the
/// enclosing power-of-two cube.
std::uint64_t hilbert_index(const Coord& c, int bits, int ndims = 3);

struct BalanceReport {
  std::vector<int> assignment;  // indexed like domain.blocks
  std::vector<double> load;     // per worker
  double mean = 0, stddev = 0, min = 0, max = 0;
  std::size_t inter_worker_faces = 0;  // locality metric
};

/// Hilbert-curve ordering plus greedy contiguous segments. Writes the
/// assignment into the blocks.
BalanceReport balance(Domain& domain, int n_workers);
/// Lexicographic block order, equal block counts per worker.
BalanceReport naive_assignment(Domain& domain, int n_workers);
/// Statistics of the current assignment.
BalanceReport assignment_report(const Domain& domain, int n_workers);

/// Sets all fluid PDFs to the equilibrium of (rho, u).
void init_equilibrium(Domain& domain, double rho, const Vec3& u);

/// Sets fluid PDFs from fn(global cell, direction).
template <class Fn>
void init_pdfs(Domain& domain, Fn&& fn);

/// Canonical PDFs of every fluid cell keyed by global position, gathered in
/// global (z, y, x) order. Completes a pending reverse exchange first.
struct FluidState {
  std::vector<Coord> coords;
  std::vector<double> pdfs;  // Q per cell
};
FluidState gather_fluid_state(Domain& domain);

double total_mass(Domain& domain);

// --- template implementation

template <class Fn>
void init_pdfs(Domain& domain, Fn&& fn) {
  const int q = domain.stencil.q;
  std::vector<double> f(q);
  for (auto& b : domain.blocks) {
    b.flags.for_each_interior([&](const Coord& c) {
      const Tag t = b.flags.at(c);
      const Coord g{b.origin[0] + c[0], b.origin[1] + c[1], b.origin[2] + c[2]};
      if (b.kind == LayoutKind::Dense) {
        const std::size_t cell = b.flags.index(c);
        if (t == tag::kFluid) {
          for (int i = 0; i < q; ++i) f[i] = fn(g, i);
        } else {
          for (int i = 0; i < q; ++i) f[i] = domain.stencil.w[i];
        }
        b.dense->store_cell(domain.stencil, cell, f.data());
      } else if (t == tag::kFluid) {
        for (int i = 0; i < q; ++i) f[i] = fn(g, i);
        const auto id = b.sparse->fluid_id[b.flags.index(c)];
        b.sparse->store_cell(domain.stencil, std::uint32_t(id), f.data());
      }
    });
  }
}

}  // namespace slbm
