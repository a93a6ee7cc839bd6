#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "slbm/flag_field.hpp"
#include "slbm/lbm_core.hpp"
#include "slbm/stencil.hpp"

namespace slbm {

using Slot = std::uint32_t;
inline constexpr std::int32_t kNotFluid = -1;

/// A PDF appended for a moving-wall link: the wall cell's PDF in direction
/// `dir` that streams into fluid cell `cell`.
struct UbbSlot {
  Slot slot;
  Slot partner;  // the fluid cell's slot of the opposite direction
  std::uint32_t cell;
  std::uint8_t dir;
  double correction;
};

/// A PDF appended for a ghost link: ghost cell `ghost` streams into the block
/// along direction `dir`.
struct GhostSlot {
  Slot slot;
  std::uint8_t dir;
  Coord ghost;
};

/// Communication-hiding partition of the fluid cells.
struct SplitLists {
  std::vector<std::uint32_t> interior;
  std::vector<std::uint32_t> frame;
  FrameWidth frame_width;
};

/// Fluid-only PDF-list and index-list of one block.
///
/// PDF-list: Q direction groups back to back. Group q holds the n_fluid
/// values of direction q (fluid cells in (z, y, x) lexicographic order),
/// then that direction's appended UBB slots, then its ghost slots.
/// Index-list: for direction q >= 1 and fluid cell c,
/// idx[(q - 1) * n_fluid + c] is the absolute slot to pull f_q from.
struct SparseLists {
  int q = 0;
  std::uint32_t n_fluid = 0;
  Pattern pattern = Pattern::Pull;
  Parity parity = Parity::Even;

  std::vector<Slot> group_offset;  // q + 1 entries, last = total slots
  std::vector<double> pdf;
  std::vector<double> tmp_pdf;  // pull pattern only
  std::vector<Slot> idx;
  std::vector<Slot> center_idx;  // only with split lists
  std::vector<Coord> cell_coords;
  std::vector<UbbSlot> ubb_slots;
  std::array<std::vector<GhostSlot>, 27> ghost_slots;  // by neighbor offset
  std::optional<SplitLists> split;

  /// Padded-cell index -> fluid cell id or kNotFluid (setup and packing only).
  std::vector<std::int32_t> fluid_id;

  Slot slot(int dir, std::uint32_t cell) const { return group_offset[dir] + cell; }
  Slot pull_index(int dir, std::uint32_t cell) const { return idx[std::size_t(dir - 1) * n_fluid + cell]; }
  std::size_t appended(int dir) const { return group_offset[dir + 1] - group_offset[dir] - n_fluid; }
  std::size_t total_slots() const { return pdf.size(); }
  std::size_t allocated_pdfs() const { return pdf.size() + tmp_pdf.size(); }
  std::size_t allocated_indices() const { return idx.size(); }

  void load_cell(const Stencil& s, std::uint32_t cell, double* f) const;
  void store_cell(const Stencil& s, std::uint32_t cell, const double* f);
};

/// Builds the lists from a flag field. Throws EmptyBlock if there is no fluid.
SparseLists build_lists(const FlagField& flags, const Stencil& s, Pattern pattern,
                        std::optional<FrameWidth> split = std::nullopt);

/// Fused pull step over fluid cells into tmp_pdf. Swaps buffers when `phase`
/// is All or Frame.
void sparse_step_pull(SparseLists& lists, const CollisionParams& p, const Stencil& s, KernelCounters& counters,
                      Phase phase = Phase::All);

/// In-place AA step; the kernel flavor follows lists.parity. Flips the parity
/// when `phase` is All or Frame.
void sparse_step_aa(SparseLists& lists, const CollisionParams& p, const Stencil& s, KernelCounters& counters,
                    Phase phase = Phase::All);

/// Runs the pattern-appropriate kernel on one subset of cells.
void sparse_step_split(SparseLists& lists, const CollisionParams& p, const Stencil& s, KernelCounters& counters,
                       Phase phase);

/// Fills UBB slots with the bounced-back PDF of the adjacent fluid cell plus
/// the moving-wall correction. Call before pull steps and before AA streaming steps.
void refresh_boundary_slots(SparseLists& lists);

/// After an AA streaming step: moves the value pushed into each UBB slot back
/// into the fluid cell's opposite slot, adding the wall correction.
void fold_boundary_slots(SparseLists& lists);

void sparse_init_equilibrium(SparseLists& lists, const Stencil& s, double rho, const Vec3& u);

/// Per fluid cell density and velocity, in fluid-cell order.
std::vector<Macroscopics> sparse_macroscopics(const SparseLists& lists, const Stencil& s);

}  // namespace slbm
