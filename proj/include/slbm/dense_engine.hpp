#pragma once

#include <vector>

#include "slbm/flag_field.hpp"
#include "slbm/lbm_core.hpp"
#include "slbm/stencil.hpp"

namespace slbm {

/// Direct-addressing PDF storage over all cells of a block plus its ghost ring,
/// structure-of-arrays: value (q, cell) lives at q * padded_cells + cell.
class DenseField {
 public:
  DenseField() = default;
  DenseField(const FlagField& flags, int q, Pattern pattern);

  int q() const { return q_; }
  Pattern pattern() const { return pattern_; }
  Parity parity() const { return parity_; }
  void set_parity(Parity p) { parity_ = p; }
  std::size_t plane_size() const { return plane_; }

  double& at(int dir, std::size_t cell) { return cur_[std::size_t(dir) * plane_ + cell]; }
  double at(int dir, std::size_t cell) const { return cur_[std::size_t(dir) * plane_ + cell]; }
  double* data() { return cur_.data(); }
  const double* data() const { return cur_.data(); }
  double* next_data() { return next_.data(); }

  /// Swaps the two buffers of the pull pattern.
  void swap() { cur_.swap(next_); }

  /// Number of PDF values allocated (both buffers).
  std::size_t allocated_pdfs() const { return cur_.size() + next_.size(); }

  /// Reads the Q PDFs of a cell in their physical meaning, honoring the AA
  /// opposite-slot convention after an odd number of steps.
  void load_cell(const Stencil& s, std::size_t cell, double* f) const;
  /// Stores PDFs given in physical meaning.
  void store_cell(const Stencil& s, std::size_t cell, const double* f);

 private:
  int q_ = 0;
  Pattern pattern_ = Pattern::Pull;
  Parity parity_ = Parity::Even;
  std::size_t plane_ = 0;
  std::vector<double> cur_, next_;
};

/// Fused stream-collide with pull streaming from the current buffer into the
/// next one. Fluid cells pull from x - c_i, bouncing back off NoSlip and UBB
/// neighbors; non-fluid cells copy themselves. The caller swaps buffers.
void dense_step_pull(DenseField& field, const FlagField& flags, const CollisionParams& p, const Stencil& s,
                     KernelCounters& counters, Phase phase = Phase::All, const FrameWidth& frame = {});

/// One in-place AA step. On an Even field this is the streaming kernel
/// (pull, collide, push back to the read locations); on an Odd field the
/// cell-local kernel. Flips the parity when `phase` is All or Frame.
void dense_step_aa(DenseField& field, const FlagField& flags, const CollisionParams& p, const Stencil& s,
                   KernelCounters& counters, Phase phase = Phase::All, const FrameWidth& frame = {});

struct MacroscopicField {
  Extent dims;
  std::vector<double> rho;
  std::vector<Vec3> u;
};

/// Per interior cell density and velocity (x fastest); non-fluid cells report 0.
MacroscopicField dense_macroscopic_field(const DenseField& field, const FlagField& flags, const Stencil& s);

/// Sets every interior cell to the equilibrium of (rho, u).
void dense_init_equilibrium(DenseField& field, const FlagField& flags, const Stencil& s, double rho, const Vec3& u);

}  // namespace slbm
