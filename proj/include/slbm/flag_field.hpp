#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "slbm/lbm_core.hpp"

namespace slbm {

using Coord = std::array<int, 3>;

struct Extent {
  int x = 1, y = 1, z = 1;
  std::size_t cells() const { return std::size_t(x) * std::size_t(y) * std::size_t(z); }
  int operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
  bool operator==(const Extent&) const = default;
};

/// Per-cell tag. Values >= kUbb encode a moving wall whose velocity is
/// wall_velocity[tag - kUbb].
using Tag = std::uint8_t;
namespace tag {
inline constexpr Tag kFluid = 0;
inline constexpr Tag kNoSlip = 1;
/// Ghost cell mirroring a fluid cell of a neighbor (or of this block, when periodic).
inline constexpr Tag kGhost = 2;
inline constexpr Tag kUbb = 3;
inline constexpr int kMaxWallVelocities = 255 - kUbb;
inline constexpr bool is_ubb(Tag t) { return t >= kUbb; }
inline constexpr bool is_wall(Tag t) { return t == kNoSlip || t >= kUbb; }
}  // namespace tag

/// Who provides the ghost cells in a neighbor direction.
enum class NeighborKind : std::uint8_t {
  Wall,    // domain boundary; ghost cells carry wall tags
  Self,    // periodic wrap onto this same block
  Remote,  // another block, filled by exchange
};

/// Neighbor offsets d in {-1,0,1}^3 are indexed as (dx+1) + 3(dy+1) + 9(dz+1).
inline constexpr int offset_index(const Coord& d) { return (d[0] + 1) + 3 * (d[1] + 1) + 9 * (d[2] + 1); }
inline constexpr Coord offset_from_index(int k) { return {k % 3 - 1, (k / 3) % 3 - 1, k / 9 - 1}; }
inline constexpr int kCenterOffset = 13;

/// Cell classification of one block including a ghost ring of width one
/// (only in x/y for 2D blocks).
class FlagField {
 public:
  FlagField() = default;
  FlagField(Extent dims, int dim);

  const Extent& dims() const { return dims_; }
  int dim() const { return dim_; }
  int ghost_z() const { return gz_; }
  Extent padded() const { return {dims_.x + 2, dims_.y + 2, dims_.z + 2 * gz_}; }
  std::size_t padded_cells() const { return padded().cells(); }

  /// Linear index of (x,y,z), each ranging over [-1, n] (z over [0, nz) in 2D).
  std::size_t index(int x, int y, int z) const {
    return std::size_t(x + 1) + std::size_t(px_) * (std::size_t(y + 1) + std::size_t(py_) * std::size_t(z + gz_));
  }
  std::size_t index(const Coord& c) const { return index(c[0], c[1], c[2]); }
  /// Linear index offset of a lattice velocity.
  std::ptrdiff_t stride(const Velocity& c) const {
    return c[0] + std::ptrdiff_t(px_) * (c[1] + std::ptrdiff_t(py_) * c[2]);
  }

  bool in_interior(const Coord& c) const {
    return c[0] >= 0 && c[0] < dims_.x && c[1] >= 0 && c[1] < dims_.y && c[2] >= 0 && c[2] < dims_.z;
  }
  bool in_padded(const Coord& c) const {
    return c[0] >= -1 && c[0] <= dims_.x && c[1] >= -1 && c[1] <= dims_.y && c[2] >= -gz_ &&
           c[2] < dims_.z + gz_;
  }

  Tag at(const Coord& c) const { return tags_[index(c)]; }
  Tag at_index(std::size_t i) const { return tags_[i]; }
  void set(const Coord& c, Tag t) { tags_[index(c)] = t; }

  /// Registers a wall velocity and returns its UBB tag.
  Tag add_wall_velocity(const Vec3& u);
  const Vec3& wall_velocity(Tag t) const { return wall_velocity_.at(t - tag::kUbb); }
  const std::vector<Vec3>& wall_velocities() const { return wall_velocity_; }
  void set_wall_velocities(std::vector<Vec3> v) { wall_velocity_ = std::move(v); }

  NeighborKind neighbor(int offset) const { return neighbor_[offset]; }
  void set_neighbor(int offset, NeighborKind k) { neighbor_[offset] = k; }

  /// Neighbor offset of a ghost cell, or kCenterOffset for interior cells.
  int offset_of(const Coord& c) const;

  std::size_t count_fluid() const;
  double porosity() const;

  /// Marks every neighbor as Self and mirrors ghost tags from the wrapped
  /// interior cells (fluid -> kGhost).
  void make_periodic();
  /// Sets the ghost cells of one neighbor offset to `t` and marks it as Wall.
  void set_wall(int offset, Tag t);

  /// Iterates interior cells in (z, y, x) lexicographic order.
  template <class Fn>
  void for_each_interior(Fn&& fn) const {
    for (int z = 0; z < dims_.z; ++z)
      for (int y = 0; y < dims_.y; ++y)
        for (int x = 0; x < dims_.x; ++x) fn(Coord{x, y, z});
  }
  /// Iterates ghost cells belonging to one neighbor offset in lexicographic order.
  template <class Fn>
  void for_each_ghost(int offset, Fn&& fn) const {
    const Coord d = offset_from_index(offset);
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      if (d[a] < 0) lo[a] = hi[a] = -1;
      else if (d[a] > 0) lo[a] = hi[a] = dims_[a];
      else { lo[a] = 0; hi[a] = dims_[a] - 1; }
    }
    for (int z = lo[2]; z <= hi[2]; ++z)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int x = lo[0]; x <= hi[0]; ++x) fn(Coord{x, y, z});
  }

  /// Offsets that exist for this dimensionality (26 in 3D, 8 in 2D).
  std::vector<int> neighbor_offsets() const;

 private:
  Extent dims_{};
  int dim_ = 3;
  int gz_ = 1;
  int px_ = 0, py_ = 0;
  std::vector<Tag> tags_;
  std::vector<Vec3> wall_velocity_;
  std::array<NeighborKind, 27> neighbor_{};
};

/// Frame/interior selection used by communication hiding.
enum class Phase { All, Interior, Frame };

struct FrameWidth {
  int x = 1, y = 1, z = 1;
  int operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
};

/// True iff the interior cell lies within `w` of the block boundary along some
/// axis (widths are clamped to the block size).
bool in_frame(const Coord& c, const Extent& dims, const FrameWidth& w, int dim);

struct KernelCounters {
  std::uint64_t cell_visits = 0;
  std::uint64_t fluid_visits = 0;
  std::uint64_t pdf_reads = 0;
  std::uint64_t pdf_writes = 0;
  std::uint64_t idx_reads = 0;

  KernelCounters& operator+=(const KernelCounters& o) {
    cell_visits += o.cell_visits;
    fluid_visits += o.fluid_visits;
    pdf_reads += o.pdf_reads;
    pdf_writes += o.pdf_writes;
    idx_reads += o.idx_reads;
    return *this;
  }
};

enum class Pattern { Pull, AA };
/// Completed steps modulo two. Under AA an Even field holds PDFs in their own
/// slots, an Odd field holds them in the opposite slots.
enum class Parity { Even, Odd };
inline Parity flip(Parity p) { return p == Parity::Even ? Parity::Odd : Parity::Even; }

}  // namespace slbm
