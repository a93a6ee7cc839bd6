#include "slbm/flag_field.hpp"

#include <algorithm>

#include "slbm/error.hpp"

namespace slbm {

FlagField::FlagField(Extent dims, int dim) : dims_(dims), dim_(dim), gz_(dim == 3 ? 1 : 0) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw ConfigError("block dimensions must be positive");
  if (dim == 2 && dims.z != 1) throw ConfigError("2D blocks must have z extent 1");
  px_ = dims.x + 2;
  py_ = dims.y + 2;
  tags_.assign(padded_cells(), tag::kFluid);
  neighbor_.fill(NeighborKind::Wall);
  // Ghost ring defaults to NoSlip walls.
  for (int k : neighbor_offsets()) set_wall(k, tag::kNoSlip);
}

Tag FlagField::add_wall_velocity(const Vec3& u) {
  for (std::size_t i = 0; i < wall_velocity_.size(); ++i)
    if (wall_velocity_[i] == u) return Tag(tag::kUbb + i);
  if (int(wall_velocity_.size()) >= tag::kMaxWallVelocities) throw ConfigError("too many distinct wall velocities");
  wall_velocity_.push_back(u);
  return Tag(tag::kUbb + wall_velocity_.size() - 1);
}

int FlagField::offset_of(const Coord& c) const {
  Coord d{};
  for (int a = 0; a < 3; ++a) d[a] = c[a] < 0 ? -1 : (c[a] >= dims_[a] ? 1 : 0);
  return offset_index(d);
}

std::size_t FlagField::count_fluid() const {
  std::size_t n = 0;
  for_each_interior([&](const Coord& c) { n += at(c) == tag::kFluid; });
  return n;
}

double FlagField::porosity() const { return double(count_fluid()) / double(dims_.cells()); }

std::vector<int> FlagField::neighbor_offsets() const {
  std::vector<int> out;
  for (int k = 0; k < 27; ++k) {
    if (k == kCenterOffset) continue;
    if (dim_ == 2 && offset_from_index(k)[2] != 0) continue;
    out.push_back(k);
  }
  return out;
}

void FlagField::make_periodic() {
  for (int k : neighbor_offsets()) {
    neighbor_[k] = NeighborKind::Self;
    for_each_ghost(k, [&](const Coord& g) {
      Coord w = g;
      for (int a = 0; a < 3; ++a) w[a] = (g[a] + dims_[a]) % dims_[a];
      const Tag t = at(w);
      set(g, t == tag::kFluid ? tag::kGhost : t);
    });
  }
}

void FlagField::set_wall(int offset, Tag t) {
  neighbor_[offset] = NeighborKind::Wall;
  for_each_ghost(offset, [&](const Coord& g) { set(g, t); });
}

bool in_frame(const Coord& c, const Extent& dims, const FrameWidth& w, int dim) {
  for (int a = 0; a < dim; ++a) {
    const int width = std::min(w[a], dims[a]);
    if (c[a] < width || c[a] >= dims[a] - width) return true;
  }
  return false;
}

}  // namespace slbm
