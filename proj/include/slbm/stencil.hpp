#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace slbm {

using Velocity = std::array<int, 3>;

/// Discrete velocity set in lattice units (dx = dt = 1).
///
/// Direction ordering is global and shared by every layout: the center comes
/// first, then the axis-aligned directions, then the 2D diagonals, then the 3D
/// diagonals. Inside each group directions are sorted by (cx, cy, cz) in
/// descending lexicographic order, so opposite directions mirror each other
/// around the middle of the group. For D3Q19 this gives
///   0: ( 0, 0, 0)
///   1: ( 1, 0, 0)  2: ( 0, 1, 0)  3: ( 0, 0, 1)  4: ( 0, 0,-1)  5: ( 0,-1, 0)  6: (-1, 0, 0)
///   7: ( 1, 1, 0)  8: ( 1, 0, 1)  9: ( 1, 0,-1) 10: ( 1,-1, 0) 11: ( 0, 1, 1) 12: ( 0, 1,-1)
///  13: ( 0,-1, 1) 14: ( 0,-1,-1) 15: (-1, 1, 0) 16: (-1, 0, 1) 17: (-1, 0,-1) 18: (-1,-1, 0)
struct Stencil {
  std::string name;
  int dim = 0;
  int q = 0;
  std::vector<Velocity> c;
  std::vector<double> w;
  std::vector<int> inv;
  double cs2 = 1.0 / 3.0;

  // Exact rational weights: w[i] == w_num[i] / w_den.
  std::vector<std::int64_t> w_num;
  std::int64_t w_den = 1;
};

/// Builds one of D2Q5, D2Q9, D3Q19, D3Q27. Throws ConfigError otherwise.
Stencil make_stencil(std::string_view name);

/// Index of the direction with velocity `v`, or -1.
int direction_of(const Stencil& s, const Velocity& v);

}  // namespace slbm
