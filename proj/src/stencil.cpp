#include "slbm/stencil.hpp"

#include <algorithm>

#include "slbm/error.hpp"

namespace slbm {
namespace {

int norm2(const Velocity& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

// Directions of the given squared norms, grouped by norm and sorted inside
// each group in descending (cx, cy, cz) order.
std::vector<Velocity> directions(int dim, std::initializer_list<int> norms) {
  std::vector<Velocity> out;
  for (int n : norms) {
    std::vector<Velocity> group;
    for (int x = -1; x <= 1; ++x)
      for (int y = -1; y <= 1; ++y)
        for (int z = (dim == 3 ? -1 : 0); z <= (dim == 3 ? 1 : 0); ++z) {
          Velocity v{x, y, z};
          if (norm2(v) == n) group.push_back(v);
        }
    std::sort(group.begin(), group.end(), std::greater<>());
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

Stencil assemble(std::string name, int dim, std::initializer_list<int> norms,
                 const std::vector<std::int64_t>& weight_by_norm, std::int64_t den) {
  Stencil s;
  s.name = std::move(name);
  s.dim = dim;
  s.c = directions(dim, norms);
  s.q = int(s.c.size());
  s.w_den = den;
  for (const auto& v : s.c) {
    const auto num = weight_by_norm[norm2(v)];
    s.w_num.push_back(num);
    s.w.push_back(double(num) / double(den));
  }
  s.inv.resize(s.q);
  for (int i = 0; i < s.q; ++i) {
    const Velocity opp{-s.c[i][0], -s.c[i][1], -s.c[i][2]};
    s.inv[i] = direction_of(s, opp);
  }
  return s;
}

}  // namespace

int direction_of(const Stencil& s, const Velocity& v) {
  for (int i = 0; i < s.q; ++i)
    if (s.c[i] == v) return i;
  return -1;
}

Stencil make_stencil(std::string_view name) {
  if (name == "D2Q5") return assemble("D2Q5", 2, {0, 1}, {2, 1}, 6);
  if (name == "D2Q9") return assemble("D2Q9", 2, {0, 1, 2}, {16, 4, 1}, 36);
  if (name == "D3Q19") return assemble("D3Q19", 3, {0, 1, 2}, {12, 2, 1}, 36);
  if (name == "D3Q27") return assemble("D3Q27", 3, {0, 1, 2, 3}, {64, 16, 4, 1}, 216);
  throw ConfigError("unknown stencil '" + std::string(name) + "'");
}

}  // namespace slbm
