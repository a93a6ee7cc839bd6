#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "slbm/domain.hpp"
#include "slbm/exchange.hpp"
#include "slbm/geometry_io.hpp"

namespace slbm::testing {

inline DomainOptions options(Extent block, LayoutPolicy policy, Pattern pattern, CollisionParams params) {
  DomainOptions o;
  o.block_size = block;
  o.policy = policy;
  o.pattern = pattern;
  o.params = params;
  return o;
}

/// Random obstacles, periodic on every axis.
inline Geometry random_geometry(Extent dims, double phi, std::uint64_t seed, int dim) {
  Geometry g = geometry_from_mask(random_obstacles(dims, phi, seed), dim);
  for (int a = 0; a < dim; ++a) g.set_periodic(a, true);
  return g;
}

/// Lower half random obstacles, upper half free flow under a moving lid;
/// periodic in x and y.
inline Geometry layered_geometry(Extent dims, double phi, std::uint64_t seed) {
  VoxelMask m = random_obstacles(dims, phi, seed);
  for (int z = dims.z / 2; z < dims.z; ++z)
    for (int y = 0; y < dims.y; ++y)
      for (int x = 0; x < dims.x; ++x) m.fluid[m.linear(x, y, z)] = true;
  Geometry g = geometry_from_mask(m, 3);
  g.set_periodic(0, true);
  g.set_periodic(1, true);
  g.set_face(5, g.add_wall_velocity({0.05, 0.02, 0.0}));
  return g;
}

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Equilibrium with a drift velocity, times a position-keyed perturbation, so
/// every partition of the same geometry starts from the same state.
inline void perturbed_init(Domain& d, double amplitude = 0.05) {
  const auto feq = equilibrium({1.0, {0.03, 0.01, 0.02}}, d.stencil);
  init_pdfs(d, [&](const Coord& g, int i) {
    const std::uint64_t h = mix((std::uint64_t(g[0]) << 40) ^ (std::uint64_t(g[1]) << 20) ^ std::uint64_t(g[2]) ^
                                (std::uint64_t(i) << 58));
    const double r = double(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    return feq[i] * (1.0 + amplitude * r);
  });
}

inline double max_abs_diff(Domain& a, Domain& b) {
  const FluidState x = gather_fluid_state(a), y = gather_fluid_state(b);
  if (x.coords != y.coords || x.pdfs.size() != y.pdfs.size()) return std::numeric_limits<double>::infinity();
  double m = 0;
  for (std::size_t i = 0; i < x.pdfs.size(); ++i) {
    const double d = std::abs(x.pdfs[i] - y.pdfs[i]);
    if (!(d <= m)) m = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
  }
  return m;
}

/// 2D Couette cell: periodic in x, resting wall at y = -1/2, lid at y = n - 1/2.
inline Domain couette_domain(const Stencil& s, int n, double u_wall, double omega, LayoutPolicy policy,
                             Pattern pattern, Extent block = {0, 0, 0}) {
  Geometry g({n, n, 1}, 2);
  g.set_periodic(0, true);
  g.set_face(3, g.add_wall_velocity({u_wall, 0, 0}));
  if (block.x == 0) block = {n, n, 1};
  Domain d = partition(g, s, options(block, policy, pattern, CollisionParams::srt(omega)));
  init_equilibrium(d, 1.0, {0, 0, 0});
  return d;
}

/// x-averaged u_x per row y of a 2D domain.
inline std::vector<double> mean_ux_profile(Domain& d, int ny) {
  const FluidState st = gather_fluid_state(d);
  const int q = d.stencil.q;
  std::vector<double> sum(ny, 0.0);
  std::vector<int> count(ny, 0);
  for (std::size_t c = 0; c < st.coords.size(); ++c) {
    const auto m = macroscopic(std::span<const double>(st.pdfs.data() + c * q, std::size_t(q)), d.stencil);
    sum[st.coords[c][1]] += m.u[0];
    count[st.coords[c][1]] += 1;
  }
  for (int y = 0; y < ny; ++y) sum[y] /= count[y] ? count[y] : 1;
  return sum;
}

}  // namespace slbm::testing
