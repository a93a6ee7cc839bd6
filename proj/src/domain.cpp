#include "slbm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slbm/exchange.hpp"

namespace slbm {

// --- Geometry

Geometry::Geometry(Extent dims, int dim) : dims_(dims), dim_(dim), tags_(dims.cells(), tag::kFluid) {
  if (dim == 2 && dims.z != 1) throw ConfigError("2D geometry must have z extent 1");
}

Tag Geometry::at(const Coord& c) const {
  Coord w = c;
  for (int a = 0; a < 3; ++a) {
    if (w[a] >= 0 && w[a] < dims_[a]) continue;
    if (!periodic_[a]) return face_[2 * a + (w[a] < 0 ? 0 : 1)];
    w[a] = ((w[a] % dims_[a]) + dims_[a]) % dims_[a];
  }
  return tags_[linear(w)];
}

Tag Geometry::add_wall_velocity(const Vec3& u) {
  for (std::size_t i = 0; i < wall_velocity_.size(); ++i)
    if (wall_velocity_[i] == u) return Tag(tag::kUbb + i);
  if (int(wall_velocity_.size()) >= tag::kMaxWallVelocities) throw ConfigError("too many distinct wall velocities");
  wall_velocity_.push_back(u);
  return Tag(tag::kUbb + wall_velocity_.size() - 1);
}

std::size_t Geometry::count_fluid() const { return std::size_t(std::count(tags_.begin(), tags_.end(), tag::kFluid)); }

double Geometry::porosity() const { return double(count_fluid()) / double(dims_.cells()); }

std::string LayoutPolicy::name() const {
  switch (mode) {
    case Mode::AllSparse: return "sparse";
    case Mode::AllDense: return "dense";
    case Mode::Hybrid: return "hybrid";
  }
  return "?";
}

// --- Domain

std::size_t Domain::n_fluid() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.n_fluid;
  return n;
}

std::size_t Domain::n_cells() const { return blocks.size() * block_size.cells(); }

KernelCounters Domain::kernel_totals() const {
  KernelCounters k;
  for (const auto& b : blocks) k += b.counters;
  return k;
}

void Domain::reset_counters() {
  for (auto& b : blocks) b.counters = {};
  exchange = {};
}

namespace {

LayoutKind kind_for(const LayoutPolicy& policy, double phi) {
  switch (policy.mode) {
    case LayoutPolicy::Mode::AllSparse: return LayoutKind::Sparse;
    case LayoutPolicy::Mode::AllDense: return LayoutKind::Dense;
    case LayoutPolicy::Mode::Hybrid: return phi >= policy.threshold ? LayoutKind::Dense : LayoutKind::Sparse;
  }
  return LayoutKind::Sparse;
}

void build_payload(const Domain& d, Block& b) {
  b.dense.reset();
  b.sparse.reset();
  const auto feq = equilibrium({1.0, {0, 0, 0}}, d.stencil);
  if (b.kind == LayoutKind::Dense) {
    b.dense.emplace(b.flags, d.stencil.q, d.pattern);
    b.dense->set_parity(d.pattern == Pattern::AA ? d.parity : Parity::Even);
    b.flags.for_each_interior([&](const Coord& c) { b.dense->store_cell(d.stencil, b.flags.index(c), feq.data()); });
  } else {
    b.sparse.emplace(build_lists(b.flags, d.stencil, d.pattern, d.frame_width));
    b.sparse->parity = d.pattern == Pattern::AA ? d.parity : Parity::Even;
    sparse_init_equilibrium(*b.sparse, d.stencil, 1.0, {0, 0, 0});
  }
}

}  // namespace

Domain partition(const Geometry& geometry, const Stencil& stencil, const DomainOptions& options) {
  if (geometry.dim() != stencil.dim) throw ConfigError("geometry dimension does not match stencil " + stencil.name);
  options.params.validate();
  Domain d;
  d.stencil = stencil;
  d.params = options.params;
  d.pattern = options.pattern;
  d.policy = options.policy;
  d.frame_width = options.frame_width;
  if (d.frame_width) {
    const auto& w = *d.frame_width;
    if (w.x < 1 || w.y < 1 || (stencil.dim == 3 && w.z < 1)) throw ConfigError("frame widths must be at least 1");
  }
  Extent bs = options.block_size;
  if (stencil.dim == 2) bs.z = 1;
  if (bs.x < 1 || bs.y < 1 || bs.z < 1) throw ConfigError("block size must be positive");
  d.block_size = bs;

  const Extent& gd = geometry.dims();
  for (int a = 0; a < 3; ++a) {
    d.grid[a] = (gd[a] + bs[a] - 1) / bs[a];
    if (geometry.periodic(a) && gd[a] % bs[a] != 0)
      throw ConfigError("periodic axis " + std::to_string(a) + " must be a multiple of the block size");
  }
  d.global_dims = {d.grid[0] * bs.x, d.grid[1] * bs.y, d.grid[2] * bs.z};
  if (geometry.count_fluid() == 0) throw ConfigError("geometry has no fluid cells");

  // Padding cells take the high face tag, so a moving wall stays adjacent to the fluid.
  auto global_tag = [&](Coord c) -> Tag {
    for (int a = 0; a < 3; ++a)
      if (c[a] >= gd[a] && !geometry.periodic(a)) return geometry.face(2 * a + 1);
    return geometry.at(c);
  };

  std::vector<int> id_of(std::size_t(d.grid[0]) * d.grid[1] * d.grid[2], -1);
  auto grid_linear = [&](const Coord& g) { return std::size_t(g[0]) + std::size_t(d.grid[0]) * (g[1] + std::size_t(d.grid[1]) * g[2]); };

  for (int bz = 0; bz < d.grid[2]; ++bz)
    for (int by = 0; by < d.grid[1]; ++by)
      for (int bx = 0; bx < d.grid[0]; ++bx) {
        const Coord origin{bx * bs.x, by * bs.y, bz * bs.z};
        std::size_t nf = 0;
        for (int z = 0; z < bs.z; ++z)
          for (int y = 0; y < bs.y; ++y)
            for (int x = 0; x < bs.x; ++x) nf += global_tag({origin[0] + x, origin[1] + y, origin[2] + z}) == tag::kFluid;
        if (nf == 0) continue;  // all-solid blocks are discarded
        Block b;
        b.id = int(d.blocks.size());
        b.grid_coord = {bx, by, bz};
        b.origin = origin;
        b.size = bs;
        b.n_fluid = nf;
        b.porosity = double(nf) / double(bs.cells());
        id_of[grid_linear(b.grid_coord)] = b.id;
        d.blocks.push_back(std::move(b));
      }

  for (auto& b : d.blocks) {
    b.flags = FlagField(bs, stencil.dim);
    b.flags.set_wall_velocities(geometry.wall_velocities());
    b.flags.for_each_interior([&](const Coord& c) {
      b.flags.set(c, global_tag({b.origin[0] + c[0], b.origin[1] + c[1], b.origin[2] + c[2]}));
    });
    b.neighbor.fill(-1);
    for (int k : b.flags.neighbor_offsets()) {
      const Coord off = offset_from_index(k);
      Coord nb{};
      bool outside = false;
      for (int a = 0; a < 3; ++a) {
        nb[a] = b.grid_coord[a] + off[a];
        if (nb[a] < 0 || nb[a] >= d.grid[a]) {
          if (geometry.periodic(a))
            nb[a] = (nb[a] + d.grid[a]) % d.grid[a];
          else
            outside = true;
        }
      }
      const int nid = outside ? -1 : id_of[grid_linear(nb)];
      b.neighbor[k] = nid;
      const NeighborKind kind = nid < 0 ? NeighborKind::Wall : (nid == b.id ? NeighborKind::Self : NeighborKind::Remote);
      b.flags.set_neighbor(k, kind);
      b.flags.for_each_ghost(k, [&](const Coord& g) {
        Tag t = global_tag({b.origin[0] + g[0], b.origin[1] + g[1], b.origin[2] + g[2]});
        if (t == tag::kFluid) {
          if (kind == NeighborKind::Wall) throw ConfigError("fluid cell beyond a wall face");
          t = tag::kGhost;
        }
        b.flags.set(g, t);
      });
    }
    b.kind = kind_for(d.policy, b.porosity);
    build_payload(d, b);
  }
  for (auto& b : d.blocks) build_face_links(d, b);
  return d;
}

double porosity(const Block& block) { return double(block.n_fluid) / double(block.size.cells()); }

void classify(Domain& domain, double phi_s) {
  domain.policy = LayoutPolicy::hybrid(phi_s);
  settle(domain);
  bool changed = false;
  for (auto& b : domain.blocks) {
    const LayoutKind k = kind_for(domain.policy, b.porosity);
    const bool has_payload = k == LayoutKind::Dense ? b.dense.has_value() : b.sparse.has_value();
    if (k == b.kind && has_payload) continue;
    b.kind = k;
    build_payload(domain, b);
    changed = true;
  }
  if (changed)
    for (auto& b : domain.blocks) build_face_links(domain, b);
}

double workload(const Block& block, int q, int b_pdf, int b_idx) {
  const double n = double(block.size.cells());
  if (block.kind == LayoutKind::Dense) return double(2 * q * b_pdf) * n;
  return double(2 * q * b_pdf + (q - 1) * b_idx) * block.porosity * n;
}

// Skilling, "Programming the Hilbert curve" (AIP Conf. Proc. 707, 2004).
std::uint64_t hilbert_index(const Coord& c, int bits, int ndims) {
  std::array<std::uint32_t, 3> x{std::uint32_t(c[0]), std::uint32_t(c[1]), std::uint32_t(c[2])};
  const std::uint32_t m = 1u << (bits - 1);
  for (std::uint32_t q = m; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 0; i < ndims; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  for (int i = 1; i < ndims; ++i) x[i] ^= x[i - 1];
  std::uint32_t t = 0;
  for (std::uint32_t q = m; q > 1; q >>= 1)
    if (x[ndims - 1] & q) t ^= q - 1;
  for (int i = 0; i < ndims; ++i) x[i] ^= t;
  std::uint64_t h = 0;
  for (int b = bits - 1; b >= 0; --b)
    for (int i = 0; i < ndims; ++i) h = (h << 1) | ((x[i] >> b) & 1u);
  return h;
}

BalanceReport assignment_report(const Domain& domain, int n_workers) {
  BalanceReport r;
  r.load.assign(std::size_t(n_workers), 0.0);
  for (const auto& b : domain.blocks) {
    r.assignment.push_back(b.worker);
    r.load[std::size_t(b.worker)] += workload(b, domain.stencil.q);
  }
  const double n = double(n_workers);
  r.mean = std::accumulate(r.load.begin(), r.load.end(), 0.0) / n;
  double var = 0;
  for (double l : r.load) var += (l - r.mean) * (l - r.mean);
  r.stddev = std::sqrt(var / n);
  r.min = *std::min_element(r.load.begin(), r.load.end());
  r.max = *std::max_element(r.load.begin(), r.load.end());
  // Face area between blocks on different workers, each pair counted once.
  for (const auto& b : domain.blocks) {
    for (int a = 0; a < domain.stencil.dim; ++a) {
      Coord off{0, 0, 0};
      off[a] = 1;
      const int nid = b.neighbor[offset_index(off)];
      if (nid < 0 || nid == b.id || domain.blocks[nid].worker == b.worker) continue;
      r.inter_worker_faces += b.size.cells() / std::size_t(b.size[a]);
    }
  }
  return r;
}

BalanceReport balance(Domain& domain, int n_workers) {
  if (n_workers < 1) throw ConfigError("need at least one worker");
  domain.n_workers = n_workers;
  int extent = std::max({domain.grid[0], domain.grid[1], domain.grid[2]});
  int bits = 1;
  while ((1 << bits) < extent) ++bits;
  const int ndims = domain.grid[2] == 1 ? 2 : 3;
  std::vector<std::pair<std::uint64_t, int>> order;
  for (const auto& b : domain.blocks) order.push_back({hilbert_index(b.grid_coord, bits, ndims), b.id});
  std::sort(order.begin(), order.end());

  double total = 0;
  for (const auto& b : domain.blocks) total += workload(b, domain.stencil.q);
  double prefix = 0;
  for (const auto& [h, id] : order) {
    auto& b = domain.blocks[id];
    const double w = workload(b, domain.stencil.q);
    const double pos = total > 0 ? (prefix + 0.5 * w) * n_workers / total : 0.0;
    b.worker = std::min(n_workers - 1, int(pos));
    prefix += w;
  }
  return assignment_report(domain, n_workers);
}

BalanceReport naive_assignment(Domain& domain, int n_workers) {
  if (n_workers < 1) throw ConfigError("need at least one worker");
  domain.n_workers = n_workers;
  const std::size_t n = domain.blocks.size();
  for (std::size_t i = 0; i < n; ++i) domain.blocks[i].worker = int(i * std::size_t(n_workers) / n);
  return assignment_report(domain, n_workers);
}

void init_equilibrium(Domain& domain, double rho, const Vec3& u) {
  settle(domain);
  const auto feq = equilibrium({rho, u}, domain.stencil);
  init_pdfs(domain, [&](const Coord&, int i) { return feq[i]; });
}

FluidState gather_fluid_state(Domain& domain) {
  settle(domain);
  const int q = domain.stencil.q;
  struct Entry {
    Coord key;  // (z, y, x)
    std::size_t offset;
  };
  FluidState raw;
  std::vector<Entry> entries;
  std::vector<double> f(q);
  for (const auto& b : domain.blocks) {
    b.flags.for_each_interior([&](const Coord& c) {
      if (b.flags.at(c) != tag::kFluid) return;
      if (b.kind == LayoutKind::Dense)
        b.dense->load_cell(domain.stencil, b.flags.index(c), f.data());
      else
        b.sparse->load_cell(domain.stencil, std::uint32_t(b.sparse->fluid_id[b.flags.index(c)]), f.data());
      const Coord g{b.origin[0] + c[0], b.origin[1] + c[1], b.origin[2] + c[2]};
      entries.push_back({{g[2], g[1], g[0]}, raw.pdfs.size()});
      raw.coords.push_back(g);
      raw.pdfs.insert(raw.pdfs.end(), f.begin(), f.end());
    });
  }
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return entries[a].key < entries[b].key; });
  FluidState out;
  out.coords.reserve(order.size());
  out.pdfs.reserve(raw.pdfs.size());
  for (auto i : order) {
    out.coords.push_back(raw.coords[i]);
    out.pdfs.insert(out.pdfs.end(), raw.pdfs.begin() + std::ptrdiff_t(entries[i].offset),
                    raw.pdfs.begin() + std::ptrdiff_t(entries[i].offset + q));
  }
  return out;
}

double total_mass(Domain& domain) {
  const auto state = gather_fluid_state(domain);
  long double m = 0;
  for (double v : state.pdfs) m += v;
  return double(m);
}

}  // namespace slbm
