#include "slbm/sparse_engine.hpp"

#include <algorithm>
#include <span>
#include <unordered_map>

namespace slbm {
namespace {

std::span<const std::uint32_t> all_cells(std::vector<std::uint32_t>& scratch, std::uint32_t n) {
  if (scratch.size() != n) {
    scratch.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) scratch[i] = i;
  }
  return scratch;
}

std::span<const std::uint32_t> cells_of(const SparseLists& lists, Phase phase, std::vector<std::uint32_t>& scratch) {
  if (phase == Phase::All) return all_cells(scratch, lists.n_fluid);
  if (!lists.split) throw ConfigError("sparse lists were built without frame/interior split");
  return phase == Phase::Interior ? std::span<const std::uint32_t>(lists.split->interior)
                                  : std::span<const std::uint32_t>(lists.split->frame);
}

}  // namespace

void SparseLists::load_cell(const Stencil& s, std::uint32_t cell, double* f) const {
  const bool swapped = pattern == Pattern::AA && parity == Parity::Odd;
  for (int i = 0; i < q; ++i) f[i] = pdf[slot(swapped ? s.inv[i] : i, cell)];
}

void SparseLists::store_cell(const Stencil& s, std::uint32_t cell, const double* f) {
  const bool swapped = pattern == Pattern::AA && parity == Parity::Odd;
  for (int i = 0; i < q; ++i) pdf[slot(swapped ? s.inv[i] : i, cell)] = f[i];
}

SparseLists build_lists(const FlagField& flags, const Stencil& s, Pattern pattern, std::optional<FrameWidth> split) {
  SparseLists L;
  L.q = s.q;
  L.pattern = pattern;
  L.fluid_id.assign(flags.padded_cells(), kNotFluid);
  flags.for_each_interior([&](const Coord& c) {
    if (flags.at(c) != tag::kFluid) return;
    L.fluid_id[flags.index(c)] = std::int32_t(L.cell_coords.size());
    L.cell_coords.push_back(c);
  });
  if (L.cell_coords.empty()) throw EmptyBlock("block has no fluid cells");
  const auto n = std::uint32_t(L.cell_coords.size());
  L.n_fluid = n;
  const int q = s.q;

  // Appended slots, counted per direction in the order they will be laid out.
  std::vector<std::vector<std::uint32_t>> ubb_cells(q);  // fluid cell per UBB link
  std::vector<std::vector<Tag>> ubb_tags(q);
  for (std::uint32_t id = 0; id < n; ++id) {
    const Coord& x = L.cell_coords[id];
    for (int i = 1; i < q; ++i) {
      const Tag t = flags.at({x[0] - s.c[i][0], x[1] - s.c[i][1], x[2] - s.c[i][2]});
      if (tag::is_ubb(t)) {
        ubb_cells[i].push_back(id);
        ubb_tags[i].push_back(t);
      }
    }
  }
  struct PendingGhost {
    int offset;
    Coord ghost;
  };
  std::vector<std::vector<PendingGhost>> ghosts(q);
  for (int k : flags.neighbor_offsets()) {
    if (flags.neighbor(k) != NeighborKind::Remote) continue;
    flags.for_each_ghost(k, [&](const Coord& g) {
      if (flags.at(g) != tag::kGhost) return;
      for (int i = 1; i < q; ++i) {
        const Coord x{g[0] + s.c[i][0], g[1] + s.c[i][1], g[2] + s.c[i][2]};
        if (flags.in_interior(x) && flags.at(x) == tag::kFluid) ghosts[i].push_back({k, g});
      }
    });
  }

  L.group_offset.assign(q + 1, 0);
  for (int i = 0; i < q; ++i)
    L.group_offset[i + 1] = L.group_offset[i] + n + Slot(ubb_cells[i].size() + ghosts[i].size());

  std::unordered_map<std::uint64_t, Slot> ubb_slot_of, ghost_slot_of;  // key: cell * q + dir
  for (int i = 0; i < q; ++i) {
    Slot next = L.group_offset[i] + n;
    for (std::size_t k = 0; k < ubb_cells[i].size(); ++k, ++next) {
      const auto cell = ubb_cells[i][k];
      const double corr = ubb_correction(s, i, flags.wall_velocity(ubb_tags[i][k]));
      L.ubb_slots.push_back({next, L.slot(s.inv[i], cell), cell, std::uint8_t(i), corr});
      ubb_slot_of[std::uint64_t(cell) * q + i] = next;
    }
    for (const auto& pg : ghosts[i]) {
      L.ghost_slots[pg.offset].push_back({next, std::uint8_t(i), pg.ghost});
      ghost_slot_of[std::uint64_t(flags.index(pg.ghost)) * q + i] = next;
      ++next;
    }
  }
  // Keep each offset's ghost slots in registry order: ghost cell, then direction.
  for (auto& list : L.ghost_slots) {
    std::stable_sort(list.begin(), list.end(), [](const GhostSlot& a, const GhostSlot& b) {
      const Coord ka{a.ghost[2], a.ghost[1], a.ghost[0]}, kb{b.ghost[2], b.ghost[1], b.ghost[0]};
      return ka != kb ? ka < kb : a.dir < b.dir;
    });
  }

  L.idx.resize(std::size_t(q - 1) * n);
  for (std::uint32_t id = 0; id < n; ++id) {
    const Coord& x = L.cell_coords[id];
    for (int i = 1; i < q; ++i) {
      const Coord nb{x[0] - s.c[i][0], x[1] - s.c[i][1], x[2] - s.c[i][2]};
      const Tag t = flags.at(nb);
      Slot src;
      if (t == tag::kFluid) {
        src = L.slot(i, std::uint32_t(L.fluid_id[flags.index(nb)]));
      } else if (t == tag::kNoSlip) {
        src = L.slot(s.inv[i], id);
      } else if (tag::is_ubb(t)) {
        src = ubb_slot_of.at(std::uint64_t(id) * q + i);
      } else {  // ghost
        const int k = flags.offset_of(nb);
        if (flags.neighbor(k) == NeighborKind::Self) {
          Coord w = nb;
          for (int a = 0; a < 3; ++a) w[a] = (nb[a] + flags.dims()[a]) % flags.dims()[a];
          src = L.slot(i, std::uint32_t(L.fluid_id[flags.index(w)]));
        } else {
          src = ghost_slot_of.at(std::uint64_t(flags.index(nb)) * q + i);
        }
      }
      L.idx[std::size_t(i - 1) * n + id] = src;
    }
  }

  L.pdf.assign(L.group_offset[q], 0.0);
  if (pattern == Pattern::Pull) L.tmp_pdf.assign(L.group_offset[q], 0.0);

  if (split) {
    SplitLists sl;
    sl.frame_width = *split;
    L.center_idx.resize(n);
    for (std::uint32_t id = 0; id < n; ++id) {
      L.center_idx[id] = L.slot(0, id);
      (in_frame(L.cell_coords[id], flags.dims(), *split, flags.dim()) ? sl.frame : sl.interior).push_back(id);
    }
    L.split = std::move(sl);
  }
  return L;
}

void sparse_step_pull(SparseLists& lists, const CollisionParams& p, const Stencil& s, KernelCounters& counters,
                      Phase phase) {
  std::vector<std::uint32_t> scratch;
  const auto cells = cells_of(lists, phase, scratch);
  const bool use_center_idx = phase != Phase::All;
  detail::with_lattice(s, [&]<int Q>(const detail::Lattice<Q>& L) {
    const std::size_t n = lists.n_fluid;
    const double* src = lists.pdf.data();
    double* dst = lists.tmp_pdf.data();
    const Slot* idx = lists.idx.data();
    const Slot* go = lists.group_offset.data();
    double f[Q];
    for (const std::uint32_t c : cells) {
      const Slot center = use_center_idx ? lists.center_idx[c] : c;
      f[0] = src[center];
      for (int i = 1; i < Q; ++i) f[i] = src[idx[(i - 1) * n + c]];
      detail::collide_cell(L, p, f);
      dst[center] = f[0];
      for (int i = 1; i < Q; ++i) dst[go[i] + c] = f[i];
    }
    const auto m = cells.size();
    counters.cell_visits += m;
    counters.fluid_visits += m;
    counters.pdf_reads += m * Q;
    counters.pdf_writes += m * Q;
    counters.idx_reads += m * (Q - 1 + (use_center_idx ? 1 : 0));
  });
  if (phase != Phase::Interior) lists.pdf.swap(lists.tmp_pdf);
}

void sparse_step_aa(SparseLists& lists, const CollisionParams& p, const Stencil& s, KernelCounters& counters,
                    Phase phase) {
  std::vector<std::uint32_t> scratch;
  const auto cells = cells_of(lists, phase, scratch);
  const bool use_center_idx = phase != Phase::All;
  const bool streaming = lists.parity == Parity::Even;
  detail::with_lattice(s, [&]<int Q>(const detail::Lattice<Q>& L) {
    const std::size_t n = lists.n_fluid;
    double* pdf = lists.pdf.data();
    const Slot* idx = lists.idx.data();
    const Slot* go = lists.group_offset.data();
    double f[Q];
    Slot loc[Q];
    for (const std::uint32_t c : cells) {
      if (streaming) {
        loc[0] = use_center_idx ? lists.center_idx[c] : c;
        for (int i = 1; i < Q; ++i) loc[i] = idx[(i - 1) * n + c];
        for (int i = 0; i < Q; ++i) f[i] = pdf[loc[i]];
        detail::collide_cell(L, p, f);
        for (int i = 0; i < Q; ++i) pdf[loc[i]] = f[L.inv[i]];
      } else {
        for (int i = 0; i < Q; ++i) f[i] = pdf[go[L.inv[i]] + c];
        detail::collide_cell(L, p, f);
        for (int i = 0; i < Q; ++i) pdf[go[i] + c] = f[i];
      }
    }
    const auto m = cells.size();
    counters.cell_visits += m;
    counters.fluid_visits += m;
    counters.pdf_reads += m * Q;
    counters.pdf_writes += m * Q;
    if (streaming) counters.idx_reads += m * (Q - 1 + (use_center_idx ? 1 : 0));
  });
  if (phase != Phase::Interior) lists.parity = flip(lists.parity);
}

void sparse_step_split(SparseLists& lists, const CollisionParams& p, const Stencil& s, KernelCounters& counters,
                       Phase phase) {
  if (lists.pattern == Pattern::Pull)
    sparse_step_pull(lists, p, s, counters, phase);
  else
    sparse_step_aa(lists, p, s, counters, phase);
}

void refresh_boundary_slots(SparseLists& lists) {
  for (const auto& u : lists.ubb_slots) lists.pdf[u.slot] = lists.pdf[u.partner] + u.correction;
}

void fold_boundary_slots(SparseLists& lists) {
  for (const auto& u : lists.ubb_slots) lists.pdf[u.partner] = lists.pdf[u.slot] + u.correction;
}

void sparse_init_equilibrium(SparseLists& lists, const Stencil& s, double rho, const Vec3& u) {
  const auto feq = equilibrium({rho, u}, s);
  for (std::uint32_t c = 0; c < lists.n_fluid; ++c) lists.store_cell(s, c, feq.data());
}

std::vector<Macroscopics> sparse_macroscopics(const SparseLists& lists, const Stencil& s) {
  std::vector<Macroscopics> out;
  out.reserve(lists.n_fluid);
  std::vector<double> f(s.q);
  for (std::uint32_t c = 0; c < lists.n_fluid; ++c) {
    lists.load_cell(s, c, f.data());
    out.push_back(macroscopic(f, s));
  }
  return out;
}

}  // namespace slbm
