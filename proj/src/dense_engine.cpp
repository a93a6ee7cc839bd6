#include "slbm/dense_engine.hpp"

namespace slbm {
namespace {

// Wall correction per (UBB tag, direction).
std::vector<double> ubb_table(const FlagField& flags, const Stencil& s) {
  const auto& vel = flags.wall_velocities();
  std::vector<double> t(vel.size() * std::size_t(s.q));
  for (std::size_t k = 0; k < vel.size(); ++k)
    for (int i = 0; i < s.q; ++i) t[k * s.q + i] = ubb_correction(s, i, vel[k]);
  return t;
}

bool selected(Phase phase, const Coord& c, const FlagField& flags, const FrameWidth& frame) {
  if (phase == Phase::All) return true;
  const bool f = in_frame(c, flags.dims(), frame, flags.dim());
  return phase == Phase::Frame ? f : !f;
}

}  // namespace

DenseField::DenseField(const FlagField& flags, int q, Pattern pattern)
    : q_(q), pattern_(pattern), plane_(flags.padded_cells()) {
  cur_.assign(plane_ * std::size_t(q), 0.0);
  if (pattern == Pattern::Pull) next_.assign(plane_ * std::size_t(q), 0.0);
}

void DenseField::load_cell(const Stencil& s, std::size_t cell, double* f) const {
  const bool swapped = pattern_ == Pattern::AA && parity_ == Parity::Odd;
  for (int i = 0; i < q_; ++i) f[i] = at(swapped ? s.inv[i] : i, cell);
}

void DenseField::store_cell(const Stencil& s, std::size_t cell, const double* f) {
  const bool swapped = pattern_ == Pattern::AA && parity_ == Parity::Odd;
  for (int i = 0; i < q_; ++i) at(swapped ? s.inv[i] : i, cell) = f[i];
}

void dense_step_pull(DenseField& field, const FlagField& flags, const CollisionParams& p, const Stencil& s,
                     KernelCounters& counters, Phase phase, const FrameWidth& frame) {
  const auto corr = ubb_table(flags, s);
  detail::with_lattice(s, [&]<int Q>(const detail::Lattice<Q>& L) {
    std::array<std::ptrdiff_t, Q> stride;
    for (int i = 0; i < Q; ++i) stride[i] = flags.stride(s.c[i]);
    const std::size_t plane = field.plane_size();
    const double* src = field.data();
    double* dst = field.next_data();
    KernelCounters k;
    double f[Q];
    flags.for_each_interior([&](const Coord& c) {
      if (!selected(phase, c, flags, frame)) return;
      const std::size_t cell = flags.index(c);
      ++k.cell_visits;
      k.pdf_reads += Q;
      k.pdf_writes += Q;
      if (flags.at_index(cell) != tag::kFluid) {
        for (int i = 0; i < Q; ++i) dst[i * plane + cell] = src[i * plane + cell];
        return;
      }
      ++k.fluid_visits;
      for (int i = 0; i < Q; ++i) {
        const std::size_t n = std::size_t(std::ptrdiff_t(cell) - stride[i]);
        const Tag tn = flags.at_index(n);
        if (tn == tag::kFluid || tn == tag::kGhost) {
          f[i] = src[i * plane + n];
        } else if (tn == tag::kNoSlip) {
          f[i] = src[L.inv[i] * plane + cell];
        } else {
          f[i] = src[L.inv[i] * plane + cell] + corr[std::size_t(tn - tag::kUbb) * Q + i];
        }
      }
      detail::collide_cell(L, p, f);
      for (int i = 0; i < Q; ++i) dst[i * plane + cell] = f[i];
    });
    counters += k;
  });
}

void dense_step_aa(DenseField& field, const FlagField& flags, const CollisionParams& p, const Stencil& s,
                   KernelCounters& counters, Phase phase, const FrameWidth& frame) {
  const auto corr = ubb_table(flags, s);
  detail::with_lattice(s, [&]<int Q>(const detail::Lattice<Q>& L) {
    std::array<std::ptrdiff_t, Q> stride;
    for (int i = 0; i < Q; ++i) stride[i] = flags.stride(s.c[i]);
    const std::size_t plane = field.plane_size();
    double* data = field.data();
    const bool streaming = field.parity() == Parity::Even;
    KernelCounters k;
    double f[Q];
    std::size_t loc[Q];
    double add[Q];
    flags.for_each_interior([&](const Coord& c) {
      if (!selected(phase, c, flags, frame)) return;
      const std::size_t cell = flags.index(c);
      ++k.cell_visits;
      k.pdf_reads += Q;
      k.pdf_writes += Q;
      if (flags.at_index(cell) != tag::kFluid) return;  // in place: nothing to copy
      ++k.fluid_visits;
      if (streaming) {
        // Every read location receives the post-collision PDF of the
        // opposite direction, so each location is touched by one cell only.
        for (int i = 0; i < Q; ++i) {
          const std::size_t n = std::size_t(std::ptrdiff_t(cell) - stride[i]);
          const Tag tn = flags.at_index(n);
          if (tn == tag::kFluid || tn == tag::kGhost) {
            loc[i] = i * plane + n;
            add[i] = 0.0;
          } else {
            loc[i] = L.inv[i] * plane + cell;
            add[i] = tn == tag::kNoSlip ? 0.0 : corr[std::size_t(tn - tag::kUbb) * Q + i];
          }
          f[i] = data[loc[i]] + add[i];
        }
        detail::collide_cell(L, p, f);
        for (int i = 0; i < Q; ++i) data[loc[i]] = f[L.inv[i]] + add[i];
      } else {
        for (int i = 0; i < Q; ++i) f[i] = data[L.inv[i] * plane + cell];
        detail::collide_cell(L, p, f);
        for (int i = 0; i < Q; ++i) data[i * plane + cell] = f[i];
      }
    });
    counters += k;
  });
  if (phase != Phase::Interior) field.set_parity(flip(field.parity()));
}

MacroscopicField dense_macroscopic_field(const DenseField& field, const FlagField& flags, const Stencil& s) {
  MacroscopicField out{flags.dims(), {}, {}};
  out.rho.reserve(flags.dims().cells());
  out.u.reserve(flags.dims().cells());
  std::vector<double> f(s.q);
  flags.for_each_interior([&](const Coord& c) {
    const std::size_t cell = flags.index(c);
    if (flags.at_index(cell) != tag::kFluid) {
      out.rho.push_back(0.0);
      out.u.push_back({0, 0, 0});
      return;
    }
    field.load_cell(s, cell, f.data());
    const auto m = macroscopic(f, s);
    out.rho.push_back(m.rho);
    out.u.push_back(m.u);
  });
  return out;
}

void dense_init_equilibrium(DenseField& field, const FlagField& flags, const Stencil& s, double rho, const Vec3& u) {
  const auto feq = equilibrium({rho, u}, s);
  flags.for_each_interior([&](const Coord& c) { field.store_cell(s, flags.index(c), feq.data()); });
}

}  // namespace slbm
