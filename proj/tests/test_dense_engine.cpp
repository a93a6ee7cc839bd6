#include <doctest.h>

#include "engine_support.hpp"
#include "slbm/dense_engine.hpp"

using namespace slbm;
using namespace slbm::testing;

TEST_CASE("flag field geometry") {
  FlagField f({4, 3, 2}, 3);
  CHECK(f.padded() == Extent{6, 5, 4});
  CHECK(f.neighbor_offsets().size() == 26);
  CHECK(FlagField({4, 3, 1}, 2).neighbor_offsets().size() == 8);
  CHECK(f.at({-1, 0, 0}) == tag::kNoSlip);
  CHECK(f.at({0, 0, 0}) == tag::kFluid);
  CHECK(f.offset_of({-1, 3, 0}) == offset_index({-1, 1, 0}));
  CHECK(f.offset_of({1, 1, 1}) == kCenterOffset);
  CHECK(f.porosity() == 1.0);
  f.set({0, 0, 0}, tag::kNoSlip);
  CHECK(f.count_fluid() == 23);
  const Tag t = f.add_wall_velocity({0.1, 0, 0});
  CHECK(t == tag::kUbb);
  CHECK(f.add_wall_velocity({0.1, 0, 0}) == t);
  CHECK(f.wall_velocity(t)[0] == 0.1);
  CHECK_THROWS_AS(FlagField({4, 4, 2}, 2), ConfigError);
  for (int k = 0; k < 27; ++k) CHECK(offset_index(offset_from_index(k)) == k);
}

TEST_CASE("uniform equilibrium is a fixed point") {
  const Stencil s = make_stencil("D3Q19");
  FlagField flags({4, 4, 4}, 3);
  for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
    DenseField d(flags, s.q, pat);
    dense_init_equilibrium(d, flags, s, 1.0, {0, 0, 0});
    KernelCounters k;
    for (int t = 0; t < 4; ++t) dense_step(d, flags, CollisionParams::srt(1.5), s, k);
    for (const auto& f : dense_cells(d, flags, s))
      for (int i = 0; i < s.q; ++i) CHECK(std::abs(f[i] - s.w[i]) <= 1e-15);
  }
}

TEST_CASE("single enclosed cell bounces back in place") {
  const Stencil s = make_stencil("D2Q9");
  FlagField flags({1, 1, 1}, 2);
  DenseField d(flags, s.q, Pattern::Pull);
  auto f0 = equilibrium({1.0, {0.03, -0.02, 0}}, s);
  for (int i = 0; i < s.q; ++i) f0[i] *= 1.0 + 0.01 * i;
  d.store_cell(s, flags.index(0, 0, 0), f0.data());
  const CollisionParams p = CollisionParams::srt(1.3);
  auto expect = f0;
  KernelCounters k;
  for (int step = 0; step < 2; ++step) {
    std::vector<double> pulled(s.q);
    for (int i = 0; i < s.q; ++i) pulled[i] = expect[s.inv[i]];
    expect = collide(pulled, p, s);
    dense_step(d, flags, p, s, k);
  }
  std::vector<double> got(s.q);
  d.load_cell(s, flags.index(0, 0, 0), got.data());
  for (int i = 0; i < s.q; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-15));
}

TEST_CASE("AA step pair equals two pull steps") {
  for (const char* name : {"D2Q9", "D3Q19", "D3Q27"}) {
    const Stencil s = make_stencil(name);
    const Extent dims = s.dim == 2 ? Extent{12, 10, 1} : Extent{8, 8, 8};
    for (double phi : {0.2, 0.5, 1.0}) {
      CAPTURE(name);
      CAPTURE(phi);
      const FlagField flags = obstacle_box(dims, s.dim, phi, 17);
      const auto init = random_cells(flags, s, 5);
      DenseField pull(flags, s.q, Pattern::Pull), aa(flags, s.q, Pattern::AA);
      load_dense(pull, flags, s, init);
      load_dense(aa, flags, s, init);
      const CollisionParams p = CollisionParams::trt(1.1, 1.6);
      KernelCounters k;
      for (int pair = 0; pair < 5; ++pair) {
        dense_step(pull, flags, p, s, k);
        dense_step(pull, flags, p, s, k);
        dense_step(aa, flags, p, s, k);
        CHECK(aa.parity() == Parity::Odd);
        // after the streaming kernel the moments equal those the pull field reaches one step later
        const auto ma = dense_macroscopic_field(aa, flags, s);
        const auto mp = dense_macroscopic_field(pull, flags, s);
        for (std::size_t c = 0; c < ma.rho.size(); ++c) {
          REQUIRE(std::abs(ma.rho[c] - mp.rho[c]) <= 1e-13);
          for (int a = 0; a < 3; ++a) REQUIRE(std::abs(ma.u[c][a] - mp.u[c][a]) <= 1e-13);
        }
        dense_step(aa, flags, p, s, k);
        CHECK(aa.parity() == Parity::Even);
        CHECK(max_diff(dense_cells(aa, flags, s), dense_cells(pull, flags, s)) <= 1e-13);
      }
    }
  }
}

TEST_CASE("dense kernels visit every cell and allocate Q planes per buffer") {
  const Stencil s = make_stencil("D3Q19");
  const FlagField flags = obstacle_box({6, 5, 4}, 3, 0.5, 2);
  const std::uint64_t n = 6 * 5 * 4;
  for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
    DenseField d(flags, s.q, pat);
    dense_init_equilibrium(d, flags, s, 1.0, {0, 0, 0});
    CHECK(d.allocated_pdfs() == (pat == Pattern::Pull ? 2u : 1u) * s.q * flags.padded_cells());
    KernelCounters k;
    for (int t = 0; t < 3; ++t) dense_step(d, flags, CollisionParams::srt(1.0), s, k);
    CHECK(k.cell_visits == 3 * n);
    CHECK(k.fluid_visits == 3 * flags.count_fluid());
    CHECK(k.idx_reads == 0);
    CHECK(k.pdf_reads == 3 * n * s.q);
    CHECK(k.pdf_writes == 3 * n * s.q);
  }
}

TEST_CASE("dense macroscopic field") {
  const Stencil s = make_stencil("D2Q9");
  FlagField flags({3, 2, 1}, 2);
  flags.set({1, 0, 0}, tag::kNoSlip);
  DenseField d(flags, s.q, Pattern::Pull);
  dense_init_equilibrium(d, flags, s, 1.0, {0.01, 0, 0});
  const auto m = dense_macroscopic_field(d, flags, s);
  REQUIRE(m.rho.size() == 6);
  CHECK(m.rho[1] == 0.0);
  CHECK(m.u[1] == Vec3{0, 0, 0});
  CHECK(m.rho[0] == doctest::Approx(1.0));
  CHECK(m.u[0][0] == doctest::Approx(0.01));
}

TEST_CASE("closed box conserves mass") {
  const Stencil s = make_stencil("D3Q19");
  FlagField flags = obstacle_box({8, 8, 8}, 3, 0.6, 9, {0, 0, 0});
  const auto init = random_cells(flags, s, 3);
  for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
    DenseField d(flags, s.q, pat);
    load_dense(d, flags, s, init);
    auto mass = [&] {
      double m = 0;
      for (const auto& f : dense_cells(d, flags, s))
        for (double x : f) m += x;
      return m;
    };
    const double m0 = mass();
    KernelCounters k;
    for (int t = 0; t < 1000; ++t) dense_step(d, flags, CollisionParams::srt(1.7), s, k);
    CHECK(std::abs(mass() - m0) / m0 <= 1e-12);
  }
}
