#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <span>

#include "slbm/exchange.hpp"
#include "test_support.hpp"

using namespace slbm;
using namespace slbm::testing;

namespace {

const CollisionParams kSrt = CollisionParams::srt(1.3);

Domain two_blocks(LayoutPolicy pol, Pattern pat = Pattern::Pull) {
  // two all-fluid 4^3 blocks side by side in x, periodic in y and z
  Geometry g({8, 4, 4}, 3);
  g.set_periodic(1, true);
  g.set_periodic(2, true);
  return partition(g, make_stencil("D3Q19"), options({4, 4, 4}, pol, pat, kSrt));
}

}  // namespace

TEST_CASE("payload length across a shared face") {
  for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::dense()}) {
    const Domain d = two_blocks(pol);
    const Block& b = d.blocks[0];
    std::size_t total = 0;
    for (int k : b.flags.neighbor_offsets())
      if (offset_from_index(k)[0] == 1 && b.neighbor[k] == 1) total += expected_length(b, k, Flow::Forward);
    CHECK(total == 4 * 4 * 5);
    CHECK(expected_length(b, offset_index({1, 0, 0}), Flow::Forward) == 4 * 4 + 4 * 12);
    CHECK(expected_length(b, offset_index({-1, 0, 0}), Flow::Forward) == 0);
  }
}

TEST_CASE("face without adjacent fluid has an empty sparse payload") {
  Geometry g({8, 4, 4}, 3);
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 4; ++y) g.set({3, y, z}, tag::kNoSlip);
  const Domain d = partition(g, make_stencil("D3Q19"), options({4, 4, 4}, LayoutPolicy::sparse(), Pattern::Pull, kSrt));
  REQUIRE(d.blocks.size() == 2);
  const int k = offset_index({1, 0, 0});
  CHECK(expected_length(d.blocks[0], k, Flow::Forward) == 0);
  CHECK(pack(d, d.blocks[0], k, Flow::Forward).values.empty());
  CHECK(d.blocks[0].faces[k].send.size() == 16 + 4 * 12);
}

TEST_CASE("pack and unpack") {
  for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::dense()}) {
    Domain d = two_blocks(pol);
    perturbed_init(d);
    const int k = offset_index({1, 0, 0});
    const FaceMessage m = pack(d, d.blocks[0], k, Flow::Forward);
    CHECK(m.src == 0);
    CHECK(m.dst == 1);
    CHECK(m.offset == k);
    unpack(d, d.blocks[1], m);
    // the receiver's ghost copy holds exactly the sender's values
    CHECK(pack(d, d.blocks[0], k, Flow::Forward).values == m.values);

    FaceMessage shortened = m;
    shortened.values.pop_back();
    CHECK_THROWS_AS(unpack(d, d.blocks[1], shortened), ProtocolError);
    FaceMessage misaddressed = m;
    misaddressed.dst = 0;
    CHECK_THROWS_AS(unpack(d, d.blocks[1], misaddressed), ProtocolError);
    FaceMessage wrong_parity = m;
    wrong_parity.parity = Parity::Odd;
    CHECK_THROWS_AS(unpack(d, d.blocks[1], wrong_parity), ProtocolError);
  }
}

TEST_CASE("converting payloads between layouts") {
  Geometry g({8, 4, 4}, 3);
  g.set_periodic(1, true);
  g.set_periodic(2, true);
  g.set({4, 1, 1}, tag::kNoSlip);
  g.set({3, 2, 2}, tag::kNoSlip);
  const Stencil s = make_stencil("D3Q19");
  Domain sp = partition(g, s, options({4, 4, 4}, LayoutPolicy::sparse(), Pattern::Pull, kSrt));
  Domain de = partition(g, s, options({4, 4, 4}, LayoutPolicy::dense(), Pattern::Pull, kSrt));
  perturbed_init(sp);
  perturbed_init(de);
  const int k = offset_index({1, 0, 0});
  const FaceMessage ms = pack(sp, sp.blocks[0], k, Flow::Forward);
  const FaceMessage md = pack(de, de.blocks[0], k, Flow::Forward);
  CHECK(ms.values.size() < md.values.size());

  // dense -> sparse keeps exactly the link values, in order
  const FaceMessage filtered = convert_face(md, LayoutKind::Sparse, sp.blocks[1]);
  CHECK(filtered.layout == LayoutKind::Sparse);
  CHECK(filtered.values == ms.values);

  // sparse -> dense puts them back and marks the rest
  const FaceMessage expanded = convert_face(ms, LayoutKind::Dense, de.blocks[1]);
  REQUIRE(expanded.values.size() == md.values.size());
  const auto& links = de.blocks[0].faces[k].send_link;
  for (std::size_t i = 0; i < md.values.size(); ++i) {
    if (links[i])
      CHECK(expanded.values[i] == md.values[i]);
    else
      CHECK(std::isnan(expanded.values[i]));
  }
  CHECK(std::isnan(sentinel()));
}

TEST_CASE("exchanged values per step follow the geometric count") {
  // periodic 2x2x2 grid of all-fluid 4^3 blocks: each block sends every PDF
  // that leaves it; the face count 5 * 16 per face counts edge diagonals twice
  const Stencil s = make_stencil("D3Q19");
  Geometry g({8, 8, 8}, 3);
  for (int a = 0; a < 3; ++a) g.set_periodic(a, true);
  const std::uint64_t per_step = 8 * (6 * 5 * 16 - 12 * 4);
  std::uint64_t brute = 0;
  for (int q = 1; q < s.q; ++q) {
    int inside = 1;
    for (int a = 0; a < 3; ++a) inside *= 4 - std::abs(s.c[q][a]);
    brute += 64 - inside;
  }
  CHECK(per_step == 8 * brute);
  for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::dense()}) {
    Domain pull = partition(g, s, options({4, 4, 4}, pol, Pattern::Pull, kSrt));
    Domain aa = partition(g, s, options({4, 4, 4}, pol, Pattern::AA, kSrt));
    init_equilibrium(pull, 1.0, {0, 0, 0});
    init_equilibrium(aa, 1.0, {0, 0, 0});
    run(pull, 4);
    run(aa, 4);
    settle(aa);
    CHECK(pull.exchange.values == 4 * per_step);
    CHECK(aa.exchange.values == pull.exchange.values);
    // D3Q19 has no corner directions: 6 face and 12 edge messages per block
    CHECK(pull.exchange.messages == 4 * 8 * 18);
    CHECK(aa.exchange.forward_rounds == 2);
    CHECK(aa.exchange.reverse_rounds == 2);
    CHECK(pull.exchange.local_values == 0);
  }
}

TEST_CASE("schedules and worker counts give identical results") {
  const Stencil s = make_stencil("D3Q19");
  const Geometry g = layered_geometry({16, 16, 8}, 0.5, 21);
  for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
    for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::hybrid(0.8)}) {
      CAPTURE(pat == Pattern::AA);
      DomainOptions o = options({4, 4, 4}, pol, pat, kSrt);
      Domain ref = partition(g, s, o);
      perturbed_init(ref);
      run(ref, 7);
      for (FrameWidth fw : {FrameWidth{1, 1, 1}, FrameWidth{32, 1, 1}}) {
        o.frame_width = fw;
        Domain ov = partition(g, s, o);
        perturbed_init(ov);
        run(ov, 7, {Schedule::Overlapped, 1});
        CHECK(max_abs_diff(ov, ref) == 0.0);
      }
      o.frame_width.reset();
      for (int w : {2, 4}) {
        Domain th = partition(g, s, o);
        balance(th, w);
        perturbed_init(th);
        run(th, 7, {Schedule::Sequential, w});
        CHECK(max_abs_diff(th, ref) == 0.0);
        CHECK(th.exchange.values == ref.exchange.values);
      }
      o.frame_width = FrameWidth{1, 1, 1};
      Domain both = partition(g, s, o);
      balance(both, 3);
      perturbed_init(both);
      run(both, 7, {Schedule::Overlapped, 3});
      CHECK(max_abs_diff(both, ref) == 0.0);
    }
  }
}

TEST_CASE("overlapped schedule needs split lists") {
  Domain d = two_blocks(LayoutPolicy::sparse());
  init_equilibrium(d, 1.0, {0, 0, 0});
  CHECK_THROWS_AS(run(d, 1, {Schedule::Overlapped, 1}), ConfigError);
}

TEST_CASE("missing message times out") {
  for (int workers : {1, 2}) {
    Domain d = two_blocks(LayoutPolicy::sparse());
    balance(d, workers);
    init_equilibrium(d, 1.0, {0, 0, 0});
    const int k = offset_index({1, 0, 0});
    d.blocks[0].faces[k].send.clear();
    try {
      run(d, 1, {Schedule::Sequential, workers, 0.2});
      FAIL("expected a deadlock error");
    } catch (const ProtocolError& e) {
      CHECK(std::string(e.what()).find("deadlock") != std::string::npos);
    }
  }
}

TEST_CASE("instability surfaces from worker threads") {
  for (int workers : {1, 2}) {
    Domain d = two_blocks(LayoutPolicy::dense());
    balance(d, workers);
    init_pdfs(d, [&](const Coord& g, int i) {
      return g[0] >= 4 ? -d.stencil.w[i] : d.stencil.w[i];
    });
    CHECK_THROWS_AS(run(d, 2, {Schedule::Sequential, workers}), NumericalInstability);
  }
}

TEST_CASE("AA settles pending reverse exchanges and conserves mass") {
  const Stencil s = make_stencil("D3Q19");
  const Geometry g = random_geometry({8, 8, 8}, 0.7, 4, 3);
  for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::dense(), LayoutPolicy::hybrid(0.7)}) {
    Domain aa = partition(g, s, options({4, 4, 4}, pol, Pattern::AA, kSrt));
    Domain pull = partition(g, s, options({4, 4, 4}, pol, Pattern::Pull, kSrt));
    perturbed_init(aa);
    perturbed_init(pull);
    const double m0 = total_mass(aa);
    run(aa, 1);
    CHECK(aa.reverse_pending);
    run(pull, 2);
    // after an odd step each cell holds the streamed, not yet collided PDFs
    // of the next step, whose moments are those of the pull state
    const FluidState a = gather_fluid_state(aa), p = gather_fluid_state(pull);
    CHECK_FALSE(aa.reverse_pending);
    REQUIRE(a.coords == p.coords);
    double worst = 0;
    for (std::size_t c = 0; c < a.coords.size(); ++c) {
      const auto ma = macroscopic(std::span(a.pdfs).subspan(c * s.q, s.q), s);
      const auto mp = macroscopic(std::span(p.pdfs).subspan(c * s.q, s.q), s);
      worst = std::max({worst, std::abs(ma.rho - mp.rho), std::abs(ma.u[0] - mp.u[0]), std::abs(ma.u[1] - mp.u[1]),
                        std::abs(ma.u[2] - mp.u[2])});
    }
    CHECK(worst <= 1e-14);
    run(aa, 199);
    CHECK(std::abs(total_mass(aa) - m0) / m0 <= 1e-12);
  }
}
