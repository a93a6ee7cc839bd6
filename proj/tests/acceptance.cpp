// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: slbm_acceptance [AC1 AC2 ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "slbm/cli.hpp"
#include "slbm/domain.hpp"
#include "slbm/exchange.hpp"
#include "slbm/geometry_io.hpp"
#include "slbm/perf_model.hpp"
#include "test_support.hpp"

using namespace slbm;
using namespace slbm::testing;

namespace {

struct Result {
  bool pass = true;
  bool gating = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

bool rounds_to(double value, double printed, double digits_scale) {
  return std::lround(value * digits_scale) == std::lround(printed * digits_scale);
}

void ac1(Result& r) {
  TrafficModel cpu_d{Arch::CPU, Structure::Dense, Pattern::Pull};
  TrafficModel cpu_s{Arch::CPU, Structure::Sparse, Pattern::Pull};
  TrafficModel gpu_d{Arch::GPU, Structure::Dense, Pattern::Pull};
  TrafficModel gpu_s{Arch::GPU, Structure::Sparse, Pattern::Pull};
  const double v[] = {100 * aa_reduction(cpu_d), 100 * aa_reduction(cpu_s), 100 * aa_reduction(gpu_d),
                      100 * aa_reduction(gpu_s), 100 * aa_memory_saving(gpu_s), memory_breakeven(gpu_s)};
  r.detail << "CPU " << v[0] << "% / " << v[1] << "%, GPU " << v[2] << "% / " << v[3] << "%, AA memory saving "
           << v[4] << "%, memory break-even " << v[5];
  r.check(rounds_to(v[0], 33.3, 10), "CPU dense 33.3%");
  r.check(rounds_to(v[1], 35.6, 10), "CPU sparse 35.6%");
  r.check(rounds_to(v[2], 0.0, 10), "GPU dense 0%");
  r.check(rounds_to(v[3], 9.7, 10), "GPU sparse 9.7% (model gives 9.57%)");
  r.check(rounds_to(v[4], 36.5, 10), "AA saving 36.5%");
  r.check(std::abs(v[5] - 344.0 / 416.0) < 1e-15 && rounds_to(v[5], 0.8269, 1e4), "break-even 344/416");
}

void ac2(Result& r) {
  const Stencil s = make_stencil("D2Q9");
  const int n = 32;
  const double uw = 0.05;
  Domain d = couette_domain(s, n, uw, omega_from_viscosity(0.1), LayoutPolicy::dense(), Pattern::Pull);
  run(d, 20000);
  const auto prof = mean_ux_profile(d, n);
  double num = 0, den = 0;
  for (int y = 0; y < n; ++y) {
    const double exact = uw * (y + 0.5) / n;
    num += (prof[y] - exact) * (prof[y] - exact);
    den += exact * exact;
  }
  const double err = std::sqrt(num / den);
  r.detail << "relative L2 error " << err << " after 20000 steps";
  r.check(err <= 1e-3, "L2 <= 1e-3");
}

void ac3_4(Result& r3, Result& r4) {
  const Stencil s = make_stencil("D3Q19");
  double worst3 = 0, worst4 = 0;
  std::uint64_t even_idx = 0;
  for (double phi : {0.2, 0.5, 0.9}) {
    const Geometry g = random_geometry({48, 48, 48}, phi, 7, s.dim);
    auto make = [&](LayoutPolicy pol, Pattern pat) {
      Domain d = partition(g, s, options({48, 48, 48}, pol, pat, CollisionParams::srt(1.2)));
      perturbed_init(d);
      return d;
    };
    Domain dense = make(LayoutPolicy::dense(), Pattern::Pull);
    Domain sparse = make(LayoutPolicy::sparse(), Pattern::Pull);
    Domain aa = make(LayoutPolicy::sparse(), Pattern::AA);
    run(dense, 100);
    run(sparse, 100);
    for (int pair = 0; pair < 50; ++pair) {
      run(aa, 1);  // streaming kernel
      const auto before = aa.kernel_totals().idx_reads;
      run(aa, 1);  // cell-local kernel
      even_idx += aa.kernel_totals().idx_reads - before;
    }
    worst3 = std::max(worst3, max_abs_diff(sparse, dense));
    worst4 = std::max(worst4, max_abs_diff(aa, sparse));
  }
  r3.detail << "max |dpdf| sparse vs dense " << worst3;
  r3.check(worst3 <= 1e-11, "<= 1e-11");
  r4.detail << "max |dpdf| AA vs pull " << worst4 << ", idx reads on even steps " << even_idx;
  r4.check(worst4 <= 1e-13, "<= 1e-13");
  r4.check(even_idx == 0, "even-step idx reads == 0");
}

void ac5(Result& r) {
  const Stencil s = make_stencil("D3Q19");
  const Geometry g = layered_geometry({24, 24, 24}, 0.5, 11);
  const std::uint64_t steps = 200;
  Domain ref = partition(g, s, options({24, 24, 24}, LayoutPolicy::dense(), Pattern::Pull, CollisionParams::srt(1.3)));
  perturbed_init(ref);
  run(ref, steps);
  const Extent splits[] = {{24, 24, 24}, {24, 24, 12}, {24, 12, 12}, {12, 12, 12}};
  double worst = 0;
  bool bitwise = true;
  int runs = 0;
  for (const Extent& bs : splits)
    for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::dense(), LayoutPolicy::hybrid(0.8)})
      for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
        auto opt = options(bs, pol, pat, CollisionParams::srt(1.3));
        opt.frame_width = FrameWidth{1, 1, 1};
        Domain seq = partition(g, s, opt);
        Domain ovl = partition(g, s, opt);
        perturbed_init(seq);
        perturbed_init(ovl);
        for (std::uint64_t t = 0; t < steps; ++t) {
          run(seq, 1, {Schedule::Sequential});
          run(ovl, 1, {Schedule::Overlapped});
          if (max_abs_diff(seq, ovl) != 0.0) bitwise = false;
        }
        worst = std::max(worst, max_abs_diff(seq, ref));
        runs += 2;
      }
  r.detail << runs << " runs, max |dpdf| vs single dense block " << worst << ", overlapped == sequential bitwise "
           << (bitwise ? "yes" : "no");
  r.check(worst <= 1e-11, "<= 1e-11");
  r.check(bitwise, "bitwise per step");
}

void ac6(Result& r) {
  const Stencil s = make_stencil("D3Q19");
  double worst = 0;
  for (double phi : {1.0, 0.5})
    for (LayoutPolicy pol : {LayoutPolicy::sparse(), LayoutPolicy::dense()})
      for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
        const Geometry g = random_geometry({16, 16, 16}, phi, 5, s.dim);
        Domain d = partition(g, s, options({8, 8, 8}, pol, pat, CollisionParams::srt(1.6)));
        perturbed_init(d);
        const double m0 = total_mass(d);
        run(d, 1000);
        worst = std::max(worst, std::abs(total_mass(d) - m0) / m0);
      }
  r.detail << "max relative mass drift " << worst;
  r.check(worst <= 1e-12, "<= 1e-12");
}

void ac7(Result& r) {
  const Stencil s = make_stencil("D3Q19");
  bool ok = true;
  for (int k = 1; k <= 10; ++k) {
    const double phi = 0.1 * k;
    const Geometry g = random_geometry({16, 16, 16}, phi, 100 + k, s.dim);
    for (Pattern pat : {Pattern::Pull, Pattern::AA}) {
      Domain sp = partition(g, s, options({16, 16, 16}, LayoutPolicy::sparse(), pat, CollisionParams::srt(1.0)));
      Domain de = partition(g, s, options({16, 16, 16}, LayoutPolicy::dense(), pat, CollisionParams::srt(1.0)));
      const auto& L = *sp.blocks[0].sparse;
      const auto& D = *de.blocks[0].dense;
      const auto es = memory_elements(4096, L.n_fluid, Structure::Sparse, pat, s.q);
      const auto ed = memory_elements(4096, 0, Structure::Dense, pat, s.q);
      const std::uint64_t padded = de.blocks[0].flags.padded_cells();
      const std::uint64_t copies = pat == Pattern::Pull ? 2 : 1;
      ok &= L.allocated_pdfs() == es.pdfs && L.allocated_indices() == es.indices;
      ok &= D.allocated_pdfs() == ed.pdfs + copies * s.q * (padded - 4096);
      if (pat == Pattern::AA) {
        Domain pull = partition(g, s, options({16, 16, 16}, LayoutPolicy::sparse(), Pattern::Pull, CollisionParams::srt(1.0)));
        ok &= 2 * L.allocated_pdfs() == pull.blocks[0].sparse->allocated_pdfs();
      }
    }
  }
  r.detail << "phi 0.1..1.0, sparse and dense, pull and AA";
  r.check(ok, "allocations equal model element counts");
}

void ac8(Result& r) {
  const Stencil s = make_stencil("D3Q19");
  bool ok = true;
  std::ostringstream ratios;
  for (double phi : {0.25, 0.5, 0.75, 1.0}) {
    const Geometry g = random_geometry({16, 16, 16}, phi, 3, s.dim);
    Domain sp = partition(g, s, options({16, 16, 16}, LayoutPolicy::sparse(), Pattern::Pull, CollisionParams::srt(1.0)));
    Domain de = partition(g, s, options({16, 16, 16}, LayoutPolicy::dense(), Pattern::Pull, CollisionParams::srt(1.0)));
    run(sp, 3);
    run(de, 3);
    const auto ks = sp.kernel_totals(), kd = de.kernel_totals();
    const std::uint64_t nf = sp.n_fluid(), n = 4096;
    ok &= ks.cell_visits == 3 * nf && ks.fluid_visits == 3 * nf;
    ok &= kd.cell_visits == 3 * n && kd.fluid_visits == 3 * nf;
    ok &= kd.cell_visits * nf == ks.cell_visits * n;
    ratios << ' ' << double(kd.cell_visits) / double(ks.cell_visits);
  }
  r.detail << "dense/sparse visit ratios" << ratios.str();
  r.check(ok, "visit counts exact");
}

void ac9(Result& r) {
  const Stencil s = make_stencil("D3Q19");
  const VoxelMask mask = make_riverbed({64, 64, 64}, 0.5, 0.36, 21);
  Geometry g = geometry_from_mask(mask, 3);
  g.set_periodic(0, true);
  g.set_periodic(1, true);
  Domain d = partition(g, s, options({16, 16, 16}, LayoutPolicy::sparse(), Pattern::Pull, CollisionParams::srt(1.0)));
  const BalanceReport naive = naive_assignment(d, 8);
  const BalanceReport hil = balance(d, 8);
  double tn = 0, th = 0;
  for (double l : naive.load) tn += l;
  for (double l : hil.load) th += l;
  r.detail << d.blocks.size() << " blocks, stddev naive " << naive.stddev << " -> balanced " << hil.stddev << " ("
           << 100 * hil.stddev / naive.stddev << "%)";
  r.check(d.blocks.size() == 64, "64 blocks");
  r.check(hil.stddev <= 0.25 * naive.stddev, "stddev <= 25% of naive");
  r.check(tn == th, "total workload preserved");
}

void ac10(Result& r) {
  RunConfig cfg;
  cfg.geometry = "riverbed";
  cfg.dims = {32, 32, 32};
  cfg.block = {8, 8, 8};
  cfg.layout = "hybrid:0.8";
  cfg.seed = 4;
  Domain hy = build_domain(cfg);
  cfg.layout = "dense";
  Domain de = build_domain(cfg);
  bool kinds = true;
  int n_dense = 0;
  for (const auto& b : hy.blocks) {
    kinds &= (b.kind == LayoutKind::Dense) == (b.porosity >= 0.8);
    n_dense += b.kind == LayoutKind::Dense;
  }
  run(hy, 100);
  run(de, 100);
  const double diff = max_abs_diff(hy, de);
  r.detail << n_dense << " dense of " << hy.blocks.size() << " blocks, max |dpdf| vs all-dense " << diff;
  r.check(kinds, "kinds follow threshold");
  r.check(n_dense > 0 && n_dense < int(hy.blocks.size()), "mixed layout");
  r.check(diff <= 1e-11, "<= 1e-11");
}

void ac11(Result& r) {
  r.gating = false;
  RunConfig cfg;
  cfg.dims = {32, 32, 32};
  cfg.block = {32, 32, 32};
  cfg.steps = 20;
  std::ostringstream log;
  const auto recs = sweep_porosity(cfg, {0.35}, log);
  const double sp = recs[0].fluid_updates_per_s, de = recs[1].fluid_updates_per_s;
  r.detail << "sparse/dense fluid updates/s at phi 0.35: " << sp / de;
  if (sp < 1.3 * de) r.detail << " (warning: below 1.3x on this host)";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> want(argv + 1, argv + argc);
  auto wanted = [&](const std::string& id) {
    return want.empty() || std::find(want.begin(), want.end(), id) != want.end();
  };
  std::map<std::string, Result> results;
  std::vector<std::pair<std::string, std::function<void()>>> jobs = {
      {"AC1", [&] { ac1(results["AC1"]); }},
      {"AC2", [&] { ac2(results["AC2"]); }},
      {"AC3", [&] { ac3_4(results["AC3"], results["AC4"]); }},
      {"AC4", [&] { ac3_4(results["AC3"], results["AC4"]); }},
      {"AC5", [&] { ac5(results["AC5"]); }},
      {"AC6", [&] { ac6(results["AC6"]); }},
      {"AC7", [&] { ac7(results["AC7"]); }},
      {"AC8", [&] { ac8(results["AC8"]); }},
      {"AC9", [&] { ac9(results["AC9"]); }},
      {"AC10", [&] { ac10(results["AC10"]); }},
      {"AC11", [&] { ac11(results["AC11"]); }},
  };
  bool all = true;
  bool ac34_done = false;
  for (auto& [id, job] : jobs) {
    if (!wanted(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const bool shared = id == "AC3" || id == "AC4";
    if (!shared || !ac34_done) {
      try {
        job();
      } catch (const std::exception& e) {
        results[id].check(false, std::string("exception: ") + e.what());
      }
    }
    ac34_done |= shared;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Result& r = results[id];
    const char* verdict = !r.gating ? "INFO" : (r.pass ? "PASS" : "FAIL");
    std::printf("%-4s %s %s (%.2f s)\n", id.c_str(), verdict, r.detail.str().c_str(), secs);
    std::fflush(stdout);
    all &= r.pass || !r.gating;
  }
  return all ? 0 : 1;
}
