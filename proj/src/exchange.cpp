#include "slbm/exchange.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "slbm/error.hpp"

namespace slbm {

double sentinel() { return std::numeric_limits<double>::quiet_NaN(); }

namespace {

int opposite(int k) { return 26 - k; }

bool in_region(const Coord& p, const Extent& n, const Coord& d) {
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0 && (p[a] < 0 || p[a] >= n[a])) return false;
    if (d[a] < 0 && p[a] != -1) return false;
    if (d[a] > 0 && p[a] != n[a]) return false;
  }
  return true;
}

/// Offsets whose ghost cells are filled by message passing.
bool exchanges(const Block& b, int k) {
  const NeighborKind nk = b.flags.neighbor(k);
  return nk == NeighborKind::Remote || (nk == NeighborKind::Self && b.kind == LayoutKind::Dense);
}

Parity payload_parity(const Block& b) { return b.kind == LayoutKind::Dense ? b.dense->parity() : b.sparse->parity; }

const char* flow_name(Flow f) { return f == Flow::Forward ? "forward" : "reverse"; }

}  // namespace

void build_face_links(Domain& domain, Block& block) {
  const Stencil& s = domain.stencil;
  const FlagField& fl = block.flags;
  const Extent& n = fl.dims();
  for (auto& f : block.faces) f = FaceLinks{};
  for (int k : fl.neighbor_offsets()) {
    if (!exchanges(block, k)) continue;
    const Coord d = offset_from_index(k);
    FaceLinks& f = block.faces[k];
    fl.for_each_interior([&](const Coord& c) {
      for (int q = 1; q < s.q; ++q) {
        const Coord t{c[0] + s.c[q][0], c[1] + s.c[q][1], c[2] + s.c[q][2]};
        if (!in_region(t, n, d)) continue;
        const bool link = fl.at(c) == tag::kFluid && fl.at(t) == tag::kGhost;
        f.send.push_back({std::uint32_t(fl.index(c)), std::uint8_t(q)});
        f.send_link.push_back(link);
        f.send_link_count += link;
      }
    });
    fl.for_each_ghost(k, [&](const Coord& g) {
      for (int q = 1; q < s.q; ++q) {
        const Coord t{g[0] + s.c[q][0], g[1] + s.c[q][1], g[2] + s.c[q][2]};
        if (!fl.in_interior(t)) continue;
        const bool link = fl.at(g) == tag::kGhost && fl.at(t) == tag::kFluid;
        f.recv.push_back({std::uint32_t(fl.index(g)), std::uint8_t(q)});
        f.recv_link.push_back(link);
        f.recv_link_count += link;
      }
    });
    if (block.kind != LayoutKind::Sparse) continue;
    const SparseLists& L = *block.sparse;
    for (std::size_t j = 0; j < f.send.size(); ++j) {
      if (!f.send_link[j]) continue;
      f.send_slots.push_back(L.slot(f.send[j].dir, std::uint32_t(L.fluid_id[f.send[j].cell])));
    }
    const auto& ghosts = L.ghost_slots[k];
    std::size_t gi = 0;
    for (std::size_t j = 0; j < f.recv.size(); ++j) {
      if (!f.recv_link[j]) continue;
      if (gi >= ghosts.size() || ghosts[gi].dir != f.recv[j].dir || fl.index(ghosts[gi].ghost) != f.recv[j].cell)
        throw Error("ghost slot order does not match the exchange registry of block " + std::to_string(block.id));
      f.recv_slots.push_back(ghosts[gi++].slot);
    }
    if (gi != ghosts.size())
      throw Error("unmatched ghost slots in block " + std::to_string(block.id));
  }
}

std::size_t expected_length(const Block& b, int offset, Flow flow) {
  const FaceLinks& f = b.faces[offset];
  if (flow == Flow::Forward) return b.kind == LayoutKind::Dense ? f.send.size() : f.send_link_count;
  return b.kind == LayoutKind::Dense ? f.recv.size() : f.recv_link_count;
}

FaceMessage pack(const Domain& domain, const Block& b, int offset, Flow flow) {
  (void)domain;
  FaceMessage m;
  m.src = b.id;
  m.dst = b.neighbor[offset];
  m.flow = flow;
  m.offset = flow == Flow::Forward ? offset : opposite(offset);
  m.layout = b.kind;
  m.parity = payload_parity(b);
  const FaceLinks& f = b.faces[offset];
  if (b.kind == LayoutKind::Dense) {
    const auto& pairs = flow == Flow::Forward ? f.send : f.recv;
    m.values.reserve(pairs.size());
    for (const auto& p : pairs) m.values.push_back(b.dense->at(p.dir, p.cell));
  } else {
    const auto& slots = flow == Flow::Forward ? f.send_slots : f.recv_slots;
    m.values.reserve(slots.size());
    for (Slot sl : slots) m.values.push_back(b.sparse->pdf[sl]);
  }
  return m;
}

namespace {

/// Registry and link mask a message addressed to `b` is unpacked against.
struct Target {
  const std::vector<FaceLinks::Pair>* pairs;
  const std::vector<std::uint8_t>* link;
  const std::vector<Slot>* slots;
};

Target target_of(const Block& b, const FaceMessage& msg) {
  if (msg.offset < 0 || msg.offset >= 27 || msg.offset == kCenterOffset)
    throw ProtocolError("bad neighbor offset " + std::to_string(msg.offset));
  if (msg.flow == Flow::Forward) {
    const FaceLinks& f = b.faces[opposite(msg.offset)];
    return {&f.recv, &f.recv_link, &f.recv_slots};
  }
  const FaceLinks& f = b.faces[msg.offset];
  return {&f.send, &f.send_link, &f.send_slots};
}

}  // namespace

FaceMessage convert_face(const FaceMessage& msg, LayoutKind target, const Block& receiver) {
  if (msg.layout == target) return msg;
  const Target t = target_of(receiver, msg);
  FaceMessage out = msg;
  out.layout = target;
  out.values.clear();
  const auto& link = *t.link;
  if (target == LayoutKind::Sparse) {
    if (msg.values.size() != link.size())
      throw ProtocolError("dense payload length " + std::to_string(msg.values.size()) + ", registry has " +
                          std::to_string(link.size()));
    for (std::size_t j = 0; j < link.size(); ++j)
      if (link[j]) out.values.push_back(msg.values[j]);
  } else {
    out.values.reserve(link.size());
    std::size_t i = 0;
    for (std::size_t j = 0; j < link.size(); ++j) {
      if (!link[j]) {
        out.values.push_back(sentinel());
        continue;
      }
      if (i >= msg.values.size()) throw ProtocolError("sparse payload too short");
      out.values.push_back(msg.values[i++]);
    }
    if (i != msg.values.size()) throw ProtocolError("sparse payload too long");
  }
  return out;
}

void unpack(const Domain& domain, Block& b, const FaceMessage& msg) {
  (void)domain;
  if (msg.dst != b.id)
    throw ProtocolError("message for block " + std::to_string(msg.dst) + " delivered to block " + std::to_string(b.id));
  if (msg.layout != b.kind) throw ProtocolError("payload layout does not match block " + std::to_string(b.id));
  if (msg.parity != payload_parity(b))
    throw ProtocolError("parity mismatch in " + std::string(flow_name(msg.flow)) + " message " +
                        std::to_string(msg.src) + " -> " + std::to_string(msg.dst));
  const Target t = target_of(b, msg);
  if (b.kind == LayoutKind::Dense) {
    const auto& pairs = *t.pairs;
    if (msg.values.size() != pairs.size())
      throw ProtocolError("dense payload length " + std::to_string(msg.values.size()) + ", expected " +
                          std::to_string(pairs.size()));
    const bool links_only = msg.flow == Flow::Reverse;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (links_only && !(*t.link)[j]) continue;
      b.dense->at(pairs[j].dir, pairs[j].cell) = msg.values[j];
    }
  } else {
    const auto& slots = *t.slots;
    if (msg.values.size() != slots.size())
      throw ProtocolError("sparse payload length " + std::to_string(msg.values.size()) + ", expected " +
                          std::to_string(slots.size()));
    for (std::size_t j = 0; j < slots.size(); ++j) b.sparse->pdf[slots[j]] = msg.values[j];
  }
}

// --- stepping

namespace {

using Clock = std::chrono::steady_clock;

struct Mailbox {
  std::mutex m;
  std::condition_variable cv;
  std::vector<FaceMessage> msgs;
};

struct WorkerStats {
  ExchangeCounters exchange;
  double interior_s = 0, exchange_s = 0;
};

class Engine {
 public:
  Engine(Domain& d, double timeout_s) : d_(d), boxes_(d.blocks.size()), timeout_s_(timeout_s) {}

  std::atomic<bool> abort{false};

  void post(Block& b, Flow flow, WorkerStats& st) {
    for (int k : b.flags.neighbor_offsets()) {
      if (!exchanges(b, k)) continue;
      const auto& reg = flow == Flow::Forward ? b.faces[k].send : b.faces[k].recv;
      if (reg.empty()) continue;
      FaceMessage m = pack(d_, b, k, flow);
      if (m.dst == b.id) {
        st.exchange.local_values += m.values.size();
      } else {
        st.exchange.messages += 1;
        st.exchange.values += m.values.size();
      }
      Mailbox& box = boxes_[std::size_t(m.dst)];
      {
        std::lock_guard lk(box.m);
        box.msgs.push_back(std::move(m));
      }
      box.cv.notify_all();
    }
  }

  void receive(Block& b, Flow flow) {
    std::size_t expected = 0;
    for (int k : b.flags.neighbor_offsets()) {
      if (!exchanges(b, k)) continue;
      const auto& reg = flow == Flow::Forward ? b.faces[k].recv : b.faces[k].send;
      expected += !reg.empty();
    }
    Mailbox& box = boxes_[std::size_t(b.id)];
    std::vector<FaceMessage> got;
    {
      std::unique_lock lk(box.m);
      const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_s_);
      while (box.msgs.size() < expected) {
        if (abort.load()) throw Error("aborted");
        if (Clock::now() >= deadline)
          throw ProtocolError("deadlock: block " + std::to_string(b.id) + " received " +
                              std::to_string(box.msgs.size()) + " of " + std::to_string(expected) + " " +
                              flow_name(flow) + " messages");
        box.cv.wait_for(lk, std::chrono::milliseconds(20));
      }
      if (box.msgs.size() != expected)
        throw ProtocolError("block " + std::to_string(b.id) + " received unexpected messages");
      got.swap(box.msgs);
    }
    for (const auto& m : got) {
      if (m.flow != flow) throw ProtocolError("unexpected message flow");
      if (m.layout != b.kind)
        unpack(d_, b, convert_face(m, b.kind, b));
      else
        unpack(d_, b, m);
    }
  }

  /// One step of the blocks in `mine`. `flow` is empty when no exchange is due.
  void step(const std::vector<Block*>& mine, Schedule schedule, std::optional<Flow> flow, WorkerStats& st) {
    const bool aa = d_.pattern == Pattern::AA;
    const bool streaming = !aa || d_.parity == Parity::Even;
    const auto t0 = Clock::now();
    if (flow)
      for (Block* b : mine) post(*b, *flow, st);
    if (schedule == Schedule::Overlapped) {
      const auto ti = Clock::now();
      for (Block* b : mine) {
        if (streaming) refresh(*b);
        kernel(*b, Phase::Interior);
      }
      st.interior_s += std::chrono::duration<double>(Clock::now() - ti).count();
      if (flow)
        for (Block* b : mine) receive(*b, *flow);
      st.exchange_s += std::chrono::duration<double>(Clock::now() - t0).count();
      for (Block* b : mine) {
        kernel(*b, Phase::Frame);
        finish(*b, streaming);
      }
    } else {
      if (flow)
        for (Block* b : mine) receive(*b, *flow);
      st.exchange_s += std::chrono::duration<double>(Clock::now() - t0).count();
      for (Block* b : mine) {
        if (streaming) refresh(*b);
        kernel(*b, Phase::All);
        finish(*b, streaming);
      }
    }
  }

  void exchange_only(Flow flow, WorkerStats& st) {
    for (auto& b : d_.blocks) post(b, flow, st);
    for (auto& b : d_.blocks) receive(b, flow);
  }

 private:
  void refresh(Block& b) {
    if (b.kind == LayoutKind::Sparse && !b.sparse->ubb_slots.empty()) refresh_boundary_slots(*b.sparse);
  }

  void finish(Block& b, bool streaming) {
    if (b.kind == LayoutKind::Dense) {
      if (d_.pattern == Pattern::Pull) b.dense->swap();
    } else if (d_.pattern == Pattern::AA && streaming && !b.sparse->ubb_slots.empty()) {
      fold_boundary_slots(*b.sparse);
    }
  }

  void kernel(Block& b, Phase phase) {
    const FrameWidth frame = d_.frame_width.value_or(FrameWidth{});
    if (b.kind == LayoutKind::Dense) {
      if (d_.pattern == Pattern::Pull)
        dense_step_pull(*b.dense, b.flags, d_.params, d_.stencil, b.counters, phase, frame);
      else
        dense_step_aa(*b.dense, b.flags, d_.params, d_.stencil, b.counters, phase, frame);
    } else if (phase != Phase::All) {
      sparse_step_split(*b.sparse, d_.params, d_.stencil, b.counters, phase);
    } else if (d_.pattern == Pattern::Pull) {
      sparse_step_pull(*b.sparse, d_.params, d_.stencil, b.counters);
    } else {
      sparse_step_aa(*b.sparse, d_.params, d_.stencil, b.counters);
    }
  }

  Domain& d_;
  std::vector<Mailbox> boxes_;
  double timeout_s_;
};

std::optional<Flow> flow_for(const Domain& d) {
  if (d.pattern == Pattern::Pull || d.parity == Parity::Even) return Flow::Forward;
  if (d.reverse_pending) return Flow::Reverse;
  return std::nullopt;
}

void merge(Domain& d, const WorkerStats& st) {
  d.exchange.messages += st.exchange.messages;
  d.exchange.values += st.exchange.values;
  d.exchange.local_values += st.exchange.local_values;
}

/// Bookkeeping after every block finished a step.
void complete_step(Domain& d, std::optional<Flow> flow) {
  if (flow == Flow::Forward) d.exchange.forward_rounds += 1;
  if (flow == Flow::Reverse) d.exchange.reverse_rounds += 1;
  d.reverse_pending = d.pattern == Pattern::AA && d.parity == Parity::Even;
  d.parity = flip(d.parity);
  d.steps_done += 1;
}

void check_schedule(const Domain& d, Schedule schedule) {
  if (schedule != Schedule::Overlapped) return;
  if (!d.frame_width) throw ConfigError("overlapped schedule needs frame widths");
  for (const auto& b : d.blocks)
    if (b.kind == LayoutKind::Sparse && !b.sparse->split)
      throw ConfigError("overlapped schedule needs split lists in block " + std::to_string(b.id));
}

}  // namespace

void settle(Domain& domain) {
  if (!domain.reverse_pending) return;
  Engine e(domain, 30.0);
  WorkerStats st;
  e.exchange_only(Flow::Reverse, st);
  merge(domain, st);
  domain.exchange.reverse_rounds += 1;
  domain.reverse_pending = false;
}

void timestep_sequential(Domain& domain) { run(domain, 1, {Schedule::Sequential, 1}); }

void timestep_overlapped(Domain& domain) { run(domain, 1, {Schedule::Overlapped, 1}); }

void run(Domain& domain, std::uint64_t steps, const StepOptions& options) {
  if (options.workers < 1) throw ConfigError("need at least one worker");
  check_schedule(domain, options.schedule);
  Engine engine(domain, options.deadlock_timeout_s);
  double interior = 0, exch = 0;

  if (options.workers == 1) {
    std::vector<Block*> all;
    for (auto& b : domain.blocks) all.push_back(&b);
    for (std::uint64_t s = 0; s < steps; ++s) {
      WorkerStats st;
      const auto flow = flow_for(domain);
      engine.step(all, options.schedule, flow, st);
      merge(domain, st);
      interior += st.interior_s;
      exch += st.exchange_s;
      complete_step(domain, flow);
    }
  } else {
    const int nw = options.workers;
    std::vector<std::vector<Block*>> mine{std::size_t(nw)};
    for (auto& b : domain.blocks) mine[std::size_t(b.worker % nw)].push_back(&b);
    std::vector<WorkerStats> stats{std::size_t(nw)};
    std::optional<Flow> flow = flow_for(domain);
    std::exception_ptr failure;
    std::mutex failure_m;
    std::atomic<bool> stop{false};

    auto on_step = [&]() noexcept {
      if (!engine.abort.load()) {
        for (auto& st : stats) {
          merge(domain, st);
          interior += st.interior_s;
          exch += st.exchange_s;
          st = WorkerStats{};
        }
        complete_step(domain, flow);
        flow = flow_for(domain);
      }
      if (engine.abort.load()) stop.store(true);
    };
    std::barrier sync(nw, on_step);

    auto body = [&](int w) {
      for (std::uint64_t s = 0; s < steps && !stop.load(); ++s) {
        try {
          if (!engine.abort.load()) engine.step(mine[std::size_t(w)], options.schedule, flow, stats[std::size_t(w)]);
        } catch (...) {
          std::lock_guard lk(failure_m);
          if (!failure && !engine.abort.load()) failure = std::current_exception();
          engine.abort.store(true);
        }
        sync.arrive_and_wait();
      }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < nw; ++w) threads.emplace_back(body, w);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  if (exch > 0) domain.overlap_ratio = interior / exch;
}

}  // namespace slbm
