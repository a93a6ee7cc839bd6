#pragma once

#include <cstdint>
#include <vector>

#include "slbm/domain.hpp"

namespace slbm {

/// Forward: owner cells -> neighbor ghost layer (before streaming).
/// Reverse: ghost layer -> owner cells (AA only, returns PDFs pushed into the
/// ghost layer by the streaming step).
enum class Flow : std::uint8_t { Forward, Reverse };

/// One ghost-exchange payload.
///
/// `offset` is the neighbor offset as seen from the block that owns the cells
/// (for Forward that is the sender, for Reverse the receiver). Dense payloads
/// carry every geometric (cell, direction) pair of the face registry; sparse
/// payloads carry only fluid-to-fluid links. Entries follow the registry
/// order. Non-link entries of a converted dense payload hold kSentinel.
///
/// Debug dump layout (version 1): src, dst, offset, flow, layout, parity,
/// count, then `count` doubles.
struct FaceMessage {
  static constexpr int kVersion = 1;
  int src = -1;
  int dst = -1;
  int offset = 0;
  Flow flow = Flow::Forward;
  LayoutKind layout = LayoutKind::Sparse;
  Parity parity = Parity::Even;
  std::vector<double> values;
};

double sentinel();

/// Builds the send/recv registries of every block (called by partition).
void build_face_links(Domain& domain, Block& block);

/// Packs the message block `b` sends to its neighbor at `offset` (Forward) or
/// returns to the neighbor at `offset` (Reverse; `offset` is then the offset
/// of b's ghost region).
FaceMessage pack(const Domain& domain, const Block& b, int offset, Flow flow);

/// Unpacks a message addressed to `b`. Throws ProtocolError on a layout or
/// length mismatch.
void unpack(const Domain& domain, Block& b, const FaceMessage& msg);

/// Converts a payload between dense and sparse layouts using the receiver's
/// link masks.
FaceMessage convert_face(const FaceMessage& msg, LayoutKind target, const Block& receiver);

/// Number of payload values of a message from `b` at `offset` in its own layout.
std::size_t expected_length(const Block& b, int offset, Flow flow);

enum class Schedule { Sequential, Overlapped };

struct StepOptions {
  Schedule schedule = Schedule::Sequential;
  int workers = 1;
  double deadlock_timeout_s = 30.0;
};

/// Exchange, boundary refresh and full-block kernels for every block.
void timestep_sequential(Domain& domain);

/// Communication hiding: start exchange, run interior cells, complete the
/// exchange, run frame cells. Requires split lists (domain.frame_width).
void timestep_overlapped(Domain& domain);

/// Runs `steps` steps with the given schedule. With more than one worker each
/// worker thread owns the blocks assigned to it and messages travel through
/// per-block mailboxes.
void run(Domain& domain, std::uint64_t steps, const StepOptions& options = {});

/// Completes a pending reverse exchange so every block holds its own PDFs.
void settle(Domain& domain);

}  // namespace slbm
