#pragma once

// Per-step episode trace and its CSV form.
//
// Column order (fixed):
//   tick, pos0, pos1, applied0, applied1, signal_bit,
//   other0, shadow0, object0, other1, shadow1, object1,
//   then for agent k in {0, 1}:
//   curiosity<k>, imitate<k>, promote_imitation<k>, influence<k>,
//   impressionability<k>, extrinsic<k>, reward<k>
//
// Actions are written as integers (0 noop, 1 left, 2 right), crossing flags as 0/1.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/rewards.hpp"

namespace pcp {

struct TraceRow {
  int tick = 0;
  std::array<double, 2> positions{};
  std::array<Action, 2> applied{Action::NoOp, Action::NoOp};
  int signal_bit = 0;
  CrossingPair crossings{};
  std::array<RewardBreakdown, 2> rewards{};
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
};

std::string trace_csv_header();

void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows);
void write_trace_csv(const std::string& path, std::span<const TraceRow> rows);

/// Throws RuntimeFailure on a malformed header or row.
std::vector<TraceRow> read_trace_csv(std::istream& is);

}  // namespace pcp
