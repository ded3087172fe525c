#pragma once

// JSON messages exchanged over the /session websocket. Every message is a
// single-line JSON object with a "type" field.
//
// client -> server
//   {"type":"join","slot":0,"greedy":false,"session":"s1"}   slot, greedy, session optional
//   {"type":"input","action":"left"}                          noop | left | right, held until changed
//   {"type":"mark","tick":42}
//   {"type":"leave"}
//
// server -> client
//   {"type":"config", ...}         sent once after join
//   {"type":"tick","tick":7,"position":0.35,"buzz":1}
//   {"type":"mark_ack","tick":42,"index":0}
//   {"type":"session_summary", ...}
//   {"type":"error","code":"...","message":"..."}
//
// Tick messages carry only the human's own position and the undifferentiated
// buzz bit. The machine's trajectory and crossing categories appear only in
// the summary.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/errors.hpp"

namespace pcp::live {

struct WireError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JoinMessage {
  int slot = 0;
  bool greedy = false;
  std::optional<std::string> session;
  bool operator==(const JoinMessage&) const = default;
};

struct InputMessage {
  Action action = Action::NoOp;
  bool operator==(const InputMessage&) const = default;
};

struct MarkMessage {
  int tick = 0;
  bool operator==(const MarkMessage&) const = default;
};

struct LeaveMessage {
  bool operator==(const LeaveMessage&) const = default;
};

struct ConfigMessage {
  std::string session;
  int slot = 0;
  double tick_hz = 10.0;
  int episode_length = 0;
  double step_size = 0.0;
  double crossing_threshold = 0.0;
  int mark_tolerance = 1;
  bool resumed = false;
  bool operator==(const ConfigMessage&) const = default;
};

struct TickMessage {
  int tick = 0;
  double position = 0.0;
  int buzz = 0;
  bool operator==(const TickMessage&) const = default;
};

struct MarkAckMessage {
  int tick = 0;
  int index = 0;
  bool operator==(const MarkAckMessage&) const = default;
};

struct MarkResult {
  int tick = 0;
  bool hit = false;
  bool operator==(const MarkResult&) const = default;
};

struct SessionSummaryMessage {
  std::string session;
  std::uint64_t seed = 0;
  int ticks = 0;
  int marks = 0;
  int hits = 0;
  std::optional<double> precision;  // null without marks
  double self_other = 0.0;
  double self_shadow = 0.0;
  double self_stationary = 0.0;
  std::vector<MarkResult> mark_log;
  std::vector<double> machine_positions;
  std::string trace_file;
  bool operator==(const SessionSummaryMessage&) const = default;
};

struct ErrorMessage {
  std::string code;
  std::string message;
  bool operator==(const ErrorMessage&) const = default;
};

using WireMessage = std::variant<JoinMessage, InputMessage, MarkMessage, LeaveMessage, ConfigMessage, TickMessage,
                                 MarkAckMessage, SessionSummaryMessage, ErrorMessage>;

std::string_view message_type(const WireMessage& message);

/// Compact single-line JSON.
std::string encode(const WireMessage& message);

/// Throws WireError on malformed JSON, an unknown type or a bad field.
WireMessage decode(std::string_view text);

}  // namespace pcp::live
