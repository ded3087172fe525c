#include "pcp/live/wire.hpp"

#include <nlohmann/json.hpp>

namespace pcp::live {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string_view action_token(Action a) {
  switch (a) {
    case Action::NoOp: return "noop";
    case Action::Left: return "left";
    case Action::Right: return "right";
  }
  return "noop";
}

Action parse_action(const std::string& s) {
  if (s == "noop") return Action::NoOp;
  if (s == "left") return Action::Left;
  if (s == "right") return Action::Right;
  throw WireError("unknown action: " + s);
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw WireError(std::string("missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw WireError(std::string("bad field: ") + key);
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

struct Encoder {
  ordered_json operator()(const JoinMessage& m) const {
    ordered_json j{{"type", "join"}, {"slot", m.slot}, {"greedy", m.greedy}};
    if (m.session) j["session"] = *m.session;
    return j;
  }
  ordered_json operator()(const InputMessage& m) const {
    return {{"type", "input"}, {"action", std::string(action_token(m.action))}};
  }
  ordered_json operator()(const MarkMessage& m) const { return {{"type", "mark"}, {"tick", m.tick}}; }
  ordered_json operator()(const LeaveMessage&) const { return {{"type", "leave"}}; }
  ordered_json operator()(const ConfigMessage& m) const {
    return {{"type", "config"},
            {"session", m.session},
            {"slot", m.slot},
            {"tick_hz", m.tick_hz},
            {"episode_length", m.episode_length},
            {"step_size", m.step_size},
            {"crossing_threshold", m.crossing_threshold},
            {"mark_tolerance", m.mark_tolerance},
            {"resumed", m.resumed}};
  }
  ordered_json operator()(const TickMessage& m) const {
    return {{"type", "tick"}, {"tick", m.tick}, {"position", m.position}, {"buzz", m.buzz}};
  }
  ordered_json operator()(const MarkAckMessage& m) const {
    return {{"type", "mark_ack"}, {"tick", m.tick}, {"index", m.index}};
  }
  ordered_json operator()(const SessionSummaryMessage& m) const {
    ordered_json log = ordered_json::array();
    for (const MarkResult& r : m.mark_log) log.push_back({{"tick", r.tick}, {"hit", r.hit}});
    ordered_json j{{"type", "session_summary"}, {"session", m.session}, {"seed", m.seed}, {"ticks", m.ticks},
                   {"marks", m.marks},          {"hits", m.hits}};
    j["precision"] = m.precision ? ordered_json(*m.precision) : ordered_json(nullptr);
    j["crossings"] = {{"self_other", m.self_other},
                      {"self_shadow", m.self_shadow},
                      {"self_stationary", m.self_stationary}};
    j["mark_log"] = std::move(log);
    j["machine_positions"] = m.machine_positions;
    j["trace_file"] = m.trace_file;
    return j;
  }
  ordered_json operator()(const ErrorMessage& m) const {
    return {{"type", "error"}, {"code", m.code}, {"message", m.message}};
  }
};

}  // namespace

std::string_view message_type(const WireMessage& message) {
  static constexpr std::string_view kNames[] = {"join",     "input",           "mark",  "leave", "config", "tick",
                                                "mark_ack", "session_summary", "error"};
  return kNames[message.index()];
}

std::string encode(const WireMessage& message) { return std::visit(Encoder{}, message).dump(); }

WireMessage decode(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw WireError("malformed JSON");
  if (!j.is_object()) throw WireError("message must be a JSON object");
  const auto type = field<std::string>(j, "type");

  if (type == "join") {
    JoinMessage m;
    m.slot = field_or<int>(j, "slot", 0);
    if (m.slot != 0 && m.slot != 1) throw WireError("slot must be 0 or 1");
    m.greedy = field_or<bool>(j, "greedy", false);
    if (j.contains("session") && !j.at("session").is_null()) m.session = field<std::string>(j, "session");
    return m;
  }
  if (type == "input") return InputMessage{parse_action(field<std::string>(j, "action"))};
  if (type == "mark") return MarkMessage{field<int>(j, "tick")};
  if (type == "leave") return LeaveMessage{};
  if (type == "config") {
    ConfigMessage m;
    m.session = field<std::string>(j, "session");
    m.slot = field<int>(j, "slot");
    m.tick_hz = field<double>(j, "tick_hz");
    m.episode_length = field<int>(j, "episode_length");
    m.step_size = field<double>(j, "step_size");
    m.crossing_threshold = field<double>(j, "crossing_threshold");
    m.mark_tolerance = field<int>(j, "mark_tolerance");
    m.resumed = field<bool>(j, "resumed");
    return m;
  }
  if (type == "tick") {
    TickMessage m{field<int>(j, "tick"), field<double>(j, "position"), field<int>(j, "buzz")};
    if (m.buzz != 0 && m.buzz != 1) throw WireError("buzz must be 0 or 1");
    return m;
  }
  if (type == "mark_ack") return MarkAckMessage{field<int>(j, "tick"), field<int>(j, "index")};
  if (type == "session_summary") {
    SessionSummaryMessage m;
    m.session = field<std::string>(j, "session");
    m.seed = field<std::uint64_t>(j, "seed");
    m.ticks = field<int>(j, "ticks");
    m.marks = field<int>(j, "marks");
    m.hits = field<int>(j, "hits");
    if (!j.contains("precision")) throw WireError("missing field: precision");
    if (!j.at("precision").is_null()) m.precision = field<double>(j, "precision");
    const json c = field<json>(j, "crossings");
    m.self_other = field<double>(c, "self_other");
    m.self_shadow = field<double>(c, "self_shadow");
    m.self_stationary = field<double>(c, "self_stationary");
    for (const json& r : field<json>(j, "mark_log")) m.mark_log.push_back({field<int>(r, "tick"), field<bool>(r, "hit")});
    m.machine_positions = field<std::vector<double>>(j, "machine_positions");
    m.trace_file = field_or<std::string>(j, "trace_file", "");
    return m;
  }
  if (type == "error") return ErrorMessage{field<std::string>(j, "code"), field<std::string>(j, "message")};
  throw WireError("unknown message type: " + type);
}

}  // namespace pcp::live
