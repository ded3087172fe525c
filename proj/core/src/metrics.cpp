#include "pcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pcp/errors.hpp"

namespace pcp {

CrossingFlags flags_from_report(const CrossingReport& report) {
  return {report.crossed_other, report.crossed_other_shadow, report.crossed_own_object};
}

std::array<CrossingFlags, 2> classify_step(const WorldState& state, const EnvConfig& config) {
  const CrossingPair c = detect_crossings(state, config);
  return {flags_from_report(c[0]), flags_from_report(c[1])};
}

void CrossingCounts::add(const CrossingFlags& f) {
  self_other += f.self_other;
  self_shadow += f.self_shadow;
  self_stationary += f.self_stationary;
  ++steps;
}

std::array<CrossingCounts, 2> count_crossings(std::span<const TraceRow> rows) {
  std::array<CrossingCounts, 2> counts{};
  for (const TraceRow& r : rows) {
    for (int i = 0; i < kNumAgents; ++i) counts[i].add(flags_from_report(r.crossings[i]));
  }
  return counts;
}

IterationMetrics summarize_iteration(int iteration, std::span<const EpisodeTrace> traces) {
  IterationMetrics m;
  m.iteration = iteration;
  m.episodes = static_cast<int>(traces.size());
  if (traces.empty()) return m;
  double other = 0.0;
  double shadow = 0.0;
  double stationary = 0.0;
  for (const EpisodeTrace& tr : traces) {
    const auto counts = count_crossings(tr.rows);
    for (int i = 0; i < kNumAgents; ++i) {
      other += counts[i].proportion_other();
      shadow += counts[i].proportion_shadow();
      stationary += counts[i].proportion_stationary();
      RewardBreakdown sum;
      for (const TraceRow& r : tr.rows) sum += r.rewards[i];
      m.mean_breakdown[i] += sum;
      m.mean_return[i] += sum.total;
    }
  }
  const double n = static_cast<double>(traces.size());
  for (int i = 0; i < kNumAgents; ++i) {
    m.mean_breakdown[i] *= 1.0 / n;
    m.mean_return[i] /= n;
  }
  m.self_other = other / (2.0 * n);
  m.self_shadow = shadow / (2.0 * n);
  m.self_stationary = stationary / (2.0 * n);
  return m;
}

std::optional<std::size_t> MetricsTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> MetricsTable::column(const std::string& name) const {
  const auto idx = column_index(name);
  if (!idx) throw RuntimeFailure("metrics table " + run_id + " has no column " + name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[*idx]);
  return out;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "iteration",         "episodes",       "return_agent0", "return_agent1", "return_mean",
      "extrinsic_agent0",  "curiosity",      "imitate",       "promote_imitation", "influence",
      "impressionability", "self_other",     "self_shadow",   "self_stationary",   "policy_loss",
      "value_loss",        "entropy",        "clip_fraction", "kl",                "predictor_loss"};
  return cols;
}

const std::vector<std::string>& reward_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"iteration"};
    for (int k = 0; k < 2; ++k) {
      for (const char* name :
           {"curiosity", "imitate", "promote_imitation", "influence", "impressionability", "extrinsic", "total"}) {
        c.push_back(std::string(name) + "_agent" + std::to_string(k));
      }
    }
    return c;
  }();
  return cols;
}

MetricsTable metrics_table(const std::string& run_id, std::span<const IterationMetrics> iterations) {
  MetricsTable t;
  t.run_id = run_id;
  t.columns = metrics_columns();
  for (const IterationMetrics& m : iterations) {
    const auto& b0 = m.mean_breakdown[0];
    const auto& b1 = m.mean_breakdown[1];
    auto avg = [](double a, double b) { return 0.5 * (a + b); };
    auto ppo_avg = [&](double PpoStats::*field) { return avg(m.ppo[0].*field, m.ppo[1].*field); };
    t.rows.push_back({static_cast<double>(m.iteration),
                      static_cast<double>(m.episodes),
                      m.mean_return[0],
                      m.mean_return[1],
                      avg(m.mean_return[0], m.mean_return[1]),
                      b0.extrinsic,
                      avg(b0.curiosity, b1.curiosity),
                      avg(b0.imitate, b1.imitate),
                      avg(b0.promote_imitation, b1.promote_imitation),
                      avg(b0.influence, b1.influence),
                      avg(b0.impressionability, b1.impressionability),
                      m.self_other,
                      m.self_shadow,
                      m.self_stationary,
                      ppo_avg(&PpoStats::policy_loss),
                      ppo_avg(&PpoStats::value_loss),
                      ppo_avg(&PpoStats::entropy),
                      ppo_avg(&PpoStats::clip_fraction),
                      ppo_avg(&PpoStats::kl),
                      m.predictor_loss});
  }
  return t;
}

MetricsTable rewards_table(const std::string& run_id, std::span<const IterationMetrics> iterations) {
  MetricsTable t;
  t.run_id = run_id;
  t.columns = reward_columns();
  for (const IterationMetrics& m : iterations) {
    std::vector<double> row{static_cast<double>(m.iteration)};
    for (const auto& b : m.mean_breakdown) {
      for (double v : {b.curiosity, b.imitate, b.promote_imitation, b.influence, b.impressionability, b.extrinsic,
                       b.total}) {
        row.push_back(v);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

AggregateTable aggregate(std::span<const MetricsTable> runs) {
  AggregateTable out;
  out.runs = runs.size();
  if (runs.empty()) return out;
  const MetricsTable& first = runs.front();
  out.columns = first.columns;
  for (const MetricsTable& r : runs) {
    if (r.columns != first.columns) throw ConfigError("aggregate: run '" + r.run_id + "' has different columns");
    if (r.rows.size() != first.rows.size()) {
      throw ConfigError("aggregate: run '" + r.run_id + "' has " + std::to_string(r.rows.size()) +
                        " iterations, expected " + std::to_string(first.rows.size()));
    }
  }
  const std::size_t C = first.columns.size();
  const double n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < first.rows.size(); ++i) {
    std::vector<double> mean(C, 0.0);
    std::vector<double> sd(C, 0.0);
    for (const MetricsTable& r : runs) {
      if (r.rows[i].size() != C) throw ConfigError("aggregate: run '" + r.run_id + "' has a ragged row");
      for (std::size_t c = 0; c < C; ++c) mean[c] += r.rows[i][c];
    }
    for (double& v : mean) v /= n;
    if (runs.size() > 1) {
      for (const MetricsTable& r : runs) {
        for (std::size_t c = 0; c < C; ++c) sd[c] += (r.rows[i][c] - mean[c]) * (r.rows[i][c] - mean[c]);
      }
      for (double& v : sd) v = std::sqrt(v / (n - 1.0));
    }
    out.mean.push_back(std::move(mean));
    out.stddev.push_back(std::move(sd));
  }
  return out;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot write " + path.string());
  return os;
}

void write_row(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (c) os << ',';
    os << std::setprecision(17) << row[c];
  }
  os << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const MetricsTable& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (const auto& row : table.rows) write_row(os, row);
}

void write_csv(const std::filesystem::path& path, const MetricsTable& table) {
  auto os = open_for_write(path);
  write_csv(os, table);
  if (!os) throw RuntimeFailure("error writing " + path.string());
}

void write_aggregate_csv(const std::filesystem::path& path, const AggregateTable& table) {
  auto os = open_for_write(path);
  os << "iteration";
  for (std::size_t c = 1; c < table.columns.size(); ++c) {
    os << ',' << table.columns[c] << "_mean," << table.columns[c] << "_std";
  }
  os << '\n';
  for (std::size_t i = 0; i < table.mean.size(); ++i) {
    std::vector<double> row{table.mean[i][0]};
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
      row.push_back(table.mean[i][c]);
      row.push_back(table.stddev[i][c]);
    }
    write_row(os, row);
  }
  if (!os) throw RuntimeFailure("error writing " + path.string());
}

MetricsTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw RuntimeFailure("cannot read " + path.string());
  MetricsTable t;
  t.run_id = path.parent_path().filename().string();
  std::string line;
  if (!std::getline(is, line)) throw RuntimeFailure("empty CSV: " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.columns.size()) throw RuntimeFailure("ragged CSV row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

bool RunSummary::self_other_dominates(double factor) const {
  return self_other >= factor * self_shadow && self_other >= factor * self_stationary;
}

RunSummary summarize_run(const MetricsTable& table, int tail, int extrinsic_tail) {
  RunSummary s;
  s.run_id = table.run_id;
  s.iterations = static_cast<int>(table.rows.size());
  s.tail = tail;
  s.extrinsic_tail = extrinsic_tail;
  auto tail_mean = [&](const std::string& col, int k) {
    const auto v = table.column(col);
    if (v.empty()) return 0.0;
    const std::size_t n = std::min<std::size_t>(v.size(), static_cast<std::size_t>(std::max(k, 1)));
    double sum = 0.0;
    for (std::size_t i = v.size() - n; i < v.size(); ++i) sum += v[i];
    return sum / static_cast<double>(n);
  };
  s.self_other = tail_mean("self_other", tail);
  s.self_shadow = tail_mean("self_shadow", tail);
  s.self_stationary = tail_mean("self_stationary", tail);
  s.return_mean = tail_mean("return_mean", tail);
  s.extrinsic_agent0 = tail_mean("extrinsic_agent0", extrinsic_tail);
  return s;
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["run_id"] = s.run_id;
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  j["iterations"] = s.iterations;
  j["tail"] = s.tail;
  j["self_other"] = s.self_other;
  j["self_shadow"] = s.self_shadow;
  j["self_stationary"] = s.self_stationary;
  j["return_mean"] = s.return_mean;
  j["extrinsic_tail"] = s.extrinsic_tail;
  j["extrinsic_agent0"] = s.extrinsic_agent0;
  j["self_other_dominates"] = s.self_other_dominates();
  auto os = open_for_write(path);
  os << j.dump(2) << '\n';
}

RunSummary read_summary_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw RuntimeFailure("cannot read " + path.string());
  nlohmann::json j;
  try {
    is >> j;
    RunSummary s;
    s.run_id = j.at("run_id").get<std::string>();
    s.mode = j.at("mode").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.iterations = j.at("iterations").get<int>();
    s.tail = j.at("tail").get<int>();
    s.self_other = j.at("self_other").get<double>();
    s.self_shadow = j.at("self_shadow").get<double>();
    s.self_stationary = j.at("self_stationary").get<double>();
    s.return_mean = j.at("return_mean").get<double>();
    s.extrinsic_tail = j.at("extrinsic_tail").get<int>();
    s.extrinsic_agent0 = j.at("extrinsic_agent0").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeFailure("malformed summary " + path.string() + ": " + e.what());
  }
}

std::string artifact_stem(const std::string& run_id, int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_iter%06d", iteration);
  return run_id + buf;
}

}  // namespace pcp
