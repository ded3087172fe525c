#pragma once

// Crossing classification, per-iteration metrics, multi-seed aggregation and export.
//
// metrics.csv columns (one row per training iteration):
//   iteration, episodes, return_agent0, return_agent1, return_mean,
//   extrinsic_agent0, curiosity, imitate, promote_imitation, influence,
//   impressionability, self_other, self_shadow, self_stationary,
//   policy_loss, value_loss, entropy, clip_fraction, kl, predictor_loss
//
// Returns and reward components are per-episode sums averaged over the
// iteration's episodes; components are additionally averaged over both
// agents. Crossing columns are the fraction of steps on which the flag was
// set, averaged over both agents (categories are counted independently).
//
// rewards.csv columns: iteration, then <component>_agent<k> for
// component in {curiosity, imitate, promote_imitation, influence,
// impressionability, extrinsic, total} and k in {0, 1}.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/ppo.hpp"
#include "pcp/trace.hpp"

namespace pcp {

struct CrossingFlags {
  bool self_other = false;
  bool self_shadow = false;
  bool self_stationary = false;

  bool operator==(const CrossingFlags&) const = default;
};

CrossingFlags flags_from_report(const CrossingReport& report);

/// Per-agent crossing categories of a state; derived from detect_crossings.
std::array<CrossingFlags, 2> classify_step(const WorldState& state, const EnvConfig& config);

struct CrossingCounts {
  int self_other = 0;
  int self_shadow = 0;
  int self_stationary = 0;
  int steps = 0;

  void add(const CrossingFlags& f);
  double proportion_other() const { return steps ? static_cast<double>(self_other) / steps : 0.0; }
  double proportion_shadow() const { return steps ? static_cast<double>(self_shadow) / steps : 0.0; }
  double proportion_stationary() const { return steps ? static_cast<double>(self_stationary) / steps : 0.0; }
};

std::array<CrossingCounts, 2> count_crossings(std::span<const TraceRow> rows);

struct IterationMetrics {
  int iteration = 0;
  int episodes = 0;
  std::array<double, 2> mean_return{};
  std::array<RewardBreakdown, 2> mean_breakdown{};
  double self_other = 0.0;
  double self_shadow = 0.0;
  double self_stationary = 0.0;
  std::array<PpoStats, 2> ppo{};
  double predictor_loss = 0.0;
};

IterationMetrics summarize_iteration(int iteration, std::span<const EpisodeTrace> traces);

/// Column-oriented numeric table; the first column is always "iteration".
struct MetricsTable {
  std::string run_id;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

const std::vector<std::string>& metrics_columns();
const std::vector<std::string>& reward_columns();

MetricsTable metrics_table(const std::string& run_id, std::span<const IterationMetrics> iterations);
MetricsTable rewards_table(const std::string& run_id, std::span<const IterationMetrics> iterations);

struct AggregateTable {
  std::vector<std::string> columns;  // same as the inputs
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> stddev;  // sample std (n - 1); 0 for a single run
  std::size_t runs = 0;
};

/// Pointwise mean and sample std. Runs must agree on columns and length; the
/// error names the offending run.
AggregateTable aggregate(std::span<const MetricsTable> runs);

void write_csv(std::ostream& os, const MetricsTable& table);
void write_csv(const std::filesystem::path& path, const MetricsTable& table);
/// Columns: iteration, then <name>_mean, <name>_std for every other column.
void write_aggregate_csv(const std::filesystem::path& path, const AggregateTable& table);
MetricsTable read_csv(const std::filesystem::path& path);

/// Tail statistics of one run, consumed by the acceptance harness.
struct RunSummary {
  std::string run_id;
  std::string mode;
  std::uint64_t seed = 0;
  int iterations = 0;
  int tail = 10;
  double self_other = 0.0;
  double self_shadow = 0.0;
  double self_stationary = 0.0;
  double return_mean = 0.0;
  int extrinsic_tail = 50;
  double extrinsic_agent0 = 0.0;

  /// self_other >= factor * max(self_shadow, self_stationary)
  bool self_other_dominates(double factor = 2.0) const;
};

RunSummary summarize_run(const MetricsTable& table, int tail = 10, int extrinsic_tail = 50);
void write_summary_json(const std::filesystem::path& path, const RunSummary& summary);
RunSummary read_summary_json(const std::filesystem::path& path);

/// Deterministic artifact stem: "<run_id>_iter<NNNNNN>".
std::string artifact_stem(const std::string& run_id, int iteration);

}  // namespace pcp
