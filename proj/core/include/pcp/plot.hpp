#pragma once

// Minimal SVG plots: training curves with optional std bands and
// episode trajectory panels.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/metrics.hpp"
#include "pcp/trace.hpp"

namespace pcp::plot {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> y;
  std::vector<double> band;  // +/- half-width, empty for none
  bool thick = false;
};

void write_line_plot(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                     const std::vector<double>& x, std::span<const Series> series);

/// <stem>_returns.svg and <stem>_crossings.svg for one run.
void write_training_plots(const std::filesystem::path& dir, const std::string& stem, const MetricsTable& table);

/// Same pair of plots with +/- one std bands.
void write_aggregate_plots(const std::filesystem::path& dir, const std::string& stem, const AggregateTable& table);

/// One panel per episode: both agents' positions over time, steps marked by
/// crossing type (red self-other, green self-shadow, blue self-stationary).
void write_trajectory_plot(const std::filesystem::path& path, const std::string& title,
                           std::span<const EpisodeTrace> episodes);

}  // namespace pcp::plot
