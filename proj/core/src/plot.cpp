#include "pcp/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pcp/errors.hpp"

namespace pcp::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 360.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 150.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

struct Frame {
  double x0, x1, y0, y1;
  double ox, oy, w, h;

  double px(double x) const { return ox + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * w; }
  double py(double y) const { return oy + h - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * h; }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void axes(std::ostream& os, const Frame& f, const std::string& title, const std::string& y_label) {
  os << "<rect x='" << f.ox << "' y='" << f.oy << "' width='" << f.w << "' height='" << f.h
     << "' fill='none' stroke='#444'/>\n";
  os << "<text x='" << f.ox << "' y='" << f.oy - 10 << "' font-size='13'>" << escape(title) << "</text>\n";
  os << "<text x='12' y='" << f.oy + f.h / 2 << "' font-size='11' transform='rotate(-90 12 " << f.oy + f.h / 2
     << ")'>" << escape(y_label) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    os << "<text x='" << f.ox - 6 << "' y='" << f.py(yv) + 4 << "' font-size='10' text-anchor='end'>"
       << std::setprecision(3) << yv << "</text>\n";
    os << "<text x='" << f.px(xv) << "' y='" << f.oy + f.h + 14 << "' font-size='10' text-anchor='middle'>"
       << std::setprecision(4) << xv << "</text>\n";
  }
}

void polyline(std::ostream& os, const Frame& f, const std::vector<double>& x, const std::vector<double>& y,
              const std::string& color, double width) {
  os << "<polyline fill='none' stroke='" << color << "' stroke-width='" << width << "' points='";
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) os << f.px(x[i]) << ',' << f.py(y[i]) << ' ';
  os << "'/>\n";
}

std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot write plot " + path.string());
  return os;
}

std::vector<Series> return_series(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& cols,
                                  const std::vector<std::vector<double>>* sd) {
  auto col = [&](const std::string& name, const std::vector<std::vector<double>>& src) {
    const auto idx = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
    std::vector<double> v;
    for (const auto& r : src) v.push_back(r[idx]);
    return v;
  };
  std::vector<Series> s{{"agent0 return", "#d62728", col("return_agent0", rows), {}, false},
                        {"agent1 return", "#1f77b4", col("return_agent1", rows), {}, false}};
  if (sd) {
    s[0].band = col("return_agent0", *sd);
    s[1].band = col("return_agent1", *sd);
  }
  return s;
}

std::vector<Series> crossing_series(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& cols,
                                    const std::vector<std::vector<double>>* sd) {
  auto col = [&](const std::string& name, const std::vector<std::vector<double>>& src) {
    const auto idx = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
    std::vector<double> v;
    for (const auto& r : src) v.push_back(r[idx]);
    return v;
  };
  std::vector<Series> s{{"self-other", "#1f3fb4", col("self_other", rows), {}, true},
                        {"self-shadow", "#2ca02c", col("self_shadow", rows), {}, false},
                        {"self-stationary", "#ff7f0e", col("self_stationary", rows), {}, false}};
  if (sd) {
    s[0].band = col("self_other", *sd);
    s[1].band = col("self_shadow", *sd);
    s[2].band = col("self_stationary", *sd);
  }
  return s;
}

std::vector<double> iterations_of(const std::vector<std::vector<double>>& rows) {
  std::vector<double> x;
  for (const auto& r : rows) x.push_back(r[0]);
  return x;
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                     const std::vector<double>& x, std::span<const Series> series) {
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double b = i < s.band.size() ? s.band[i] : 0.0;
      y_min = std::min(y_min, s.y[i] - b);
      y_max = std::max(y_max, s.y[i] + b);
    }
  }
  if (!std::isfinite(y_min)) y_min = 0.0, y_max = 1.0;
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  const double x0 = x.empty() ? 0.0 : x.front();
  const double x1 = x.empty() ? 1.0 : std::max(x.back(), x0 + 1.0);
  const Frame f{x0, x1, y_min, y_max, kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom};

  auto os = open(path);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
     << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  axes(os, f, title, y_label);
  int legend = 0;
  for (const Series& s : series) {
    if (!s.band.empty()) {
      os << "<polygon fill='" << s.color << "' fill-opacity='0.18' stroke='none' points='";
      for (std::size_t i = 0; i < s.y.size(); ++i) os << f.px(x[i]) << ',' << f.py(s.y[i] + s.band[i]) << ' ';
      for (std::size_t i = s.y.size(); i-- > 0;) os << f.px(x[i]) << ',' << f.py(s.y[i] - s.band[i]) << ' ';
      os << "'/>\n";
    }
    polyline(os, f, x, s.y, s.color, s.thick ? 3.0 : 1.5);
    const double ly = kTop + 14.0 + 16.0 * legend++;
    os << "<line x1='" << kWidth - kRight + 10 << "' y1='" << ly << "' x2='" << kWidth - kRight + 30 << "' y2='"
       << ly << "' stroke='" << s.color << "' stroke-width='3'/>\n";
    os << "<text x='" << kWidth - kRight + 34 << "' y='" << ly + 4 << "' font-size='11'>" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

void write_training_plots(const std::filesystem::path& dir, const std::string& stem, const MetricsTable& table) {
  const auto x = iterations_of(table.rows);
  const auto r = return_series(table.rows, table.columns, nullptr);
  write_line_plot(dir / (stem + "_returns.svg"), stem + ": episode return", "return", x, r);
  const auto c = crossing_series(table.rows, table.columns, nullptr);
  write_line_plot(dir / (stem + "_crossings.svg"), stem + ": crossing proportion", "fraction of steps", x, c);
}

void write_aggregate_plots(const std::filesystem::path& dir, const std::string& stem, const AggregateTable& table) {
  const auto x = iterations_of(table.mean);
  const auto r = return_series(table.mean, table.columns, &table.stddev);
  write_line_plot(dir / (stem + "_returns.svg"), stem + ": episode return (mean +/- std)", "return", x, r);
  const auto c = crossing_series(table.mean, table.columns, &table.stddev);
  write_line_plot(dir / (stem + "_crossings.svg"), stem + ": crossing proportion (mean +/- std)",
                  "fraction of steps", x, c);
}

void write_trajectory_plot(const std::filesystem::path& path, const std::string& title,
                           std::span<const EpisodeTrace> episodes) {
  const double panel_h = 200.0;
  const double height = kTop + episodes.size() * (panel_h + kBottom) + 10.0;
  auto os = open(path);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << height
     << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& rows = episodes[e].rows;
    const double T = rows.empty() ? 1.0 : rows.back().tick;
    const Frame f{0.0, T, 0.0, 1.0, kLeft, kTop + e * (panel_h + kBottom), kWidth - kLeft - kRight, panel_h};
    axes(os, f, title + " - episode " + std::to_string(e + 1), "position");
    for (int agent = 0; agent < kNumAgents; ++agent) {
      const char* color = agent == 0 ? "#555" : "#aaa";
      // break the line at wrap-arounds so the seam is not drawn across the panel
      os << "<path fill='none' stroke='" << color << "' stroke-width='1.2' d='";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool jump = i == 0 || std::fabs(rows[i].positions[agent] - rows[i - 1].positions[agent]) > 0.5;
        os << (jump ? 'M' : 'L') << f.px(rows[i].tick) << ',' << f.py(rows[i].positions[agent]) << ' ';
      }
      os << "'/>\n";
      for (const TraceRow& r : rows) {
        const CrossingReport& c = r.crossings[agent];
        const char* mark = c.crossed_other ? "#d62728" : c.crossed_other_shadow ? "#2ca02c"
                                                       : c.crossed_own_object   ? "#1f77b4"
                                                                                : nullptr;
        if (!mark) continue;
        os << "<circle cx='" << f.px(r.tick) << "' cy='" << f.py(r.positions[agent]) << "' r='2.5' fill='" << mark
           << "'/>\n";
      }
    }
    const double ly = f.oy + 14.0;
    const std::array<std::pair<const char*, const char*>, 5> legend{{{"#555", "agent0"},
                                                                     {"#aaa", "agent1"},
                                                                     {"#d62728", "self-other"},
                                                                     {"#2ca02c", "self-shadow"},
                                                                     {"#1f77b4", "self-stationary"}}};
    for (std::size_t k = 0; k < legend.size(); ++k) {
      os << "<circle cx='" << kWidth - kRight + 18 << "' cy='" << ly + 16.0 * k << "' r='4' fill='"
         << legend[k].first << "'/>\n<text x='" << kWidth - kRight + 28 << "' y='" << ly + 16.0 * k + 4
         << "' font-size='11'>" << legend[k].second << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace pcp::plot
