#include "pcp/trace.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "pcp/errors.hpp"

namespace pcp {

namespace {

constexpr int kColumns = 12 + 2 * 7;

void write_double(std::ostream& os, double v) { os << std::setprecision(17) << v; }

}  // namespace

std::string trace_csv_header() {
  std::string h =
      "tick,pos0,pos1,applied0,applied1,signal_bit,other0,shadow0,object0,other1,shadow1,object1";
  for (int k = 0; k < 2; ++k) {
    const std::string s = std::to_string(k);
    h += ",curiosity" + s + ",imitate" + s + ",promote_imitation" + s + ",influence" + s + ",impressionability" + s +
         ",extrinsic" + s + ",reward" + s;
  }
  return h;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows) {
  os << trace_csv_header() << '\n';
  for (const TraceRow& r : rows) {
    os << r.tick << ',';
    write_double(os, r.positions[0]);
    os << ',';
    write_double(os, r.positions[1]);
    os << ',' << static_cast<int>(r.applied[0]) << ',' << static_cast<int>(r.applied[1]) << ',' << r.signal_bit;
    for (const auto& c : r.crossings) {
      os << ',' << int{c.crossed_other} << ',' << int{c.crossed_other_shadow} << ',' << int{c.crossed_own_object};
    }
    for (const auto& b : r.rewards) {
      for (double v : {b.curiosity, b.imitate, b.promote_imitation, b.influence, b.impressionability, b.extrinsic,
                       b.total}) {
        os << ',';
        write_double(os, v);
      }
    }
    os << '\n';
  }
}

void write_trace_csv(const std::string& path, std::span<const TraceRow> rows) {
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot write trace file: " + path);
  write_trace_csv(os, rows);
  if (!os) throw RuntimeFailure("error writing trace file: " + path);
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != trace_csv_header()) throw RuntimeFailure("trace CSV: unexpected header");
  std::vector<TraceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != kColumns) throw RuntimeFailure("trace CSV: wrong column count");
    auto num = [&](int i) {
      try {
        return std::stod(cells[i]);
      } catch (const std::exception&) {
        throw RuntimeFailure("trace CSV: bad number '" + cells[i] + "'");
      }
    };
    TraceRow r;
    r.tick = static_cast<int>(num(0));
    r.positions = {num(1), num(2)};
    r.applied = {action_from_index(static_cast<int>(num(3))), action_from_index(static_cast<int>(num(4)))};
    r.signal_bit = static_cast<int>(num(5));
    for (int k = 0; k < 2; ++k) {
      r.crossings[k].crossed_other = num(6 + 3 * k) != 0.0;
      r.crossings[k].crossed_other_shadow = num(7 + 3 * k) != 0.0;
      r.crossings[k].crossed_own_object = num(8 + 3 * k) != 0.0;
      const int base = 12 + 7 * k;
      auto& b = r.rewards[k];
      b.curiosity = num(base);
      b.imitate = num(base + 1);
      b.promote_imitation = num(base + 2);
      b.influence = num(base + 3);
      b.impressionability = num(base + 4);
      b.extrinsic = num(base + 5);
      b.total = num(base + 6);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pcp
