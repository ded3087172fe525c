#include "pcp/mutual_information.hpp"

#include <cmath>
#include <string>

#include "pcp/errors.hpp"

namespace pcp {

TransitionCategory categorize_transition(int c_prev, int c_curr) {
  if (c_prev == 0 && c_curr == 1) return TransitionCategory::Rise;
  if (c_prev == 1 && c_curr == 0) return TransitionCategory::Fall;
  return TransitionCategory::NoChange;
}

CountTable count_table(std::span<const Chunk> chunks) {
  CountTable t{};
  for (const Chunk& c : chunks) {
    t[static_cast<int>(c.passive_category)][static_cast<int>(c.active_category)] += 1.0;
  }
  return t;
}

double mutual_information(const CountTable& counts, double alpha, bool allow_zero_alpha) {
  if (!(alpha > 0.0) && !(allow_zero_alpha && alpha == 0.0)) {
    throw ConfigError("mutual_information: alpha must be > 0 (got " + std::to_string(alpha) + ")");
  }
  double total = 0.0;
  std::array<double, kNumCategories> row{};
  std::array<double, kNumCategories> col{};
  for (int x = 0; x < kNumCategories; ++x) {
    for (int y = 0; y < kNumCategories; ++y) {
      const double n = counts[x][y] + alpha;
      row[x] += n;
      col[y] += n;
      total += n;
    }
  }
  if (total <= 0.0) return 0.0;

  // sum n/N * ln(n N / (row col)), accumulated in count space
  double mi = 0.0;
  for (int x = 0; x < kNumCategories; ++x) {
    for (int y = 0; y < kNumCategories; ++y) {
      const double n = counts[x][y] + alpha;
      if (n <= 0.0) continue;
      mi += n * std::log(n * total / (row[x] * col[y]));
    }
  }
  mi /= total;
  // exact independence can round to -1e-17
  return mi > 0.0 ? mi : 0.0;
}

double mutual_information(std::span<const Chunk> chunks, double alpha, bool allow_zero_alpha) {
  return mutual_information(count_table(chunks), alpha, allow_zero_alpha);
}

ChunkBuffer::ChunkBuffer(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0)) throw ConfigError("ChunkBuffer: alpha must be > 0");
}

void ChunkBuffer::push(const Chunk& chunk) {
  chunks_.push_back(chunk);
  if (chunks_.size() > kCapacity) chunks_.pop_front();
}

double windowed_mi_delta(const ChunkBuffer& buffer) {
  if (buffer.size() <= ChunkBuffer::kReferenceWindow) return 0.0;
  CountTable full{};
  CountTable oldest{};
  std::size_t i = 0;
  for (const Chunk& c : buffer.chunks()) {
    const int x = static_cast<int>(c.passive_category);
    const int y = static_cast<int>(c.active_category);
    full[x][y] += 1.0;
    if (i < ChunkBuffer::kReferenceWindow) oldest[x][y] += 1.0;
    ++i;
  }
  return mutual_information(full, buffer.alpha()) - mutual_information(oldest, buffer.alpha());
}

}  // namespace pcp
