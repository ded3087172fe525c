#pragma once

// Categorical mutual information over crossing-transition chunks.

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace pcp {

enum class TransitionCategory : std::uint8_t { NoChange = 0, Rise = 1, Fall = 2 };

inline constexpr int kNumCategories = 3;

TransitionCategory categorize_transition(int c_prev, int c_curr);

enum class ChunkDirection : std::uint8_t { PassiveThenActive = 0, ActiveThenPassive = 1 };

struct Chunk {
  TransitionCategory passive_category = TransitionCategory::NoChange;
  TransitionCategory active_category = TransitionCategory::NoChange;
  ChunkDirection direction = ChunkDirection::PassiveThenActive;

  bool operator==(const Chunk&) const = default;
};

/// Joint counts indexed [passive][active].
using CountTable = std::array<std::array<double, kNumCategories>, kNumCategories>;

CountTable count_table(std::span<const Chunk> chunks);

/// MI in nats of the table after adding `alpha` to every cell.
/// alpha must be > 0 unless `allow_zero_alpha` (oracle/test mode) is set.
double mutual_information(const CountTable& counts, double alpha, bool allow_zero_alpha = false);

double mutual_information(std::span<const Chunk> chunks, double alpha, bool allow_zero_alpha = false);

class ChunkBuffer {
 public:
  static constexpr std::size_t kCapacity = 20;
  static constexpr std::size_t kReferenceWindow = 15;

  explicit ChunkBuffer(double alpha = 1.0);

  void push(const Chunk& chunk);
  void clear() { chunks_.clear(); }

  std::size_t size() const { return chunks_.size(); }
  bool empty() const { return chunks_.empty(); }
  double alpha() const { return alpha_; }
  const std::deque<Chunk>& chunks() const { return chunks_; }

 private:
  std::deque<Chunk> chunks_;
  double alpha_;
};

/// MI over the whole buffer minus MI over its 15 oldest chunks.
double windowed_mi_delta(const ChunkBuffer& buffer);

}  // namespace pcp
