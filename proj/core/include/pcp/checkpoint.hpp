#pragma once

// Run checkpoint container.
//
// Binary layout, little-endian:
//   magic    8 bytes  "PCPCKPT\0"
//   version  u32      (currently 1)
//   config   str      fully resolved RunConfig as JSON
//   seed     u64
//   iter     i64      number of completed training iterations
//   rng      str      trainer RNG state
//   agent x2:
//     policy       vec
//     adam         i64 step, vec m, vec v
//     has_pred     u8
//     [predictor   vec, adam (i64, vec, vec), str rng,
//      dataset     u64 episodes, each: u64 T, T*5 f64 observations, T u8 labels]
//   chunk buffers  u64 count, each: u64 n, n x (u8 passive, u8 active, u8 direction)
//
// str = u64 length + bytes; vec = u64 length + f64 values.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcp/mutual_information.hpp"
#include "pcp/nn/lstm.hpp"
#include "pcp/predictor.hpp"

namespace pcp {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct AdamSnapshot {
  std::int64_t steps = 0;
  nn::Vec m;
  nn::Vec v;
};

struct AgentCheckpoint {
  nn::Vec policy;
  AdamSnapshot policy_optimizer;
  bool has_predictor = false;
  nn::Vec predictor;
  AdamSnapshot predictor_optimizer;
  std::string predictor_rng;
  std::vector<TrajectoryEpisode> dataset;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_json;
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
  std::string rng_state;
  std::array<AgentCheckpoint, 2> agents;
  /// Rolling MI buffers, per env slot: agent0 impress, agent0 influence, agent1 impress, agent1 influence.
  std::vector<std::vector<Chunk>> chunk_buffers;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws RuntimeFailure on a missing file, bad magic, unsupported version or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pcp
