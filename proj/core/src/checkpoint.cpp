#include "pcp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pcp/errors.hpp"

namespace pcp {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'P', 'C', 'P', 'C', 'K', 'P', 'T', '\0'};
// guards against absurd lengths from corrupt files
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  template <typename T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void vec(const nn::Vec& v) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    os_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void adam(const AdamSnapshot& a) {
    pod<std::int64_t>(a.steps);
    vec(a.m);
    vec(a.v);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  template <typename T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  std::uint64_t length() {
    const auto n = pod<std::uint64_t>();
    if (n > kMaxLength) throw RuntimeFailure("checkpoint " + path_ + ": implausible length field");
    return n;
  }
  std::string str() {
    std::string s(length(), '\0');
    is_.read(s.data(), static_cast<std::streamsize>(s.size()));
    check();
    return s;
  }
  nn::Vec vec() {
    nn::Vec v(static_cast<Eigen::Index>(length()));
    is_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    check();
    return v;
  }
  AdamSnapshot adam() {
    AdamSnapshot a;
    a.steps = pod<std::int64_t>();
    a.m = vec();
    a.v = vec();
    return a;
  }

 private:
  void check() {
    if (!is_) throw RuntimeFailure("checkpoint " + path_ + ": truncated");
  }
  std::istream& is_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  // write-then-rename so a crash never leaves a half-written checkpoint behind
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw RuntimeFailure("cannot write checkpoint " + tmp.string());
    Writer w(os);
    os.write(kMagic, sizeof kMagic);
    w.pod<std::uint32_t>(kCheckpointVersion);
    w.str(ck.config_json);
    w.pod<std::uint64_t>(ck.seed);
    w.pod<std::int64_t>(ck.iteration);
    w.str(ck.rng_state);
    for (const AgentCheckpoint& a : ck.agents) {
      w.vec(a.policy);
      w.adam(a.policy_optimizer);
      w.pod<std::uint8_t>(a.has_predictor ? 1 : 0);
      if (!a.has_predictor) continue;
      w.vec(a.predictor);
      w.adam(a.predictor_optimizer);
      w.str(a.predictor_rng);
      w.pod<std::uint64_t>(a.dataset.size());
      for (const TrajectoryEpisode& ep : a.dataset) {
        w.pod<std::uint64_t>(ep.observations.size());
        for (const auto& o : ep.observations) os.write(reinterpret_cast<const char*>(o.data()), sizeof(o));
        os.write(reinterpret_cast<const char*>(ep.labels.data()), static_cast<std::streamsize>(ep.labels.size()));
      }
    }
    w.pod<std::uint64_t>(ck.chunk_buffers.size());
    for (const auto& buffer : ck.chunk_buffers) {
      w.pod<std::uint64_t>(buffer.size());
      for (const Chunk& c : buffer) {
        w.pod<std::uint8_t>(static_cast<std::uint8_t>(c.passive_category));
        w.pod<std::uint8_t>(static_cast<std::uint8_t>(c.active_category));
        w.pod<std::uint8_t>(static_cast<std::uint8_t>(c.direction));
      }
    }
    if (!os) throw RuntimeFailure("error writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RuntimeFailure("cannot move checkpoint into place: " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw RuntimeFailure("cannot open checkpoint " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw RuntimeFailure("not a checkpoint file (bad magic): " + path.string());
  }
  Reader r(is, path.string());
  Checkpoint ck;
  ck.version = r.pod<std::uint32_t>();
  if (ck.version != kCheckpointVersion) {
    throw RuntimeFailure("unsupported checkpoint version " + std::to_string(ck.version) + " in " + path.string());
  }
  ck.config_json = r.str();
  ck.seed = r.pod<std::uint64_t>();
  ck.iteration = r.pod<std::int64_t>();
  ck.rng_state = r.str();
  for (AgentCheckpoint& a : ck.agents) {
    a.policy = r.vec();
    a.policy_optimizer = r.adam();
    a.has_predictor = r.pod<std::uint8_t>() != 0;
    if (!a.has_predictor) continue;
    a.predictor = r.vec();
    a.predictor_optimizer = r.adam();
    a.predictor_rng = r.str();
    const std::uint64_t episodes = r.length();
    a.dataset.resize(episodes);
    for (TrajectoryEpisode& ep : a.dataset) {
      const std::uint64_t T = r.length();
      ep.observations.resize(T);
      ep.labels.resize(T);
      for (auto& o : ep.observations) is.read(reinterpret_cast<char*>(o.data()), sizeof(o));
      is.read(reinterpret_cast<char*>(ep.labels.data()), static_cast<std::streamsize>(T));
      if (!is) throw RuntimeFailure("checkpoint " + path.string() + ": truncated dataset");
    }
  }
  ck.chunk_buffers.resize(r.length());
  for (auto& buffer : ck.chunk_buffers) {
    buffer.resize(r.length());
    for (Chunk& c : buffer) {
      const auto p = r.pod<std::uint8_t>();
      const auto a = r.pod<std::uint8_t>();
      const auto d = r.pod<std::uint8_t>();
      if (p > 2 || a > 2 || d > 1) throw RuntimeFailure("checkpoint " + path.string() + ": bad chunk");
      c.passive_category = static_cast<TransitionCategory>(p);
      c.active_category = static_cast<TransitionCategory>(a);
      c.direction = static_cast<ChunkDirection>(d);
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw RuntimeFailure("checkpoint " + path.string() + ": trailing bytes after the last section");
  }
  return ck;
}

}  // namespace pcp
