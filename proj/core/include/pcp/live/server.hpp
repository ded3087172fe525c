#pragma once

// HTTP + websocket front end for live sessions.
//
//   GET /health          {"status":"ok","sessions":<live sessions>,"mode":...,"iteration":...}
//   GET /session         websocket upgrade, messages per wire.hpp
//
// Everything runs on one io_context thread. The connection handler only
// queues decoded messages; each session's tick loop drains its queue and is
// the only code that touches the LiveSession.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "pcp/live/session.hpp"

namespace pcp::live {

struct ServerOptions {
  std::string address = "127.0.0.1";
  /// 0 picks a free port; see Server::port().
  unsigned short port = 8765;
  SessionOptions session;
  /// How long a disconnected session waits for its client to rejoin.
  std::chrono::milliseconds pause_timeout{30000};
  /// Session traces go here; empty disables them.
  std::filesystem::path trace_dir;
  std::uint64_t seed = 0;
  /// Stop cleanly on SIGINT / SIGTERM while in run().
  bool handle_signals = false;
};

class Server {
 public:
  /// Binds immediately. Throws RuntimeFailure if the address is unavailable.
  Server(std::shared_ptr<const LoadedModels> models, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;

  /// Serves on the calling thread until stop() or a handled signal.
  void run();
  /// Serves on a background thread.
  void start();
  /// Ends open sessions (writing their traces) and stops serving. Idempotent.
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pcp::live
