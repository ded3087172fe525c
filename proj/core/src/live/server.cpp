#include "pcp/live/server.hpp"

#include <atomic>
#include <csignal>
#include <deque>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "pcp/errors.hpp"

namespace pcp::live {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class WsConnection;

struct Runner {
  Runner(net::io_context& ioc, LiveSession s) : session(std::move(s)), timer(ioc), expiry(ioc) {}

  LiveSession session;
  net::steady_timer timer;
  net::steady_timer expiry;
  std::weak_ptr<WsConnection> conn;
  std::deque<WireMessage> inbox;
  bool attached = false;
  std::uint64_t generation = 0;
  Clock::time_point next;
};

class Hub {
 public:
  Hub(std::shared_ptr<const LoadedModels> models, ServerOptions options);

  void listen();
  void receive(const std::shared_ptr<WsConnection>& conn, WireMessage message);
  void disconnected(const std::shared_ptr<WsConnection>& conn);
  void shutdown();
  std::string health() const;

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::signal_set signals{ioc};
  ServerOptions options;
  std::atomic<std::size_t> live{0};
  std::atomic<bool> running{false};

 private:
  void accept();
  void join(const std::shared_ptr<WsConnection>& conn, const JoinMessage& message);
  void start_loop(const std::shared_ptr<Runner>& r);
  void arm(const std::shared_ptr<Runner>& r);
  void on_tick(const std::shared_ptr<Runner>& r);
  void finish(const std::shared_ptr<Runner>& r);

  std::shared_ptr<const LoadedModels> models_;
  Rng seeds_;
  std::uint64_t counter_ = 0;
  std::map<std::string, std::shared_ptr<Runner>> sessions_;
  bool shutting_down_ = false;
  net::steady_timer deadline_{ioc};
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->read();
    });
  }

  void send(const WireMessage& message) {
    if (closed_) return;
    queue_.push_back(encode(message));
    if (queue_.size() == 1) write();
  }

  void close_after_flush() {
    closing_ = true;
    if (queue_.empty()) close();
  }

  std::shared_ptr<Runner> runner;

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      closed_ = true;
      queue_.clear();
      hub_.disconnected(shared_from_this());
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      hub_.receive(shared_from_this(), decode(text));
    } catch (const WireError& e) {
      send(ErrorMessage{"bad_message", e.what()});
    }
    read();
  }

  void write() {
    ws_.async_write(net::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    if (ec) {
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      write();
    } else if (closing_) {
      close();
    }
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Hub& hub) : stream_(std::move(socket)), hub_(hub) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

 private:
  void on_read(beast::error_code ec) {
    if (ec) return;
    const auto target = req_.target();
    std::string path(target.data(), target.size());
    path = path.substr(0, path.find('?'));
    if (websocket::is_upgrade(req_)) {
      if (path == "/session") {
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), hub_)->start(std::move(req_));
        return;
      }
      respond(http::status::not_found, R"({"error":"not found"})");
      return;
    }
    if (path == "/health" && req_.method() == http::verb::get) {
      respond(http::status::ok, hub_.health());
    } else {
      respond(http::status::not_found, R"({"error":"not found"})");
    }
  }

  void respond(http::status status, std::string body) {
    res_.result(status);
    res_.version(req_.version());
    res_.set(http::field::content_type, "application/json");
    res_.keep_alive(false);
    res_.body() = std::move(body);
    res_.prepare_payload();
    http::async_write(stream_, res_, [self = shared_from_this()](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  http::response<http::string_body> res_;
};

Hub::Hub(std::shared_ptr<const LoadedModels> models, ServerOptions opts)
    : options(std::move(opts)), models_(std::move(models)), seeds_(options.seed) {
  if (!models_) throw ConfigError("server: models are required");
  options.session.validate();
}

void Hub::listen() {
  try {
    const tcp::endpoint endpoint(net::ip::make_address(options.address), options.port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen(net::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    throw RuntimeFailure("cannot listen on " + options.address + ":" + std::to_string(options.port) + ": " +
                         e.code().message());
  }
  accept();
}

void Hub::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpSession>(std::move(socket), *this)->start();
    accept();
  });
}

std::string Hub::health() const {
  nlohmann::ordered_json j{{"status", shutting_down_ ? "stopping" : "ok"},
                           {"sessions", live.load()},
                           {"mode", std::string(to_string(models_->config.mode))},
                           {"iteration", models_->iteration},
                           {"tick_hz", options.session.tick_hz}};
  return j.dump();
}

void Hub::receive(const std::shared_ptr<WsConnection>& conn, WireMessage message) {
  if (std::holds_alternative<JoinMessage>(message)) {
    if (conn->runner) {
      conn->send(ErrorMessage{"already_joined", "this connection is already in a session"});
    } else {
      join(conn, std::get<JoinMessage>(message));
    }
    return;
  }
  const bool client_message = std::holds_alternative<InputMessage>(message) ||
                              std::holds_alternative<MarkMessage>(message) ||
                              std::holds_alternative<LeaveMessage>(message);
  if (!client_message) {
    conn->send(ErrorMessage{"unexpected_type", std::string(message_type(message)) + " is a server message"});
    return;
  }
  if (!conn->runner) {
    conn->send(ErrorMessage{"not_joined", "send join first"});
    return;
  }
  conn->runner->inbox.push_back(std::move(message));
}

void Hub::join(const std::shared_ptr<WsConnection>& conn, const JoinMessage& message) {
  if (shutting_down_) {
    conn->send(ErrorMessage{"stopping", "server is shutting down"});
    return;
  }
  std::shared_ptr<Runner> r;
  bool resumed = false;
  if (message.session) {
    const auto it = sessions_.find(*message.session);
    if (it == sessions_.end()) {
      conn->send(ErrorMessage{"unknown_session", "no paused session " + *message.session});
      return;
    }
    r = it->second;
    if (r->attached) {
      conn->send(ErrorMessage{"session_busy", "session " + *message.session + " has a client"});
      return;
    }
    r->expiry.cancel();
    resumed = true;
  } else {
    SessionOptions so = options.session;
    so.human_slot = message.slot;
    so.greedy = so.greedy || message.greedy;
    std::ostringstream id;
    id << "s" << ++counter_ << "_" << std::hex << (seeds_.next_u64() & 0xffffffu);
    try {
      r = std::make_shared<Runner>(ioc, LiveSession(id.str(), models_, so, seeds_.next_u64()));
    } catch (const ConfigError& e) {
      conn->send(ErrorMessage{"bad_join", e.what()});
      return;
    }
    sessions_[r->session.id()] = r;
    live = sessions_.size();
  }
  r->attached = true;
  r->conn = conn;
  conn->runner = r;
  conn->send(r->session.config_message(resumed));
  start_loop(r);
}

void Hub::start_loop(const std::shared_ptr<Runner>& r) {
  ++r->generation;
  r->next = Clock::now() + r->session.period();
  arm(r);
}

void Hub::arm(const std::shared_ptr<Runner>& r) {
  r->timer.expires_at(r->next);
  r->timer.async_wait([this, r, gen = r->generation](beast::error_code ec) {
    if (ec || gen != r->generation || !r->attached || r->session.ended()) return;
    on_tick(r);
  });
}

void Hub::on_tick(const std::shared_ptr<Runner>& r) {
  const auto conn = r->conn.lock();
  while (!r->inbox.empty()) {
    const WireMessage m = std::move(r->inbox.front());
    r->inbox.pop_front();
    if (const auto* in = std::get_if<InputMessage>(&m)) {
      r->session.set_input(in->action);
    } else if (const auto* mark = std::get_if<MarkMessage>(&m)) {
      try {
        const MarkAckMessage ack = r->session.record_mark(mark->tick);
        if (conn) conn->send(ack);
      } catch (const StateError& e) {
        if (conn) conn->send(ErrorMessage{"bad_mark", e.what()});
      }
    } else if (std::holds_alternative<LeaveMessage>(m)) {
      finish(r);
      return;
    }
  }
  const TickMessage tick = r->session.advance_tick();
  if (conn) conn->send(tick);
  if (r->session.finished()) {
    finish(r);
    return;
  }
  const auto period = r->session.period();
  r->next += period;
  // after a stall, skip the missed ticks instead of bursting through them
  const auto now = Clock::now();
  if (r->next + period < now) r->next = now;
  arm(r);
}

void Hub::finish(const std::shared_ptr<Runner>& r) {
  if (r->session.ended()) return;
  r->timer.cancel();
  r->expiry.cancel();
  ++r->generation;
  WireMessage out;
  try {
    out = r->session.end_session(options.trace_dir);
  } catch (const std::exception& e) {
    out = ErrorMessage{"summary_failed", e.what()};
  }
  sessions_.erase(r->session.id());
  live = sessions_.size();
  if (const auto conn = r->conn.lock()) {
    conn->send(out);
    conn->close_after_flush();
    conn->runner.reset();
  }
  r->attached = false;
}

void Hub::disconnected(const std::shared_ptr<WsConnection>& conn) {
  const std::shared_ptr<Runner> r = conn->runner;
  conn->runner.reset();
  if (!r || r->session.ended() || r->conn.lock() != conn) return;
  r->attached = false;
  r->conn.reset();
  r->timer.cancel();
  ++r->generation;
  r->expiry.expires_after(options.pause_timeout);
  r->expiry.async_wait([this, r](beast::error_code ec) {
    if (ec || r->attached) return;
    finish(r);
  });
}

void Hub::shutdown() {
  if (shutting_down_) return;
  shutting_down_ = true;
  beast::error_code ignored;
  acceptor.close(ignored);
  signals.cancel(ignored);
  const auto open = sessions_;
  for (const auto& [id, r] : open) finish(r);
  // give summaries and close frames a moment to flush
  deadline_.expires_after(std::chrono::milliseconds(500));
  deadline_.async_wait([this](beast::error_code) { ioc.stop(); });
}

}  // namespace

struct Server::Impl {
  Impl(std::shared_ptr<const LoadedModels> models, ServerOptions options) : hub(std::move(models), std::move(options)) {}
  Hub hub;
  std::thread thread;
};

Server::Server(std::shared_ptr<const LoadedModels> models, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(models), std::move(options))) {
  impl_->hub.listen();
}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->hub.acceptor.local_endpoint().port(); }

void Server::run() {
  Hub& hub = impl_->hub;
  if (hub.options.handle_signals) {
    hub.signals.add(SIGINT);
    hub.signals.add(SIGTERM);
    hub.signals.async_wait([&hub](beast::error_code ec, int) {
      if (!ec) hub.shutdown();
    });
  }
  hub.running = true;
  hub.ioc.run();
  hub.running = false;
}

void Server::start() {
  if (impl_->thread.joinable()) throw StateError("server already started");
  impl_->hub.running = true;
  impl_->thread = std::thread([this] {
    impl_->hub.ioc.run();
    impl_->hub.running = false;
  });
}

void Server::stop() {
  Hub& hub = impl_->hub;
  if (hub.running) net::post(hub.ioc, [&hub] { hub.shutdown(); });
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t Server::session_count() const { return impl_->hub.live.load(); }

}  // namespace pcp::live
