// Copyright 2026 The sharedctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sharedctl/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace sharedctl {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class WsSession;

struct Inbox {
  std::mutex mutex;
  std::optional<PilotInput> input;
  double received = 0.0;
  std::vector<ControlAction> controls;
  bool detached = false;
};

struct Hub {
  net::io_context& ioc;
  Inbox& inbox;
  std::set<std::shared_ptr<WsSession>> clients;  // io thread only
  std::size_t queue_limit;
  std::string listing;
  Clock::time_point origin;

  double now() const { return std::chrono::duration<double>(Clock::now() - origin).count(); }
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->hub_.clients.insert(self);
      self->read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    // the front entry may be in flight; drop the oldest queued one behind it
    if (queue_.size() >= hub_.queue_limit && queue_.size() > 1) queue_.erase(queue_.begin() + 1);
    queue_.push_back(std::move(text));
    if (!writing_) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      hub_.clients.erase(shared_from_this());
      std::lock_guard<std::mutex> lock(hub_.inbox.mutex);
      hub_.inbox.detached = true;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      const ClientMessage msg = decode_client_message(text);
      std::lock_guard<std::mutex> lock(hub_.inbox.mutex);
      if (const auto* in = std::get_if<PilotInput>(&msg)) {
        hub_.inbox.input = *in;
        hub_.inbox.received = hub_.now();
      } else {
        hub_.inbox.controls.push_back(std::get<ControlMessage>(msg).action);
      }
    } catch (const ProtocolError& e) {
      send(encode(ErrorFrame{e.what()}));
    }
    read();
  }

  void write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->queue_.pop_front();
      if (ec) {
        self->writing_ = false;
        return;
      }
      if (self->queue_.empty()) {
        self->writing_ = false;
      } else {
        self->write();
      }
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool writing_ = false;
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
    if (websocket::is_upgrade(req_) && req_.target() == "/sim") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), hub_)->start(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    if (req_.target() == "/scenario" && req_.method() == http::verb::get) {
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = hub_.listing;
    } else if (req_.target() == "/scenario" || req_.target() == "/sim") {
      res->result(http::status::method_not_allowed);
      res->body() = "method not allowed\n";
    } else {
      res->result(http::status::not_found);
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct SimServer::Impl {
  Impl(ScenarioSpec spec, ServerOptions opts)
      : options(opts),
        session(spec, !opts.start_paused),
        acceptor(ioc),
        hub{ioc, inbox, {}, opts.telemetry_queue ? opts.telemetry_queue : 1, scenario_listing(spec), Clock::now()},
        guard(net::make_work_guard(ioc)) {
    if (!(options.tick_period > 0.0)) throw std::invalid_argument("tick period must be positive");
    beast::error_code ec;
    const auto address = net::ip::make_address(options.address, ec);
    if (ec) throw std::runtime_error("invalid bind address '" + options.address + "'");
    const tcp::endpoint endpoint(address, options.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw std::runtime_error("cannot listen on " + options.address + ":" + std::to_string(options.port) + ": " +
                               ec.message());
    }
    bound_port = acceptor.local_endpoint().port();
    accept();
    io_thread = std::thread([this] { ioc.run(); });
  }

  ~Impl() { shutdown(); }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), hub)->start();
      accept();
    });
  }

  void shutdown() {
    if (!io_thread.joinable()) return;
    net::post(ioc, [this] {
      beast::error_code ignored;
      acceptor.close(ignored);
      for (const auto& c : hub.clients) c->close();
      hub.clients.clear();
    });
    std::this_thread::sleep_for(std::chrono::duration<double>(options.linger));
    guard.reset();
    ioc.stop();
    io_thread.join();
  }

  void run() {
    const auto start = Clock::now();
    const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.tick_period));
    long k = 0;
    while (!stop_requested && !session.finished()) {
      const auto deadline = start + k * period;
      std::this_thread::sleep_until(deadline);
      lateness_sum += std::chrono::duration<double>(Clock::now() - deadline).count();
      ++k;
      {
        std::lock_guard<std::mutex> lock(inbox.mutex);
        for (ControlAction a : inbox.controls) session.control(a);
        inbox.controls.clear();
        if (inbox.detached) {
          session.detach();
          inbox.detached = false;
        }
        if (inbox.input) {
          session.submit(*inbox.input, inbox.received);
          inbox.input.reset();
        }
      }
      const auto frame = session.step(hub.now());
      if (!frame) continue;
      net::post(ioc, [this, text = encode(*frame)] {
        for (const auto& c : hub.clients) c->send(text);
      });
    }
    ticks = k;
    shutdown();
  }

  ServerOptions options;
  net::io_context ioc;
  Inbox inbox;
  SimSession session;
  tcp::acceptor acceptor;
  Hub hub;
  net::executor_work_guard<net::io_context::executor_type> guard;
  std::thread io_thread;
  std::atomic<bool> stop_requested{false};
  double lateness_sum = 0.0;
  long ticks = 0;
  unsigned short bound_port = 0;
};

SimServer::SimServer(ScenarioSpec spec, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(spec), options)) {}

SimServer::~SimServer() = default;

unsigned short SimServer::port() const { return impl_->bound_port; }

void SimServer::run() { impl_->run(); }

void SimServer::stop() { impl_->stop_requested = true; }

const SimSession& SimServer::session() const { return impl_->session; }

double SimServer::mean_lateness() const {
  return impl_->ticks > 0 ? impl_->lateness_sum / static_cast<double>(impl_->ticks) : 0.0;
}

}  // namespace sharedctl
