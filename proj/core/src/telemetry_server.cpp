#include "gripkit/telemetry_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <algorithm>
#include <atomic>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "gripkit/error.hpp"

namespace gripkit {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

enum class Role { Participant, Experimenter, Input };

std::optional<Role> role_for(beast::string_view target) {
  const auto q = target.find('?');
  if (q != beast::string_view::npos) target = target.substr(0, q);
  if (target == "/participant") return Role::Participant;
  if (target == "/experimenter") return Role::Experimenter;
  if (target == "/input") return Role::Input;
  return std::nullopt;
}

}  // namespace

struct TelemetryServer::Impl {
  class Client;

  Options options;
  InputChannel* input = nullptr;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread thread;
  unsigned short bound_port = 0;

  mutable std::mutex mu;
  std::vector<std::weak_ptr<Client>> clients;
  std::atomic<std::size_t> dropped{0};
  std::atomic<std::size_t> grips{0};
  std::atomic<bool> stopped{false};

  void accept();
  void add(const std::shared_ptr<Client>& c) {
    std::lock_guard lock(mu);
    clients.erase(std::remove_if(clients.begin(), clients.end(), [](const auto& w) { return w.expired(); }),
                  clients.end());
    clients.push_back(c);
  }
  void broadcast(Role role, const std::string& line);
  std::size_t count(Role role) const;
};

class TelemetryServer::Impl::Client : public std::enable_shared_from_this<Client> {
 public:
  Client(Impl& server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  Role role() const noexcept { return role_; }
  bool open() const noexcept { return open_; }

  void send(std::shared_ptr<const std::string> line) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), line = std::move(line)] {
      if (!self->open_) return;
      if (self->queue_.size() >= self->server_.options.client_queue) {
        ++self->server_.dropped;
        return;
      }
      self->queue_.push_back(line);
      if (self->queue_.size() == 1) self->write_next();
    });
  }

  void close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      if (!self->open_) return;
      self->open_ = false;
      self->ws_.async_close(websocket::close_code::going_away, [self](beast::error_code) {});
    });
  }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    const auto role = role_for(request_.target());
    if (!websocket::is_upgrade(request_) || !role) {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "unknown endpoint\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_send, ignored);
      });
      return;
    }
    role_ = *role;
    ws_.text(true);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    open_ = true;
    server_.add(shared_from_this());
    read();
  }

  void read() {
    ws_.async_read(incoming_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        return;
      }
      self->on_message(beast::buffers_to_string(self->incoming_.data()));
      self->incoming_.consume(self->incoming_.size());
      self->read();
    });
  }

  void on_message(const std::string& text) {
    if (role_ == Role::Experimenter || !server_.input) return;
    // A message may carry several newline-separated objects.
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      if (const auto g = parse_grip_message(std::string_view(text).substr(start, end - start))) {
        server_.input->submit(*g);
        ++server_.grips;
      }
      start = end + 1;
    }
  }

  void write_next() {
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_next();
    });
  }

  Impl& server_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  beast::flat_buffer incoming_;
  http::request<http::string_body> request_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  Role role_ = Role::Participant;
  std::atomic<bool> open_{false};
};

void TelemetryServer::Impl::accept() {
  acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Client>(*this, std::move(socket))->start();
    if (!stopped) accept();
  });
}

void TelemetryServer::Impl::broadcast(Role role, const std::string& line) {
  auto shared = std::make_shared<const std::string>(line);
  std::lock_guard lock(mu);
  for (const auto& w : clients) {
    if (auto c = w.lock(); c && c->open() && c->role() == role) c->send(shared);
  }
}

std::size_t TelemetryServer::Impl::count(Role role) const {
  std::lock_guard lock(mu);
  std::size_t n = 0;
  for (const auto& w : clients) {
    if (auto c = w.lock(); c && c->open() && c->role() == role) ++n;
  }
  return n;
}

TelemetryServer::TelemetryServer(Options options, InputChannel* input) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->input = input;
  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->options.address, ec);
  if (ec) throw Error(ErrorCategory::InvalidArgument, "bad listen address " + impl_->options.address);
  const tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot listen on port " + std::to_string(impl_->options.port) + ": " +
                                             ec.message());
  impl_->bound_port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->thread = std::thread([impl = impl_.get()] { impl->io.run(); });
}

TelemetryServer::~TelemetryServer() { stop(); }

unsigned short TelemetryServer::port() const noexcept { return impl_->bound_port; }

void TelemetryServer::stop() {
  if (impl_->stopped.exchange(true)) return;
  asio::post(impl_->io, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
  });
  {
    std::lock_guard lock(impl_->mu);
    for (const auto& w : impl_->clients) {
      if (auto c = w.lock()) c->close();
    }
  }
  // Give close handshakes a moment, then tear down.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void TelemetryServer::publish_participant(const std::string& line) { impl_->broadcast(Role::Participant, line); }

void TelemetryServer::publish_experimenter(const std::string& line) { impl_->broadcast(Role::Experimenter, line); }

std::size_t TelemetryServer::participant_clients() const { return impl_->count(Role::Participant); }
std::size_t TelemetryServer::experimenter_clients() const { return impl_->count(Role::Experimenter); }
std::size_t TelemetryServer::dropped_frames() const { return impl_->dropped; }
std::size_t TelemetryServer::grip_messages() const { return impl_->grips; }

}  // namespace gripkit
