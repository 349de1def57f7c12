#include "socketstore/dsa/channel.hpp"

#include <boost/asio.hpp>

#include "socketstore/store/protocol.hpp"

namespace socketstore::dsa {

namespace asio = boost::asio;
using asio::ip::tcp;
using nlohmann::json;

LocalChannel::LocalChannel(store::Store& store, SimDuration rtt)
    : store_(store), session_(std::make_unique<store::ProtocolSession>(store)), rtt_(rtt) {}

LocalChannel::~LocalChannel() = default;

void LocalChannel::reset() { session_ = std::make_unique<store::ProtocolSession>(store_); }

void LocalChannel::clear_faults() {
  down_ = false;
  cut_after_.reset();
}

ChannelReply LocalChannel::request(const json& message, SimDuration timeout) {
  if (down_) return {ChannelStatus::timeout, nullptr, timeout};
  if (cut_after_) {
    if (*cut_after_ == 0) return {ChannelStatus::disconnected, nullptr, SimDuration{0}};
    --*cut_after_;
  }
  if (rtt_ > timeout) return {ChannelStatus::timeout, nullptr, timeout};
  ++exchanges_;
  return {ChannelStatus::ok, session_->handle(message), rtt_};
}

// -- TCP ---------------------------------------------------------------------------

struct TcpChannel::Impl {
  Impl(std::string h, std::uint16_t p) : host(std::move(h)), port(p) {}

  /// Runs the io_context until `done` or the deadline; false on timeout.
  bool run_until(const bool& done, std::chrono::steady_clock::time_point deadline) {
    io.restart();
    while (!done) {
      const auto left = deadline - std::chrono::steady_clock::now();
      if (left <= std::chrono::steady_clock::duration::zero()) return false;
      if (io.run_one_for(left) == 0 && !done) {
        if (std::chrono::steady_clock::now() >= deadline) return false;
        io.restart();
      }
    }
    return true;
  }

  void drop() {
    boost::system::error_code ec;
    if (socket) socket->close(ec);
    socket.reset();
    buffer.consume(buffer.size());
  }

  std::string host;
  std::uint16_t port;
  asio::io_context io;
  std::unique_ptr<tcp::socket> socket;
  asio::streambuf buffer;
};

TcpChannel::TcpChannel(std::string host, std::uint16_t port) : impl_(std::make_unique<Impl>(std::move(host), port)) {}

TcpChannel::~TcpChannel() { impl_->drop(); }

void TcpChannel::reset() { impl_->drop(); }

ChannelReply TcpChannel::request(const json& message, SimDuration timeout) {
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
  auto elapsed = [&] { return std::chrono::duration_cast<SimDuration>(std::chrono::steady_clock::now() - start); };
  auto fail = [&](ChannelStatus status) {
    impl_->drop();
    return ChannelReply{status, nullptr, status == ChannelStatus::timeout ? timeout : elapsed()};
  };

  boost::system::error_code ec;
  if (!impl_->socket) {
    impl_->socket = std::make_unique<tcp::socket>(impl_->io);
    tcp::resolver resolver(impl_->io);
    auto endpoints = resolver.resolve(impl_->host, std::to_string(impl_->port), ec);
    if (ec) return fail(ChannelStatus::disconnected);
    bool done = false;
    asio::async_connect(*impl_->socket, endpoints, [&](const boost::system::error_code& e, const tcp::endpoint&) {
      ec = e;
      done = true;
    });
    if (!impl_->run_until(done, deadline)) return fail(ChannelStatus::timeout);
    if (ec) return fail(ChannelStatus::disconnected);
  }

  const std::string line = message.dump() + "\n";
  bool written = false;
  asio::async_write(*impl_->socket, asio::buffer(line), [&](const boost::system::error_code& e, std::size_t) {
    ec = e;
    written = true;
  });
  if (!impl_->run_until(written, deadline)) return fail(ChannelStatus::timeout);
  if (ec) return fail(ChannelStatus::disconnected);

  bool read = false;
  asio::async_read_until(*impl_->socket, impl_->buffer, '\n', [&](const boost::system::error_code& e, std::size_t) {
    ec = e;
    read = true;
  });
  if (!impl_->run_until(read, deadline)) return fail(ChannelStatus::timeout);
  if (ec) return fail(ChannelStatus::disconnected);
  std::istream in(&impl_->buffer);
  std::string reply;
  std::getline(in, reply);
  try {
    return {ChannelStatus::ok, json::parse(reply), elapsed()};
  } catch (const json::exception&) {
    return fail(ChannelStatus::disconnected);
  }
}

}  // namespace socketstore::dsa
