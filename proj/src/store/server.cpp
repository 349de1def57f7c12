#include "socketstore/store/server.hpp"

#include <atomic>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>

#include "socketstore/error.hpp"
#include "socketstore/store/protocol.hpp"

namespace socketstore::store {

namespace asio = boost::asio;
using asio::ip::tcp;

struct TcpServer::Impl {
  Impl(Store& s, const std::string& host, std::uint16_t port, std::function<void()> hook)
      : store(s), acceptor(io), before_request(std::move(hook)) {
    boost::system::error_code ec;
    const tcp::endpoint ep(asio::ip::make_address(host, ec), port);
    if (ec) throw Error(Errc::config_error, "bad listen address " + host + ": " + ec.message());
    acceptor.open(ep.protocol());
    acceptor.set_option(tcp::acceptor::reuse_address(true));
    acceptor.bind(ep, ec);
    if (ec) throw Error(Errc::io_error, "cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
    acceptor.listen();
  }

  void accept_loop() {
    for (;;) {
      auto socket = std::make_shared<tcp::socket>(io);
      boost::system::error_code ec;
      acceptor.accept(*socket, ec);
      if (ec || stopping) return;
      std::lock_guard lock(clients_mutex);
      clients.push_back(socket);
      workers.emplace_back([this, socket] { serve(*socket); });
    }
  }

  void serve(tcp::socket& socket) {
    ProtocolSession session(store);
    asio::streambuf buffer;
    boost::system::error_code ec;
    for (;;) {
      asio::read_until(socket, buffer, '\n', ec);
      if (ec) return;
      std::istream in(&buffer);
      std::string line;
      std::getline(in, line);
      if (line.empty()) continue;
      std::string reply;
      {
        std::lock_guard lock(request_mutex);
        if (before_request) before_request();
        reply = session.handle_line(line);
      }
      reply += '\n';
      asio::write(socket, asio::buffer(reply), ec);
      if (ec) return;
    }
  }

  void stop() {
    if (stopping.exchange(true)) return;
    boost::system::error_code ec;
    // A blocked accept() is not woken by close(); hand it one last client.
    if (acceptor.is_open()) {
      tcp::socket wake(io);
      const auto local = acceptor.local_endpoint(ec);
      if (!ec) {
        const auto addr = local.address().is_unspecified() ? asio::ip::address(asio::ip::address_v4::loopback())
                                                            : local.address();
        wake.connect(tcp::endpoint(addr, local.port()), ec);
      }
    }
    if (acceptor_thread.joinable() && acceptor_thread.get_id() != std::this_thread::get_id()) acceptor_thread.join();
    acceptor.close(ec);
    std::lock_guard lock(clients_mutex);
    for (auto& c : clients) {
      c->shutdown(tcp::socket::shutdown_both, ec);
      c->close(ec);
    }
  }

  Store& store;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::function<void()> before_request;
  std::atomic<bool> stopping{false};
  std::mutex request_mutex;
  std::mutex clients_mutex;
  std::list<std::shared_ptr<tcp::socket>> clients;
  std::list<std::thread> workers;
  std::thread acceptor_thread;
};

TcpServer::TcpServer(Store& store, const std::string& host, std::uint16_t port, std::function<void()> before_request)
    : impl_(std::make_unique<Impl>(store, host, port, std::move(before_request))) {}

TcpServer::~TcpServer() {
  stop();
  if (impl_->acceptor_thread.joinable()) impl_->acceptor_thread.join();
  for (auto& w : impl_->workers) {
    if (w.joinable()) w.join();
  }
}

std::uint16_t TcpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TcpServer::start() {
  impl_->acceptor_thread = std::thread([this] { impl_->accept_loop(); });
}

void TcpServer::run() { impl_->accept_loop(); }

void TcpServer::stop() { impl_->stop(); }

}  // namespace socketstore::store
