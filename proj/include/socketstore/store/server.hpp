#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "socketstore/store/store.hpp"

namespace socketstore::store {

/// Newline-delimited protocol sessions over TCP, one thread per client.
/// Requests from all sessions are handled one at a time.
class TcpServer {
 public:
  /// `before_request` runs under the request lock before each message, e.g.
  /// to advance the production simulator to wall-clock time.
  TcpServer(Store& store, const std::string& host, std::uint16_t port, std::function<void()> before_request = {});
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const;
  /// Serves on a background thread until stop().
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace socketstore::store
