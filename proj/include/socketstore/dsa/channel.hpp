#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "socketstore/sim_time.hpp"

namespace socketstore::store {
class Store;
class ProtocolSession;
}  // namespace socketstore::store

namespace socketstore::dsa {

enum class ChannelStatus { ok, timeout, disconnected };

struct ChannelReply {
  ChannelStatus status = ChannelStatus::ok;
  nlohmann::json reply;
  SimDuration elapsed{0};
};

/// Request/response transport from a DSA to the store.
class StoreChannel {
 public:
  virtual ~StoreChannel() = default;
  /// Sends one message and waits at most `timeout` for the reply.
  virtual ChannelReply request(const nlohmann::json& message, SimDuration timeout) = 0;
  /// Starts a fresh protocol session (forgets HELLO/AUTH state).
  virtual void reset() = 0;
};

/// In-process channel to a Store, with fault injection. Each exchange is
/// charged a fixed round-trip time; the simulator is not advanced.
class LocalChannel final : public StoreChannel {
 public:
  explicit LocalChannel(store::Store& store, SimDuration rtt = from_ms(1.0));
  ~LocalChannel() override;

  ChannelReply request(const nlohmann::json& message, SimDuration timeout) override;
  void reset() override;

  /// Unreachable store: every request times out.
  void set_store_down(bool down) { down_ = down; }
  /// The connection drops after `n` more successful exchanges.
  void cut_after(std::size_t n) { cut_after_ = n; }
  void clear_faults();
  std::size_t exchanges() const { return exchanges_; }

 private:
  store::Store& store_;
  std::unique_ptr<store::ProtocolSession> session_;
  SimDuration rtt_;
  bool down_ = false;
  std::optional<std::size_t> cut_after_;
  std::size_t exchanges_ = 0;
};

/// Newline-delimited JSON over TCP. The timeout is applied as wall-clock
/// time. Carries control-plane traffic only.
class TcpChannel final : public StoreChannel {
 public:
  TcpChannel(std::string host, std::uint16_t port);
  ~TcpChannel() override;

  ChannelReply request(const nlohmann::json& message, SimDuration timeout) override;
  void reset() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace socketstore::dsa
