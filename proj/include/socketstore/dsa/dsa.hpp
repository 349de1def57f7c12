#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socketstore/dsa/channel.hpp"
#include "socketstore/dsa/dedup.hpp"
#include "socketstore/endpoint.hpp"
#include "socketstore/netsim/simulator.hpp"
#include "socketstore/sim_time.hpp"

namespace socketstore::dsa {

struct DeviceConfig {
  std::string device_id;
  std::string app_id;
  std::vector<Endpoint> connectivity;  // this device's NICs; connectivity[0] is the source endpoint
  SimDuration refresh_interval = from_seconds(1.0);
  SimDuration handshake_timeout = from_ms(200.0);
  /// Last-resort resolution when the store cannot answer (a hosts file).
  std::map<std::string, Endpoint> static_hosts;
};

enum class ConnectionMode { module, fallback };
enum class OnFailure { fallback, negotiate };

struct ConnectOptions {
  int k = 2;
  double rate_mbps = 10.0;
  double max_latency_ms = 5.0;
  OnFailure on_failure = OnFailure::fallback;
};

struct FailureEvent {
  std::string alias;
  std::string module_id;
  std::string reason;
  int max_feasible_k = 0;
};

struct Connection {
  std::uint64_t id = 0;
  ConnectionMode mode = ConnectionMode::fallback;
  std::optional<std::string> instance_id;  // module mode only
  int paths = 1;
  std::optional<std::string> failure_reason;  // fallback mode only
  Endpoint peer;
  netsim::FlowId flow;
  SimDuration deadline{0};   // requested max_latency; default per-packet budget
  SimDuration handshake{0};  // simulated time spent talking to the store
};

struct Received {
  std::uint64_t seq = 0;
  int path_index = 0;
  SimDuration latency{0};
  std::string payload;
};

struct BindHandle {
  std::string alias;
};

/// Device-side agent: the developer-facing bind/connect API. Talks to the
/// store over a StoreChannel for control operations only; payloads travel
/// on the simulated network.
class Dsa {
 public:
  Dsa(DeviceConfig config, StoreChannel& channel, netsim::Simulator& network);
  ~Dsa();
  Dsa(const Dsa&) = delete;
  Dsa& operator=(const Dsa&) = delete;

  /// Registers `alias` for this device and refreshes it every
  /// refresh_interval. An unreachable store queues the registration.
  BindHandle bind(const std::string& alias);
  void unbind(const BindHandle& handle);
  bool bound(const std::string& alias) const;
  /// True once the store has confirmed the latest registration of `alias`.
  bool registered(const std::string& alias) const;
  /// Replaces this device's endpoints and re-registers every bound alias.
  void set_connectivity(std::vector<Endpoint> connectivity);

  /// Returns a module or fallback connection; nullopt only in negotiate mode
  /// after the failure callback ran. Throws only on invalid options.
  std::optional<Connection> connect(const std::string& alias, const std::string& module_id,
                                    const std::string& token, const ConnectOptions& opts);
  void on_failure(std::function<void(const FailureEvent&)> callback) { on_failure_ = std::move(callback); }

  /// Sends one copy per path and runs the network until every copy resolves.
  /// A zero deadline means the connection's max_latency.
  std::vector<netsim::DeliveryRecord> send(const Connection& conn, const std::string& payload,
                                           SimDuration deadline = SimDuration{0});
  /// Schedules the copies at `at` (>= now); `on_copy` sees every copy's record.
  std::uint64_t post(const Connection& conn, const std::string& payload, SimTime at, SimDuration deadline,
                     netsim::DeliveryCallback on_copy = {});
  /// Drains first arrivals, ordered by seq.
  std::vector<Received> recv(const Connection& conn);
  void close(const Connection& conn);
  bool is_open(const Connection& conn) const;

 private:
  struct Binding;
  struct Link;
  void refresh(const std::string& alias);
  void schedule_refresh(const std::string& alias);
  Connection open_fallback(const std::string& alias, const std::optional<Endpoint>& peer, std::string reason,
                           SimDuration deadline);
  Link& require_open(const Connection& conn);

  DeviceConfig config_;
  StoreChannel& channel_;
  netsim::Simulator& network_;
  std::function<void(const FailureEvent&)> on_failure_;
  std::map<std::string, std::unique_ptr<Binding>> bindings_;
  std::map<std::string, Endpoint> resolved_;  // last successful RESOLVE per alias
  std::map<std::uint64_t, std::unique_ptr<Link>> links_;
  std::uint64_t next_connection_ = 1;
  std::shared_ptr<bool> alive_;
};

}  // namespace socketstore::dsa
