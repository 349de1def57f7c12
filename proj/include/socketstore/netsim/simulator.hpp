#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "socketstore/netsim/topology.hpp"
#include "socketstore/sim_time.hpp"

namespace socketstore::netsim {

struct FlowId {
  std::string src;
  std::string dst;
  std::string tag;

  auto operator<=>(const FlowId&) const = default;
};

std::string to_string(const FlowId& flow);

struct FlowRule {
  std::string switch_id;
  FlowId flow;
  int path_index = 0;
  std::string out_link;

  bool operator==(const FlowRule&) const = default;
};

struct Packet {
  FlowId flow;
  std::uint64_t seq = 0;
  std::size_t size_bytes = 0;
  SimTime sent_at{0};
  SimDuration deadline{0};  // relative budget
  int path_index = 0;
  std::string payload;
};

struct HopRecord {
  std::string link;
  std::string from;
  std::string to;
  SimTime enter_at{0};
  SimDuration delay{0};
};

struct DeliveryRecord {
  FlowId flow;
  std::uint64_t seq = 0;
  int path_index = 0;
  bool delivered = false;
  SimTime sent_at{0};
  SimTime arrive_at{0};
  SimDuration latency{0};
  bool violated_deadline = false;
  std::vector<HopRecord> hops;
  std::string drop_reason;
  std::string payload;
};

/// Extra delay added to a link over the half-open window [start, end).
struct LatencyInjection {
  std::string link;
  SimDuration extra{0};
  SimTime start{0};
  SimTime end{0};
};

struct LinkStats {
  std::string link;
  std::string a;
  std::string b;
  SimDuration latency_now{0};
  double rate_mbps = 0.0;  // carried traffic over the trailing second
  double load_mbps = 0.0;  // reserved bandwidth
  double capacity_mbps = 0.0;

  double residual_mbps() const { return capacity_mbps - load_mbps; }
};

/// Value copy of the network state at one simulated instant.
struct TopologySnapshot {
  SimTime at{0};
  std::vector<Node> nodes;
  std::vector<LinkStats> links;

  const Node* find_node(std::string_view id) const;
};

using DeliveryCallback = std::function<void(const DeliveryRecord&)>;

/// Discrete-event SDN simulator. All state changes happen on one logical
/// timeline; events fire in (time, insertion) order.
class Simulator {
 public:
  using Action = std::function<void()>;
  using EventId = std::uint64_t;

  explicit Simulator(Topology topology);

  SimTime now() const { return now_; }
  const Topology& topology() const { return topology_; }

  // -- event loop --------------------------------------------------------
  /// Daemon events (periodic housekeeping) do not keep run() alive.
  EventId schedule_at(SimTime at, Action action, bool daemon = false);
  EventId schedule_in(SimDuration delay, Action action, bool daemon = false);
  void cancel(EventId id);
  bool step();
  void run();
  void run_until(SimTime t);
  std::size_t pending_events() const { return live_events_; }

  // -- flow table --------------------------------------------------------
  /// Installs one rule per switch on `links` (and the egress choice of the
  /// source host), atomically replacing the rules of (flow, path_index).
  /// Returns the number of switch rules installed.
  std::size_t deploy_path(const FlowId& flow, int path_index, std::span<const std::string> links);
  /// Removes every rule of (flow, path_index). Returns the switch rule count removed.
  std::size_t retract_path(const FlowId& flow, int path_index);
  /// Installs or replaces the rule for (switch, flow, path_index).
  void install_rule(const FlowRule& rule);
  bool remove_rule(const std::string& switch_id, const FlowId& flow, int path_index);
  std::vector<FlowRule> rules_at(const std::string& switch_id) const;
  std::size_t rule_count() const { return rules_.size(); }

  // -- link state --------------------------------------------------------
  void inject_latency(const LatencyInjection& injection);
  SimDuration link_delay(const std::string& link, SimTime at) const;
  std::span<const LatencyInjection> injections() const { return injections_; }
  void reserve(const std::string& link, double mbps);
  void release(const std::string& link, double mbps);
  LinkStats link_stats(const std::string& link) const;
  TopologySnapshot snapshot() const;
  void remove_link(const std::string& link);

  // -- data plane ----------------------------------------------------------
  /// Schedules the packet's departure at p.sent_at (>= now). `on_done` fires
  /// once, on delivery or drop. Packets are never retransmitted.
  void send(Packet packet, DeliveryCallback on_done);
  /// send() followed by running the event loop until this packet resolves.
  DeliveryRecord send_packet(Packet packet);

 private:
  struct Event {
    SimTime at;
    EventId id;
    bool daemon;
    bool operator>(const Event& o) const { return at != o.at ? at > o.at : id > o.id; }
  };
  struct InFlight;
  using RuleKey = std::tuple<std::string, FlowId, int>;  // switch, flow, path
  using PathKey = std::pair<FlowId, int>;

  void forward(std::shared_ptr<InFlight> pkt, const std::string& at_node);
  void finish(const std::shared_ptr<InFlight>& pkt, bool delivered, std::string reason);
  std::optional<std::string> next_link(const std::string& node, const FlowId& flow, int path_index) const;
  const Link& require_link(const std::string& id) const;

  Topology topology_;
  SimTime now_{0};
  EventId next_event_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::unordered_map<EventId, Action> actions_;
  std::set<EventId> daemon_ids_;
  std::size_t live_events_ = 0;

  std::map<RuleKey, std::string> rules_;
  std::map<PathKey, std::string> host_egress_;
  std::vector<LatencyInjection> injections_;
  std::unordered_map<std::string, double> reserved_;
  mutable std::unordered_map<std::string, std::deque<std::pair<SimTime, std::size_t>>> carried_;
};

}  // namespace socketstore::netsim
