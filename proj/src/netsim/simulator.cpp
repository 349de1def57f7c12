#include "socketstore/netsim/simulator.hpp"

#include <algorithm>
#include <memory>

#include "socketstore/error.hpp"

namespace socketstore::netsim {

namespace {

constexpr std::size_t kMaxHops = 64;
constexpr SimDuration kRateWindow = std::chrono::seconds(1);

}  // namespace

std::string to_string(const FlowId& flow) { return flow.src + ">" + flow.dst + "#" + flow.tag; }

const Node* TopologySnapshot::find_node(std::string_view id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

struct Simulator::InFlight {
  Packet packet;
  DeliveryRecord record;
  DeliveryCallback on_done;
};

Simulator::Simulator(Topology topology) : topology_(std::move(topology)) {}

Simulator::EventId Simulator::schedule_at(SimTime at, Action action, bool daemon) {
  if (at < now_) {
    throw Error(Errc::invalid_argument, "cannot schedule in the past");
  }
  const EventId id = next_event_++;
  queue_.push(Event{at, id, daemon});
  actions_.emplace(id, std::move(action));
  if (daemon) {
    daemon_ids_.insert(id);
  } else {
    ++live_events_;
  }
  return id;
}

Simulator::EventId Simulator::schedule_in(SimDuration delay, Action action, bool daemon) {
  return schedule_at(now_ + delay, std::move(action), daemon);
}

void Simulator::cancel(EventId id) {
  auto it = actions_.find(id);
  if (it == actions_.end()) return;
  actions_.erase(it);
  if (daemon_ids_.erase(id) == 0) --live_events_;
}

bool Simulator::step() {
  while (!queue_.empty()) {
    const Event ev = queue_.top();
    queue_.pop();
    auto it = actions_.find(ev.id);
    if (it == actions_.end()) continue;  // cancelled
    Action action = std::move(it->second);
    actions_.erase(it);
    if (daemon_ids_.erase(ev.id) == 0) --live_events_;
    now_ = ev.at;
    action();
    return true;
  }
  return false;
}

void Simulator::run() {
  while (live_events_ > 0 && step()) {
  }
}

void Simulator::run_until(SimTime t) {
  while (!queue_.empty() && queue_.top().at <= t) {
    step();
  }
  now_ = std::max(now_, t);
}

const Link& Simulator::require_link(const std::string& id) const { return topology_.link(id); }

std::size_t Simulator::deploy_path(const FlowId& flow, int path_index, std::span<const std::string> links) {
  topology_.node(flow.src);
  topology_.node(flow.dst);
  if (links.empty()) {
    throw Error(Errc::path_endpoint_mismatch, "empty path for flow " + to_string(flow));
  }
  std::vector<std::pair<std::string, std::string>> hops;  // (node, out_link)
  std::set<std::string> visited{flow.src};
  std::string at = flow.src;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = require_link(links[i]);
    if (!l.incident(at)) {
      if (i == 0) {
        throw Error(Errc::path_endpoint_mismatch, "path does not start at " + flow.src);
      }
      throw Error(Errc::non_contiguous_path, "non-contiguous path at link " + l.id);
    }
    if (i > 0 && topology_.node(at).kind == NodeKind::host) {
      throw Error(Errc::non_contiguous_path, "path transits host " + at);
    }
    hops.emplace_back(at, l.id);
    at = l.other(at);
    if (!visited.insert(at).second) {
      throw Error(Errc::non_contiguous_path, "path revisits node " + at);
    }
  }
  if (at != flow.dst) {
    throw Error(Errc::path_endpoint_mismatch, "path does not end at " + flow.dst);
  }

  retract_path(flow, path_index);
  std::size_t installed = 0;
  for (const auto& [node, out] : hops) {
    if (topology_.node(node).kind == NodeKind::host) {
      host_egress_[{flow, path_index}] = out;
    } else {
      rules_[{node, flow, path_index}] = out;
      ++installed;
    }
  }
  return installed;
}

std::size_t Simulator::retract_path(const FlowId& flow, int path_index) {
  std::size_t removed = 0;
  for (auto it = rules_.begin(); it != rules_.end();) {
    if (std::get<1>(it->first) == flow && std::get<2>(it->first) == path_index) {
      it = rules_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  host_egress_.erase({flow, path_index});
  return removed;
}

void Simulator::install_rule(const FlowRule& rule) {
  const Node& sw = topology_.node(rule.switch_id);
  if (sw.kind != NodeKind::switch_node) {
    throw Error(Errc::invalid_argument, rule.switch_id + " is not a switch");
  }
  if (!require_link(rule.out_link).incident(rule.switch_id)) {
    throw Error(Errc::non_incident_link, "link " + rule.out_link + " does not touch " + rule.switch_id);
  }
  rules_[{rule.switch_id, rule.flow, rule.path_index}] = rule.out_link;
}

bool Simulator::remove_rule(const std::string& switch_id, const FlowId& flow, int path_index) {
  return rules_.erase({switch_id, flow, path_index}) > 0;
}

std::vector<FlowRule> Simulator::rules_at(const std::string& switch_id) const {
  std::vector<FlowRule> out;
  for (const auto& [key, link] : rules_) {
    if (std::get<0>(key) == switch_id) {
      out.push_back(FlowRule{switch_id, std::get<1>(key), std::get<2>(key), link});
    }
  }
  return out;
}

void Simulator::inject_latency(const LatencyInjection& injection) {
  require_link(injection.link);
  if (injection.extra.count() <= 0) {
    throw Error(Errc::non_positive_injection, "non-positive injection");
  }
  if (!(injection.start < injection.end)) {
    throw Error(Errc::inverted_window, "inverted window");
  }
  injections_.push_back(injection);
}

SimDuration Simulator::link_delay(const std::string& link, SimTime at) const {
  SimDuration d = require_link(link).base_latency;
  for (const LatencyInjection& inj : injections_) {
    if (inj.link == link && inj.start <= at && at < inj.end) d += inj.extra;
  }
  return d;
}

void Simulator::reserve(const std::string& link, double mbps) {
  const Link& l = require_link(link);
  if (mbps < 0) throw Error(Errc::invalid_argument, "negative reservation");
  double& load = reserved_[link];
  if (load + mbps > l.capacity_mbps + 1e-9) {
    throw Error(Errc::capacity_exceeded, "capacity exceeded on link " + link);
  }
  load += mbps;
}

void Simulator::release(const std::string& link, double mbps) {
  auto it = reserved_.find(link);
  if (it == reserved_.end()) return;
  it->second = std::max(0.0, it->second - mbps);
}

LinkStats Simulator::link_stats(const std::string& link) const {
  const Link& l = require_link(link);
  LinkStats s;
  s.link = l.id;
  s.a = l.a;
  s.b = l.b;
  s.capacity_mbps = l.capacity_mbps;
  s.latency_now = link_delay(link, now_);
  if (auto it = reserved_.find(link); it != reserved_.end()) s.load_mbps = it->second;
  if (auto it = carried_.find(link); it != carried_.end()) {
    auto& window = it->second;
    while (!window.empty() && window.front().first + kRateWindow <= now_) window.pop_front();
    std::size_t bytes = 0;
    for (const auto& [t, b] : window) {
      if (t <= now_) bytes += b;
    }
    s.rate_mbps = static_cast<double>(bytes) * 8.0 / 1e6 / to_seconds(kRateWindow);
  }
  return s;
}

TopologySnapshot Simulator::snapshot() const {
  TopologySnapshot snap;
  snap.at = now_;
  snap.nodes.assign(topology_.nodes().begin(), topology_.nodes().end());
  for (const Link& l : topology_.links()) snap.links.push_back(link_stats(l.id));
  return snap;
}

void Simulator::remove_link(const std::string& link) {
  topology_.remove_link(link);
  reserved_.erase(link);
  carried_.erase(link);
}

std::optional<std::string> Simulator::next_link(const std::string& node, const FlowId& flow,
                                                int path_index) const {
  if (const Node* n = topology_.find_node(node); n && n->kind == NodeKind::host) {
    auto it = host_egress_.find({flow, path_index});
    if (it == host_egress_.end() || node != flow.src) return std::nullopt;
    return it->second;
  }
  auto it = rules_.find({node, flow, path_index});
  if (it == rules_.end()) return std::nullopt;
  return it->second;
}

void Simulator::send(Packet packet, DeliveryCallback on_done) {
  if (packet.deadline.count() <= 0) {
    throw Error(Errc::invalid_argument, "packet deadline must be positive");
  }
  auto pkt = std::make_shared<InFlight>();
  pkt->record.flow = packet.flow;
  pkt->record.seq = packet.seq;
  pkt->record.path_index = packet.path_index;
  pkt->record.sent_at = packet.sent_at;
  pkt->packet = std::move(packet);
  pkt->on_done = std::move(on_done);
  schedule_at(pkt->packet.sent_at, [this, pkt] { forward(pkt, pkt->packet.flow.src); });
}

void Simulator::forward(std::shared_ptr<InFlight> pkt, const std::string& at_node) {
  const FlowId& flow = pkt->packet.flow;
  if (at_node == flow.dst) {
    finish(pkt, true, {});
    return;
  }
  if (pkt->record.hops.size() >= kMaxHops) {
    finish(pkt, false, "hop limit exceeded");
    return;
  }
  const auto out = next_link(at_node, flow, pkt->packet.path_index);
  if (!out) {
    finish(pkt, false, "no rule at " + at_node);
    return;
  }
  const Link* link = topology_.find_link(*out);
  if (link == nullptr) {
    finish(pkt, false, "link down: " + *out);
    return;
  }
  HopRecord hop{link->id, at_node, link->other(at_node), now_, link_delay(link->id, now_)};
  carried_[link->id].emplace_back(now_, pkt->packet.size_bytes);
  pkt->record.hops.push_back(hop);
  schedule_at(now_ + hop.delay, [this, pkt, next = hop.to] { forward(pkt, next); });
}

void Simulator::finish(const std::shared_ptr<InFlight>& pkt, bool delivered, std::string reason) {
  DeliveryRecord& r = pkt->record;
  r.delivered = delivered;
  r.drop_reason = std::move(reason);
  if (delivered) {
    r.arrive_at = now_;
    r.latency = now_ - r.sent_at;
    r.violated_deadline = r.latency > pkt->packet.deadline;
    r.payload = std::move(pkt->packet.payload);
  }
  if (pkt->on_done) pkt->on_done(r);
}

DeliveryRecord Simulator::send_packet(Packet packet) {
  std::optional<DeliveryRecord> result;
  send(std::move(packet), [&result](const DeliveryRecord& r) { result = r; });
  while (!result && step()) {
  }
  if (!result) {
    throw Error(Errc::invalid_argument, "packet did not resolve");
  }
  return *result;
}

}  // namespace socketstore::netsim
