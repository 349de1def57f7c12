#include "socketstore/dsa/dsa.hpp"

#include <algorithm>

#include "socketstore/error.hpp"

namespace socketstore::dsa {

using nlohmann::json;

struct Dsa::Binding {
  std::string alias;
  std::optional<netsim::Simulator::EventId> timer;
  bool registered = false;
};

struct Dsa::Link {
  Connection conn;
  bool open = true;
  std::uint64_t next_seq = 0;
  DedupWindow window;
  std::vector<Received> inbox;
};

Dsa::Dsa(DeviceConfig config, StoreChannel& channel, netsim::Simulator& network)
    : config_(std::move(config)), channel_(channel), network_(network), alive_(std::make_shared<bool>(true)) {
  if (config_.device_id.empty()) throw Error(Errc::invalid_argument, "device id must not be empty");
  if (config_.connectivity.empty()) throw Error(Errc::invalid_argument, "device needs at least one endpoint");
  if (config_.refresh_interval <= SimDuration{0}) throw Error(Errc::invalid_argument, "refresh interval must be positive");
  if (config_.handshake_timeout <= SimDuration{0}) throw Error(Errc::invalid_argument, "handshake timeout must be positive");
}

Dsa::~Dsa() {
  for (auto& [_, b] : bindings_) {
    if (b->timer) network_.cancel(*b->timer);
  }
}

// -- bind --------------------------------------------------------------------------

BindHandle Dsa::bind(const std::string& alias) {
  if (alias.empty()) throw Error(Errc::invalid_argument, "alias must not be empty");
  auto [it, inserted] = bindings_.try_emplace(alias, nullptr);
  if (inserted) it->second = std::make_unique<Binding>(Binding{alias, std::nullopt, false});
  json msg{{"kind", "BIND"}, {"alias", alias}, {"device_id", config_.device_id}, {"connectivity", json::array()}};
  for (const Endpoint& e : config_.connectivity) msg["connectivity"].push_back(to_string(e));
  const ChannelReply r = channel_.request(msg, config_.handshake_timeout);
  if (r.status == ChannelStatus::ok && r.reply.value("kind", "") == "BIND_FAIL") {
    const std::string reason = r.reply.value("reason", "bind failed");
    if (inserted) bindings_.erase(it);
    throw Error(reason.rfind("alias conflict", 0) == 0 ? Errc::alias_conflict : Errc::invalid_argument, reason);
  }
  it->second->registered = r.status == ChannelStatus::ok && r.reply.value("kind", "") == "BIND_OK";
  if (!it->second->timer) schedule_refresh(alias);
  return BindHandle{alias};
}

void Dsa::refresh(const std::string& alias) {
  auto it = bindings_.find(alias);
  if (it == bindings_.end()) return;
  json msg{{"kind", "BIND"}, {"alias", alias}, {"device_id", config_.device_id}, {"connectivity", json::array()}};
  for (const Endpoint& e : config_.connectivity) msg["connectivity"].push_back(to_string(e));
  const ChannelReply r = channel_.request(msg, config_.handshake_timeout);
  // Unreachable or refused: keep the registration queued for the next tick.
  it->second->registered = r.status == ChannelStatus::ok && r.reply.value("kind", "") == "BIND_OK";
}

void Dsa::schedule_refresh(const std::string& alias) {
  std::weak_ptr<bool> alive = alive_;
  bindings_.at(alias)->timer = network_.schedule_in(
      config_.refresh_interval,
      [this, alive, alias] {
        if (alive.expired() || !bindings_.count(alias)) return;
        refresh(alias);
        schedule_refresh(alias);
      },
      /*daemon=*/true);
}

void Dsa::unbind(const BindHandle& handle) {
  auto it = bindings_.find(handle.alias);
  if (it == bindings_.end()) return;
  if (it->second->timer) network_.cancel(*it->second->timer);
  bindings_.erase(it);
}

bool Dsa::bound(const std::string& alias) const { return bindings_.count(alias) > 0; }

bool Dsa::registered(const std::string& alias) const {
  auto it = bindings_.find(alias);
  return it != bindings_.end() && it->second->registered;
}

void Dsa::set_connectivity(std::vector<Endpoint> connectivity) {
  if (connectivity.empty()) throw Error(Errc::invalid_argument, "device needs at least one endpoint");
  config_.connectivity = std::move(connectivity);
  for (auto& [alias, _] : bindings_) refresh(alias);
}

// -- connect -----------------------------------------------------------------------

namespace {

std::string number_text(double v) { return json(v).dump(); }

}  // namespace

std::optional<Connection> Dsa::connect(const std::string& alias, const std::string& module_id,
                                       const std::string& token, const ConnectOptions& opts) {
  if (alias.empty()) throw Error(Errc::invalid_argument, "alias must not be empty");
  if (module_id.empty()) throw Error(Errc::invalid_argument, "module id must not be empty");
  if (opts.k < 1) throw Error(Errc::invalid_argument, "K must be at least 1");
  if (!(opts.rate_mbps > 0.0)) throw Error(Errc::invalid_argument, "rate must be positive");
  if (!(opts.max_latency_ms > 0.0)) throw Error(Errc::invalid_argument, "max_latency must be positive");

  SimDuration spent{0};
  std::string reason;
  int max_k = 0;
  std::optional<Endpoint> peer;

  auto exchange = [&](const json& msg) -> std::optional<json> {
    const SimDuration left = config_.handshake_timeout - spent;
    if (left <= SimDuration{0}) {
      reason = "store unreachable: handshake timeout";
      return std::nullopt;
    }
    ChannelReply r;
    try {
      r = channel_.request(msg, left);
    } catch (const std::exception&) {
      r = {ChannelStatus::disconnected, nullptr, SimDuration{0}};
    }
    spent += std::min(r.elapsed, left);
    if (r.status == ChannelStatus::timeout || r.elapsed > left) {
      spent = config_.handshake_timeout;
      reason = "store unreachable: handshake timeout";
      return std::nullopt;
    }
    if (r.status == ChannelStatus::disconnected) {
      reason = "store disconnected during handshake";
      return std::nullopt;
    }
    if (r.reply.value("kind", "") == "PROTOCOL_ERROR") {
      reason = "protocol error: " + r.reply.value("reason", "");
      return std::nullopt;
    }
    return r.reply;
  };

  auto handshake = [&]() -> std::optional<Connection> {
    channel_.reset();
    auto hello = exchange({{"kind", "HELLO"}, {"app_id", config_.app_id}});
    if (!hello) return std::nullopt;
    auto auth = exchange({{"kind", "AUTH"}, {"token", token}, {"module_id", module_id}});
    if (!auth) return std::nullopt;
    if (auth->value("kind", "") != "AUTH_OK") {
      reason = "authorization denied";
      return std::nullopt;
    }
    auto resolve = exchange({{"kind", "RESOLVE"}, {"alias", alias}});
    if (!resolve) return std::nullopt;
    if (resolve->value("kind", "") != "RESOLVE_OK" || resolve->value("connectivity", json::array()).empty()) {
      reason = "alias unresolved: " + alias;
      return std::nullopt;
    }
    try {
      peer = parse_endpoint(resolve->at("connectivity").at(0).get<std::string>());
    } catch (const std::exception&) {
      reason = "alias unresolved: " + alias;
      return std::nullopt;
    }
    resolved_[alias] = *peer;
    const json inputs{{"endpointA", to_string(config_.connectivity.front())},
                      {"endpointB", to_string(*peer)},
                      {"K", std::to_string(opts.k)},
                      {"rate", number_text(opts.rate_mbps)},
                      {"max_latency", number_text(opts.max_latency_ms)}};
    auto inst = exchange({{"kind", "INSTANTIATE"}, {"module_id", module_id}, {"token", token}, {"inputs", inputs}});
    if (!inst) return std::nullopt;
    if (inst->value("kind", "") != "INSTANTIATE_OK") {
      reason = inst->value("reason", "instantiation failed");
      max_k = inst->value("max_feasible_k", 0);
      return std::nullopt;
    }
    std::string tag;
    int paths = 0;
    for (const json& entry : inst->value("allocation", json::array())) {
      if (entry.contains("flow_tag") && entry.contains("paths")) {
        tag = entry["flow_tag"].get<std::string>();
        paths = static_cast<int>(entry["paths"].size());
      }
    }
    const std::string instance_id = inst->value("instance_id", "");
    if (tag.empty() || paths != opts.k) {
      // The module answered but not with a K-path mirror: release it.
      exchange({{"kind", "TEARDOWN"}, {"instance_id", instance_id}});
      reason = "allocation failed: module returned " + std::to_string(paths) + " paths";
      return std::nullopt;
    }
    Connection c;
    c.id = next_connection_++;
    c.mode = ConnectionMode::module;
    c.instance_id = instance_id;
    c.paths = paths;
    c.peer = *peer;
    c.flow = netsim::FlowId{config_.connectivity.front().address, peer->address, tag};
    c.deadline = from_ms(opts.max_latency_ms);
    return c;
  };

  std::optional<Connection> conn = handshake();
  if (conn) {
    conn->handshake = spent;
    links_.emplace(conn->id, std::make_unique<Link>(Link{*conn, true, 0, DedupWindow{}, {}}));
    return conn;
  }
  if (opts.on_failure == OnFailure::negotiate) {
    if (on_failure_) on_failure_(FailureEvent{alias, module_id, reason, max_k});
    return std::nullopt;
  }
  if (!peer) {
    if (auto it = resolved_.find(alias); it != resolved_.end()) {
      peer = it->second;
    } else if (auto st = config_.static_hosts.find(alias); st != config_.static_hosts.end()) {
      peer = st->second;
    }
  }
  Connection fb = open_fallback(alias, peer, reason, from_ms(opts.max_latency_ms));
  fb.handshake = spent;
  links_.at(fb.id)->conn.handshake = spent;
  return fb;
}

Connection Dsa::open_fallback(const std::string& alias, const std::optional<Endpoint>& peer, std::string reason,
                              SimDuration deadline) {
  Connection c;
  c.deadline = deadline;
  c.id = next_connection_++;
  c.mode = ConnectionMode::fallback;
  c.paths = 1;
  c.failure_reason = std::move(reason);
  c.peer = peer.value_or(Endpoint{alias, 0, 0});
  c.flow = netsim::FlowId{config_.connectivity.front().address, c.peer.address,
                          "fallback-" + config_.device_id + "-" + std::to_string(c.id)};
  // A plain socket: the network's default route. Without one, sends drop.
  try {
    if (auto route = netsim::default_route(network_.topology(), c.flow.src, c.flow.dst)) {
      network_.deploy_path(c.flow, 0, *route);
    }
  } catch (const Error&) {
  }
  links_.emplace(c.id, std::make_unique<Link>(Link{c, true, 0, DedupWindow{}, {}}));
  return c;
}

// -- data plane --------------------------------------------------------------------

Dsa::Link& Dsa::require_open(const Connection& conn) {
  auto it = links_.find(conn.id);
  if (it == links_.end() || !it->second->open) throw Error(Errc::connection_closed, "connection is closed");
  return *it->second;
}

bool Dsa::is_open(const Connection& conn) const {
  auto it = links_.find(conn.id);
  return it != links_.end() && it->second->open;
}

std::uint64_t Dsa::post(const Connection& conn, const std::string& payload, SimTime at, SimDuration deadline,
                        netsim::DeliveryCallback on_copy) {
  Link& link = require_open(conn);
  const std::uint64_t seq = link.next_seq++;
  std::weak_ptr<bool> alive = alive_;
  Link* target = &link;
  for (int i = 0; i < link.conn.paths; ++i) {
    netsim::Packet p;
    p.flow = link.conn.flow;
    p.seq = seq;
    p.size_bytes = 1500;
    p.sent_at = std::max(at, network_.now());
    p.deadline = deadline > SimDuration{0} ? deadline : link.conn.deadline;
    p.path_index = i;
    p.payload = payload;
    network_.send(std::move(p), [alive, target, on_copy](const netsim::DeliveryRecord& rec) {
      if (!alive.expired() && rec.delivered && target->window.accept(rec.seq)) {
        target->inbox.push_back(Received{rec.seq, rec.path_index, rec.latency, rec.payload});
      }
      if (on_copy) on_copy(rec);
    });
  }
  return seq;
}

std::vector<netsim::DeliveryRecord> Dsa::send(const Connection& conn, const std::string& payload,
                                              SimDuration deadline) {
  const int copies = require_open(conn).conn.paths;
  auto records = std::make_shared<std::vector<netsim::DeliveryRecord>>();
  post(conn, payload, network_.now(), deadline, [records](const netsim::DeliveryRecord& r) { records->push_back(r); });
  while (static_cast<int>(records->size()) < copies && network_.step()) {
  }
  std::sort(records->begin(), records->end(),
            [](const auto& a, const auto& b) { return a.path_index < b.path_index; });
  return *records;
}

std::vector<Received> Dsa::recv(const Connection& conn) {
  auto it = links_.find(conn.id);
  if (it == links_.end()) throw Error(Errc::connection_closed, "unknown connection");
  std::vector<Received> out;
  out.swap(it->second->inbox);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  return out;
}

void Dsa::close(const Connection& conn) {
  auto it = links_.find(conn.id);
  if (it == links_.end() || !it->second->open) return;
  Link& link = *it->second;
  link.open = false;
  if (link.conn.mode == ConnectionMode::fallback) {
    network_.retract_path(link.conn.flow, 0);
    return;
  }
  const json msg{{"kind", "TEARDOWN"}, {"instance_id", *link.conn.instance_id}};
  const ChannelReply r = channel_.request(msg, config_.handshake_timeout);
  // An unreachable store keeps the instance; retry once with a fresh session.
  if (r.status != ChannelStatus::ok) {
    channel_.reset();
    channel_.request(msg, config_.handshake_timeout);
  }
}

}  // namespace socketstore::dsa
