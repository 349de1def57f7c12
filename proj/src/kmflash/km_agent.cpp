#include "socketstore/kmflash/km_agent.hpp"

#include <set>

#include "socketstore/agents/resource_agents.hpp"
#include "socketstore/error.hpp"
#include "socketstore/netsim/simulator.hpp"

namespace socketstore::kmflash {

using nlohmann::json;
using agents::AgentContext;
using agents::Message;

KMParams KMParams::from_params(const agents::ParamMap& params) {
  auto get = [&](const char* name) -> const std::string& {
    auto it = params.find(name);
    if (it == params.end()) throw Error(Errc::schema_violation, std::string("missing parameter ") + name);
    return it->second;
  };
  KMParams p;
  try {
    p.endpoint_a = parse_endpoint(get("endpointA"));
    p.endpoint_b = parse_endpoint(get("endpointB"));
    p.k = std::stoi(get("K"));
    p.rate_mbps = std::stod(get("rate"));
    p.max_latency = from_ms(std::stod(get("max_latency")));
    if (auto it = params.find("epsilon"); it != params.end()) p.epsilon = from_ms(std::stod(it->second));
  } catch (const Error& e) {
    throw Error(Errc::schema_violation, e.what());
  } catch (const std::logic_error& e) {
    throw Error(Errc::schema_violation, std::string("malformed KMirror parameter: ") + e.what());
  }
  if (p.k < 1) throw Error(Errc::schema_violation, "K must be at least 1");
  if (!(p.rate_mbps > 0)) throw Error(Errc::schema_violation, "rate must be positive");
  if (p.max_latency.count() <= 0) throw Error(Errc::schema_violation, "max_latency must be positive");
  if (p.epsilon.count() < 0) throw Error(Errc::schema_violation, "epsilon must be non-negative");
  return p;
}

AllocationRequest KMParams::request() const {
  return AllocationRequest{endpoint_a.address, endpoint_b.address, k, rate_mbps, max_latency, epsilon};
}

json to_json(const Path& path) {
  return json{{"nodes", path.nodes},
              {"links", path.links},
              {"latency_ms", to_ms(path.latency)},
              {"residual_mbps", path.residual_mbps}};
}

agents::AgentTypeSchema KMirrorAgent::schema() {
  using agents::ParamType;
  return agents::AgentTypeSchema{
      kTypeName,
      agents::AgentKind::adapter,
      {{"endpointA", ParamType::endpoint, true},
       {"endpointB", ParamType::endpoint, true},
       {"K", ParamType::integer, true},
       {"rate", ParamType::number, true},
       {"max_latency", ParamType::number, true},
       {"epsilon", ParamType::number, false}},
      {"activate", "status", "link_stats", "rules", "rule_written"},
      "Mirrors a flow over K link-disjoint paths of similar latency."};
}

void KMirrorAgent::start(AgentContext& ctx) {
  network_ = &ctx.network();
  rates_ = ctx.rate_card();
  for (const Endpoint* e : {&params_.endpoint_a, &params_.endpoint_b}) {
    const netsim::Node* n = network_->topology().find_node(e->address);
    if (n == nullptr || n->kind != netsim::NodeKind::host) {
      throw Error(Errc::binding_failure, "resource binding failure: no host " + e->address);
    }
  }
  tag_ = "km-" + std::to_string(ctx.self().value);
}

void KMirrorAgent::stop(AgentContext& ctx) {
  if (handles_ && handles_->live()) {
    retract_mirror_paths(*network_, *handles_);
    ctx.log("retract", Outcome::ok, {{"flow_tag", tag_}});
  }
}

json KMirrorAgent::activate(AgentContext& ctx) {
  if (active()) return {{"kind", "activated"}, {"ok", true}, {"flow_tag", tag_}};
  const AllocationRequest req = params_.request();
  const netsim::FlowId flow{req.src, req.dst, tag_};
  AllocationResult alloc = allocate_disjoint_paths(network_->snapshot(), req);
  DeployResult deployed = std::holds_alternative<PathSet>(alloc)
                              ? deploy_mirror_paths(*network_, flow, std::get<PathSet>(alloc), req)
                              : DeployResult{std::get<AllocationFailure>(alloc)};
  if (auto* f = std::get_if<AllocationFailure>(&deployed)) {
    failure_ = *f;
    ctx.log("allocate", Outcome::error, {{"reason", f->reason}, {"max_feasible_k", f->max_feasible_k}});
    return {{"kind", "activation_failed"},
            {"ok", false},
            {"reason", "allocation failed: " + f->reason},
            {"max_feasible_k", f->max_feasible_k}};
  }
  handles_ = std::get<MirrorHandles>(std::move(deployed));

  std::set<std::string> switches;
  std::set<std::string> links;
  json paths = json::array();
  for (const Path& p : handles_->paths) {
    paths.push_back(to_json(p));
    links.insert(p.links.begin(), p.links.end());
    for (const std::string& n : p.nodes) {
      if (network_->topology().node(n).kind == netsim::NodeKind::switch_node) switches.insert(n);
    }
  }
  for (const std::string& s : switches) {
    children_.push_back(ctx.spawn({agents::SwitchAgent::kTypeName, {{"switch", s}}, {}, {}, {}}));
  }
  for (const std::string& l : links) {
    children_.push_back(ctx.spawn({agents::LinkAgent::kTypeName, {{"link", l}}, {}, {}, {}}));
  }
  ctx.log("allocate", Outcome::ok, {{"flow_tag", tag_}, {"paths", handles_->paths.size()}});
  return {{"kind", "activated"}, {"ok", true}, {"flow_tag", tag_}, {"paths", paths}};
}

void KMirrorAgent::on_message(AgentContext& ctx, const Message& msg) {
  const std::string kind = msg.payload.at("kind").get<std::string>();
  if (kind == "activate") {
    ctx.send(msg.from, activate(ctx));
  } else if (kind == "status") {
    json status{{"kind", "status"}, {"active", active()}, {"flow_tag", tag_}};
    if (handles_) {
      json paths = json::array();
      for (const Path& p : handles_->paths) paths.push_back(to_json(p));
      status["paths"] = paths;
    }
    ctx.send(msg.from, status);
  }
  // link_stats / rules / rule_written are replies from composed agents; the
  // allocator reads the snapshot directly, so they need no handling here.
}

std::vector<UsageLine> KMirrorAgent::usage(SimTime now) const {
  if (!handles_) return {};
  return km_cost(*handles_, rates_, now);
}

void KMirrorAgent::post(std::uint64_t seq, std::string payload, SimDuration deadline,
                        netsim::DeliveryCallback on_copy) {
  if (!active()) throw Error(Errc::connection_closed, "KMirror " + tag_ + " is not active");
  mirror_send(*network_, *handles_, seq, std::move(payload), deadline, std::move(on_copy));
}

void register_kmirror_agent(agents::AgentCatalog& catalog) {
  catalog.add(KMirrorAgent::schema(), [](const agents::AgentSpec& spec) -> std::unique_ptr<agents::Agent> {
    return std::make_unique<KMirrorAgent>(KMParams::from_params(spec.params));
  });
}

}  // namespace socketstore::kmflash
