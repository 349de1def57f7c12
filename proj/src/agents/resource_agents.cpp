#include "socketstore/agents/resource_agents.hpp"

#include "socketstore/error.hpp"

namespace socketstore::agents {

using nlohmann::json;

json to_json(const netsim::FlowRule& rule) {
  return json{{"switch", rule.switch_id},
              {"flow", {{"src", rule.flow.src}, {"dst", rule.flow.dst}, {"tag", rule.flow.tag}}},
              {"path_index", rule.path_index},
              {"out_link", rule.out_link}};
}

netsim::FlowRule flow_rule_from_json(const json& doc) {
  try {
    const json& f = doc.at("flow");
    return netsim::FlowRule{doc.at("switch").get<std::string>(),
                            {f.at("src").get<std::string>(), f.at("dst").get<std::string>(), f.at("tag").get<std::string>()},
                            doc.at("path_index").get<int>(),
                            doc.at("out_link").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed flow rule: ") + e.what());
  }
}

json to_json(const netsim::LinkStats& s) {
  return json{{"link", s.link},
              {"endpoints", {s.a, s.b}},
              {"latency_ms", to_ms(s.latency_now)},
              {"rate_mbps", s.rate_mbps},
              {"load_mbps", s.load_mbps},
              {"capacity_mbps", s.capacity_mbps}};
}

// -- SwitchAgent ---------------------------------------------------------------

AgentTypeSchema SwitchAgent::schema() {
  return AgentTypeSchema{kTypeName,
                         AgentKind::resource,
                         {{"switch", ParamType::switch_node, true}},
                         {"read_rules", "write_rule"},
                         "OpenFlow switch with an inspectable and editable routing table."};
}

void SwitchAgent::start(AgentContext& ctx) {
  ctx.bind_switch(switch_id_);
  network_ = &ctx.network();
  rule_price_ = ctx.rate_card().switch_rule_second;
}

void SwitchAgent::stop(AgentContext& ctx) {
  for (Written& w : written_) {
    if (w.until) continue;
    network_->remove_rule(switch_id_, w.flow, w.path_index);
    w.until = ctx.now();
  }
}

std::vector<netsim::FlowRule> SwitchAgent::read_rules() const { return network_->rules_at(switch_id_); }

void SwitchAgent::write_rule(const netsim::FlowRule& rule) {
  if (rule.switch_id != switch_id_) {
    throw Error(Errc::invalid_argument, "rule targets " + rule.switch_id + ", agent represents " + switch_id_);
  }
  network_->install_rule(rule);
  const SimTime now = network_->now();
  for (Written& w : written_) {
    if (!w.until && w.flow == rule.flow && w.path_index == rule.path_index) return;  // replaced in place
  }
  written_.push_back(Written{rule.flow, rule.path_index, now, std::nullopt});
}

void SwitchAgent::on_message(AgentContext& ctx, const Message& msg) {
  const std::string kind = msg.payload.at("kind").get<std::string>();
  if (kind == "read_rules") {
    json rules = json::array();
    for (const auto& r : read_rules()) rules.push_back(to_json(r));
    ctx.send(msg.from, {{"kind", "rules"}, {"switch", switch_id_}, {"rules", rules}});
  } else if (kind == "write_rule") {
    try {
      write_rule(flow_rule_from_json(msg.payload.at("rule")));
      ctx.log("write_rule", Outcome::ok, msg.payload.at("rule"));
      ctx.send(msg.from, {{"kind", "rule_written"}, {"ok", true}});
    } catch (const Error& e) {
      ctx.log("write_rule", Outcome::error, {{"reason", e.what()}});
      ctx.send(msg.from, {{"kind", "rule_written"}, {"ok", false}, {"reason", e.what()}});
    }
  }
}

std::vector<UsageLine> SwitchAgent::usage(SimTime now) const {
  if (written_.empty()) return {};
  SimDuration total{0};
  for (const Written& w : written_) total += w.until.value_or(now) - w.since;
  return {UsageLine{"switch:" + switch_id_, to_seconds(total), "rule*s", rule_price_}};
}

// -- LinkAgent -----------------------------------------------------------------

AgentTypeSchema LinkAgent::schema() {
  return AgentTypeSchema{kTypeName,
                         AgentKind::resource,
                         {{"link", ParamType::link, true}},
                         {"read"},
                         "Read-only link monitor: end-points, capacity, latency, rate and load."};
}

void LinkAgent::start(AgentContext& ctx) {
  ctx.bind_link(link_id_);
  network_ = &ctx.network();
}

netsim::LinkStats LinkAgent::read() const { return network_->link_stats(link_id_); }

void LinkAgent::on_message(AgentContext& ctx, const Message& msg) {
  if (msg.payload.at("kind") == "read") {
    json reply = to_json(read());
    reply["kind"] = "link_stats";
    ctx.send(msg.from, std::move(reply));
  }
}

void register_resource_agents(AgentCatalog& catalog) {
  catalog.add(SwitchAgent::schema(), [](const AgentSpec& spec) { return std::make_unique<SwitchAgent>(spec.params.at("switch")); });
  catalog.add(LinkAgent::schema(), [](const AgentSpec& spec) { return std::make_unique<LinkAgent>(spec.params.at("link")); });
}

}  // namespace socketstore::agents
