#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socketstore/agents/runtime.hpp"
#include "socketstore/netsim/simulator.hpp"

namespace socketstore::agents {

/// Represents one OpenFlow switch: its routing table can be inspected and
/// edited. Rules written through the agent are billed per rule-second and
/// removed when the agent stops.
class SwitchAgent final : public Agent {
 public:
  static constexpr const char* kTypeName = "SwitchAgent";
  static AgentTypeSchema schema();

  explicit SwitchAgent(std::string switch_id) : switch_id_(std::move(switch_id)) {}

  void start(AgentContext& ctx) override;
  void stop(AgentContext& ctx) override;
  void on_message(AgentContext& ctx, const Message& msg) override;
  std::vector<UsageLine> usage(SimTime now) const override;

  const std::string& switch_id() const { return switch_id_; }
  std::vector<netsim::FlowRule> read_rules() const;
  /// Replaces any rule with the same (switch, flow, path_index).
  /// Throws Error(non_incident_link) if the out link does not touch the switch.
  void write_rule(const netsim::FlowRule& rule);

 private:
  struct Written {
    netsim::FlowId flow;
    int path_index = 0;
    SimTime since{0};
    std::optional<SimTime> until;
  };

  netsim::Simulator* network_ = nullptr;
  std::string switch_id_;
  double rule_price_ = 0.0;
  std::vector<Written> written_;
};

/// Read-only view of one link: static end-points and capacity plus the
/// monitored latency, rate and load.
class LinkAgent final : public Agent {
 public:
  static constexpr const char* kTypeName = "LinkAgent";
  static AgentTypeSchema schema();

  explicit LinkAgent(std::string link_id) : link_id_(std::move(link_id)) {}

  void start(AgentContext& ctx) override;
  void on_message(AgentContext& ctx, const Message& msg) override;

  const std::string& link_id() const { return link_id_; }
  netsim::LinkStats read() const;

 private:
  const netsim::Simulator* network_ = nullptr;
  std::string link_id_;
};

/// Registers SwitchAgent and LinkAgent.
void register_resource_agents(AgentCatalog& catalog);

nlohmann::json to_json(const netsim::FlowRule& rule);
netsim::FlowRule flow_rule_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const netsim::LinkStats& stats);

}  // namespace socketstore::agents
