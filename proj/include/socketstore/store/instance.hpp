#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "socketstore/agents/runtime.hpp"
#include "socketstore/moduledef/nsd.hpp"

namespace socketstore::store {

/// Agents created for one NSD execution, in spawn order.
struct SpawnedModule {
  std::vector<std::pair<std::string, agents::AgentId>> agents;  // (directive id, agent)
};

/// Spawns every directive in instantiation order, wiring each agent to the
/// agents of its wire targets. On failure the agents spawned so far are
/// destroyed and Error(spawn_failure) is thrown.
SpawnedModule spawn_module(agents::Runtime& runtime, agents::EnvironmentId env, const moduledef::Nsd& nsd,
                           const std::map<std::string, std::string>& inputs);

struct Activation {
  bool ok = true;
  nlohmann::json allocation = nlohmann::json::array();  // one reply per activated adapter
  std::string reason;
  int max_feasible_k = 0;
};

/// Sends "activate" to every adapter that accepts it and collects replies.
Activation activate_adapters(agents::Runtime& runtime, const SpawnedModule& module);

/// Spawned agents plus everything they compose, transitively.
std::vector<agents::AgentId> agent_closure(const agents::Runtime& runtime, const SpawnedModule& module);

/// Destroys adapters (latest first) before any resource agent, including
/// agents the adapters composed after spawn.
void teardown_module(agents::Runtime& runtime, const SpawnedModule& module);

std::vector<UsageLine> module_usage(const agents::Runtime& runtime, const SpawnedModule& module, SimTime now);

}  // namespace socketstore::store
