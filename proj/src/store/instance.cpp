#include "socketstore/store/instance.hpp"

#include <algorithm>
#include <set>

#include "socketstore/error.hpp"

namespace socketstore::store {

using agents::AgentId;
using nlohmann::json;

SpawnedModule spawn_module(agents::Runtime& runtime, agents::EnvironmentId env, const moduledef::Nsd& nsd,
                           const std::map<std::string, std::string>& inputs) {
  moduledef::require_inputs(nsd, inputs);
  SpawnedModule out;
  std::map<std::string, AgentId> by_directive;
  try {
    for (std::size_t i : moduledef::instantiation_order(nsd)) {
      const moduledef::Directive& d = nsd.directives[i];
      agents::AgentSpec spec{d.type_name, moduledef::bind_params(d, inputs), {}, {}, {}};
      for (const moduledef::Wire& w : nsd.wires) {
        if (w.from == d.id) spec.wired.push_back(by_directive.at(w.to));
      }
      const AgentId id = runtime.spawn(env, spec);
      by_directive[d.id] = id;
      out.agents.emplace_back(d.id, id);
    }
  } catch (const Error& e) {
    teardown_module(runtime, out);
    if (e.code() == Errc::missing_input) throw;
    throw Error(Errc::spawn_failure, std::string("spawn failure: ") + e.what());
  }
  return out;
}

Activation activate_adapters(agents::Runtime& runtime, const SpawnedModule& module) {
  Activation result;
  std::vector<AgentId> pending;
  for (const auto& [directive, id] : module.agents) {
    const auto& schema = runtime.library().at(runtime.spec(id).type_name);
    if (schema.kind != agents::AgentKind::adapter || !schema.accepts("activate")) continue;
    if (runtime.send({agents::kStoreAddress, id, {{"kind", "activate"}}, runtime.now()})) pending.push_back(id);
  }
  runtime.dispatch();
  for (const agents::Message& m : runtime.drain_store_inbox()) {
    if (std::find(pending.begin(), pending.end(), m.from) == pending.end()) continue;
    const std::string kind = m.payload.value("kind", "");
    if (kind == "activation_failed" && result.ok) {
      result.ok = false;
      result.reason = m.payload.value("reason", "activation failed");
      result.max_feasible_k = m.payload.value("max_feasible_k", 0);
    }
    json entry = m.payload;
    entry["agent"] = agents::to_string(m.from);
    result.allocation.push_back(entry);
  }
  return result;
}

std::vector<AgentId> agent_closure(const agents::Runtime& runtime, const SpawnedModule& module) {
  std::vector<AgentId> out;
  std::set<AgentId> seen;
  std::vector<AgentId> stack;
  for (const auto& [_, id] : module.agents) stack.push_back(id);
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    const AgentId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    out.push_back(id);
    for (AgentId c : runtime.composed(id)) stack.push_back(c);
  }
  return out;
}

void teardown_module(agents::Runtime& runtime, const SpawnedModule& module) {
  const std::vector<AgentId> all = agent_closure(runtime, module);
  std::vector<AgentId> adapters;
  std::vector<AgentId> resources;
  for (AgentId id : all) {
    const auto& schema = runtime.library().at(runtime.spec(id).type_name);
    (schema.kind == agents::AgentKind::adapter ? adapters : resources).push_back(id);
  }
  std::sort(adapters.rbegin(), adapters.rend());
  for (AgentId id : adapters) runtime.destroy(id);
  std::sort(resources.rbegin(), resources.rend());
  for (AgentId id : resources) runtime.destroy(id);
}

std::vector<UsageLine> module_usage(const agents::Runtime& runtime, const SpawnedModule& module, SimTime now) {
  std::vector<UsageLine> lines;
  for (AgentId id : agent_closure(runtime, module)) {
    const agents::Agent* a = runtime.find(id);
    if (a == nullptr) continue;
    for (UsageLine l : a->usage(now)) {
      l.resource = agents::to_string(id) + "/" + l.resource;
      lines.push_back(std::move(l));
    }
  }
  return lines;
}

}  // namespace socketstore::store
