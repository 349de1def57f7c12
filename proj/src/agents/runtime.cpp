#include "socketstore/agents/runtime.hpp"

#include <algorithm>

#include "socketstore/error.hpp"
#include "socketstore/netsim/simulator.hpp"

namespace socketstore::agents {

using nlohmann::json;

std::string to_string(AgentId id) { return "agent:" + std::to_string(id.value); }

const char* to_string(LifecycleState state) noexcept {
  switch (state) {
    case LifecycleState::created: return "created";
    case LifecycleState::running: return "running";
    case LifecycleState::destroyed: return "destroyed";
  }
  return "destroyed";
}

// -- catalog -----------------------------------------------------------------

void AgentCatalog::add(AgentTypeSchema schema, AgentFactory factory) {
  const std::string name = schema.type_name;
  library_.add(std::move(schema));
  factories_.emplace(name, std::move(factory));
}

std::unique_ptr<Agent> AgentCatalog::create(const AgentSpec& spec) const {
  auto it = factories_.find(spec.type_name);
  if (it == factories_.end()) {
    throw Error(Errc::unknown_type, "unknown type: " + spec.type_name);
  }
  return it->second(spec);
}

// -- context -----------------------------------------------------------------

SimTime AgentContext::now() const { return runtime_.now(); }

netsim::Simulator& AgentContext::network() const {
  auto& e = runtime_.env(runtime_.agents_.at(self_).env);
  if (e.network == nullptr) {
    throw Error(Errc::binding_failure, "resource binding failure: environment has no network");
  }
  return *e.network;
}

const RateCard& AgentContext::rate_card() const { return runtime_.env(runtime_.agents_.at(self_).env).rate_card; }

void AgentContext::bind_switch(const std::string& node) {
  const netsim::Node* n = network().topology().find_node(node);
  if (n == nullptr) {
    throw Error(Errc::binding_failure, "resource binding failure: unknown switch " + node);
  }
  if (n->kind != netsim::NodeKind::switch_node) {
    throw Error(Errc::binding_failure, "resource binding failure: " + node + " is not a switch");
  }
  runtime_.bind(self_, "switch:" + node);
}

void AgentContext::bind_link(const std::string& link) {
  if (network().topology().find_link(link) == nullptr) {
    throw Error(Errc::binding_failure, "resource binding failure: unknown link " + link);
  }
  runtime_.bind(self_, "link:" + link);
}

bool AgentContext::send(AgentId to, json payload) {
  return runtime_.send(Message{self_, to, std::move(payload), runtime_.now()});
}

AgentId AgentContext::spawn(const AgentSpec& spec) {
  return runtime_.spawn(runtime_.agents_.at(self_).env, spec);
}

void AgentContext::log(const std::string& action, Outcome outcome, json detail) {
  runtime_.log(to_string(self_), action, outcome, std::move(detail));
}

// -- runtime -----------------------------------------------------------------

Runtime::Runtime(const AgentCatalog& catalog, Clock clock, LogSink sink)
    : catalog_(catalog), clock_(std::move(clock)), sink_(std::move(sink)) {}

Runtime::~Runtime() = default;

EnvironmentId Runtime::create_environment(std::string concern, netsim::Simulator* network, RateCard rate_card) {
  const EnvironmentId id{next_env_++};
  environments_.emplace(id, Environment{std::move(concern), network, rate_card, {}});
  return id;
}

const std::string& Runtime::concern(EnvironmentId id) const { return env(id).concern; }

Runtime::Environment& Runtime::env(EnvironmentId id) {
  auto it = environments_.find(id);
  if (it == environments_.end()) {
    throw Error(Errc::unknown_environment, "unknown environment: " + std::to_string(id.value));
  }
  return it->second;
}

const Runtime::Environment& Runtime::env(EnvironmentId id) const {
  return const_cast<Runtime*>(this)->env(id);
}

const Runtime::Record* Runtime::record(AgentId id) const {
  auto it = agents_.find(id);
  return it == agents_.end() ? nullptr : &it->second;
}

Runtime::Record& Runtime::running(AgentId id) {
  auto it = agents_.find(id);
  if (it == agents_.end() || it->second.state != LifecycleState::running) {
    throw Error(Errc::unknown_agent, "unknown agent: " + to_string(id));
  }
  return it->second;
}

void Runtime::bind(AgentId id, const std::string& resource) {
  Record& r = agents_.at(id);
  if (r.kind == AgentKind::adapter) {
    throw Error(Errc::binding_failure, "resource binding failure: adapters cannot bind " + resource);
  }
  if (std::find(r.resources.begin(), r.resources.end(), resource) == r.resources.end()) {
    r.resources.push_back(resource);
  }
}

void Runtime::log(const std::string& actor, const std::string& action, Outcome outcome, json detail) {
  constexpr std::string_view prefix = "agent:";
  if (actor.starts_with(prefix)) {
    const AgentId id{std::stoull(actor.substr(prefix.size()))};
    if (auto it = agents_.find(id); it != agents_.end()) ++it->second.log_count;
  }
  if (sink_) sink_(ActionLogEntry{now(), actor, action, outcome, std::move(detail)});
}

AgentId Runtime::spawn(EnvironmentId env_id, const AgentSpec& spec) {
  Environment& e = env(env_id);
  const AgentTypeSchema& schema = library().at(spec.type_name);
  validate_params(schema, spec.params);
  if (schema.kind == AgentKind::resource && !spec.wired.empty()) {
    throw Error(Errc::schema_violation, spec.type_name + ": resource agents do not compose other agents");
  }
  for (AgentId w : spec.wired) {
    const Record* r = record(w);
    if (r == nullptr || r->state != LifecycleState::running) {
      throw Error(Errc::binding_failure, "resource binding failure: wired agent " + to_string(w) + " is not running");
    }
  }

  const AgentId id{next_agent_++};
  Record rec;
  rec.env = env_id;
  rec.spec = spec;
  rec.kind = schema.kind;
  rec.impl = catalog_.create(spec);
  Agent* impl = rec.impl.get();
  agents_.emplace(id, std::move(rec));

  AgentContext ctx(*this, id);
  try {
    impl->start(ctx);
  } catch (const std::exception& ex) {
    agents_.erase(id);
    log("store", "spawn", Outcome::error, {{"type", spec.type_name}, {"reason", ex.what()}});
    throw;
  }
  Record& r = agents_.at(id);
  r.state = LifecycleState::running;
  e.registry.insert(id);
  log(to_string(id), "spawn", Outcome::ok,
      {{"type", spec.type_name}, {"environment", e.concern}, {"resources", r.resources}});
  return id;
}

std::size_t Runtime::destroy(AgentId id) {
  auto it = agents_.find(id);
  if (it == agents_.end() || it->second.state != LifecycleState::running) return 0;
  Record& r = it->second;
  AgentContext ctx(*this, id);
  try {
    r.impl->stop(ctx);
  } catch (const std::exception& ex) {
    log(to_string(id), "stop", Outcome::error, {{"reason", ex.what()}});
  }
  for (auto m = queue_.begin(); m != queue_.end();) {
    if (m->to == id) {
      log(to_string(id), "message_dropped", Outcome::error,
          {{"from", to_string(m->from)}, {"kind", m->payload.value("kind", "")}});
      m = queue_.erase(m);
    } else {
      ++m;
    }
  }
  const json released = r.resources;
  r.resources.clear();
  env(r.env).registry.erase(id);
  r.state = LifecycleState::destroyed;
  log(to_string(id), "destroy", Outcome::ok, {{"type", r.spec.type_name}, {"released", released}});
  return r.log_count;
}

void Runtime::move(AgentId id, EnvironmentId to) {
  Record& r = running(id);
  Environment& target = env(to);
  Environment& source = env(r.env);
  if (!r.resources.empty() && target.network != source.network) {
    throw Error(Errc::binding_failure, "resource binding failure: bound resources do not exist in target environment");
  }
  source.registry.erase(id);
  target.registry.insert(id);
  r.env = to;
  log(to_string(id), "move", Outcome::ok, {{"to", target.concern}});
}

bool Runtime::send(Message message) {
  message.ts = now();
  const std::string kind =
      message.payload.is_object() && message.payload.contains("kind") && message.payload["kind"].is_string()
          ? message.payload["kind"].get<std::string>()
          : std::string{};
  auto reject = [&](const std::string& why) {
    log(message.from == kStoreAddress ? "store" : to_string(message.from), "send", Outcome::error,
        {{"to", to_string(message.to)}, {"kind", kind}, {"reason", why}});
    return false;
  };
  if (message.from != kStoreAddress) {
    const Record* src = record(message.from);
    if (src == nullptr || src->state != LifecycleState::running) return reject("sender not running");
  }
  if (kind.empty()) return reject("payload without kind");
  if (message.to != kStoreAddress) {
    const Record* dst = record(message.to);
    if (dst == nullptr || dst->state != LifecycleState::running) return reject("destination not running");
    if (!library().at(dst->spec.type_name).accepts(kind)) return reject("kind not accepted by destination");
  }
  queue_.push_back(std::move(message));
  return true;
}

std::size_t Runtime::dispatch() {
  std::size_t delivered = 0;
  while (!queue_.empty()) {
    Message m = std::move(queue_.front());
    queue_.pop_front();
    if (m.to == kStoreAddress) {
      store_inbox_.push_back(std::move(m));
      ++delivered;
      continue;
    }
    auto it = agents_.find(m.to);
    if (it == agents_.end() || it->second.state != LifecycleState::running) continue;
    AgentContext ctx(*this, m.to);
    ++delivered;
    try {
      it->second.impl->on_message(ctx, m);
    } catch (const std::exception& ex) {
      log(to_string(m.to), "on_message", Outcome::error, {{"kind", m.payload.value("kind", "")}, {"reason", ex.what()}});
    }
  }
  return delivered;
}

std::vector<Message> Runtime::drain_store_inbox() { return std::exchange(store_inbox_, {}); }

std::vector<ViewEntry> Runtime::central_view(EnvironmentId env_id) const {
  std::vector<ViewEntry> out;
  for (AgentId id : env(env_id).registry) {
    const Record& r = agents_.at(id);
    out.push_back(ViewEntry{id, r.kind, r.spec.type_name, r.state, r.resources, composed(id)});
  }
  return out;
}

LifecycleState Runtime::state(AgentId id) const {
  const Record* r = record(id);
  if (r == nullptr) throw Error(Errc::unknown_agent, "unknown agent: " + to_string(id));
  return r->state;
}

EnvironmentId Runtime::environment_of(AgentId id) const {
  const Record* r = record(id);
  if (r == nullptr) throw Error(Errc::unknown_agent, "unknown agent: " + to_string(id));
  return r->env;
}

const AgentSpec& Runtime::spec(AgentId id) const {
  const Record* r = record(id);
  if (r == nullptr) throw Error(Errc::unknown_agent, "unknown agent: " + to_string(id));
  return r->spec;
}

Agent* Runtime::find(AgentId id) {
  auto it = agents_.find(id);
  return it == agents_.end() || it->second.state != LifecycleState::running ? nullptr : it->second.impl.get();
}

const Agent* Runtime::find(AgentId id) const { return const_cast<Runtime*>(this)->find(id); }

std::vector<AgentId> Runtime::composed(AgentId id) const {
  const Record* r = record(id);
  if (r == nullptr) return {};
  std::vector<AgentId> out = r->spec.wired;
  for (AgentId c : r->impl->composed()) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

std::vector<AgentId> Runtime::holders(EnvironmentId env_id, const std::string& resource) const {
  std::vector<AgentId> out;
  for (AgentId id : env(env_id).registry) {
    const auto& res = agents_.at(id).resources;
    if (std::find(res.begin(), res.end(), resource) != res.end()) out.push_back(id);
  }
  return out;
}

}  // namespace socketstore::agents
