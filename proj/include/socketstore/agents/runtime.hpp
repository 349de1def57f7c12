#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "socketstore/action.hpp"
#include "socketstore/agents/type_library.hpp"
#include "socketstore/cost.hpp"
#include "socketstore/sim_time.hpp"

namespace socketstore::netsim {
class Simulator;
}

namespace socketstore::agents {

struct AgentId {
  std::uint64_t value = 0;
  auto operator<=>(const AgentId&) const = default;
};

/// Address of the store itself on the agent bus.
inline constexpr AgentId kStoreAddress{0};

std::string to_string(AgentId id);

struct EnvironmentId {
  std::uint64_t value = 0;
  auto operator<=>(const EnvironmentId&) const = default;
};

enum class LifecycleState { created, running, destroyed };
const char* to_string(LifecycleState state) noexcept;

struct AgentSpec {
  std::string type_name;
  ParamMap params;
  std::string objective;
  std::string metric_id;
  std::vector<AgentId> wired;  // agents this one composes / may message
};

struct Message {
  AgentId from;
  AgentId to;
  nlohmann::json payload;  // object with a string "kind"
  SimTime ts{0};
};

struct ViewEntry {
  AgentId id;
  AgentKind kind = AgentKind::resource;
  std::string type_name;
  LifecycleState state = LifecycleState::created;
  std::vector<std::string> resources;
  std::vector<AgentId> composed;
};

class Runtime;
class AgentContext;

/// Behaviour of one agent type. Instances are driven only through the hooks
/// below; agents share no mutable state and talk by message passing.
class Agent {
 public:
  virtual ~Agent() = default;

  /// Binds represented resources. Throwing aborts the spawn.
  virtual void start(AgentContext& /*ctx*/) {}
  /// Releases anything the agent holds in the network.
  virtual void stop(AgentContext& /*ctx*/) {}
  virtual void on_message(AgentContext& /*ctx*/, const Message& /*msg*/) {}
  /// Resource expenditure accrued up to `now`.
  virtual std::vector<UsageLine> usage(SimTime /*now*/) const { return {}; }
  /// Agents composed after spawn (in addition to the wired ones).
  virtual std::vector<AgentId> composed() const { return {}; }
};

using AgentFactory = std::function<std::unique_ptr<Agent>(const AgentSpec&)>;

/// Agent types paired with their implementations.
class AgentCatalog {
 public:
  void add(AgentTypeSchema schema, AgentFactory factory);
  const AgentTypeLibrary& library() const { return library_; }
  std::unique_ptr<Agent> create(const AgentSpec& spec) const;

 private:
  AgentTypeLibrary library_;
  std::map<std::string, AgentFactory, std::less<>> factories_;
};

/// Handle given to an agent while one of its hooks runs.
class AgentContext {
 public:
  AgentContext(Runtime& runtime, AgentId self) : runtime_(runtime), self_(self) {}

  AgentId self() const { return self_; }
  SimTime now() const;
  netsim::Simulator& network() const;
  const RateCard& rate_card() const;

  /// Binds a switch or link of the environment's network to this agent.
  /// Throws Error(binding_failure) when missing, of the wrong kind, or when
  /// called by an adapter.
  void bind_switch(const std::string& node);
  void bind_link(const std::string& link);

  bool send(AgentId to, nlohmann::json payload);
  /// Spawns a further agent in this agent's environment.
  AgentId spawn(const AgentSpec& spec);
  void log(const std::string& action, Outcome outcome, nlohmann::json detail = nlohmann::json::object());

 private:
  Runtime& runtime_;
  AgentId self_;
};

/// In-process multi-agent runtime: environments, lifecycle, a FIFO message
/// bus and the central view. Not thread-safe; callers serialize access.
class Runtime {
 public:
  using Clock = std::function<SimTime()>;
  using LogSink = std::function<void(const ActionLogEntry&)>;

  explicit Runtime(const AgentCatalog& catalog, Clock clock = {}, LogSink sink = {});
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;
  ~Runtime();

  const AgentTypeLibrary& library() const { return catalog_.library(); }

  EnvironmentId create_environment(std::string concern, netsim::Simulator* network,
                                   RateCard rate_card = {});
  const std::string& concern(EnvironmentId env) const;

  AgentId spawn(EnvironmentId env, const AgentSpec& spec);
  /// Returns the number of log entries attributed to the agent over its life,
  /// or 0 when the agent is unknown or already destroyed.
  std::size_t destroy(AgentId id);
  /// Atomic re-registration in another environment; the id is preserved.
  void move(AgentId id, EnvironmentId to);

  /// Accepts the message if the destination is running (or the store) and
  /// its type declares the payload kind.
  bool send(Message message);
  /// Delivers queued messages, including those sent while delivering.
  std::size_t dispatch();
  std::vector<Message> drain_store_inbox();

  std::vector<ViewEntry> central_view(EnvironmentId env) const;
  LifecycleState state(AgentId id) const;
  EnvironmentId environment_of(AgentId id) const;
  const AgentSpec& spec(AgentId id) const;
  Agent* find(AgentId id);
  const Agent* find(AgentId id) const;
  std::vector<AgentId> composed(AgentId id) const;
  /// Agents currently holding the named resource ("switch:R3", "link:R4-B").
  std::vector<AgentId> holders(EnvironmentId env, const std::string& resource) const;

  SimTime now() const { return clock_ ? clock_() : SimTime{0}; }
  void log(const std::string& actor, const std::string& action, Outcome outcome,
           nlohmann::json detail = nlohmann::json::object());

 private:
  friend class AgentContext;

  struct Environment {
    std::string concern;
    netsim::Simulator* network = nullptr;
    RateCard rate_card;
    std::set<AgentId> registry;
  };
  struct Record {
    EnvironmentId env;
    AgentSpec spec;
    AgentKind kind = AgentKind::resource;
    LifecycleState state = LifecycleState::created;
    std::unique_ptr<Agent> impl;
    std::vector<std::string> resources;
    std::size_t log_count = 0;
  };

  Environment& env(EnvironmentId id);
  const Environment& env(EnvironmentId id) const;
  Record& running(AgentId id);
  const Record* record(AgentId id) const;
  void bind(AgentId id, const std::string& resource);

  const AgentCatalog& catalog_;
  Clock clock_;
  LogSink sink_;
  std::map<EnvironmentId, Environment> environments_;
  std::map<AgentId, Record> agents_;
  std::deque<Message> queue_;
  std::vector<Message> store_inbox_;
  std::uint64_t next_agent_ = 1;
  std::uint64_t next_env_ = 1;
};

}  // namespace socketstore::agents
