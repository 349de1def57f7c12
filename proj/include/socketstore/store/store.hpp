#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "socketstore/agents/runtime.hpp"
#include "socketstore/cost.hpp"
#include "socketstore/endpoint.hpp"
#include "socketstore/moduledef/manifest.hpp"
#include "socketstore/netsim/simulator.hpp"
#include "socketstore/store/action_log.hpp"
#include "socketstore/store/instance.hpp"
#include "socketstore/store/licenses.hpp"
#include "socketstore/store/repository.hpp"
#include "socketstore/store/testbed.hpp"

namespace socketstore::store {

struct StoreConfig {
  std::optional<std::filesystem::path> state_file;  // persisted after every mutation when set
  std::string weight_function = "identity";
  RateCard rates;
  SimDuration alias_ttl = from_seconds(3.0);  // three missed 1 s refreshes
};

struct CostReport {
  std::string instance_id;
  std::vector<UsageLine> usage;
  double raw_total = 0.0;
  double weighted_total = 0.0;
  SimTime at{0};
};

struct InstantiateResult {
  bool ok = false;
  std::string instance_id;
  nlohmann::json allocation = nlohmann::json::array();
  std::string reason;
  int max_feasible_k = 0;
};

struct SearchResult {
  std::string module_id;
  std::string name;
  std::string description;
  int version = 0;
  double price = 0.0;
  std::string metric_id;
  std::optional<double> aggregate;  // mean of the latest testbed samples

  bool operator==(const SearchResult&) const = default;
};

/// Instance bookkeeping kept after teardown so cost stays queryable.
struct InstanceRecord {
  std::string instance_id;
  std::string module_id;
  std::string app_id;
  std::map<std::string, std::string> inputs;
  SimTime started_at{0};
  std::optional<SimTime> ended_at;
  nlohmann::json allocation = nlohmann::json::array();
  std::vector<UsageLine> final_usage;  // frozen at teardown
  SpawnedModule agents;                // empty once torn down
};

struct AliasBinding {
  std::string device_id;
  std::vector<Endpoint> connectivity;
  SimTime refreshed_at{0};
};

/// The marketplace service. All public operations are serialized by one
/// mutex; state is written back to the state file after each mutation.
class Store {
 public:
  /// `production` is the network instances are deployed into.
  explicit Store(netsim::Simulator& production, StoreConfig config = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Loads the state file when it exists.
  static std::unique_ptr<Store> open(netsim::Simulator& production, StoreConfig config);

  SimTime now() const;
  const agents::AgentTypeLibrary& library() const;
  const agents::AgentCatalog& catalog() const { return catalog_; }
  agents::Runtime& runtime() { return *runtime_; }
  agents::EnvironmentId production_environment() const { return production_env_; }

  // -- specialists, metrics and modules ------------------------------------
  void register_specialist(const std::string& id);
  void register_metric(const moduledef::MetricDef& metric);
  const moduledef::MetricRegistry& metrics() const { return metrics_; }
  /// Registers the package's metrics, then submits its manifest.
  std::string submit_package(const std::filesystem::path& dir);
  /// Throws Error(validation_failed) listing every violation.
  std::string submit(moduledef::ModuleManifest manifest);
  moduledef::ModuleState start_review(const std::string& module_id, const std::string& reviewer);
  /// Throws illegal_transition or self_review.
  moduledef::ModuleState review(const std::string& module_id, ReviewDecision decision, const std::string& reviewer);
  moduledef::ModuleState revise(moduledef::ModuleManifest revised);
  moduledef::ModuleState retire(const std::string& module_id);
  moduledef::ModuleManifest module(const std::string& module_id) const;
  std::vector<moduledef::ModuleManifest> modules() const;

  // -- evaluation and discovery -------------------------------------------
  ScenarioRegistry& scenarios() { return scenarios_; }
  std::vector<MetricSample> evaluate(const std::string& module_id, const std::string& scenario);
  std::vector<MetricSample> samples(const std::string& module_id) const;
  std::vector<SearchResult> search(const std::string& query) const;

  // -- licensing ------------------------------------------------------------
  License purchase(const std::string& app_id, const std::string& module_id);
  bool revoke(const std::string& token);
  /// Logs the decision either way.
  bool authorize(const std::string& token, const std::string& module_id);

  // -- instances --------------------------------------------------------------
  /// Authorizes, executes the NSD in the production environment and activates
  /// adapters. Throws access_denied, unknown_module, not_published,
  /// missing_input or spawn_failure. An adapter that cannot activate yields
  /// ok=false and the instance is torn down.
  InstantiateResult instantiate(const std::string& token, const std::string& module_id,
                                const std::map<std::string, std::string>& inputs);
  CostReport cost(const std::string& instance_id) const;
  /// Idempotent.
  void teardown(const std::string& instance_id);
  std::vector<InstanceRecord> instances() const;

  // -- aliases ------------------------------------------------------------------
  /// Throws Error(alias_conflict) when a different device holds a live binding.
  void bind_alias(const std::string& alias, const std::string& device_id, std::vector<Endpoint> connectivity);
  std::optional<std::vector<Endpoint>> resolve_alias(const std::string& alias) const;

  // -- audit ---------------------------------------------------------------------
  void log(const std::string& actor, const std::string& action, Outcome outcome,
           nlohmann::json detail = nlohmann::json::object());
  std::vector<ActionLogEntry> read_log(const LogFilter& filter = {}) const;

  void save() const;
  nlohmann::json state_json() const;

 private:
  void load_state(const nlohmann::json& doc);
  void persist() const;
  bool authorize_locked(const std::string& token, const std::string& module_id);
  void teardown_locked(InstanceRecord& inst);
  CostReport report(const std::string& instance_id, std::vector<UsageLine> usage) const;

  mutable std::recursive_mutex mutex_;
  netsim::Simulator& production_;
  StoreConfig config_;
  WeightFunction weight_;
  agents::AgentCatalog catalog_;
  std::unique_ptr<agents::Runtime> runtime_;
  agents::EnvironmentId production_env_;
  SimTime epoch_{0};  // added to the production clock so ts survives restarts

  Repository repository_;
  moduledef::MetricRegistry metrics_;
  LicenseServer licenses_;
  ActionLog log_;
  std::vector<MetricSample> samples_;
  ScenarioRegistry scenarios_;
  std::map<std::string, InstanceRecord> instances_;
  std::uint64_t next_instance_ = 1;
  std::map<std::string, AliasBinding> aliases_;
};

/// The catalog every store ships: SwitchAgent, LinkAgent and KMirror.
void register_builtin_agents(agents::AgentCatalog& catalog);

nlohmann::json to_json(const CostReport& report);
nlohmann::json to_json(const UsageLine& line);

}  // namespace socketstore::store
