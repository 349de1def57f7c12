#include "socketstore/store/store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

#include "socketstore/agents/resource_agents.hpp"
#include "socketstore/error.hpp"
#include "socketstore/kmflash/km_agent.hpp"

namespace socketstore::store {

using moduledef::ModuleManifest;
using moduledef::ModuleState;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

constexpr std::size_t kRankingWindow = 10;

UsageLine usage_from_json(const json& doc) {
  return UsageLine{doc.at("resource").get<std::string>(), doc.at("quantity").get<double>(),
                   doc.at("unit").get<std::string>(), doc.at("unit_price").get<double>()};
}

}  // namespace

void register_builtin_agents(agents::AgentCatalog& catalog) {
  agents::register_resource_agents(catalog);
  kmflash::register_kmirror_agent(catalog);
}

json to_json(const UsageLine& l) {
  return json{{"resource", l.resource},
              {"quantity", l.quantity},
              {"unit", l.unit},
              {"unit_price", l.unit_price},
              {"amount", l.amount()}};
}

json to_json(const CostReport& r) {
  json usage = json::array();
  for (const auto& l : r.usage) usage.push_back(to_json(l));
  return json{{"instance_id", r.instance_id},
              {"usage", usage},
              {"raw_total", r.raw_total},
              {"weighted_total", r.weighted_total},
              {"at_ms", to_ms(r.at)}};
}

// -- construction and persistence ------------------------------------------------

Store::Store(netsim::Simulator& production, StoreConfig config)
    : production_(production), config_(std::move(config)), weight_(make_weight_function(config_.weight_function)) {
  register_builtin_agents(catalog_);
  runtime_ = std::make_unique<agents::Runtime>(
      catalog_, [this] { return now(); }, [this](const ActionLogEntry& e) { log_.append(e); });
  production_env_ = runtime_->create_environment("production", &production_, config_.rates);
}

Store::~Store() = default;

std::unique_ptr<Store> Store::open(netsim::Simulator& production, StoreConfig config) {
  auto store = std::make_unique<Store>(production, config);
  if (config.state_file && std::filesystem::exists(*config.state_file)) {
    std::ifstream in(*config.state_file);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(Errc::malformed_document, "unreadable state file " + config.state_file->string() + ": " + e.what());
    }
    store->load_state(doc);
  }
  return store;
}

SimTime Store::now() const { return epoch_ + production_.now(); }

const agents::AgentTypeLibrary& Store::library() const { return catalog_.library(); }

json Store::state_json() const {
  std::lock_guard lock(mutex_);
  json metrics = json::array();
  for (const auto& [_, m] : metrics_) metrics.push_back(moduledef::to_json(m));
  json samples = json::array();
  for (const auto& s : samples_) samples.push_back(to_json(s));
  json log = json::array();
  for (const auto& e : log_.entries()) log.push_back(to_json(e));
  json instances = json::array();
  for (const auto& [id, inst] : instances_) {
    std::vector<UsageLine> usage = inst.ended_at ? inst.final_usage
                                                 : module_usage(*runtime_, inst.agents, production_.now());
    json lines = json::array();
    for (const auto& l : usage) lines.push_back(to_json(l));
    instances.push_back({{"instance_id", id},
                         {"module_id", inst.module_id},
                         {"app_id", inst.app_id},
                         {"inputs", inst.inputs},
                         {"started_at_ns", inst.started_at.count()},
                         {"ended_at_ns", inst.ended_at.value_or(now()).count()},
                         {"allocation", inst.allocation},
                         {"usage", lines}});
  }
  json aliases = json::object();
  for (const auto& [name, b] : aliases_) {
    json eps = json::array();
    for (const auto& e : b.connectivity) eps.push_back(to_string(e));
    aliases[name] = {{"device_id", b.device_id}, {"connectivity", eps}, {"refreshed_at_ns", b.refreshed_at.count()}};
  }
  return json{{"format", 1},
              {"aliases", aliases},
              {"repository", repository_.to_json()},
              {"metrics", metrics},
              {"licenses", licenses_.to_json()},
              {"samples", samples},
              {"instances", instances},
              {"next_instance", next_instance_},
              {"log", log}};
}

void Store::load_state(const json& doc) {
  std::lock_guard lock(mutex_);
  try {
    repository_ = Repository::from_json(doc.at("repository"));
    for (const auto& m : doc.at("metrics")) {
      auto def = moduledef::metric_from_json(m);
      metrics_[def.metric_id] = def;
    }
    licenses_ = LicenseServer::from_json(doc.at("licenses"));
    for (const auto& s : doc.at("samples")) samples_.push_back(metric_sample_from_json(s));
    for (const auto& e : doc.at("log")) log_.append(log_entry_from_json(e));
    for (const auto& i : doc.at("instances")) {
      // Instances do not outlive the process that ran them; they come back
      // torn down with their last recorded usage.
      InstanceRecord r;
      r.instance_id = i.at("instance_id").get<std::string>();
      r.module_id = i.at("module_id").get<std::string>();
      r.app_id = i.at("app_id").get<std::string>();
      r.inputs = i.at("inputs").get<std::map<std::string, std::string>>();
      r.started_at = SimTime{i.at("started_at_ns").get<std::int64_t>()};
      r.ended_at = SimTime{i.at("ended_at_ns").get<std::int64_t>()};
      r.allocation = i.at("allocation");
      for (const auto& l : i.at("usage")) r.final_usage.push_back(usage_from_json(l));
      instances_[r.instance_id] = std::move(r);
    }
    next_instance_ = doc.at("next_instance").get<std::uint64_t>();
    const json aliases = doc.value("aliases", json::object());
    for (const auto& [name, a] : aliases.items()) {
      AliasBinding b{a.at("device_id").get<std::string>(), {}, SimTime{a.at("refreshed_at_ns").get<std::int64_t>()}};
      for (const auto& e : a.at("connectivity")) b.connectivity.push_back(parse_endpoint(e.get<std::string>()));
      aliases_[name] = std::move(b);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("malformed state file: ") + e.what());
  }
  epoch_ = log_.last_ts();
}

void Store::save() const {
  std::lock_guard lock(mutex_);
  if (!config_.state_file) return;
  const auto& path = *config_.state_file;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    out << state_json().dump(2) << '\n';
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void Store::persist() const { save(); }

void Store::log(const std::string& actor, const std::string& action, Outcome outcome, json detail) {
  std::lock_guard lock(mutex_);
  log_.append(ActionLogEntry{now(), actor, action, outcome, std::move(detail)});
}

std::vector<ActionLogEntry> Store::read_log(const LogFilter& filter) const {
  std::lock_guard lock(mutex_);
  return log_.read(filter);
}

// -- repository ------------------------------------------------------------------

void Store::register_specialist(const std::string& id) {
  std::lock_guard lock(mutex_);
  repository_.add_specialist(id);
  log("store", "register_specialist", Outcome::ok, {{"specialist", id}});
  persist();
}

void Store::register_metric(const moduledef::MetricDef& metric) {
  std::lock_guard lock(mutex_);
  if (metric.metric_id.empty() || metric.unit.empty()) {
    throw Error(Errc::invalid_argument, "metric needs an id and a unit");
  }
  auto it = metrics_.find(metric.metric_id);
  if (it != metrics_.end()) {
    if (it->second.direction != metric.direction || it->second.unit != metric.unit) {
      throw Error(Errc::duplicate_id, "metric " + metric.metric_id + " already defined differently");
    }
    return;
  }
  metrics_.emplace(metric.metric_id, metric);
  log("store", "register_metric", Outcome::ok, {{"metric_id", metric.metric_id}});
  persist();
}

std::string Store::submit_package(const std::filesystem::path& dir) {
  std::lock_guard lock(mutex_);
  moduledef::ModulePackage pkg = moduledef::load_module_package(dir);
  for (const auto& m : pkg.metrics) register_metric(m);
  return submit(std::move(pkg.manifest));
}

std::string Store::submit(ModuleManifest manifest) {
  std::lock_guard lock(mutex_);
  const json detail{{"module_id", manifest.module_id}, {"version", manifest.version}, {"author", manifest.author}};
  try {
    if (!repository_.is_specialist(manifest.author)) {
      throw Error(Errc::anonymous_author, "author '" + manifest.author + "' is not a registered specialist");
    }
    const auto violations = moduledef::validate_manifest(manifest, library(), metrics_);
    if (!violations.empty()) {
      std::string text = "manifest rejected:";
      for (const auto& v : violations) text += " " + v + ";";
      text.pop_back();
      throw Error(Errc::validation_failed, text);
    }
    const std::string id = repository_.add(std::move(manifest)).module_id;
    log("store", "submit", Outcome::ok, detail);
    persist();
    return id;
  } catch (const Error& e) {
    json d = detail;
    d["reason"] = e.what();
    log("store", "submit", Outcome::error, d);
    persist();
    throw;
  }
}

ModuleState Store::start_review(const std::string& module_id, const std::string& reviewer) {
  std::lock_guard lock(mutex_);
  repository_.transition(module_id, ModuleState::in_review);
  log("store", "start_review", Outcome::ok, {{"module_id", module_id}, {"reviewer", reviewer}});
  persist();
  return ModuleState::in_review;
}

ModuleState Store::review(const std::string& module_id, ReviewDecision decision, const std::string& reviewer) {
  std::lock_guard lock(mutex_);
  const ModuleManifest& m = repository_.at(module_id);
  const char* verb = decision == ReviewDecision::accept ? "accept" : "revise";
  try {
    if (reviewer.empty() || reviewer == m.author) {
      throw Error(Errc::self_review, "self-review: " + reviewer + " authored " + module_id);
    }
    const ModuleState to =
        decision == ReviewDecision::accept ? ModuleState::published : ModuleState::revision_requested;
    repository_.transition(module_id, to);
    log("store", "review", Outcome::ok, {{"module_id", module_id}, {"decision", verb}, {"reviewer", reviewer}});
    persist();
    return to;
  } catch (const Error& e) {
    log("store", "review", Outcome::error,
        {{"module_id", module_id}, {"decision", verb}, {"reviewer", reviewer}, {"reason", e.what()}});
    persist();
    throw;
  }
}

ModuleState Store::revise(ModuleManifest revised) {
  std::lock_guard lock(mutex_);
  const auto violations = moduledef::validate_manifest(revised, library(), metrics_);
  if (!violations.empty()) throw Error(Errc::validation_failed, "revision rejected: " + violations.front());
  const std::string id = revised.module_id;
  const int version = revised.version;
  repository_.replace(std::move(revised));
  log("store", "revise", Outcome::ok, {{"module_id", id}, {"version", version}});
  persist();
  return ModuleState::in_review;
}

ModuleState Store::retire(const std::string& module_id) {
  std::lock_guard lock(mutex_);
  repository_.transition(module_id, ModuleState::retired);
  log("store", "retire", Outcome::ok, {{"module_id", module_id}});
  persist();
  return ModuleState::retired;
}

ModuleManifest Store::module(const std::string& module_id) const {
  std::lock_guard lock(mutex_);
  return repository_.at(module_id);
}

std::vector<ModuleManifest> Store::modules() const {
  std::lock_guard lock(mutex_);
  return repository_.all();
}

// -- testbed and search ----------------------------------------------------------

std::vector<MetricSample> Store::evaluate(const std::string& module_id, const std::string& scenario_name) {
  std::lock_guard lock(mutex_);
  const ModuleManifest manifest = repository_.at(module_id);
  if (manifest.state != ModuleState::in_review && manifest.state != ModuleState::published) {
    throw Error(Errc::not_published, "module " + module_id + " is " + to_string(manifest.state) +
                                         "; only modules in review or published are evaluated");
  }
  const Scenario& scenario = scenarios_.at(scenario_name);

  netsim::Simulator sim(scenario.topology());
  for (const auto& inj : scenario.injections) sim.inject_latency(inj);
  agents::Runtime rt(
      catalog_, [&sim] { return sim.now(); },
      [this](const ActionLogEntry& e) {
        ActionLogEntry copy = e;
        copy.ts = now();
        copy.actor = "testbed/" + e.actor;
        log_.append(std::move(copy));
      });
  const auto env = rt.create_environment("testbed:" + scenario.name, &sim, config_.rates);

  std::optional<double> ratio;
  std::string note;
  try {
    const moduledef::Nsd nsd = moduledef::parse_nsd(manifest.nsd, library());
    const SpawnedModule spawned = spawn_module(rt, env, nsd, scenario.inputs);
    const Activation activation = activate_adapters(rt, spawned);
    kmflash::KMirrorAgent* adapter = nullptr;
    for (const auto& [_, id] : spawned.agents) {
      if (auto* km = dynamic_cast<kmflash::KMirrorAgent*>(rt.find(id))) {
        adapter = km;
        break;
      }
    }
    if (!activation.ok) {
      note = activation.reason;
    } else if (adapter == nullptr) {
      note = "module exposes no traffic adapter";
    } else {
      std::vector<netsim::DeliveryRecord> records;
      const TrafficSpec& t = scenario.traffic;
      for (std::size_t i = 0; i < t.packets; ++i) {
        sim.schedule_at(SimTime{t.gap * static_cast<std::int64_t>(i)}, [&, i] {
          adapter->post(i, "probe", t.deadline, [&](const netsim::DeliveryRecord& r) { records.push_back(r); });
        });
      }
      sim.run();
      // Sends that never left (none expected) still count as sent.
      const auto stats = kmflash::collect_stats(records, t.deadline);
      ratio = static_cast<double>(stats.delivered_unique - stats.deadline_violations) /
              static_cast<double>(std::max<std::size_t>(t.packets, 1));
      if (t.packets == 0) ratio = 1.0;
    }
    teardown_module(rt, spawned);
  } catch (const Error& e) {
    note = e.what();
  }

  std::vector<MetricSample> out;
  for (const auto& metric_id : manifest.metric_ids) {
    MetricSample s{module_id, metric_id, std::nullopt, now(), MetricSource::testbed, scenario.name, note};
    if (metric_id == "in_deadline_ratio") {
      s.value = ratio;
    } else if (note.empty()) {
      s.note = "metric not measured by this testbed";
    }
    samples_.push_back(s);
    out.push_back(s);
  }
  const bool ok = std::all_of(out.begin(), out.end(), [](const MetricSample& s) { return s.value.has_value(); });
  log("store", "evaluate", ok ? Outcome::ok : Outcome::error,
      {{"module_id", module_id}, {"scenario", scenario.name}, {"note", note}});
  persist();
  return out;
}

std::vector<MetricSample> Store::samples(const std::string& module_id) const {
  std::lock_guard lock(mutex_);
  std::vector<MetricSample> out;
  for (const auto& s : samples_) {
    if (s.module_id == module_id) out.push_back(s);
  }
  return out;
}

std::vector<SearchResult> Store::search(const std::string& query) const {
  std::lock_guard lock(mutex_);
  const std::string needle = lower(query);
  struct Ranked {
    SearchResult result;
    std::optional<double> key;
  };
  std::vector<Ranked> ranked;
  for (const auto& m : repository_.all()) {
    if (m.state != ModuleState::published) continue;
    if (lower(m.name + " " + m.description).find(needle) == std::string::npos) continue;
    Ranked r{{m.module_id, m.name, m.description, m.version, m.price, {}, std::nullopt}, std::nullopt};
    if (!m.metric_ids.empty()) {
      r.result.metric_id = m.metric_ids.front();
      std::vector<double> values;
      for (const auto& s : samples_) {
        if (s.module_id == m.module_id && s.metric_id == r.result.metric_id && s.source == MetricSource::testbed &&
            s.value) {
          values.push_back(*s.value);
        }
      }
      if (values.size() > kRankingWindow) values.erase(values.begin(), values.end() - kRankingWindow);
      if (!values.empty()) {
        r.result.aggregate = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        auto it = metrics_.find(r.result.metric_id);
        const bool higher = it == metrics_.end() || it->second.direction == moduledef::MetricDirection::higher_better;
        r.key = higher ? *r.result.aggregate : -*r.result.aggregate;
      }
    }
    ranked.push_back(std::move(r));
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.key.has_value() != b.key.has_value()) return a.key.has_value();
    if (a.key && *a.key != *b.key) return *a.key > *b.key;
    if (a.result.name != b.result.name) return a.result.name < b.result.name;
    return a.result.module_id < b.result.module_id;
  });
  std::vector<SearchResult> out;
  for (auto& r : ranked) out.push_back(std::move(r.result));
  return out;
}

// -- licensing ----------------------------------------------------------------------

License Store::purchase(const std::string& app_id, const std::string& module_id) {
  std::lock_guard lock(mutex_);
  if (app_id.empty()) throw Error(Errc::invalid_argument, "app id must not be empty");
  const ModuleManifest& m = repository_.at(module_id);
  if (m.state != ModuleState::published) {
    log("store", "purchase", Outcome::error, {{"app_id", app_id}, {"module_id", module_id}, {"reason", "not published"}});
    persist();
    throw Error(Errc::not_published, "not published: " + module_id + " is " + to_string(m.state));
  }
  const License license = licenses_.issue(app_id, module_id, now());
  log("store", "purchase", Outcome::ok,
      {{"app_id", app_id}, {"module_id", module_id}, {"token", fingerprint(license.token)}});
  persist();
  return license;
}

bool Store::revoke(const std::string& token) {
  std::lock_guard lock(mutex_);
  const bool done = licenses_.revoke(token);
  log("store", "revoke", done ? Outcome::ok : Outcome::error, {{"token", fingerprint(token)}});
  persist();
  return done;
}

bool Store::authorize_locked(const std::string& token, const std::string& module_id) {
  const bool allow = licenses_.verify(token, module_id);
  log("store", "authorize", allow ? Outcome::ok : Outcome::error,
      {{"token", fingerprint(token)}, {"module_id", module_id}, {"decision", allow ? "allow" : "deny"}});
  return allow;
}

bool Store::authorize(const std::string& token, const std::string& module_id) {
  std::lock_guard lock(mutex_);
  const bool allow = authorize_locked(token, module_id);
  persist();
  return allow;
}

// -- instances ------------------------------------------------------------------------

InstantiateResult Store::instantiate(const std::string& token, const std::string& module_id,
                                     const std::map<std::string, std::string>& inputs) {
  std::lock_guard lock(mutex_);
  const json base{{"module_id", module_id}, {"token", fingerprint(token)}};
  auto fail = [&](const Error& e) {
    json d = base;
    d["reason"] = e.what();
    log("store", "instantiate", Outcome::error, d);
    persist();
    throw e;
  };
  if (!authorize_locked(token, module_id)) fail(Error(Errc::access_denied, "authorization denied"));
  InstanceRecord inst;
  SpawnedModule spawned;
  try {
    const ModuleManifest& m = repository_.at(module_id);
    if (m.state != ModuleState::published) throw Error(Errc::not_published, "not published: " + module_id);
    const moduledef::Nsd nsd = moduledef::parse_nsd(m.nsd, library());
    spawned = spawn_module(*runtime_, production_env_, nsd, inputs);
  } catch (const Error& e) {
    fail(e);
  }

  InstantiateResult result;
  result.instance_id = "inst-" + std::to_string(next_instance_++);
  const Activation activation = activate_adapters(*runtime_, spawned);
  result.allocation = activation.allocation;
  if (!activation.ok) {
    teardown_module(*runtime_, spawned);
    result.reason = activation.reason;
    result.max_feasible_k = activation.max_feasible_k;
    json d = base;
    d["instance_id"] = result.instance_id;
    d["reason"] = result.reason;
    d["max_feasible_k"] = result.max_feasible_k;
    log("store", "instantiate", Outcome::error, d);
    persist();
    return result;
  }
  result.ok = true;
  inst.instance_id = result.instance_id;
  inst.module_id = module_id;
  if (const License* l = licenses_.find(token)) inst.app_id = l->app_id;
  inst.inputs = inputs;
  inst.started_at = now();
  inst.allocation = activation.allocation;
  inst.agents = spawned;
  instances_[inst.instance_id] = std::move(inst);
  json d = base;
  d["instance_id"] = result.instance_id;
  log("store", "instantiate", Outcome::ok, d);
  persist();
  return result;
}

CostReport Store::report(const std::string& instance_id, std::vector<UsageLine> usage) const {
  CostReport r;
  r.instance_id = instance_id;
  r.raw_total = raw_total(usage);
  r.weighted_total = weight_(usage);
  r.usage = std::move(usage);
  r.at = now();
  return r;
}

CostReport Store::cost(const std::string& instance_id) const {
  std::lock_guard lock(mutex_);
  auto it = instances_.find(instance_id);
  if (it == instances_.end()) throw Error(Errc::unknown_instance, "unknown instance: " + instance_id);
  const InstanceRecord& inst = it->second;
  if (inst.ended_at) return report(instance_id, inst.final_usage);
  return report(instance_id, module_usage(*runtime_, inst.agents, production_.now()));
}

void Store::teardown_locked(InstanceRecord& inst) {
  if (inst.ended_at) return;
  inst.final_usage = module_usage(*runtime_, inst.agents, production_.now());
  teardown_module(*runtime_, inst.agents);
  inst.agents = {};
  inst.ended_at = now();
  log("store", "teardown", Outcome::ok, {{"instance_id", inst.instance_id}});
}

void Store::teardown(const std::string& instance_id) {
  std::lock_guard lock(mutex_);
  auto it = instances_.find(instance_id);
  if (it == instances_.end()) throw Error(Errc::unknown_instance, "unknown instance: " + instance_id);
  if (it->second.ended_at) return;
  teardown_locked(it->second);
  persist();
}

std::vector<InstanceRecord> Store::instances() const {
  std::lock_guard lock(mutex_);
  std::vector<InstanceRecord> out;
  for (const auto& [_, inst] : instances_) out.push_back(inst);
  return out;
}

// -- aliases ------------------------------------------------------------------------------

void Store::bind_alias(const std::string& alias, const std::string& device_id, std::vector<Endpoint> connectivity) {
  std::lock_guard lock(mutex_);
  if (alias.empty()) throw Error(Errc::invalid_argument, "alias must not be empty");
  if (device_id.empty()) throw Error(Errc::invalid_argument, "device id must not be empty");
  if (connectivity.empty()) throw Error(Errc::invalid_argument, "alias needs at least one endpoint");
  auto it = aliases_.find(alias);
  if (it != aliases_.end() && it->second.device_id != device_id && now() - it->second.refreshed_at <= config_.alias_ttl) {
    log("store", "bind", Outcome::error, {{"alias", alias}, {"device", device_id}, {"reason", "alias conflict"}});
    throw Error(Errc::alias_conflict, "alias conflict: " + alias + " is bound by " + it->second.device_id);
  }
  const bool changed = it == aliases_.end() || it->second.device_id != device_id ||
                       it->second.connectivity != connectivity;
  aliases_[alias] = AliasBinding{device_id, std::move(connectivity), now()};
  if (changed) {
    json eps = json::array();
    for (const auto& e : aliases_[alias].connectivity) eps.push_back(to_string(e));
    log("store", "bind", Outcome::ok, {{"alias", alias}, {"device", device_id}, {"connectivity", eps}});
    persist();
  }
}

std::optional<std::vector<Endpoint>> Store::resolve_alias(const std::string& alias) const {
  std::lock_guard lock(mutex_);
  auto it = aliases_.find(alias);
  if (it == aliases_.end() || now() - it->second.refreshed_at > config_.alias_ttl) return std::nullopt;
  return it->second.connectivity;
}

}  // namespace socketstore::store
