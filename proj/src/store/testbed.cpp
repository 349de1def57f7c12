#include "socketstore/store/testbed.hpp"

#include "socketstore/error.hpp"

namespace socketstore::store {

using nlohmann::json;

Scenario latency_spike_scenario() {
  Scenario s;
  s.name = "latency-spike";
  s.topology = [] { return netsim::evaluation_topology(); };
  s.injections = {{"R4-B", from_ms(10.0), from_ms(40.0), from_ms(60.0)}};
  s.inputs = {{"endpointA", "A:5000"}, {"endpointB", "B:6000"}, {"K", "2"}, {"rate", "10"}, {"max_latency", "5"}};
  return s;
}

ScenarioRegistry::ScenarioRegistry() { add(latency_spike_scenario()); }

void ScenarioRegistry::add(Scenario scenario) {
  const std::string name = scenario.name;
  scenarios_[name] = std::move(scenario);
}

const Scenario& ScenarioRegistry::at(const std::string& name) const {
  auto it = scenarios_.find(name);
  if (it == scenarios_.end()) throw Error(Errc::unknown_scenario, "unknown scenario: " + name);
  return it->second;
}

std::vector<std::string> ScenarioRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : scenarios_) out.push_back(name);
  return out;
}

json to_json(const MetricSample& s) {
  return json{{"module_id", s.module_id},
              {"metric_id", s.metric_id},
              {"value", s.value ? json(*s.value) : json(nullptr)},
              {"ts_ns", s.ts.count()},
              {"source", s.source == MetricSource::testbed ? "testbed" : "production"},
              {"scenario", s.scenario},
              {"note", s.note}};
}

MetricSample metric_sample_from_json(const json& doc) {
  try {
    MetricSample s;
    s.module_id = doc.at("module_id").get<std::string>();
    s.metric_id = doc.at("metric_id").get<std::string>();
    if (!doc.at("value").is_null()) s.value = doc.at("value").get<double>();
    s.ts = SimTime{doc.at("ts_ns").get<std::int64_t>()};
    s.source = doc.at("source").get<std::string>() == "testbed" ? MetricSource::testbed : MetricSource::production;
    s.scenario = doc.value("scenario", "");
    s.note = doc.value("note", "");
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("malformed metric sample: ") + e.what());
  }
}

}  // namespace socketstore::store
