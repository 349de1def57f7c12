#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "socketstore/netsim/simulator.hpp"

namespace socketstore::store {

struct TrafficSpec {
  std::size_t packets = 100;
  SimDuration gap = from_ms(1.0);
  SimDuration deadline = from_ms(5.0);
  std::size_t size_bytes = 1500;
};

/// A reproducible testbed setup: network, disturbances, traffic, and the
/// values bound to a module's formal inputs.
struct Scenario {
  std::string name;
  std::function<netsim::Topology()> topology;
  std::vector<netsim::LatencyInjection> injections;
  TrafficSpec traffic;
  std::map<std::string, std::string> inputs;
};

/// Evaluation topology, +10 ms on R4-B over [40, 60) ms, 100 packets 1 ms
/// apart with a 5 ms deadline, K=2 at 10 Mbps.
Scenario latency_spike_scenario();

class ScenarioRegistry {
 public:
  ScenarioRegistry();  // registers "latency-spike"
  void add(Scenario scenario);
  /// Throws Error(unknown_scenario).
  const Scenario& at(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Scenario> scenarios_;
};

enum class MetricSource { testbed, production };

struct MetricSample {
  std::string module_id;
  std::string metric_id;
  std::optional<double> value;  // absent for a failed evaluation
  SimTime ts{0};
  MetricSource source = MetricSource::testbed;
  std::string scenario;
  std::string note;

  bool operator==(const MetricSample&) const = default;
};

nlohmann::json to_json(const MetricSample& sample);
MetricSample metric_sample_from_json(const nlohmann::json& doc);

}  // namespace socketstore::store
