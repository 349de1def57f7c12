#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "socketstore/kmflash/mirror.hpp"
#include "socketstore/netsim/simulator.hpp"
#include "socketstore/sim_time.hpp"

namespace socketstore::cli {

inline constexpr const char* kBaseline = "baseline";

/// One reproducible transfer. Relative topology/module paths resolve
/// against the config file's directory.
struct ExperimentConfig {
  std::string topology = "evaluation";  // "evaluation" or a topology file
  std::string module_id = "flash-delivery";
  std::filesystem::path module_dir;  // package to publish; default <config dir>/../<module_id>
  std::string src = "A";
  std::string dst = "B";
  std::size_t packet_count = 100;
  double gap_ms = 1.0;
  double deadline_ms = 5.0;
  std::optional<netsim::LatencyInjection> injection;
  int k = 2;
  double rate_mbps = 10.0;
  std::string app_id = "demo";
  bool purchase = true;  // false: the DSA is refused and falls back
  double jitter_ms = 0.0;  // per-packet send jitter drawn from the seed
  std::filesystem::path output = "experiment.csv";
  std::optional<std::filesystem::path> plot;

  bool baseline() const { return module_id == kBaseline; }
};

/// The latency-spike setup: 100 packets, 1 ms gap, 5 ms deadline, +10 ms on R4-B
/// over [40, 60) ms, K=2 at 10 Mbps.
ExperimentConfig default_experiment();

/// Throws Error(config_error) naming the offending field.
ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& file);
nlohmann::json to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

struct ExperimentRow {
  std::uint64_t seq = 0;
  SimTime sent_at{0};
  std::vector<std::optional<SimDuration>> latency;  // per path index
  std::optional<SimDuration> earliest;
  bool violated = false;
};

struct ExperimentReport {
  std::string mode;  // baseline, module or fallback
  std::string module_id;
  std::optional<std::string> failure_reason;
  std::optional<std::string> instance_id;
  std::uint64_t seed = 0;
  int paths = 1;
  SimDuration deadline{0};
  std::vector<ExperimentRow> rows;
  kmflash::DeliveryStats stats;
  nlohmann::json cost;  // cost report at end of transfer, null for baseline/fallback
};

ExperimentReport run_experiment(const ExperimentConfig& config, std::uint64_t seed = 1);

/// Columns: seq, sent_at_ms, latency_path<i>_ms (at least two), earliest_ms, violated.
std::string to_csv(const ExperimentReport& report);
nlohmann::json summary_json(const ExperimentReport& report);
std::string summary_text(const ExperimentReport& report);
/// Latency-vs-send-time chart generated from the rows.
std::string to_svg(const ExperimentReport& report);

/// Writes the CSV, `<output stem>.summary.json` and the optional plot.
void write_outputs(const ExperimentReport& report, const ExperimentConfig& config);

}  // namespace socketstore::cli
