#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "socketstore/agents/type_library.hpp"

namespace socketstore::moduledef {

enum class MetricDirection { higher_better, lower_better };

struct MetricDef {
  std::string metric_id;
  std::string name;
  std::string unit;
  MetricDirection direction = MetricDirection::higher_better;

  bool operator==(const MetricDef&) const = default;
};

using MetricRegistry = std::map<std::string, MetricDef, std::less<>>;

enum class ModuleState { submitted, in_review, revision_requested, published, retired };

inline constexpr ModuleState kAllStates[] = {ModuleState::submitted, ModuleState::in_review,
                                             ModuleState::revision_requested, ModuleState::published,
                                             ModuleState::retired};

const char* to_string(ModuleState state) noexcept;
ModuleState parse_module_state(std::string_view text);
const char* to_string(MetricDirection direction) noexcept;

/// submitted->in_review, in_review->{revision_requested, published},
/// revision_requested->in_review, published->retired.
bool is_legal_transition(ModuleState from, ModuleState to) noexcept;

struct ModuleManifest {
  std::string module_id;
  std::string name;
  std::string description;
  int version = 1;
  std::string author;
  std::vector<std::string> metric_ids;
  std::string nsd;  // NSD XML document
  std::string dsa_ref;
  double price = 0.0;
  ModuleState state = ModuleState::submitted;

  bool operator==(const ModuleManifest&) const = default;
};

/// Every violation found; an empty list means the manifest is valid.
std::vector<std::string> validate_manifest(const ModuleManifest& manifest, const agents::AgentTypeLibrary& library,
                                           const MetricRegistry& metrics);

nlohmann::json to_json(const ModuleManifest& manifest);
/// The "nsd" field holds either the XML document itself or, when
/// `base_dir` is given and the value does not start with '<', a file name
/// relative to it.
ModuleManifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

nlohmann::json to_json(const MetricDef& metric);
MetricDef metric_from_json(const nlohmann::json& doc);

/// A module directory: manifest.json (+ referenced NSD file) and an optional
/// metrics.json array of metric definitions.
struct ModulePackage {
  ModuleManifest manifest;
  std::vector<MetricDef> metrics;
};

ModulePackage load_module_package(const std::filesystem::path& dir);

}  // namespace socketstore::moduledef
