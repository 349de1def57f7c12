#include "socketstore/moduledef/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "socketstore/error.hpp"
#include "socketstore/moduledef/nsd.hpp"

namespace socketstore::moduledef {

using nlohmann::json;

const char* to_string(ModuleState state) noexcept {
  switch (state) {
    case ModuleState::submitted: return "submitted";
    case ModuleState::in_review: return "in_review";
    case ModuleState::revision_requested: return "revision_requested";
    case ModuleState::published: return "published";
    case ModuleState::retired: return "retired";
  }
  return "submitted";
}

ModuleState parse_module_state(std::string_view text) {
  for (ModuleState s : kAllStates) {
    if (text == to_string(s)) return s;
  }
  throw Error(Errc::malformed_document, "unknown module state: " + std::string(text));
}

const char* to_string(MetricDirection direction) noexcept {
  return direction == MetricDirection::higher_better ? "higher_better" : "lower_better";
}

bool is_legal_transition(ModuleState from, ModuleState to) noexcept {
  using S = ModuleState;
  switch (from) {
    case S::submitted: return to == S::in_review;
    case S::in_review: return to == S::revision_requested || to == S::published;
    case S::revision_requested: return to == S::in_review;
    case S::published: return to == S::retired;
    case S::retired: return false;
  }
  return false;
}

std::vector<std::string> validate_manifest(const ModuleManifest& m, const agents::AgentTypeLibrary& library,
                                           const MetricRegistry& metrics) {
  std::vector<std::string> violations;
  if (m.module_id.empty()) violations.emplace_back("missing module_id");
  if (m.name.empty()) violations.emplace_back("missing name");
  if (m.version < 1) violations.emplace_back("version must be positive");
  if (m.author.empty()) violations.emplace_back("missing author");
  if (m.dsa_ref.empty()) violations.emplace_back("missing dsa_ref");
  if (m.metric_ids.empty()) violations.emplace_back("module must declare a metric");
  for (const std::string& id : m.metric_ids) {
    if (!metrics.contains(id)) violations.push_back("unknown metric: " + id);
  }
  if (m.price < 0) violations.emplace_back("negative price");
  try {
    parse_nsd(m.nsd, library);
  } catch (const Error& e) {
    violations.push_back(std::string("invalid NSD: ") + e.what());
  }
  return violations;
}

json to_json(const ModuleManifest& m) {
  return json{{"module_id", m.module_id}, {"name", m.name},         {"description", m.description},
              {"version", m.version},     {"author", m.author},     {"metric_ids", m.metric_ids},
              {"nsd", m.nsd},             {"dsa_ref", m.dsa_ref},   {"price", m.price},
              {"state", to_string(m.state)}};
}

ModuleManifest manifest_from_json(const json& doc, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known{"module_id", "name",    "description", "version", "author",
                                           "metric_ids", "nsd",    "dsa_ref",     "price",   "state"};
  if (!doc.is_object()) throw Error(Errc::malformed_document, "manifest must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw Error(Errc::malformed_document, "unknown manifest field: " + key);
  }
  ModuleManifest m;
  try {
    m.module_id = doc.at("module_id").get<std::string>();
    m.name = doc.at("name").get<std::string>();
    m.description = doc.value("description", "");
    m.version = doc.at("version").get<int>();
    m.author = doc.value("author", "");
    m.metric_ids = doc.value("metric_ids", std::vector<std::string>{});
    m.nsd = doc.at("nsd").get<std::string>();
    m.dsa_ref = doc.value("dsa_ref", "");
    m.price = doc.value("price", 0.0);
    m.state = parse_module_state(doc.value("state", "submitted"));
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("manifest: ") + e.what());
  }
  if (!base_dir.empty() && !m.nsd.starts_with("<")) {
    std::ifstream in(base_dir / m.nsd);
    if (!in) throw Error(Errc::io_error, "cannot read NSD file: " + (base_dir / m.nsd).string());
    std::stringstream buf;
    buf << in.rdbuf();
    m.nsd = buf.str();
  }
  return m;
}

json to_json(const MetricDef& metric) {
  return json{{"metric_id", metric.metric_id},
              {"name", metric.name},
              {"unit", metric.unit},
              {"direction", to_string(metric.direction)}};
}

MetricDef metric_from_json(const json& doc) {
  MetricDef m;
  try {
    m.metric_id = doc.at("metric_id").get<std::string>();
    m.name = doc.value("name", m.metric_id);
    m.unit = doc.at("unit").get<std::string>();
    const auto dir = doc.at("direction").get<std::string>();
    if (dir == "higher_better") {
      m.direction = MetricDirection::higher_better;
    } else if (dir == "lower_better") {
      m.direction = MetricDirection::lower_better;
    } else {
      throw Error(Errc::malformed_document, "unknown metric direction: " + dir);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("metric: ") + e.what());
  }
  if (m.metric_id.empty() || m.unit.empty()) {
    throw Error(Errc::malformed_document, "metric needs an id and a unit");
  }
  return m;
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_document, path.string() + ": " + e.what());
  }
}

}  // namespace

ModulePackage load_module_package(const std::filesystem::path& dir) {
  ModulePackage pkg;
  pkg.manifest = manifest_from_json(read_json(dir / "manifest.json"), dir);
  if (std::filesystem::exists(dir / "metrics.json")) {
    for (const json& m : read_json(dir / "metrics.json")) pkg.metrics.push_back(metric_from_json(m));
  }
  return pkg;
}

}  // namespace socketstore::moduledef
