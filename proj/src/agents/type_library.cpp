#include "socketstore/agents/type_library.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "socketstore/endpoint.hpp"
#include "socketstore/error.hpp"

namespace socketstore::agents {

using nlohmann::json;

const char* to_string(AgentKind kind) noexcept { return kind == AgentKind::resource ? "resource" : "adapter"; }

const char* to_string(ParamType type) noexcept {
  switch (type) {
    case ParamType::switch_node: return "switch";
    case ParamType::link: return "link";
    case ParamType::host: return "host";
    case ParamType::endpoint: return "endpoint";
    case ParamType::integer: return "int";
    case ParamType::number: return "number";
    case ParamType::text: return "string";
  }
  return "string";
}

ParamType parse_param_type(std::string_view text) {
  for (ParamType t : {ParamType::switch_node, ParamType::link, ParamType::host, ParamType::endpoint,
                      ParamType::integer, ParamType::number, ParamType::text}) {
    if (text == to_string(t)) return t;
  }
  throw Error(Errc::malformed_document, "unknown parameter type: " + std::string(text));
}

const ParamSchema* AgentTypeSchema::find_param(std::string_view name) const {
  auto it = std::find_if(params.begin(), params.end(), [&](const ParamSchema& p) { return p.name == name; });
  return it == params.end() ? nullptr : &*it;
}

bool AgentTypeSchema::accepts(std::string_view message_kind) const {
  return std::find(message_kinds.begin(), message_kinds.end(), message_kind) != message_kinds.end();
}

namespace {

bool lexically_valid(ParamType type, const std::string& value) {
  switch (type) {
    case ParamType::integer: {
      long long v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      return !value.empty() && ec == std::errc{} && ptr == value.data() + value.size();
    }
    case ParamType::number: {
      char* end = nullptr;
      const double v = std::strtod(value.c_str(), &end);
      return !value.empty() && end == value.c_str() + value.size() && std::isfinite(v);
    }
    case ParamType::endpoint:
      try {
        parse_endpoint(value);
        return true;
      } catch (const Error&) {
        return false;
      }
    case ParamType::switch_node:
    case ParamType::link:
    case ParamType::host:
      return !value.empty();
    case ParamType::text:
      return true;
  }
  return false;
}

}  // namespace

void validate_params(const AgentTypeSchema& schema, const ParamMap& params) {
  for (const auto& [name, value] : params) {
    const ParamSchema* p = schema.find_param(name);
    if (p == nullptr) {
      throw Error(Errc::schema_violation, schema.type_name + ": unknown parameter " + name);
    }
    if (!lexically_valid(p->type, value)) {
      throw Error(Errc::schema_violation, schema.type_name + ": parameter " + name + " is not a valid " +
                                              to_string(p->type) + ": '" + value + "'");
    }
  }
  for (const ParamSchema& p : schema.params) {
    if (p.required && !params.contains(p.name)) {
      throw Error(Errc::schema_violation, schema.type_name + ": missing parameter " + p.name);
    }
  }
}

void AgentTypeLibrary::add(AgentTypeSchema schema) {
  if (schema.type_name.empty()) {
    throw Error(Errc::invalid_argument, "agent type needs a name");
  }
  const std::string name = schema.type_name;
  if (!types_.emplace(name, std::move(schema)).second) {
    throw Error(Errc::duplicate_id, "duplicate agent type: " + name);
  }
}

const AgentTypeSchema* AgentTypeLibrary::find(std::string_view type_name) const {
  auto it = types_.find(type_name);
  return it == types_.end() ? nullptr : &it->second;
}

const AgentTypeSchema& AgentTypeLibrary::at(std::string_view type_name) const {
  if (const auto* s = find(type_name)) return *s;
  throw Error(Errc::unknown_type, "unknown type: " + std::string(type_name));
}

std::vector<std::string> AgentTypeLibrary::type_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : types_) out.push_back(name);
  return out;
}

json AgentTypeLibrary::to_json() const {
  json types = json::array();
  for (const auto& [name, s] : types_) {
    json params = json::array();
    for (const ParamSchema& p : s.params) {
      params.push_back({{"name", p.name}, {"type", to_string(p.type)}, {"required", p.required}});
    }
    types.push_back({{"type_name", s.type_name},
                     {"kind", to_string(s.kind)},
                     {"params", params},
                     {"messages", s.message_kinds},
                     {"doc", s.doc}});
  }
  return json{{"types", types}};
}

AgentTypeLibrary AgentTypeLibrary::from_json(const json& doc) {
  AgentTypeLibrary lib;
  try {
    for (const json& t : doc.at("types")) {
      AgentTypeSchema s;
      s.type_name = t.at("type_name").get<std::string>();
      const auto kind = t.at("kind").get<std::string>();
      if (kind != "resource" && kind != "adapter") {
        throw Error(Errc::malformed_document, "unknown agent kind: " + kind);
      }
      s.kind = kind == "resource" ? AgentKind::resource : AgentKind::adapter;
      for (const json& p : t.at("params")) {
        s.params.push_back({p.at("name").get<std::string>(), parse_param_type(p.at("type").get<std::string>()),
                            p.value("required", true)});
      }
      s.message_kinds = t.at("messages").get<std::vector<std::string>>();
      s.doc = t.value("doc", "");
      lib.add(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("agent type library: ") + e.what());
  }
  return lib;
}

}  // namespace socketstore::agents
