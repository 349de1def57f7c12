#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace socketstore::agents {

enum class AgentKind { resource, adapter };

/// Semantic parameter types understood by the runtime.
enum class ParamType { switch_node, link, host, endpoint, integer, number, text };

const char* to_string(AgentKind kind) noexcept;
const char* to_string(ParamType type) noexcept;
ParamType parse_param_type(std::string_view text);

struct ParamSchema {
  std::string name;
  ParamType type = ParamType::text;
  bool required = true;
};

struct AgentTypeSchema {
  std::string type_name;
  AgentKind kind = AgentKind::resource;
  std::vector<ParamSchema> params;
  std::vector<std::string> message_kinds;  // payload kinds the type accepts
  std::string doc;

  const ParamSchema* find_param(std::string_view name) const;
  bool accepts(std::string_view message_kind) const;
};

using ParamMap = std::map<std::string, std::string>;

/// Checks names, presence of required parameters and the lexical form of
/// each value. Resource existence is checked later, at binding time.
/// Throws Error(schema_violation).
void validate_params(const AgentTypeSchema& schema, const ParamMap& params);

/// The only source of instantiable agent types.
class AgentTypeLibrary {
 public:
  void add(AgentTypeSchema schema);
  const AgentTypeSchema* find(std::string_view type_name) const;
  /// Throws Error(unknown_type).
  const AgentTypeSchema& at(std::string_view type_name) const;
  bool contains(std::string_view type_name) const { return find(type_name) != nullptr; }
  std::vector<std::string> type_names() const;

  nlohmann::json to_json() const;
  static AgentTypeLibrary from_json(const nlohmann::json& doc);

 private:
  std::map<std::string, AgentTypeSchema, std::less<>> types_;
};

}  // namespace socketstore::agents
