#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "socketstore/agents/type_library.hpp"

namespace socketstore::moduledef {

/// A formal input of an NSD, bound to a value at instantiation.
struct FormalInput {
  std::string name;
  agents::ParamType type = agents::ParamType::text;

  bool operator==(const FormalInput&) const = default;
};

/// One agent to instantiate. Parameter values beginning with '$' refer to a
/// formal input ("$$" escapes a literal dollar sign).
struct Directive {
  std::string id;
  std::string type_name;
  agents::ParamMap params;

  bool operator==(const Directive&) const = default;
};

/// A declared message channel: `from` composes and may message `to`.
struct Wire {
  std::string from;
  std::string to;

  bool operator==(const Wire&) const = default;
};

/// Network-Side Directives: the agents a module creates and how they are wired.
///
///   <nsd>
///     <input name="K" type="int"/>
///     <agent id="km" type="KMirror">
///       <param name="K" value="$K"/>
///     </agent>
///     <wire from="km" to="other"/>
///   </nsd>
struct Nsd {
  std::vector<FormalInput> inputs;
  std::vector<Directive> directives;
  std::vector<Wire> wires;

  bool operator==(const Nsd&) const = default;

  const Directive* find(std::string_view directive_id) const;
};

/// Parses and validates against `library`. Throws Error with code
/// malformed_document, unknown_agent_type, duplicate_directive, wiring_cycle,
/// unresolved_reference or schema_violation.
Nsd parse_nsd(std::string_view document, const agents::AgentTypeLibrary& library);

std::string serialize_nsd(const Nsd& nsd);

/// Structural checks shared by the parser and programmatic construction.
void validate_nsd(const Nsd& nsd, const agents::AgentTypeLibrary& library);

/// Directive indices in instantiation order: every wire target precedes its
/// source; ties keep document order.
std::vector<std::size_t> instantiation_order(const Nsd& nsd);

/// Substitutes input references. Throws Error(missing_input) when a
/// referenced input has no value.
agents::ParamMap bind_params(const Directive& directive, const std::map<std::string, std::string>& inputs);

/// Throws Error(missing_input) naming the first formal input without a value.
void require_inputs(const Nsd& nsd, const std::map<std::string, std::string>& inputs);

}  // namespace socketstore::moduledef
