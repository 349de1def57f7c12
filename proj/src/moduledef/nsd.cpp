#include "socketstore/moduledef/nsd.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "socketstore/error.hpp"

namespace socketstore::moduledef {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kAttr = "<xmlattr>";
constexpr const char* kComment = "<xmlcomment>";

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::malformed_document, "malformed NSD: " + why); }

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

/// Reads the attributes of `node`, requiring exactly `names`.
std::map<std::string, std::string> attributes(const pt::ptree& node, const std::string& element,
                                              std::initializer_list<const char*> names) {
  std::map<std::string, std::string> out;
  if (auto attrs = node.get_child_optional(kAttr)) {
    for (const auto& [key, value] : *attrs) {
      if (std::find_if(names.begin(), names.end(), [&](const char* n) { return key == n; }) == names.end()) {
        malformed("unknown attribute '" + key + "' on <" + element + ">");
      }
      out[key] = value.data();
    }
  }
  for (const char* n : names) {
    if (!out.contains(n)) malformed("<" + element + "> requires attribute '" + n + "'");
  }
  return out;
}

void no_children(const pt::ptree& node, const std::string& element) {
  if (!blank(node.data())) malformed("<" + element + "> must not contain text");
  for (const auto& [key, _] : node) {
    if (key != kAttr && key != kComment) malformed("unexpected <" + key + "> inside <" + element + ">");
  }
}

std::string input_ref(const std::string& value) {
  if (value.size() > 1 && value[0] == '$' && value[1] != '$') return value.substr(1);
  return {};
}

}  // namespace

const Directive* Nsd::find(std::string_view directive_id) const {
  auto it = std::find_if(directives.begin(), directives.end(), [&](const Directive& d) { return d.id == directive_id; });
  return it == directives.end() ? nullptr : &*it;
}

Nsd parse_nsd(std::string_view document, const agents::AgentTypeLibrary& library) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    malformed(e.what());
  }
  const pt::ptree* root = nullptr;
  for (const auto& [key, child] : tree) {
    if (key == kComment) continue;
    if (key != "nsd" || root != nullptr) malformed("document root must be a single <nsd>");
    root = &child;
  }
  if (root == nullptr) malformed("missing <nsd> root");
  if (!blank(root->data())) malformed("<nsd> must not contain text");
  if (root->get_child_optional(kAttr)) malformed("<nsd> takes no attributes");

  Nsd nsd;
  for (const auto& [key, child] : *root) {
    if (key == kComment || key == kAttr) continue;
    if (key == "input") {
      no_children(child, key);
      auto a = attributes(child, key, {"name", "type"});
      try {
        nsd.inputs.push_back({a["name"], agents::parse_param_type(a["type"])});
      } catch (const Error& e) {
        malformed(e.what());
      }
    } else if (key == "agent") {
      auto a = attributes(child, key, {"id", "type"});
      Directive d{a["id"], a["type"], {}};
      if (!blank(child.data())) malformed("<agent> must not contain text");
      for (const auto& [ckey, param] : child) {
        if (ckey == kAttr || ckey == kComment) continue;
        if (ckey != "param") malformed("unexpected <" + ckey + "> inside <agent>");
        no_children(param, ckey);
        auto p = attributes(param, ckey, {"name", "value"});
        if (!d.params.emplace(p["name"], p["value"]).second) {
          malformed("parameter '" + p["name"] + "' repeated in agent '" + d.id + "'");
        }
      }
      nsd.directives.push_back(std::move(d));
    } else if (key == "wire") {
      no_children(child, key);
      auto a = attributes(child, key, {"from", "to"});
      nsd.wires.push_back({a["from"], a["to"]});
    } else {
      malformed("unexpected <" + key + ">");
    }
  }
  validate_nsd(nsd, library);
  return nsd;
}

std::string serialize_nsd(const Nsd& nsd) {
  pt::ptree root;
  for (const FormalInput& in : nsd.inputs) {
    pt::ptree node;
    node.put("<xmlattr>.name", in.name);
    node.put("<xmlattr>.type", agents::to_string(in.type));
    root.add_child("input", node);
  }
  for (const Directive& d : nsd.directives) {
    pt::ptree node;
    node.put("<xmlattr>.id", d.id);
    node.put("<xmlattr>.type", d.type_name);
    for (const auto& [name, value] : d.params) {
      pt::ptree p;
      p.put("<xmlattr>.name", name);
      p.put("<xmlattr>.value", value);
      node.add_child("param", p);
    }
    root.add_child("agent", node);
  }
  for (const Wire& w : nsd.wires) {
    pt::ptree node;
    node.put("<xmlattr>.from", w.from);
    node.put("<xmlattr>.to", w.to);
    root.add_child("wire", node);
  }
  pt::ptree doc;
  doc.add_child("nsd", root);
  std::ostringstream out;
  pt::write_xml(out, doc, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

void validate_nsd(const Nsd& nsd, const agents::AgentTypeLibrary& library) {
  std::map<std::string, agents::ParamType> inputs;
  for (const FormalInput& in : nsd.inputs) {
    if (in.name.empty()) throw Error(Errc::malformed_document, "malformed NSD: input with empty name");
    if (!inputs.emplace(in.name, in.type).second) {
      throw Error(Errc::malformed_document, "malformed NSD: duplicate input '" + in.name + "'");
    }
  }
  std::set<std::string> ids;
  for (const Directive& d : nsd.directives) {
    if (d.id.empty()) throw Error(Errc::malformed_document, "malformed NSD: agent with empty id");
    if (!ids.insert(d.id).second) {
      throw Error(Errc::duplicate_directive, "duplicate directive_id: " + d.id);
    }
    const agents::AgentTypeSchema* schema = library.find(d.type_name);
    if (schema == nullptr) {
      throw Error(Errc::unknown_agent_type, "unknown agent type: " + d.type_name);
    }
    // Check literals against the schema; references must name a declared
    // input whose type matches the parameter.
    agents::ParamMap literals;
    for (const auto& [name, value] : d.params) {
      const agents::ParamSchema* p = schema->find_param(name);
      if (p == nullptr) {
        throw Error(Errc::schema_violation, d.type_name + ": unknown parameter " + name);
      }
      if (const std::string ref = input_ref(value); !ref.empty()) {
        auto it = inputs.find(ref);
        if (it == inputs.end()) {
          throw Error(Errc::unresolved_reference, "agent '" + d.id + "' references undeclared input '" + ref + "'");
        }
        if (it->second != p->type && p->type != agents::ParamType::text) {
          throw Error(Errc::schema_violation, "input '" + ref + "' is a " + agents::to_string(it->second) +
                                                  ", parameter " + name + " needs a " + agents::to_string(p->type));
        }
      } else {
        literals[name] = value.starts_with("$$") ? value.substr(1) : value;
      }
    }
    agents::AgentTypeSchema relaxed = *schema;
    for (auto& p : relaxed.params) p.required = p.required && !d.params.contains(p.name);
    agents::validate_params(relaxed, literals);
  }
  for (const Wire& w : nsd.wires) {
    for (const std::string* end : {&w.from, &w.to}) {
      if (!ids.contains(*end)) {
        throw Error(Errc::unresolved_reference, "wire references unknown directive '" + *end + "'");
      }
    }
    if (library.at(nsd.find(w.from)->type_name).kind != agents::AgentKind::adapter) {
      throw Error(Errc::schema_violation, "wire source '" + w.from + "' is not an adapter");
    }
  }
  instantiation_order(nsd);  // throws on cycles
}

std::vector<std::size_t> instantiation_order(const Nsd& nsd) {
  const std::size_t n = nsd.directives.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[nsd.directives[i].id] = i;
  // Edge to->from: the target must exist before the source that composes it.
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const Wire& w : nsd.wires) {
    const std::size_t from = index.at(w.from);
    const std::size_t to = index.at(w.to);
    if (from == to) throw Error(Errc::wiring_cycle, "wiring cycle at '" + w.from + "'");
    out[to].push_back(from);
    ++indegree[from];
  }
  std::vector<std::size_t> order;
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  while (!ready.empty()) {
    const std::size_t next = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(next);
    for (std::size_t m : out[next]) {
      if (--indegree[m] == 0) ready.insert(m);
    }
  }
  if (order.size() != n) {
    throw Error(Errc::wiring_cycle, "wiring cycle among directives");
  }
  return order;
}

agents::ParamMap bind_params(const Directive& directive, const std::map<std::string, std::string>& inputs) {
  agents::ParamMap out;
  for (const auto& [name, value] : directive.params) {
    if (const std::string ref = input_ref(value); !ref.empty()) {
      auto it = inputs.find(ref);
      if (it == inputs.end()) throw Error(Errc::missing_input, "missing input: " + ref);
      out[name] = it->second;
    } else {
      out[name] = value.starts_with("$$") ? value.substr(1) : value;
    }
  }
  return out;
}

void require_inputs(const Nsd& nsd, const std::map<std::string, std::string>& inputs) {
  for (const FormalInput& in : nsd.inputs) {
    if (!inputs.contains(in.name)) throw Error(Errc::missing_input, "missing input: " + in.name);
  }
}

}  // namespace socketstore::moduledef
