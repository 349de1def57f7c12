#include "socketstore/netsim/topology_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "socketstore/error.hpp"

namespace socketstore::netsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const char* what) {
  if (!obj.is_object()) {
    throw Error(Errc::malformed_document, std::string(what) + " entry must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw Error(Errc::malformed_document, std::string("unknown field in ") + what + ": " + key);
    }
  }
}

}  // namespace

Topology parse_topology(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_document, std::string("topology: ") + e.what());
  }
  reject_unknown(doc, {"nodes", "links"}, "topology");
  std::vector<Node> nodes;
  std::vector<Link> links;
  try {
    for (const json& n : doc.value("nodes", json::array())) {
      reject_unknown(n, {"id", "kind", "nics"}, "node");
      Node node;
      node.id = n.at("id").get<std::string>();
      const auto kind = n.at("kind").get<std::string>();
      if (kind == "host") {
        node.kind = NodeKind::host;
        node.nic_count = n.value("nics", 1);
      } else if (kind == "switch") {
        node.kind = NodeKind::switch_node;
        if (n.contains("nics")) {
          throw Error(Errc::malformed_document, "switch " + node.id + " cannot declare nics");
        }
      } else {
        throw Error(Errc::malformed_document, "unknown node kind: " + kind);
      }
      nodes.push_back(std::move(node));
    }
    for (const json& l : doc.value("links", json::array())) {
      reject_unknown(l, {"id", "endpoints", "capacity_mbps", "latency_ms"}, "link");
      const auto& ends = l.at("endpoints");
      if (!ends.is_array() || ends.size() != 2) {
        throw Error(Errc::malformed_document, "link endpoints must be a pair");
      }
      links.push_back(Link{l.value("id", std::string{}), ends[0].get<std::string>(), ends[1].get<std::string>(),
                           l.at("capacity_mbps").get<double>(), from_ms(l.at("latency_ms").get<double>())});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("topology: ") + e.what());
  }
  return Topology::build(std::move(nodes), std::move(links));
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::io_error, "cannot read topology file: " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

std::string serialize_topology(const Topology& topology) {
  json doc{{"nodes", json::array()}, {"links", json::array()}};
  for (const Node& n : topology.nodes()) {
    json entry{{"id", n.id}, {"kind", to_string(n.kind)}};
    if (n.kind == NodeKind::host) entry["nics"] = n.nic_count;
    doc["nodes"].push_back(std::move(entry));
  }
  for (const Link& l : topology.links()) {
    doc["links"].push_back(json{{"id", l.id},
                                {"endpoints", {l.a, l.b}},
                                {"capacity_mbps", l.capacity_mbps},
                                {"latency_ms", to_ms(l.base_latency)}});
  }
  return doc.dump(2);
}

}  // namespace socketstore::netsim
