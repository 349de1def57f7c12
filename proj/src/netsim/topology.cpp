#include "socketstore/netsim/topology.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "socketstore/error.hpp"

namespace socketstore::netsim {

const char* to_string(NodeKind kind) noexcept {
  return kind == NodeKind::host ? "host" : "switch";
}

Topology Topology::build(std::vector<Node> nodes, std::vector<Link> links) {
  if (nodes.empty()) {
    throw Error(Errc::empty_topology, "empty topology");
  }
  Topology t;
  t.nodes_ = std::move(nodes);
  t.links_ = std::move(links);
  for (const Node& n : t.nodes_) {
    if (n.id.empty()) {
      throw Error(Errc::invalid_argument, "node with empty id");
    }
    if (n.kind == NodeKind::host && n.nic_count < 1) {
      throw Error(Errc::invalid_argument, "host " + n.id + " needs at least one NIC");
    }
    if (n.kind == NodeKind::switch_node && n.nic_count != 0) {
      throw Error(Errc::invalid_argument, "switch " + n.id + " cannot declare NICs");
    }
    if (!t.node_index_.emplace(n.id, t.node_index_.size()).second) {
      throw Error(Errc::duplicate_id, "duplicate id: " + n.id);
    }
  }
  for (Link& l : t.links_) {
    for (const std::string* end : {&l.a, &l.b}) {
      if (!t.node_index_.contains(*end)) {
        throw Error(Errc::unknown_endpoint, "unknown endpoint: " + *end);
      }
    }
    if (l.a == l.b) {
      throw Error(Errc::invalid_argument, "link endpoints must differ: " + l.a);
    }
    if (!(l.capacity_mbps > 0)) {
      throw Error(Errc::non_positive_capacity, "non-positive capacity on link " + l.a + "-" + l.b);
    }
    if (l.base_latency.count() < 0) {
      throw Error(Errc::invalid_argument, "negative latency on link " + l.a + "-" + l.b);
    }
    if (l.id.empty()) {
      l.id = l.a + "-" + l.b;
    }
    if (t.node_index_.contains(l.id) || !t.link_index_.emplace(l.id, t.link_index_.size()).second) {
      throw Error(Errc::duplicate_id, "duplicate id: " + l.id);
    }
  }
  return t;
}

void Topology::reindex() {
  node_index_.clear();
  link_index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_.emplace(nodes_[i].id, i);
  for (std::size_t i = 0; i < links_.size(); ++i) link_index_.emplace(links_[i].id, i);
}

const Node* Topology::find_node(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

const Link* Topology::find_link(std::string_view id) const {
  auto it = link_index_.find(std::string(id));
  return it == link_index_.end() ? nullptr : &links_[it->second];
}

const Node& Topology::node(std::string_view id) const {
  if (const Node* n = find_node(id)) return *n;
  throw Error(Errc::unknown_node, "unknown node: " + std::string(id));
}

const Link& Topology::link(std::string_view id) const {
  if (const Link* l = find_link(id)) return *l;
  throw Error(Errc::unknown_link, "unknown link: " + std::string(id));
}

std::vector<const Link*> Topology::incident_links(std::string_view node) const {
  std::vector<const Link*> out;
  for (const Link& l : links_) {
    if (l.incident(node)) out.push_back(&l);
  }
  return out;
}

void Topology::remove_link(std::string_view id) {
  auto it = std::find_if(links_.begin(), links_.end(), [&](const Link& l) { return l.id == id; });
  if (it == links_.end()) {
    throw Error(Errc::unknown_link, "unknown link: " + std::string(id));
  }
  links_.erase(it);
  reindex();
}

Topology evaluation_topology() {
  std::vector<Node> nodes{{"A", NodeKind::host, 2},         {"B", NodeKind::host, 2},
                          {"R1", NodeKind::switch_node, 0}, {"R2", NodeKind::switch_node, 0},
                          {"R3", NodeKind::switch_node, 0}, {"R4", NodeKind::switch_node, 0},
                          {"R5", NodeKind::switch_node, 0}};
  const std::pair<const char*, const char*> edges[] = {{"A", "R1"},  {"A", "R2"},  {"R1", "R3"},
                                                       {"R2", "R3"}, {"R3", "R4"}, {"R3", "R5"},
                                                       {"R4", "B"},  {"R5", "B"}};
  std::vector<Link> links;
  for (auto [a, b] : edges) {
    links.push_back(Link{"", a, b, 100.0, from_ms(0.5)});
  }
  return Topology::build(std::move(nodes), std::move(links));
}

std::optional<std::vector<std::string>> default_route(const Topology& topology, std::string_view src,
                                                      std::string_view dst) {
  topology.node(src);
  topology.node(dst);
  // Label = (latency, node sequence); lexicographic on both keeps ties deterministic.
  struct Label {
    SimDuration cost;
    std::vector<std::string> nodes;
    std::vector<std::string> links;
    bool operator<(const Label& o) const { return std::tie(cost, nodes) < std::tie(o.cost, o.nodes); }
  };
  std::map<std::string, Label> best;
  std::set<std::string> settled;
  best[std::string(src)] = Label{SimDuration{0}, {std::string(src)}, {}};
  while (true) {
    const Label* pick = nullptr;
    std::string pick_node;
    for (const auto& [node, label] : best) {
      if (settled.contains(node)) continue;
      if (pick == nullptr || label < *pick) {
        pick = &label;
        pick_node = node;
      }
    }
    if (pick == nullptr) return std::nullopt;
    if (pick_node == dst) return pick->links;
    settled.insert(pick_node);
    const Label current = *pick;
    if (pick_node != src && topology.node(pick_node).kind == NodeKind::host) continue;
    for (const Link* l : topology.incident_links(pick_node)) {
      const std::string& next = l->other(pick_node);
      if (settled.contains(next)) continue;
      Label cand = current;
      cand.cost += l->base_latency;
      cand.nodes.push_back(next);
      cand.links.push_back(l->id);
      auto it = best.find(next);
      if (it == best.end() || cand < it->second) best[next] = std::move(cand);
    }
  }
}

}  // namespace socketstore::netsim
