#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "socketstore/sim_time.hpp"

namespace socketstore::netsim {

enum class NodeKind { host, switch_node };

const char* to_string(NodeKind kind) noexcept;

struct Node {
  std::string id;
  NodeKind kind = NodeKind::switch_node;
  int nic_count = 0;  // hosts only
};

/// A physical, bidirectional link with symmetric attributes.
struct Link {
  std::string id;
  std::string a;
  std::string b;
  double capacity_mbps = 0.0;
  SimDuration base_latency{0};

  bool incident(std::string_view node) const { return a == node || b == node; }

  /// The endpoint opposite to `node`. `node` must be incident.
  const std::string& other(std::string_view node) const { return a == node ? b : a; }
};

/// Validated, immutable-by-default network graph.
class Topology {
 public:
  Topology() = default;

  /// Validates and indexes the description. Links with an empty id are named
  /// "<a>-<b>". Throws Error on empty node list, duplicate ids, unknown or
  /// identical endpoints, non-positive capacity, negative latency, or a host
  /// without a NIC.
  static Topology build(std::vector<Node> nodes, std::vector<Link> links);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Link> links() const { return links_; }

  const Node* find_node(std::string_view id) const;
  const Link* find_link(std::string_view id) const;
  const Node& node(std::string_view id) const;
  const Link& link(std::string_view id) const;

  /// Links touching `node`, in declaration order.
  std::vector<const Link*> incident_links(std::string_view node) const;

  /// Removes a link; used to model topology changes under a live simulator.
  void remove_link(std::string_view id);

 private:
  void reindex();

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> link_index_;
};

/// The five-router evaluation network: hosts A and B with two NICs each,
/// switches R1..R5, eight 100 Mbps / 0.5 ms links. Exactly two link-disjoint
/// A-B paths exist and R4-B lies on the default route.
Topology evaluation_topology();

/// Shortest path by base latency from `src` to `dst`, ties broken by the
/// lexicographic order of the visited node sequence. Only switches forward.
/// Returns the link ids, or nullopt when unreachable.
std::optional<std::vector<std::string>> default_route(const Topology& topology, std::string_view src,
                                                      std::string_view dst);

}  // namespace socketstore::netsim
