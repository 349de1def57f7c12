#pragma once

#include <random>
#include <string>
#include <vector>

#include "socketstore/netsim/topology.hpp"

namespace testgen {

using socketstore::from_ms;
using socketstore::netsim::Link;
using socketstore::netsim::Node;
using socketstore::netsim::NodeKind;
using socketstore::netsim::Topology;

/// Connected graph over hosts "S" and "D" plus 1..6 switches. Latencies are
/// whole microseconds in [0.1, 4] ms; some capacities fall below 10 Mbps so
/// a rate filter bites. Occasional parallel links are included.
inline Topology random_graph(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> switches(1, 6);
  std::uniform_int_distribution<int> lat_us(100, 4000);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int n_sw = switches(rng);

  std::vector<Node> nodes{{"S", NodeKind::host, 4}, {"D", NodeKind::host, 4}};
  for (int i = 0; i < n_sw; ++i) nodes.push_back({"X" + std::to_string(i), NodeKind::switch_node, 0});

  std::vector<Link> links;
  auto add = [&](const std::string& a, const std::string& b) {
    const double cap = coin(rng) < 0.15 ? 5.0 : 100.0;
    links.push_back(Link{a + "-" + b + "#" + std::to_string(links.size()), a, b, cap,
                         from_ms(lat_us(rng) / 1000.0)});
  };
  // Spanning tree over the switches, then hosts attach to random switches.
  for (int i = 1; i < n_sw; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    add("X" + std::to_string(parent(rng)), "X" + std::to_string(i));
  }
  std::uniform_int_distribution<int> pick(0, n_sw - 1);
  for (const char* h : {"S", "D"}) {
    const int attach = 1 + static_cast<int>(coin(rng) * 3.0);
    for (int j = 0; j < attach; ++j) add(h, "X" + std::to_string(pick(rng)));
  }
  const double density = coin(rng) * 0.6;
  for (int i = 0; i < n_sw; ++i) {
    for (int j = i + 1; j < n_sw; ++j) {
      if (coin(rng) < density) add("X" + std::to_string(i), "X" + std::to_string(j));
    }
  }
  if (coin(rng) < 0.1) add("S", "D");
  return Topology::build(std::move(nodes), std::move(links));
}

}  // namespace testgen
