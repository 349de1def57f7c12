#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "socketstore/netsim/topology.hpp"

namespace socketstore::netsim {

// Topology description document (JSON):
//
//   {
//     "nodes": [ {"id": "A", "kind": "host", "nics": 2},
//                {"id": "R1", "kind": "switch"} ],
//     "links": [ {"id": "A-R1", "endpoints": ["A", "R1"],
//                 "capacity_mbps": 100, "latency_ms": 0.5} ]
//   }
//
// "id" on links is optional. Unknown fields are rejected.

Topology parse_topology(std::string_view document);
Topology load_topology(const std::filesystem::path& path);
std::string serialize_topology(const Topology& topology);

}  // namespace socketstore::netsim
