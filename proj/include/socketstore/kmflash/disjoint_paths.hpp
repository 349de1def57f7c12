#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "socketstore/netsim/simulator.hpp"
#include "socketstore/sim_time.hpp"

namespace socketstore::kmflash {

struct Path {
  std::vector<std::string> nodes;
  std::vector<std::string> links;
  SimDuration latency{0};
  double residual_mbps = 0.0;

  bool operator==(const Path&) const = default;
};

struct PathSet {
  std::vector<Path> paths;
  SimDuration spread{0};  // max pairwise latency difference

  SimDuration total_latency() const;
};

struct AllocationRequest {
  std::string src;
  std::string dst;
  int k = 1;
  double rate_mbps = 0.0;
  SimDuration max_latency{0};
  SimDuration epsilon = from_ms(1.0);  // similarity tolerance on latency
};

struct AllocationFailure {
  std::string reason;
  int max_feasible_k = 0;
};

using AllocationResult = std::variant<PathSet, AllocationFailure>;

/// Minimum-total-latency sets of 1..k pairwise link-disjoint src->dst paths
/// over links with residual capacity >= rate, computed by successive
/// shortest paths with edge reversal. Element i holds the (i+1)-path set;
/// the vector is shorter than k when fewer disjoint paths exist.
std::vector<std::vector<Path>> min_latency_disjoint_paths(const netsim::TopologySnapshot& snapshot,
                                                          const std::string& src, const std::string& dst, int k,
                                                          double rate_mbps);

/// Allocates K mirror paths meeting the latency, capacity and spread
/// constraints. When the minimum-latency set violates a constraint the
/// request fails; max_feasible_k is then the largest K' < K whose
/// minimum-latency set passes. Throws Error on unknown endpoints or invalid
/// parameters.
AllocationResult allocate_disjoint_paths(const netsim::TopologySnapshot& snapshot, const AllocationRequest& request);

}  // namespace socketstore::kmflash
