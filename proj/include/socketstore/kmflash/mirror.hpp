#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "socketstore/cost.hpp"
#include "socketstore/kmflash/disjoint_paths.hpp"
#include "socketstore/netsim/simulator.hpp"

namespace socketstore::kmflash {

/// Deployed mirror paths of one flow. Path i carries path_index i.
struct MirrorHandles {
  netsim::FlowId flow;
  std::vector<Path> paths;
  double rate_mbps = 0.0;
  SimTime deployed_at{0};
  std::optional<SimTime> retracted_at;

  bool live() const { return !retracted_at.has_value(); }
};

using DeployResult = std::variant<MirrorHandles, AllocationFailure>;

/// Installs one path per PathSet entry and reserves `request.rate_mbps` on
/// every link. A set that no longer fits the network (link gone, capacity
/// taken) is re-allocated once from a fresh snapshot; a second conflict or a
/// failed re-allocation is returned as AllocationFailure.
/// Throws Error(invalid_argument) for an empty PathSet.
DeployResult deploy_mirror_paths(netsim::Simulator& network, const netsim::FlowId& flow, const PathSet& paths,
                                 const AllocationRequest& request);

/// Removes the rules and reservations. Idempotent.
void retract_mirror_paths(netsim::Simulator& network, MirrorHandles& handles);

/// Sends one copy of the payload down every path at the current simulated
/// time; `on_copy` fires once per copy. Nothing is acknowledged or resent.
/// Throws Error(connection_closed) when the handles were retracted.
void mirror_send(netsim::Simulator& network, const MirrorHandles& handles, std::uint64_t seq, std::string payload,
                 SimDuration deadline, netsim::DeliveryCallback on_copy, std::size_t size_bytes = 1500);

/// mirror_send, then runs the simulator until every copy resolved.
std::vector<netsim::DeliveryRecord> mirror_send_sync(netsim::Simulator& network, const MirrorHandles& handles,
                                                     std::uint64_t seq, std::string payload, SimDuration deadline,
                                                     std::size_t size_bytes = 1500);

struct DeliveryStats {
  std::size_t sent = 0;
  std::size_t delivered_unique = 0;
  std::size_t deadline_violations = 0;
  std::size_t losses = 0;
  double in_deadline_ratio = 1.0;  // vacuously 1 with nothing sent
};

/// Per-seq accounting over copy records: a seq is in deadline iff its
/// earliest arrival latency is within `deadline`.
DeliveryStats collect_stats(std::span<const netsim::DeliveryRecord> records, SimDuration deadline);

/// Reserved rate x active seconds per path, priced per Mbps·s. Accrual stops
/// at retraction.
std::vector<UsageLine> km_cost(const MirrorHandles& handles, const RateCard& rates, SimTime now);

}  // namespace socketstore::kmflash
