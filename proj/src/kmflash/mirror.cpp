#include "socketstore/kmflash/mirror.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "socketstore/error.hpp"

namespace socketstore::kmflash {

namespace {

bool still_fits(const netsim::Simulator& network, const PathSet& set, double rate) {
  std::map<std::string, double> need;
  for (const Path& p : set.paths) {
    for (const std::string& l : p.links) need[l] += rate;
  }
  for (const auto& [link, mbps] : need) {
    if (network.topology().find_link(link) == nullptr) return false;
    if (network.link_stats(link).residual_mbps() + 1e-9 < mbps) return false;
  }
  return true;
}

MirrorHandles install(netsim::Simulator& network, const netsim::FlowId& flow, const PathSet& set, double rate) {
  MirrorHandles h;
  h.flow = flow;
  h.paths = set.paths;
  h.rate_mbps = rate;
  h.deployed_at = network.now();
  for (std::size_t i = 0; i < set.paths.size(); ++i) {
    network.deploy_path(flow, static_cast<int>(i), set.paths[i].links);
    for (const std::string& l : set.paths[i].links) network.reserve(l, rate);
  }
  return h;
}

}  // namespace

DeployResult deploy_mirror_paths(netsim::Simulator& network, const netsim::FlowId& flow, const PathSet& paths,
                                 const AllocationRequest& request) {
  if (paths.paths.empty()) throw Error(Errc::invalid_argument, "empty path set");
  if (still_fits(network, paths, request.rate_mbps)) return install(network, flow, paths, request.rate_mbps);

  AllocationResult fresh = allocate_disjoint_paths(network.snapshot(), request);
  if (auto* failure = std::get_if<AllocationFailure>(&fresh)) return *failure;
  const PathSet& retry = std::get<PathSet>(fresh);
  if (!still_fits(network, retry, request.rate_mbps)) {
    return AllocationFailure{"deployment conflict after retry", 0};
  }
  return install(network, flow, retry, request.rate_mbps);
}

void retract_mirror_paths(netsim::Simulator& network, MirrorHandles& handles) {
  if (!handles.live()) return;
  for (std::size_t i = 0; i < handles.paths.size(); ++i) {
    network.retract_path(handles.flow, static_cast<int>(i));
    for (const std::string& l : handles.paths[i].links) {
      if (network.topology().find_link(l) != nullptr) network.release(l, handles.rate_mbps);
    }
  }
  handles.retracted_at = network.now();
}

void mirror_send(netsim::Simulator& network, const MirrorHandles& handles, std::uint64_t seq, std::string payload,
                 SimDuration deadline, netsim::DeliveryCallback on_copy, std::size_t size_bytes) {
  if (!handles.live()) throw Error(Errc::connection_closed, "mirror paths retracted");
  for (std::size_t i = 0; i < handles.paths.size(); ++i) {
    netsim::Packet p;
    p.flow = handles.flow;
    p.seq = seq;
    p.size_bytes = size_bytes;
    p.sent_at = network.now();
    p.deadline = deadline;
    p.path_index = static_cast<int>(i);
    p.payload = payload;
    network.send(std::move(p), on_copy);
  }
}

std::vector<netsim::DeliveryRecord> mirror_send_sync(netsim::Simulator& network, const MirrorHandles& handles,
                                                     std::uint64_t seq, std::string payload, SimDuration deadline,
                                                     std::size_t size_bytes) {
  auto out = std::make_shared<std::vector<netsim::DeliveryRecord>>();
  mirror_send(
      network, handles, seq, std::move(payload), deadline,
      [out](const netsim::DeliveryRecord& r) { out->push_back(r); }, size_bytes);
  while (out->size() < handles.paths.size() && network.step()) {
  }
  std::sort(out->begin(), out->end(), [](const auto& a, const auto& b) { return a.path_index < b.path_index; });
  return std::move(*out);
}

DeliveryStats collect_stats(std::span<const netsim::DeliveryRecord> records, SimDuration deadline) {
  std::map<std::uint64_t, std::optional<SimDuration>> earliest;
  for (const auto& r : records) {
    auto& e = earliest[r.seq];
    if (r.delivered && (!e || r.latency < *e)) e = r.latency;
  }
  DeliveryStats s;
  s.sent = earliest.size();
  for (const auto& [seq, e] : earliest) {
    if (!e) {
      ++s.losses;
      continue;
    }
    ++s.delivered_unique;
    if (*e > deadline) ++s.deadline_violations;
  }
  if (s.sent > 0) {
    s.in_deadline_ratio =
        static_cast<double>(s.delivered_unique - s.deadline_violations) / static_cast<double>(s.sent);
  }
  return s;
}

std::vector<UsageLine> km_cost(const MirrorHandles& handles, const RateCard& rates, SimTime now) {
  const SimTime end = handles.retracted_at ? std::min(*handles.retracted_at, now) : now;
  const double seconds = std::max(0.0, to_seconds(end - handles.deployed_at));
  std::vector<UsageLine> lines;
  for (std::size_t i = 0; i < handles.paths.size(); ++i) {
    std::string name = "path" + std::to_string(i) + ":";
    for (std::size_t n = 0; n < handles.paths[i].nodes.size(); ++n) {
      name += (n ? "-" : "") + handles.paths[i].nodes[n];
    }
    lines.push_back(UsageLine{name, handles.rate_mbps * seconds, "Mbps*s", rates.link_mbps_second});
  }
  return lines;
}

}  // namespace socketstore::kmflash
