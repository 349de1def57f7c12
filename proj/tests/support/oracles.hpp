#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code under test beyond reading plain topology data.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "socketstore/netsim/simulator.hpp"
#include "socketstore/netsim/topology.hpp"

namespace oracle {

using socketstore::SimDuration;
using socketstore::SimTime;
using socketstore::netsim::LatencyInjection;
using socketstore::netsim::Topology;

/// Walks a link list from `sent_at`, adding base latency plus every injection
/// active at the moment the packet enters each link.
inline SimDuration path_latency(const Topology& topo, const std::vector<LatencyInjection>& injections,
                                const std::vector<std::string>& links, SimTime sent_at) {
  SimTime t = sent_at;
  for (const std::string& id : links) {
    SimDuration d{0};
    for (const auto& l : topo.links()) {
      if (l.id == id) d = l.base_latency;
    }
    for (const auto& inj : injections) {
      if (inj.link == id && t >= inj.start && t < inj.end) d += inj.extra;
    }
    t += d;
  }
  return t - sent_at;
}

struct SimplePath {
  std::vector<std::string> links;
  std::int64_t cost = 0;
};

/// Every simple src->dst path; only switches (and the source) forward.
/// `usable` filters links; `weight` gives per-link cost.
inline std::vector<SimplePath> all_simple_paths(const Topology& topo, const std::string& src, const std::string& dst,
                                                const std::function<bool(const std::string&)>& usable,
                                                const std::function<std::int64_t(const std::string&)>& weight) {
  std::vector<SimplePath> out;
  std::vector<std::string> stack_links;
  std::set<std::string> on_path{src};
  std::function<void(const std::string&, std::int64_t)> dfs = [&](const std::string& at, std::int64_t cost) {
    if (at == dst) {
      out.push_back({stack_links, cost});
      return;
    }
    if (at != src && topo.node(at).kind == socketstore::netsim::NodeKind::host) return;
    for (const auto& l : topo.links()) {
      if (!l.incident(at) || !usable(l.id)) continue;
      const std::string next = l.other(at);
      if (on_path.count(next)) continue;
      on_path.insert(next);
      stack_links.push_back(l.id);
      dfs(next, cost + weight(l.id));
      stack_links.pop_back();
      on_path.erase(next);
    }
  };
  dfs(src, 0);
  return out;
}

struct BruteForceResult {
  bool feasible = false;
  std::int64_t min_total = std::numeric_limits<std::int64_t>::max();
};

/// Enumerates every K-subset of simple paths and keeps the pairwise
/// link-disjoint ones. `accept` applies extra per-set constraints.
inline BruteForceResult best_disjoint_set(const std::vector<SimplePath>& paths, int k,
                                          const std::function<bool(const std::vector<const SimplePath*>&)>& accept) {
  BruteForceResult best;
  std::vector<const SimplePath*> chosen;
  std::set<std::string> used;
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t from, std::int64_t total) {
    if (static_cast<int>(chosen.size()) == k) {
      if (accept(chosen)) {
        best.feasible = true;
        best.min_total = std::min(best.min_total, total);
      }
      return;
    }
    for (std::size_t i = from; i < paths.size(); ++i) {
      const auto& p = paths[i];
      if (std::any_of(p.links.begin(), p.links.end(), [&](const std::string& l) { return used.count(l) > 0; })) {
        continue;
      }
      for (const auto& l : p.links) used.insert(l);
      chosen.push_back(&p);
      rec(i + 1, total + p.cost);
      chosen.pop_back();
      for (const auto& l : p.links) used.erase(l);
    }
  };
  rec(0, 0);
  return best;
}

/// Edmonds-Karp max flow with unit capacity per undirected link (both
/// directions share the unit). Hosts other than src/dst do not forward.
inline int unit_max_flow(const Topology& topo, const std::string& src, const std::string& dst,
                         const std::function<bool(const std::string&)>& usable) {
  // Undirected unit edge u-v: arcs u->v and v->u, each capacity 1 (the
  // standard reduction; opposite flows cancel so the link is used once).
  std::map<std::pair<std::string, std::string>, int> cap;
  std::map<std::string, std::vector<std::string>> adj;
  auto forwards = [&](const std::string& n) {
    return n == src || n == dst || topo.node(n).kind != socketstore::netsim::NodeKind::host;
  };
  for (const auto& l : topo.links()) {
    if (!usable(l.id) || !forwards(l.a) || !forwards(l.b)) continue;
    cap[{l.a, l.b}] += 1;
    cap[{l.b, l.a}] += 1;
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  int flow = 0;
  while (true) {
    std::map<std::string, std::string> parent;
    std::queue<std::string> q;
    q.push(src);
    parent[src] = src;
    while (!q.empty() && !parent.count(dst)) {
      auto u = q.front();
      q.pop();
      for (const auto& v : adj[u]) {
        if (!parent.count(v) && cap[{u, v}] > 0) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (!parent.count(dst)) return flow;
    for (std::string v = dst; v != src; v = parent[v]) {
      cap[{parent[v], v}] -= 1;
      cap[{v, parent[v]}] += 1;
    }
    ++flow;
  }
}

}  // namespace oracle
