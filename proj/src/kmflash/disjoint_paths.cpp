#include "socketstore/kmflash/disjoint_paths.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <tuple>

#include "socketstore/error.hpp"

namespace socketstore::kmflash {

SimDuration PathSet::total_latency() const {
  SimDuration total{0};
  for (const Path& p : paths) total += p.latency;
  return total;
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Arc {
  std::size_t to;
  int cap;
  std::int64_t cost;
  std::size_t rev;   // index of the paired residual arc in adj[to]
  std::size_t link;  // index into usable links
  bool forward;      // true for the two physical directions, false for residual twins
};

/// Residual network with one unit-capacity arc per link direction.
class FlowNetwork {
 public:
  FlowNetwork(const netsim::TopologySnapshot& snap, const std::string& src, const std::string& dst, double rate)
      : snap_(snap) {
    for (std::size_t i = 0; i < snap.nodes.size(); ++i) index_[snap.nodes[i].id] = i;
    adj_.resize(snap.nodes.size());
    s_ = index_.at(src);
    t_ = index_.at(dst);
    auto forwards = [&](std::size_t n) {
      return n == s_ || n == t_ || snap.nodes[n].kind != netsim::NodeKind::host;
    };
    for (const netsim::LinkStats& l : snap.links) {
      auto ia = index_.find(l.a);
      auto ib = index_.find(l.b);
      if (ia == index_.end() || ib == index_.end()) continue;
      if (l.residual_mbps() + 1e-9 < rate) continue;
      if (!forwards(ia->second) || !forwards(ib->second)) continue;
      const std::size_t id = links_.size();
      links_.push_back(&l);
      add_arc(ia->second, ib->second, l.latency_now.count(), id);
      add_arc(ib->second, ia->second, l.latency_now.count(), id);
    }
  }

  /// One augmentation along a cheapest residual path. False when none exists.
  bool augment() {
    const std::size_t n = adj_.size();
    std::vector<std::int64_t> dist(n, kInf);
    std::vector<std::pair<std::size_t, std::size_t>> prev(n, {n, 0});
    std::vector<bool> queued(n, false);
    std::deque<std::size_t> queue{s_};
    dist[s_] = 0;
    queued[s_] = true;
    // Bellman-Ford (queue-based); residual twins carry negative costs.
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      queued[u] = false;
      for (std::size_t i = 0; i < adj_[u].size(); ++i) {
        const Arc& a = adj_[u][i];
        if (a.cap <= 0 || dist[u] + a.cost >= dist[a.to]) continue;
        dist[a.to] = dist[u] + a.cost;
        prev[a.to] = {u, i};
        if (!queued[a.to]) {
          queued[a.to] = true;
          queue.push_back(a.to);
        }
      }
    }
    if (dist[t_] >= kInf) return false;
    for (std::size_t v = t_; v != s_;) {
      auto [u, i] = prev[v];
      Arc& a = adj_[u][i];
      a.cap -= 1;
      adj_[a.to][a.rev].cap += 1;
      v = u;
    }
    return true;
  }

  /// Splits the current unit flow into simple src->dst paths.
  std::vector<Path> decompose() const {
    // Net direction per link; opposite units on one link cancel.
    std::vector<int> net(links_.size(), 0);  // +1: a->b, -1: b->a
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      for (const Arc& a : adj_[u]) {
        if (!a.forward || a.cap > 0) continue;
        const bool along = snap_.nodes[u].id == links_[a.link]->a;
        net[a.link] += along ? 1 : -1;
      }
    }
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out(adj_.size());  // (to, link)
    for (std::size_t l = 0; l < links_.size(); ++l) {
      if (net[l] == 0) continue;
      const std::size_t a = index_.at(links_[l]->a);
      const std::size_t b = index_.at(links_[l]->b);
      if (net[l] > 0) {
        out[a].emplace_back(b, l);
      } else {
        out[b].emplace_back(a, l);
      }
    }
    std::vector<Path> paths;
    while (!out[s_].empty()) {
      std::vector<std::size_t> nodes{s_};
      std::vector<std::size_t> links;
      std::size_t at = s_;
      while (at != t_) {
        auto [next, link] = out[at].front();
        out[at].erase(out[at].begin());
        auto loop = std::find(nodes.begin(), nodes.end(), next);
        if (loop != nodes.end()) {
          // Zero-cost circulation: drop the cycle and continue from `next`.
          const auto keep = static_cast<std::size_t>(loop - nodes.begin());
          nodes.resize(keep + 1);
          links.resize(keep);
        } else {
          nodes.push_back(next);
          links.push_back(link);
        }
        at = next;
      }
      Path p;
      p.residual_mbps = std::numeric_limits<double>::infinity();
      for (std::size_t n : nodes) p.nodes.push_back(snap_.nodes[n].id);
      for (std::size_t l : links) {
        p.links.push_back(links_[l]->link);
        p.latency += links_[l]->latency_now;
        p.residual_mbps = std::min(p.residual_mbps, links_[l]->residual_mbps());
      }
      paths.push_back(std::move(p));
    }
    std::sort(paths.begin(), paths.end(), [](const Path& x, const Path& y) {
      return std::tie(x.latency, x.nodes) < std::tie(y.latency, y.nodes);
    });
    return paths;
  }

 private:
  void add_arc(std::size_t u, std::size_t v, std::int64_t cost, std::size_t link) {
    adj_[u].push_back(Arc{v, 1, cost, adj_[v].size(), link, true});
    adj_[v].push_back(Arc{u, 0, -cost, adj_[u].size() - 1, link, false});
  }

  const netsim::TopologySnapshot& snap_;
  std::map<std::string, std::size_t> index_;
  std::vector<const netsim::LinkStats*> links_;
  std::vector<std::vector<Arc>> adj_;
  std::size_t s_ = 0;
  std::size_t t_ = 0;
};

std::string plural_paths(int n) {
  if (n == 0) return "no disjoint path";
  return "only " + std::to_string(n) + (n == 1 ? " disjoint path" : " disjoint paths");
}

/// Empty when the set satisfies the latency and spread constraints.
std::string constraint_violation(const std::vector<Path>& paths, const AllocationRequest& req) {
  for (const Path& p : paths) {
    if (p.latency > req.max_latency) {
      return "path latency " + format_ms(p.latency) + " ms exceeds " + format_ms(req.max_latency) + " ms";
    }
  }
  const auto [lo, hi] = std::minmax_element(paths.begin(), paths.end(),
                                            [](const Path& x, const Path& y) { return x.latency < y.latency; });
  if (hi->latency - lo->latency > req.epsilon) {
    return "latency spread " + format_ms(hi->latency - lo->latency) + " ms exceeds " + format_ms(req.epsilon) + " ms";
  }
  return {};
}

}  // namespace

std::vector<std::vector<Path>> min_latency_disjoint_paths(const netsim::TopologySnapshot& snapshot,
                                                          const std::string& src, const std::string& dst, int k,
                                                          double rate_mbps) {
  if (snapshot.find_node(src) == nullptr) throw Error(Errc::unknown_node, "unknown node: " + src);
  if (snapshot.find_node(dst) == nullptr) throw Error(Errc::unknown_node, "unknown node: " + dst);
  if (src == dst) throw Error(Errc::invalid_argument, "source and destination coincide");
  FlowNetwork net(snapshot, src, dst, rate_mbps);
  std::vector<std::vector<Path>> sets;
  for (int i = 0; i < k && net.augment(); ++i) sets.push_back(net.decompose());
  return sets;
}

AllocationResult allocate_disjoint_paths(const netsim::TopologySnapshot& snapshot, const AllocationRequest& req) {
  if (req.k < 1) throw Error(Errc::invalid_argument, "K must be at least 1");
  if (!(req.rate_mbps > 0)) throw Error(Errc::invalid_argument, "rate must be positive");
  if (req.max_latency.count() <= 0) throw Error(Errc::invalid_argument, "max_latency must be positive");
  if (req.epsilon.count() < 0) throw Error(Errc::invalid_argument, "epsilon must be non-negative");

  const auto sets = min_latency_disjoint_paths(snapshot, req.src, req.dst, req.k, req.rate_mbps);
  const int available = static_cast<int>(sets.size());

  std::string reason;
  if (available == req.k) {
    reason = constraint_violation(sets.back(), req);
    if (reason.empty()) {
      PathSet out;
      out.paths = sets.back();
      out.spread = out.paths.back().latency - out.paths.front().latency;
      return out;
    }
  } else {
    reason = plural_paths(available);
  }
  int feasible = 0;
  for (int kk = std::min(req.k - 1, available); kk >= 1; --kk) {
    if (constraint_violation(sets[static_cast<std::size_t>(kk - 1)], req).empty()) {
      feasible = kk;
      break;
    }
  }
  return AllocationFailure{reason, feasible};
}

}  // namespace socketstore::kmflash
