#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "random_graphs.hpp"
#include "socketstore/agents/resource_agents.hpp"
#include "socketstore/error.hpp"
#include "socketstore/kmflash/disjoint_paths.hpp"
#include "socketstore/kmflash/km_agent.hpp"
#include "socketstore/kmflash/mirror.hpp"

namespace socketstore::kmflash {
namespace {

using netsim::Simulator;
using netsim::Topology;

AllocationRequest eval_request(int k) { return {"A", "B", k, 10.0, from_ms(5.0), from_ms(1.0)}; }

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::invalid_argument;
}

void expect_disjoint(const PathSet& set) {
  std::multiset<std::string> links;
  for (const Path& p : set.paths) links.insert(p.links.begin(), p.links.end());
  std::set<std::string> unique(links.begin(), links.end());
  EXPECT_EQ(unique.size(), links.size());
}

TEST(Allocate, EvaluationTopologyTwoPaths) {
  Simulator sim(netsim::evaluation_topology());
  auto result = allocate_disjoint_paths(sim.snapshot(), eval_request(2));
  ASSERT_TRUE(std::holds_alternative<PathSet>(result));
  const PathSet& set = std::get<PathSet>(result);
  ASSERT_EQ(set.paths.size(), 2u);
  EXPECT_EQ(set.paths[0].nodes, (std::vector<std::string>{"A", "R1", "R3", "R4", "B"}));
  EXPECT_EQ(set.paths[1].nodes, (std::vector<std::string>{"A", "R2", "R3", "R5", "B"}));
  EXPECT_EQ(set.paths[0].latency, from_ms(2.0));
  EXPECT_EQ(set.paths[1].latency, from_ms(2.0));
  EXPECT_EQ(set.spread, SimDuration{0});
  EXPECT_DOUBLE_EQ(set.paths[0].residual_mbps, 100.0);
  expect_disjoint(set);
}

TEST(Allocate, SingleLinkGraph) {
  Simulator sim(Topology::build({{"h1", netsim::NodeKind::host, 1}, {"h2", netsim::NodeKind::host, 1}},
                                {{"h1-h2", "h1", "h2", 100.0, from_ms(0.5)}}));
  auto result = allocate_disjoint_paths(sim.snapshot(), {"h1", "h2", 1, 10.0, from_ms(5.0)});
  ASSERT_TRUE(std::holds_alternative<PathSet>(result));
  EXPECT_EQ(std::get<PathSet>(result).paths.at(0).links, (std::vector<std::string>{"h1-h2"}));
}

TEST(Allocate, ThreePathsOnEvaluationTopologyFail) {
  Simulator sim(netsim::evaluation_topology());
  auto result = allocate_disjoint_paths(sim.snapshot(), eval_request(3));
  ASSERT_TRUE(std::holds_alternative<AllocationFailure>(result));
  EXPECT_EQ(std::get<AllocationFailure>(result).max_feasible_k, 2);
  EXPECT_EQ(std::get<AllocationFailure>(result).reason, "only 2 disjoint paths");
}

TEST(Allocate, SingleMirrorMatchesDefaultRoute) {
  Simulator sim(netsim::evaluation_topology());
  auto result = allocate_disjoint_paths(sim.snapshot(), eval_request(1));
  ASSERT_TRUE(std::holds_alternative<PathSet>(result));
  EXPECT_EQ(std::get<PathSet>(result).paths.at(0).links,
            *netsim::default_route(sim.topology(), "A", "B"));
}

TEST(Allocate, RejectsBadArguments) {
  Simulator sim(netsim::evaluation_topology());
  const auto snap = sim.snapshot();
  EXPECT_EQ(code_of([&] { allocate_disjoint_paths(snap, {"A", "Z", 1, 10.0, from_ms(5.0)}); }), Errc::unknown_node);
  EXPECT_EQ(code_of([&] { allocate_disjoint_paths(snap, {"A", "A", 1, 10.0, from_ms(5.0)}); }),
            Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { allocate_disjoint_paths(snap, {"A", "B", 0, 10.0, from_ms(5.0)}); }),
            Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { allocate_disjoint_paths(snap, {"A", "B", 1, 0.0, from_ms(5.0)}); }),
            Errc::invalid_argument);
}

TEST(Allocate, TrapTopologyFindsBothPaths) {
  // Greedy shortest-path-then-remove takes S-a-b-D and strands the rest.
  using netsim::NodeKind;
  auto topo = Topology::build(
      {{"S", NodeKind::host, 2}, {"D", NodeKind::host, 2}, {"a", NodeKind::switch_node, 0},
       {"b", NodeKind::switch_node, 0}},
      {{"S-a", "S", "a", 100.0, from_ms(1.0)},
       {"a-b", "a", "b", 100.0, from_ms(1.0)},
       {"b-D", "b", "D", 100.0, from_ms(1.0)},
       {"S-b", "S", "b", 100.0, from_ms(3.0)},
       {"a-D", "a", "D", 100.0, from_ms(3.0)}});
  Simulator sim(topo);
  auto result = allocate_disjoint_paths(sim.snapshot(), {"S", "D", 2, 1.0, from_ms(10.0)});
  ASSERT_TRUE(std::holds_alternative<PathSet>(result));
  const PathSet& set = std::get<PathSet>(result);
  EXPECT_EQ(set.total_latency(), from_ms(8.0));
  EXPECT_EQ(set.paths[0].links, (std::vector<std::string>{"S-a", "a-D"}));
  EXPECT_EQ(set.paths[1].links, (std::vector<std::string>{"S-b", "b-D"}));
}

TEST(Allocate, LatencyBoundFailsWithReason) {
  Simulator sim(netsim::evaluation_topology());
  auto result = allocate_disjoint_paths(sim.snapshot(), {"A", "B", 2, 10.0, from_ms(1.5)});
  ASSERT_TRUE(std::holds_alternative<AllocationFailure>(result));
  EXPECT_EQ(std::get<AllocationFailure>(result).max_feasible_k, 0);
  EXPECT_NE(std::get<AllocationFailure>(result).reason.find("exceeds"), std::string::npos);
}

TEST(Allocate, SpreadBoundUsesInjectedLatency) {
  Simulator sim(netsim::evaluation_topology());
  sim.inject_latency({"R4-B", from_ms(10.0), SimTime{0}, from_ms(100.0)});
  // Only two disjoint paths exist and one now takes 12 ms.
  auto strict = allocate_disjoint_paths(sim.snapshot(), {"A", "B", 2, 10.0, from_ms(20.0), from_ms(1.0)});
  ASSERT_TRUE(std::holds_alternative<AllocationFailure>(strict));
  EXPECT_EQ(std::get<AllocationFailure>(strict).max_feasible_k, 1);
  auto loose = allocate_disjoint_paths(sim.snapshot(), {"A", "B", 2, 10.0, from_ms(20.0), from_ms(10.0)});
  ASSERT_TRUE(std::holds_alternative<PathSet>(loose));
  EXPECT_EQ(std::get<PathSet>(loose).spread, from_ms(10.0));
}

TEST(Allocate, ResidualCapacityFilter) {
  Simulator sim(netsim::evaluation_topology());
  sim.reserve("R3-R5", 95.0);
  auto result = allocate_disjoint_paths(sim.snapshot(), eval_request(2));
  ASSERT_TRUE(std::holds_alternative<AllocationFailure>(result));
  EXPECT_EQ(std::get<AllocationFailure>(result).max_feasible_k, 1);
  auto small = allocate_disjoint_paths(sim.snapshot(), {"A", "B", 2, 5.0, from_ms(5.0)});
  EXPECT_TRUE(std::holds_alternative<PathSet>(small));
}

// -- oracle properties ---------------------------------------------------------

TEST(AllocateProperty, AgreesWithBruteForceAndMaxFlow) {
  std::mt19937_64 rng(20240517);
  const double rate = 10.0;
  int feasible = 0;
  int infeasible = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const Topology topo = testgen::random_graph(rng);
    Simulator sim(topo);
    const auto snap = sim.snapshot();
    auto usable = [&](const std::string& l) { return topo.link(l).capacity_mbps >= rate; };
    auto weight = [&](const std::string& l) { return topo.link(l).base_latency.count(); };
    const auto paths = oracle::all_simple_paths(topo, "S", "D", usable, weight);
    const int flow = oracle::unit_max_flow(topo, "S", "D", usable);
    for (int k = 1; k <= 3; ++k) {
      SCOPED_TRACE("trial " + std::to_string(trial) + " K=" + std::to_string(k));
      const auto brute = oracle::best_disjoint_set(paths, k, [](const auto&) { return true; });
      auto result = allocate_disjoint_paths(snap, {"S", "D", k, rate, from_seconds(100.0), from_seconds(100.0)});
      ASSERT_EQ(std::holds_alternative<PathSet>(result), brute.feasible);
      ++(brute.feasible ? feasible : infeasible);
      if (brute.feasible) {
        const PathSet& set = std::get<PathSet>(result);
        EXPECT_EQ(set.total_latency().count(), brute.min_total);
        EXPECT_EQ(static_cast<int>(set.paths.size()), k);
        expect_disjoint(set);
        for (const Path& p : set.paths) EXPECT_EQ(p.latency, oracle::path_latency(topo, {}, p.links, SimTime{0}));
      } else {
        EXPECT_EQ(std::get<AllocationFailure>(result).max_feasible_k, flow);
      }
    }
  }
  // Both branches must be exercised for the comparison to mean anything.
  EXPECT_GT(feasible, 200);
  EXPECT_GT(infeasible, 100);
}

TEST(AllocateProperty, BindingConstraintsStaySound) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> bound_us(500, 6000);
  for (int trial = 0; trial < 200; ++trial) {
    const Topology topo = testgen::random_graph(rng);
    Simulator sim(topo);
    const AllocationRequest req{"S", "D", 2, 10.0, from_ms(bound_us(rng) / 1000.0), from_ms(bound_us(rng) / 2000.0)};
    auto result = allocate_disjoint_paths(sim.snapshot(), req);
    if (auto* set = std::get_if<PathSet>(&result)) {
      expect_disjoint(*set);
      for (const Path& p : set->paths) {
        EXPECT_LE(p.latency, req.max_latency);
        EXPECT_GE(p.residual_mbps, req.rate_mbps);
      }
      EXPECT_LE(set->spread, req.epsilon);
    } else {
      EXPECT_LT(std::get<AllocationFailure>(result).max_feasible_k, req.k);
    }
  }
}

// -- deployment and mirroring ---------------------------------------------------

class MirrorTest : public ::testing::Test {
 protected:
  MirrorTest() : sim_(netsim::evaluation_topology()) {}

  MirrorHandles deploy(int k = 2) {
    auto alloc = allocate_disjoint_paths(sim_.snapshot(), eval_request(k));
    auto result = deploy_mirror_paths(sim_, flow_, std::get<PathSet>(alloc), eval_request(k));
    return std::get<MirrorHandles>(result);
  }

  Simulator sim_;
  netsim::FlowId flow_{"A", "B", "km-test"};
};

TEST_F(MirrorTest, DeployInstallsRulesAndReservations) {
  auto h = deploy();
  EXPECT_EQ(sim_.rule_count(), 6u);
  EXPECT_DOUBLE_EQ(sim_.link_stats("R1-R3").load_mbps, 10.0);
  EXPECT_DOUBLE_EQ(sim_.link_stats("R3-R5").load_mbps, 10.0);
  retract_mirror_paths(sim_, h);
  retract_mirror_paths(sim_, h);
  EXPECT_EQ(sim_.rule_count(), 0u);
  EXPECT_DOUBLE_EQ(sim_.link_stats("R1-R3").load_mbps, 0.0);
}

TEST_F(MirrorTest, StaleSnapshotRetriesThenFails) {
  auto alloc = allocate_disjoint_paths(sim_.snapshot(), eval_request(2));
  sim_.remove_link("R3-R5");
  auto result = deploy_mirror_paths(sim_, flow_, std::get<PathSet>(alloc), eval_request(2));
  ASSERT_TRUE(std::holds_alternative<AllocationFailure>(result));
  EXPECT_EQ(std::get<AllocationFailure>(result).max_feasible_k, 1);
  EXPECT_EQ(sim_.rule_count(), 0u);
}

TEST_F(MirrorTest, StaleSnapshotRecoversWhenRetrySucceeds) {
  auto alloc = allocate_disjoint_paths(sim_.snapshot(), eval_request(1));
  sim_.remove_link("R1-R3");
  auto result = deploy_mirror_paths(sim_, flow_, std::get<PathSet>(alloc), eval_request(1));
  ASSERT_TRUE(std::holds_alternative<MirrorHandles>(result));
  EXPECT_EQ(std::get<MirrorHandles>(result).paths[0].nodes.at(1), "R2");
}

TEST_F(MirrorTest, EmptyPathSetIsRejected) {
  EXPECT_EQ(code_of([&] { deploy_mirror_paths(sim_, flow_, PathSet{}, eval_request(2)); }), Errc::invalid_argument);
}

TEST_F(MirrorTest, OneCopyPerPathWithLocalInjection) {
  auto h = deploy();
  sim_.inject_latency({"R4-B", from_ms(10.0), SimTime{0}, from_ms(1000.0)});
  auto records = mirror_send_sync(sim_, h, 7, "x", from_ms(5.0));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].seq, 7u);
  EXPECT_EQ(records[1].seq, 7u);
  EXPECT_EQ(records[0].latency, from_ms(12.0));
  EXPECT_TRUE(records[0].violated_deadline);
  EXPECT_EQ(records[1].latency, from_ms(2.0));
  EXPECT_FALSE(records[1].violated_deadline);
}

TEST_F(MirrorTest, HundredSendsGiveTwoHundredRecords) {
  auto h = deploy();
  std::vector<netsim::DeliveryRecord> records;
  for (std::uint64_t seq = 0; seq < 100; ++seq) {
    sim_.schedule_at(from_ms(static_cast<double>(seq)), [&, seq] {
      mirror_send(sim_, h, seq, "p", from_ms(5.0), [&](const auto& r) { records.push_back(r); });
    });
  }
  sim_.run();
  EXPECT_EQ(records.size(), 200u);
  auto stats = collect_stats(records, from_ms(5.0));
  EXPECT_EQ(stats.sent, 100u);
  EXPECT_EQ(stats.delivered_unique, 100u);
  EXPECT_DOUBLE_EQ(stats.in_deadline_ratio, 1.0);
}

TEST_F(MirrorTest, SendAfterRetractIsClosed) {
  auto h = deploy();
  retract_mirror_paths(sim_, h);
  EXPECT_EQ(code_of([&] { mirror_send_sync(sim_, h, 1, "x", from_ms(5.0)); }), Errc::connection_closed);
}

TEST(CollectStats, VacuousAndMixed) {
  EXPECT_DOUBLE_EQ(collect_stats({}, from_ms(5.0)).in_deadline_ratio, 1.0);

  auto rec = [](std::uint64_t seq, bool delivered, double ms) {
    netsim::DeliveryRecord r;
    r.seq = seq;
    r.delivered = delivered;
    r.latency = from_ms(ms);
    return r;
  };
  // seq 0: one copy late, one on time; seq 1: both late; seq 2: both lost.
  std::vector<netsim::DeliveryRecord> records{rec(0, true, 12.0), rec(0, true, 2.0), rec(1, true, 12.0),
                                              rec(1, true, 6.0),  rec(2, false, 0), rec(2, false, 0)};
  auto s = collect_stats(records, from_ms(5.0));
  EXPECT_EQ(s.sent, 3u);
  EXPECT_EQ(s.delivered_unique, 2u);
  EXPECT_EQ(s.deadline_violations, 1u);
  EXPECT_EQ(s.losses, 1u);
  EXPECT_DOUBLE_EQ(s.in_deadline_ratio, 1.0 / 3.0);
}

TEST_F(MirrorTest, CostClosedFormAndFreeze) {
  auto h = deploy();
  EXPECT_DOUBLE_EQ(raw_total(km_cost(h, {}, sim_.now())), 0.0);
  sim_.run_until(from_seconds(10.0));
  EXPECT_NEAR(raw_total(km_cost(h, {}, sim_.now())), 2 * 10.0 * 10.0 * 0.001, 1e-12);
  retract_mirror_paths(sim_, h);
  sim_.run_until(from_seconds(25.0));
  EXPECT_NEAR(raw_total(km_cost(h, {}, sim_.now())), 0.2, 1e-12);
}

// -- the adapter agent ----------------------------------------------------------

class KMirrorAgentTest : public ::testing::Test {
 protected:
  KMirrorAgentTest() : sim_(netsim::evaluation_topology()) {
    agents::register_resource_agents(catalog_);
    register_kmirror_agent(catalog_);
    runtime_ = std::make_unique<agents::Runtime>(catalog_, [this] { return sim_.now(); });
    env_ = runtime_->create_environment("sdn-testbed", &sim_);
  }

  agents::AgentId spawn(const std::string& k) {
    return runtime_->spawn(env_, {"KMirror",
                                  {{"endpointA", "A:5000"},
                                   {"endpointB", "B:6000"},
                                   {"K", k},
                                   {"rate", "10"},
                                   {"max_latency", "5"}}});
  }

  nlohmann::json activate(agents::AgentId km) {
    runtime_->send({agents::kStoreAddress, km, {{"kind", "activate"}}, sim_.now()});
    runtime_->dispatch();
    auto inbox = runtime_->drain_store_inbox();
    EXPECT_EQ(inbox.size(), 1u);
    return inbox.empty() ? nlohmann::json{} : inbox.front().payload;
  }

  Simulator sim_;
  agents::AgentCatalog catalog_;
  std::unique_ptr<agents::Runtime> runtime_;
  agents::EnvironmentId env_;
};

TEST_F(KMirrorAgentTest, ActivationComposesResourceAgents) {
  const auto km = spawn("2");
  const auto reply = activate(km);
  EXPECT_EQ(reply["kind"], "activated");
  EXPECT_EQ(reply["paths"].size(), 2u);
  EXPECT_EQ(sim_.rule_count(), 6u);
  // 5 switches (R1..R5) and 8 links.
  EXPECT_EQ(runtime_->composed(km).size(), 13u);
  bool listed = false;
  for (const auto& v : runtime_->central_view(env_)) {
    if (v.id == km) {
      listed = true;
      EXPECT_EQ(v.kind, agents::AgentKind::adapter);
      EXPECT_EQ(v.composed.size(), 13u);
    }
  }
  EXPECT_TRUE(listed);
  runtime_->destroy(km);
  EXPECT_EQ(sim_.rule_count(), 0u);
}

TEST_F(KMirrorAgentTest, ActivationFailureIsReplied) {
  const auto km = spawn("3");
  const auto reply = activate(km);
  EXPECT_EQ(reply["kind"], "activation_failed");
  EXPECT_EQ(reply["max_feasible_k"], 2);
  EXPECT_EQ(reply["reason"], "allocation failed: only 2 disjoint paths");
  EXPECT_EQ(sim_.rule_count(), 0u);
}

TEST_F(KMirrorAgentTest, InvalidParametersAbortSpawn) {
  EXPECT_EQ(code_of([&] { spawn("0"); }), Errc::schema_violation);
  EXPECT_EQ(code_of([&] {
              runtime_->spawn(env_, {"KMirror",
                                     {{"endpointA", "Q:1"}, {"endpointB", "B:1"}, {"K", "2"}, {"rate", "10"},
                                      {"max_latency", "5"}}});
            }),
            Errc::binding_failure);
}

TEST_F(KMirrorAgentTest, UsageFollowsReservations) {
  const auto km = spawn("2");
  activate(km);
  sim_.run_until(from_seconds(4.0));
  const auto* agent = runtime_->find(km);
  EXPECT_NEAR(raw_total(agent->usage(sim_.now())), 2 * 10.0 * 4.0 * 0.001, 1e-12);
}

}  // namespace
}  // namespace socketstore::kmflash
