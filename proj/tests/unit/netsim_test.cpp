#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "socketstore/error.hpp"
#include "socketstore/netsim/simulator.hpp"
#include "socketstore/netsim/topology.hpp"
#include "socketstore/netsim/topology_io.hpp"

namespace socketstore::netsim {
namespace {

const std::vector<std::string> kDefaultPath{"A-R1", "R1-R3", "R3-R4", "R4-B"};
const std::vector<std::string> kOtherPath{"A-R2", "R2-R3", "R3-R5", "R5-B"};

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::invalid_argument;
}

Packet packet(const FlowId& flow, std::uint64_t seq, SimTime at, int path = 0) {
  return Packet{flow, seq, 1000, at, from_ms(5), path, {}};
}

TEST(Topology, EvaluationTopologyHasSevenNodesEightLinks) {
  const Topology t = evaluation_topology();
  EXPECT_EQ(t.nodes().size(), 7u);
  EXPECT_EQ(t.links().size(), 8u);
  for (const Link& l : t.links()) {
    EXPECT_DOUBLE_EQ(l.capacity_mbps, 100.0);
    EXPECT_EQ(l.base_latency, from_ms(0.5));
  }
  EXPECT_EQ(t.node("A").nic_count, 2);
}

TEST(Topology, RejectsDegenerateInput) {
  EXPECT_EQ(code_of([] { Topology::build({}, {}); }), Errc::empty_topology);
  EXPECT_EQ(code_of([] {
              Topology::build({{"A", NodeKind::host, 1}}, {Link{"", "A", "R9", 100, from_ms(1)}});
            }),
            Errc::unknown_endpoint);
  EXPECT_EQ(code_of([] {
              Topology::build({{"A", NodeKind::host, 1}, {"A", NodeKind::switch_node, 0}}, {});
            }),
            Errc::duplicate_id);
  EXPECT_EQ(code_of([] {
              Topology::build({{"A", NodeKind::host, 1}, {"S", NodeKind::switch_node, 0}},
                              {Link{"", "A", "S", 0, from_ms(1)}});
            }),
            Errc::non_positive_capacity);
}

TEST(Topology, DefaultRoutePrefersLexicographicTie) {
  const auto route = default_route(evaluation_topology(), "A", "B");
  ASSERT_TRUE(route);
  EXPECT_EQ(*route, kDefaultPath);
}

TEST(TopologyIo, ParsesAndRejectsUnknownFields) {
  const Topology t = evaluation_topology();
  const Topology back = parse_topology(serialize_topology(t));
  EXPECT_EQ(back.links().size(), 8u);
  EXPECT_EQ(back.link("R4-B").base_latency, from_ms(0.5));
  EXPECT_EQ(code_of([] { parse_topology(R"({"nodes":[{"id":"A","kind":"host","colour":"red"}]})"); }),
            Errc::malformed_document);
  EXPECT_EQ(code_of([] { parse_topology(R"({"nodes":[]})"); }), Errc::empty_topology);
  const Topology fixture = load_topology(SOCKETSTORE_FIXTURES "/topologies/evaluation.json");
  EXPECT_EQ(fixture.nodes().size(), 7u);
  EXPECT_EQ(fixture.links().size(), 8u);
}

TEST(Simulator, DeployInstallsOneRulePerSwitch) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  EXPECT_EQ(sim.deploy_path(f, 0, kDefaultPath), 3u);
  for (const char* sw : {"R1", "R3", "R4"}) {
    ASSERT_EQ(sim.rules_at(sw).size(), 1u) << sw;
  }
  EXPECT_EQ(sim.rules_at("R3").front().out_link, "R3-R4");
}

TEST(Simulator, DeployRejectsBrokenPaths) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  const std::vector<std::string> gap{"A-R1", "R3-R4", "R4-B"};
  EXPECT_EQ(code_of([&] { sim.deploy_path(f, 0, gap); }), Errc::non_contiguous_path);
  const std::vector<std::string> wrong_start{"R1-R3", "R3-R4", "R4-B"};
  EXPECT_EQ(code_of([&] { sim.deploy_path(f, 0, wrong_start); }), Errc::path_endpoint_mismatch);
  const std::vector<std::string> short_path{"A-R1", "R1-R3"};
  EXPECT_EQ(code_of([&] { sim.deploy_path(f, 0, short_path); }), Errc::path_endpoint_mismatch);
  EXPECT_EQ(sim.rule_count(), 0u);
}

TEST(Simulator, RedeployReplacesRules) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  sim.deploy_path(f, 0, kDefaultPath);
  sim.deploy_path(f, 0, kOtherPath);
  EXPECT_TRUE(sim.rules_at("R1").empty());
  EXPECT_TRUE(sim.rules_at("R4").empty());
  EXPECT_EQ(sim.rules_at("R2").size(), 1u);
  EXPECT_EQ(sim.rules_at("R3").size(), 1u);
  EXPECT_EQ(sim.rules_at("R3").front().out_link, "R3-R5");
}

TEST(Simulator, RetractIsIdempotent) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  sim.deploy_path(f, 0, kDefaultPath);
  EXPECT_EQ(sim.retract_path(f, 0), 3u);
  EXPECT_EQ(sim.retract_path(f, 0), 0u);
  Simulator lone(Topology::build({{"S", NodeKind::switch_node, 0}}, {}));
  EXPECT_EQ(lone.retract_path(f, 0), 0u);
}

TEST(Simulator, InjectionWindowIsHalfOpen) {
  Simulator sim(evaluation_topology());
  sim.inject_latency({"R4-B", from_ms(10), from_ms(40), from_ms(60)});
  EXPECT_EQ(sim.link_delay("R4-B", from_ms(50)), from_ms(10.5));
  EXPECT_EQ(sim.link_delay("R4-B", from_ms(60)), from_ms(0.5));
  EXPECT_EQ(sim.link_delay("R4-B", from_ms(40)), from_ms(10.5));
  EXPECT_EQ(sim.link_delay("R3-R5", from_ms(50)), from_ms(0.5));
  EXPECT_EQ(code_of([&] { sim.inject_latency({"R4-B", SimDuration{0}, from_ms(1), from_ms(2)}); }),
            Errc::non_positive_injection);
  EXPECT_EQ(code_of([&] { sim.inject_latency({"R4-B", from_ms(1), from_ms(2), from_ms(1)}); }),
            Errc::inverted_window);
  EXPECT_EQ(code_of([&] { sim.inject_latency({"nope", from_ms(1), from_ms(1), from_ms(2)}); }),
            Errc::unknown_link);
}

TEST(Simulator, PacketLatencyMatchesLinkSum) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  sim.deploy_path(f, 0, kDefaultPath);
  const DeliveryRecord r = sim.send_packet(packet(f, 0, SimTime{0}));
  EXPECT_TRUE(r.delivered);
  EXPECT_EQ(r.latency, from_ms(2.0));
  EXPECT_FALSE(r.violated_deadline);
  EXPECT_EQ(r.hops.size(), 4u);
}

TEST(Simulator, InjectedLastLinkRaisesLatency) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  sim.deploy_path(f, 0, kDefaultPath);
  sim.inject_latency({"R4-B", from_ms(10), from_ms(40), from_ms(60)});
  sim.run_until(from_ms(38.5));
  const DeliveryRecord r = sim.send_packet(packet(f, 1, from_ms(38.5)));
  EXPECT_TRUE(r.delivered);
  EXPECT_EQ(r.latency, from_ms(12.0));
  EXPECT_TRUE(r.violated_deadline);
}

TEST(Simulator, UnroutedPacketIsDropped) {
  Simulator sim(evaluation_topology());
  const DeliveryRecord r = sim.send_packet(packet({"A", "B", "none"}, 0, SimTime{0}));
  EXPECT_FALSE(r.delivered);
  EXPECT_TRUE(r.hops.empty());
  EXPECT_FALSE(r.drop_reason.empty());
}

TEST(Simulator, LinkStatsReflectInjectionAndReservations) {
  Simulator sim(evaluation_topology());
  sim.inject_latency({"R4-B", from_ms(10), from_ms(40), from_ms(60)});
  LinkStats before = sim.link_stats("R4-B");
  EXPECT_EQ(before.latency_now, from_ms(0.5));
  EXPECT_DOUBLE_EQ(before.capacity_mbps, 100.0);
  EXPECT_DOUBLE_EQ(before.load_mbps, 0.0);
  EXPECT_EQ(before.a, "R4");
  EXPECT_EQ(before.b, "B");
  sim.run_until(from_ms(45));
  EXPECT_EQ(sim.link_stats("R4-B").latency_now, from_ms(10.5));
  sim.reserve("R4-B", 60);
  EXPECT_DOUBLE_EQ(sim.link_stats("R4-B").load_mbps, 60.0);
  EXPECT_EQ(code_of([&] { sim.reserve("R4-B", 50); }), Errc::capacity_exceeded);
  sim.release("R4-B", 60);
  EXPECT_DOUBLE_EQ(sim.link_stats("R4-B").load_mbps, 0.0);
  EXPECT_EQ(code_of([&] { sim.link_stats("X-Y"); }), Errc::unknown_link);
}

TEST(Simulator, RateCountsCarriedTrafficOverTrailingSecond) {
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "f"};
  sim.deploy_path(f, 0, kDefaultPath);
  for (int i = 0; i < 10; ++i) sim.send(Packet{f, std::uint64_t(i), 12500, from_ms(i), from_ms(5), 0, {}}, {});
  sim.run();
  // 10 x 12500 B = 1 Mbit inside the last second.
  EXPECT_NEAR(sim.link_stats("A-R1").rate_mbps, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(sim.link_stats("A-R2").rate_mbps, 0.0);
  sim.run_until(from_seconds(2));
  EXPECT_DOUBLE_EQ(sim.link_stats("A-R1").rate_mbps, 0.0);
}

TEST(Simulator, SnapshotIsDetachedCopy) {
  Simulator sim(evaluation_topology());
  sim.inject_latency({"R4-B", from_ms(10), from_ms(40), from_ms(60)});
  sim.run_until(from_ms(50));
  TopologySnapshot snap = sim.snapshot();
  EXPECT_EQ(snap.nodes.size(), 7u);
  ASSERT_EQ(snap.links.size(), 8u);
  auto it = std::find_if(snap.links.begin(), snap.links.end(), [](const LinkStats& s) { return s.link == "R4-B"; });
  EXPECT_EQ(it->latency_now, from_ms(10.5));
  snap.links.clear();
  EXPECT_EQ(sim.snapshot().links.size(), 8u);

  Simulator lone(Topology::build({{"S", NodeKind::switch_node, 0}}, {}));
  EXPECT_TRUE(lone.snapshot().links.empty());
}

TEST(Simulator, EventsFireInTimeThenInsertionOrder) {
  Simulator sim(evaluation_topology());
  std::vector<int> order;
  sim.schedule_at(from_ms(2), [&] { order.push_back(2); });
  sim.schedule_at(from_ms(1), [&] { order.push_back(0); });
  sim.schedule_at(from_ms(1), [&] { order.push_back(1); });
  const auto cancelled = sim.schedule_at(from_ms(1), [&] { order.push_back(99); });
  sim.cancel(cancelled);
  sim.run();
  EXPECT_EQ(order, (std::vector<int>{0, 1, 2}));
}

TEST(Simulator, DaemonEventsDoNotKeepRunAlive) {
  Simulator sim(evaluation_topology());
  int ticks = 0;
  std::function<void()> tick = [&] {
    ++ticks;
    sim.schedule_in(from_ms(10), tick, true);
  };
  sim.schedule_in(from_ms(10), tick, true);
  sim.schedule_at(from_ms(35), [] {});
  sim.run();
  EXPECT_EQ(ticks, 3);
  EXPECT_EQ(sim.now(), from_ms(35));
}

// Properties over random traffic on the evaluation topology.

struct Trace {
  std::vector<DeliveryRecord> records;
};

Trace random_run(std::uint64_t seed, bool with_injection) {
  std::mt19937_64 rng(seed);
  Simulator sim(evaluation_topology());
  const FlowId f{"A", "B", "p"};
  sim.deploy_path(f, 0, kDefaultPath);
  sim.deploy_path(f, 1, kOtherPath);
  if (with_injection) sim.inject_latency({"R4-B", from_ms(7), from_ms(20), from_ms(45)});
  Trace trace;
  std::uniform_int_distribution<int> gap(0, 3000);
  SimTime t{0};
  for (std::uint64_t seq = 0; seq < 60; ++seq) {
    t += SimDuration{gap(rng) * 1000};
    for (int path = 0; path < 2; ++path) {
      sim.send(packet(f, seq, t, path), [&trace](const DeliveryRecord& r) { trace.records.push_back(r); });
    }
  }
  sim.run();
  return trace;
}

TEST(SimulatorProperties, DeterministicAcrossRuns) {
  const Trace a = random_run(7, true);
  const Trace b = random_run(7, true);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seq, b.records[i].seq);
    EXPECT_EQ(a.records[i].path_index, b.records[i].path_index);
    EXPECT_EQ(a.records[i].arrive_at, b.records[i].arrive_at);
  }
}

TEST(SimulatorProperties, LatencyIsAdditiveAndPathLengthExact) {
  const Topology topo = evaluation_topology();
  const std::vector<LatencyInjection> inj{{"R4-B", from_ms(7), from_ms(20), from_ms(45)}};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const DeliveryRecord& r : random_run(seed, true).records) {
      ASSERT_TRUE(r.delivered);
      const auto& links = r.path_index == 0 ? kDefaultPath : kOtherPath;
      EXPECT_EQ(r.hops.size(), links.size());
      EXPECT_EQ(r.latency, oracle::path_latency(topo, inj, links, r.sent_at));
      SimDuration sum{0};
      for (const HopRecord& h : r.hops) sum += h.delay;
      EXPECT_EQ(sum, r.latency);
    }
  }
}

TEST(SimulatorProperties, InjectionOnlyAffectsTraversingPackets) {
  const Trace clean = random_run(11, false);
  const Trace injected = random_run(11, true);
  ASSERT_EQ(clean.records.size(), injected.records.size());
  auto by_key = [](const Trace& t) {
    std::map<std::pair<std::uint64_t, int>, SimDuration> m;
    for (const auto& r : t.records) m[{r.seq, r.path_index}] = r.latency;
    return m;
  };
  const auto a = by_key(clean);
  const auto b = by_key(injected);
  for (const auto& [key, latency] : a) {
    if (key.second == 1) EXPECT_EQ(latency, b.at(key));
  }
}

TEST(SimulatorProperties, RuleUniquenessUnderRandomWrites) {
  std::mt19937_64 rng(3);
  Simulator sim(evaluation_topology());
  const std::vector<std::string> r3_links{"R1-R3", "R2-R3", "R3-R4", "R3-R5"};
  for (int i = 0; i < 500; ++i) {
    const FlowId f{"A", "B", std::to_string(rng() % 3)};
    sim.install_rule({"R3", f, int(rng() % 2), r3_links[rng() % r3_links.size()]});
  }
  std::set<std::pair<FlowId, int>> keys;
  for (const auto& rule : sim.rules_at("R3")) {
    EXPECT_TRUE(keys.emplace(rule.flow, rule.path_index).second);
  }
  EXPECT_LE(keys.size(), 6u);
}

}  // namespace
}  // namespace socketstore::netsim
