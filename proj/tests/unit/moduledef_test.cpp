#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "random_nsd.hpp"
#include "socketstore/agents/resource_agents.hpp"
#include "socketstore/error.hpp"
#include "socketstore/kmflash/km_agent.hpp"
#include "socketstore/moduledef/manifest.hpp"
#include "socketstore/moduledef/nsd.hpp"

namespace socketstore::moduledef {
namespace {

const std::filesystem::path kFixtures = SOCKETSTORE_FIXTURES;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ModuledefTest : public ::testing::Test {
 protected:
  ModuledefTest() {
    agents::register_resource_agents(catalog_);
    kmflash::register_kmirror_agent(catalog_);
  }

  const agents::AgentTypeLibrary& library() const { return catalog_.library(); }

  Errc parse_error(const std::string& doc) {
    try {
      parse_nsd(doc, library());
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "accepted: " << doc;
    return Errc::invalid_argument;
  }

  agents::AgentCatalog catalog_;
};

TEST_F(ModuledefTest, FlashDeliveryNsdShape) {
  const Nsd nsd = parse_nsd(read_file(kFixtures / "flash-delivery/nsd.xml"), library());
  ASSERT_EQ(nsd.directives.size(), 1u);
  EXPECT_EQ(nsd.directives[0].type_name, "KMirror");
  ASSERT_EQ(nsd.inputs.size(), 5u);
  std::vector<std::string> names;
  for (const auto& in : nsd.inputs) names.push_back(in.name);
  EXPECT_EQ(names, (std::vector<std::string>{"endpointA", "endpointB", "K", "rate", "max_latency"}));
}

TEST_F(ModuledefTest, UnknownAgentTypeRejected) {
  EXPECT_EQ(parse_error(R"(<nsd><agent id="x" type="CustomExfilAgent"/></nsd>)"), Errc::unknown_agent_type);
}

TEST_F(ModuledefTest, DuplicateDirectiveRejected) {
  EXPECT_EQ(parse_error(R"(<nsd>
      <agent id="s" type="SwitchAgent"><param name="switch" value="R1"/></agent>
      <agent id="s" type="SwitchAgent"><param name="switch" value="R2"/></agent>
    </nsd>)"),
            Errc::duplicate_directive);
}

TEST_F(ModuledefTest, WiringCycleRejected) {
  const std::string km = R"(<param name="endpointA" value="A:1"/><param name="endpointB" value="B:1"/>
      <param name="K" value="2"/><param name="rate" value="10"/><param name="max_latency" value="5"/>)";
  EXPECT_EQ(parse_error("<nsd><agent id=\"a\" type=\"KMirror\">" + km + "</agent><agent id=\"b\" type=\"KMirror\">" +
                        km + "</agent><wire from=\"a\" to=\"b\"/><wire from=\"b\" to=\"a\"/></nsd>"),
            Errc::wiring_cycle);
  EXPECT_EQ(parse_error("<nsd><agent id=\"a\" type=\"KMirror\">" + km + "</agent><wire from=\"a\" to=\"a\"/></nsd>"),
            Errc::wiring_cycle);
}

TEST_F(ModuledefTest, StructuralErrors) {
  EXPECT_EQ(parse_error("<nsd><agent id="), Errc::malformed_document);
  EXPECT_EQ(parse_error("<modules/>"), Errc::malformed_document);
  EXPECT_EQ(parse_error(R"(<nsd><bogus/></nsd>)"), Errc::malformed_document);
  EXPECT_EQ(parse_error(R"(<nsd><agent id="s" type="SwitchAgent" colour="red"/></nsd>)"),
            Errc::malformed_document);
  EXPECT_EQ(parse_error(R"(<nsd><agent id="s" type="SwitchAgent"><param name="switch" value="$sw"/></agent></nsd>)"),
            Errc::unresolved_reference);
  EXPECT_EQ(parse_error(R"(<nsd><input name="n" type="int"/>
      <agent id="s" type="SwitchAgent"><param name="switch" value="$n"/></agent></nsd>)"),
            Errc::schema_violation);
  EXPECT_EQ(parse_error(R"(<nsd><agent id="s" type="SwitchAgent"/></nsd>)"), Errc::schema_violation);
  EXPECT_EQ(parse_error(R"(<nsd><agent id="s" type="SwitchAgent"><param name="switch" value="R1"/></agent>
      <agent id="t" type="SwitchAgent"><param name="switch" value="R2"/></agent>
      <wire from="s" to="t"/></nsd>)"),
            Errc::schema_violation);
  EXPECT_EQ(parse_error(R"(<nsd><agent id="s" type="SwitchAgent"><param name="switch" value="R1"/></agent>
      <wire from="s" to="ghost"/></nsd>)"),
            Errc::unresolved_reference);
}

TEST_F(ModuledefTest, RoundTripFixtureEmptyAndOrder) {
  const Nsd flash = parse_nsd(read_file(kFixtures / "flash-delivery/nsd.xml"), library());
  EXPECT_EQ(parse_nsd(serialize_nsd(flash), library()), flash);

  const Nsd empty;
  EXPECT_EQ(parse_nsd(serialize_nsd(empty), library()), empty);

  Nsd ordered;
  for (const char* sw : {"R5", "R1", "R3"}) ordered.directives.push_back({sw, "SwitchAgent", {{"switch", sw}}});
  const Nsd back = parse_nsd(serialize_nsd(ordered), library());
  ASSERT_EQ(back.directives.size(), 3u);
  EXPECT_EQ(back.directives[0].id, "R5");
  EXPECT_EQ(back.directives[2].id, "R3");
}

TEST_F(ModuledefTest, RoundTripRandomDocuments) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Nsd nsd = testgen::random_nsd(rng);
    ASSERT_NO_THROW(validate_nsd(nsd, library()));
    const std::string text = serialize_nsd(nsd);
    const Nsd back = parse_nsd(text, library());
    ASSERT_EQ(back, nsd) << text;
    EXPECT_EQ(serialize_nsd(back), text);
  }
}

TEST_F(ModuledefTest, InstantiationOrderPutsTargetsFirst) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Nsd nsd = testgen::random_nsd(rng);
    const auto order = instantiation_order(nsd);
    std::vector<std::size_t> position(order.size());
    for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = p;
    for (const Wire& w : nsd.wires) {
      const auto from = static_cast<std::size_t>(nsd.find(w.from) - nsd.directives.data());
      const auto to = static_cast<std::size_t>(nsd.find(w.to) - nsd.directives.data());
      EXPECT_LT(position[to], position[from]);
    }
  }
}

TEST_F(ModuledefTest, BindParamsSubstitutesInputs) {
  const Nsd nsd = parse_nsd(read_file(kFixtures / "flash-delivery/nsd.xml"), library());
  const std::map<std::string, std::string> inputs{
      {"endpointA", "A:5000"}, {"endpointB", "B:6000"}, {"K", "2"}, {"rate", "10"}, {"max_latency", "5"}};
  EXPECT_NO_THROW(require_inputs(nsd, inputs));
  const auto params = bind_params(nsd.directives[0], inputs);
  EXPECT_EQ(params.at("K"), "2");
  EXPECT_EQ(params.at("endpointB"), "B:6000");

  auto partial = inputs;
  partial.erase("rate");
  try {
    require_inputs(nsd, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_input);
  }
  const Directive literal{"l", "LinkAgent", {{"link", "$$cash"}}};
  EXPECT_EQ(bind_params(literal, {}).at("link"), "$cash");
}

// -- manifest --------------------------------------------------------------------

TEST_F(ModuledefTest, FlashDeliveryManifestIsValid) {
  const ModulePackage pkg = load_module_package(kFixtures / "flash-delivery");
  MetricRegistry metrics;
  for (const auto& m : pkg.metrics) metrics.emplace(m.metric_id, m);
  EXPECT_EQ(pkg.manifest.module_id, "flash-delivery");
  EXPECT_EQ(metrics.at("in_deadline_ratio").direction, MetricDirection::higher_better);
  EXPECT_EQ(metrics.at("in_deadline_ratio").unit, "ratio");
  EXPECT_TRUE(validate_manifest(pkg.manifest, library(), metrics).empty());
  EXPECT_EQ(manifest_from_json(to_json(pkg.manifest)), pkg.manifest);
}

TEST_F(ModuledefTest, ManifestViolationsAreCollected) {
  ModuleManifest m = load_module_package(kFixtures / "flash-delivery").manifest;
  const MetricRegistry metrics{{"in_deadline_ratio", {"in_deadline_ratio", "r", "ratio", MetricDirection::higher_better}}};

  ModuleManifest no_metric = m;
  no_metric.metric_ids.clear();
  EXPECT_EQ(validate_manifest(no_metric, library(), metrics), (std::vector<std::string>{"module must declare a metric"}));

  ModuleManifest negative = m;
  negative.price = -1;
  EXPECT_EQ(validate_manifest(negative, library(), metrics), (std::vector<std::string>{"negative price"}));

  ModuleManifest several = m;
  several.metric_ids = {"latency_p99"};
  several.price = -2;
  several.nsd = R"(<nsd><agent id="x" type="CustomExfilAgent"/></nsd>)";
  EXPECT_EQ(validate_manifest(several, library(), metrics).size(), 3u);
}

TEST_F(ModuledefTest, ManifestJsonRejectsUnknownFields) {
  auto doc = to_json(load_module_package(kFixtures / "flash-delivery").manifest);
  doc["signature"] = "abc";
  try {
    manifest_from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_document);
  }
}

TEST(ModuleState, TransitionMatrix) {
  int legal = 0;
  for (ModuleState from : kAllStates) {
    for (ModuleState to : kAllStates) {
      const bool expected = (from == ModuleState::submitted && to == ModuleState::in_review) ||
                            (from == ModuleState::in_review && to == ModuleState::revision_requested) ||
                            (from == ModuleState::in_review && to == ModuleState::published) ||
                            (from == ModuleState::revision_requested && to == ModuleState::in_review) ||
                            (from == ModuleState::published && to == ModuleState::retired);
      EXPECT_EQ(is_legal_transition(from, to), expected) << to_string(from) << "->" << to_string(to);
      legal += expected;
    }
  }
  EXPECT_EQ(legal, 5);
  for (ModuleState s : kAllStates) EXPECT_EQ(parse_module_state(to_string(s)), s);
}

}  // namespace
}  // namespace socketstore::moduledef
