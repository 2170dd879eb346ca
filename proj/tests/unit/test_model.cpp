#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "didcnc/arrivals.hpp"
#include "didcnc/model.hpp"
#include "didcnc/scenario_io.hpp"
#include "fixtures.hpp"

namespace didcnc {
namespace {

TEST(DefaultGrid, MatchesTopologyAndResources) {
  const Scenario s = default_grid_scenario();
  EXPECT_EQ(s.graph.node_count(), 16u);
  EXPECT_EQ(s.graph.link_count(), 48u);
  for (const Link& l : s.graph.links()) EXPECT_DOUBLE_EQ(l.capacity, 20.0);
  for (std::string_view n : {"A", "B", "C", "D"}) {
    EXPECT_DOUBLE_EQ(s.graph.proc_capacity(s.graph.node_by_name(n)), 10.0);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < s.graph.node_count(); ++i) {
    total += s.graph.proc_capacity(static_cast<NodeId>(i));
  }
  EXPECT_DOUBLE_EQ(total, 4 * 10.0 + 12 * 5.0);
  // Every link has its reverse.
  for (const Link& l : s.graph.links()) EXPECT_TRUE(s.graph.find_link(l.to, l.from));
}

TEST(DefaultGrid, ClientTable) {
  const Scenario s = default_grid_scenario();
  ASSERT_EQ(s.clients.size(), 4u);
  const auto& g = s.graph;
  EXPECT_EQ(s.clients[0].source, g.node_by_name("E"));
  EXPECT_EQ(s.clients[0].destination, g.node_by_name("H"));
  EXPECT_EQ(s.clients[1].source, g.node_by_name("F"));
  EXPECT_EQ(s.clients[1].destination, g.node_by_name("G"));
  EXPECT_EQ(s.clients[3].source, g.node_by_name("H"));
  EXPECT_EQ(s.clients[3].destination, g.node_by_name("E"));

  const FunctionSpec f41 = s.clients[3].service.function(0);
  EXPECT_DOUBLE_EQ(f41.scaling_factor, 0.5);
  EXPECT_DOUBLE_EQ(f41.workload, 1.0);
  EXPECT_EQ(f41.database, "7");
  EXPECT_EQ(f41.merging_ratio, 5);
  const FunctionSpec f42 = s.clients[3].service.function(1);
  EXPECT_DOUBLE_EQ(f42.scaling_factor, 1.0 / 3.0);
  EXPECT_EQ(f42.merging_ratio, 10);
  const FunctionSpec f22 = s.clients[1].service.function(1);
  EXPECT_DOUBLE_EQ(f22.scaling_factor, 0.5);
  EXPECT_EQ(f22.merging_ratio, 3);
  const FunctionSpec f32 = s.clients[2].service.function(1);
  EXPECT_DOUBLE_EQ(f32.scaling_factor, 3.0);
  EXPECT_DOUBLE_EQ(f32.workload, 0.1);
}

TEST(DefaultGrid, OneCopyPerDatabaseOnNonCentralNodes) {
  const Scenario s = default_grid_scenario();
  ASSERT_EQ(s.graph.databases().size(), 8u);
  std::vector<NodeId> hosts;
  for (const auto& [db, v] : s.graph.databases()) {
    ASSERT_EQ(v.size(), 1u) << db;
    const std::string& name = s.graph.node_name(v.front());
    EXPECT_TRUE(name != "A" && name != "B" && name != "C" && name != "D") << db;
    hosts.push_back(v.front());
  }
  std::sort(hosts.begin(), hosts.end());
  EXPECT_EQ(std::adjacent_find(hosts.begin(), hosts.end()), hosts.end());
}

TEST(ServiceSpec, StreamScaleIsProductOfScalingFactors) {
  const Scenario s = default_grid_scenario();
  const ServiceSpec& svc = s.clients[3].service;
  EXPECT_DOUBLE_EQ(svc.stream_scale(0), 1.0);
  EXPECT_DOUBLE_EQ(svc.stream_scale(1), 0.5);
  EXPECT_DOUBLE_EQ(svc.stream_scale(2), 0.5 / 3.0);
}

TEST(Scenario, ArrivalCapDefaultsToTenTimesRate) {
  Scenario s = default_grid_scenario();
  ClientSpec c = s.clients[0];
  c.arrival_rate = 4.0;
  EXPECT_EQ(s.arrival_cap(c), 40);
  c.arrival_rate = 0.25;
  EXPECT_EQ(s.arrival_cap(c), 3);
  c.arrival_rate = 0.0;
  EXPECT_EQ(s.arrival_cap(c), 0);
  s.max_arrivals_per_slot = 7;
  EXPECT_EQ(s.arrival_cap(c), 7);
}

TEST(Scenario, ValidationRejectsBadAlpha) {
  Scenario s = default_grid_scenario();
  s.alpha_proc = 0.0;
  EXPECT_THROW(s.validate(), ScenarioError);
  s.alpha_proc = 1.0;
  s.alpha_tx = 1.5;
  EXPECT_THROW(s.validate(), ScenarioError);
}

TEST(Scenario, EffectiveCapacitiesScaleWithAlpha) {
  Scenario s = default_grid_scenario();
  s.alpha_proc = 0.5;
  s.alpha_tx = 0.25;
  EXPECT_DOUBLE_EQ(s.effective_proc_capacity(s.graph.node_by_name("A")), 5.0);
  EXPECT_DOUBLE_EQ(s.effective_link_capacity(0), 5.0);
}

TEST(Graph, RejectsDuplicatesAndSelfLoops) {
  NetworkGraph g;
  const NodeId a = g.add_node("a", 1.0);
  EXPECT_THROW(g.add_node("a", 1.0), ScenarioError);
  EXPECT_THROW(g.add_link(a, a, 1.0), ScenarioError);
  const NodeId b = g.add_node("b", 1.0);
  g.add_link(a, b, 1.0);
  EXPECT_THROW(g.add_link(a, b, 1.0), ScenarioError);
}

TEST(Graph, HopDistancesOnGrid) {
  const Scenario s = default_grid_scenario();
  const auto& g = s.graph;
  const auto d = hop_distances(g, g.node_by_name("E"));
  EXPECT_EQ(d[g.node_by_name("E")], 0);
  EXPECT_EQ(d[g.node_by_name("H")], 6);
  EXPECT_EQ(d[g.node_by_name("A")], 2);
}

TEST(CacheIndex, NestedAndFullAtSixteen) {
  const Scenario base = default_grid_scenario();
  for (int k = 1; k < 16; ++k) {
    const Scenario a = with_cache_index(base, k);
    const Scenario b = with_cache_index(base, k + 1);
    for (const auto& [db, hosts] : a.graph.databases()) {
      EXPECT_EQ(hosts.size(), static_cast<std::size_t>(k));
      const auto more = b.graph.static_sources(db);
      for (NodeId h : hosts) EXPECT_TRUE(std::binary_search(more.begin(), more.end(), h));
    }
  }
  const Scenario full = with_cache_index(base, 16);
  for (const auto& [db, hosts] : full.graph.databases()) EXPECT_EQ(hosts.size(), 16u);
  EXPECT_EQ(with_cache_index(base, 1), base);
  EXPECT_THROW(with_cache_index(base, 0), ScenarioError);
  EXPECT_THROW(with_cache_index(base, 17), ScenarioError);
}

TEST(CacheIndex, AddsNearestNodesFirst) {
  const Scenario base = default_grid_scenario();
  const Scenario s = with_cache_index(base, 3);
  for (const auto& [db, hosts] : s.graph.databases()) {
    const NodeId first = base.graph.static_sources(db).front();
    const auto dist = hop_distances(base.graph, first);
    for (NodeId h : hosts) EXPECT_LE(dist[h], 1) << db;
  }
}

TEST(Policy, NamesRoundTrip) {
  for (Policy p : {Policy::kDiDcnc, Policy::kS2L, Policy::kL2S}) {
    EXPECT_EQ(parse_policy(policy_name(p)), p);
  }
  EXPECT_THROW(parse_policy("greedy"), ScenarioError);
}

TEST(ScenarioIo, RoundTripsDefaultGrid) {
  Scenario s = default_grid_scenario();
  s.alpha_proc = 0.75;
  s.policy = Policy::kL2S;
  s.max_arrivals_per_slot = 12;
  const Scenario back = parse_scenario(serialize_scenario(s));
  EXPECT_EQ(back, s);
}

TEST(ScenarioIo, SaveAndLoadFile) {
  const Scenario s = testing::two_node_scenario();
  const auto path = std::filesystem::temp_directory_path() / "didcnc_io_test.scenario";
  save_scenario(s, path);
  EXPECT_EQ(load_scenario(path), s);
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario(path), ScenarioError);
}

constexpr const char* kTiny = R"({
  "nodes": [{"id": "S", "capacity": 4}, {"id": "D", "capacity": 2}],
  "links": [{"from": "S", "to": "D", "capacity": 20}],
  "databases": {"k": ["S"]},
  "clients": [{"source": "S", "destination": "D", "rate": 1.5,
               "service": [{"scaling_factor": "1/3", "workload": 0.5,
                            "database": "k", "merging_ratio": 2}]}]
})";

TEST(ScenarioIo, ParsesMinimalDocumentWithRationals) {
  const Scenario s = parse_scenario(kTiny);
  ASSERT_EQ(s.clients.size(), 1u);
  EXPECT_DOUBLE_EQ(s.clients[0].service.function(0).scaling_factor, 1.0 / 3.0);
  EXPECT_EQ(s.clients[0].service.function(0).merging_ratio, 2);
  EXPECT_DOUBLE_EQ(s.clients[0].arrival_rate, 1.5);
  EXPECT_EQ(s.policy, Policy::kDiDcnc);
  EXPECT_EQ(s.slot_count, 100000);
}

void expect_error(std::string text, std::string_view fragment) {
  try {
    parse_scenario(text);
    FAIL() << "expected ScenarioError mentioning " << fragment;
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(ScenarioIo, ErrorsNameTheField) {
  std::string text = kTiny;
  expect_error(std::string(text).replace(text.find("\"source\": \"S\""), 13,
                                         "\"source\": \"Z\""),
               "clients[0].source: unknown node id \"Z\"");
  expect_error(std::string(text).replace(text.find("\"rate\""), 6, "\"rte\""), "rte");
  expect_error(std::string(text).replace(text.find("\"merging_ratio\": 2"), 18,
                                         "\"merging_ratio\": 1.5"),
               "merging_ratio");
  expect_error("{", "parse error");
  expect_error(std::string(text).replace(text.find("[\"S\"]"), 5, "[]"), "databases");
}

TEST(ScenarioIo, ParseRational) {
  EXPECT_DOUBLE_EQ(parse_rational("1/3"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(parse_rational("2"), 2.0);
  EXPECT_DOUBLE_EQ(parse_rational("0.25"), 0.25);
  EXPECT_THROW(parse_rational("1/0"), ScenarioError);
  EXPECT_THROW(parse_rational("x"), ScenarioError);
}

TEST(Arrivals, DeterministicPerSeed) {
  Scenario s = default_grid_scenario();
  ArrivalProcess a(s), b(s);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(a.next_slot(), b.next_slot());
  s.seed = 2;
  ArrivalProcess c(s);
  ArrivalProcess d(default_grid_scenario());
  bool differs = false;
  for (int t = 0; t < 100; ++t) differs |= c.next_slot() != d.next_slot();
  EXPECT_TRUE(differs);
}

TEST(Arrivals, PoissonMeanAndCap) {
  Scenario s = default_grid_scenario();
  for (auto& c : s.clients) c.arrival_rate = 3.0;
  ArrivalProcess a(s);
  double sum = 0.0;
  const int slots = 20000;
  for (int t = 0; t < slots; ++t) {
    for (int n : a.next_slot()) {
      EXPECT_LE(n, 30);
      sum += n;
    }
  }
  EXPECT_NEAR(sum / (slots * 4.0), 3.0, 0.05);

  Rng rng(7);
  ClientSpec c = s.clients[0];
  c.arrival_rate = 50.0;
  for (int k = 0; k < 100; ++k) EXPECT_LE(draw_arrivals(c, 5, rng), 5);
  c.arrival_rate = 0.0;
  EXPECT_EQ(draw_arrivals(c, 5, rng), 0);
}

}  // namespace
}  // namespace didcnc
