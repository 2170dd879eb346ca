#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "didcnc/oracle.hpp"
#include "fixtures.hpp"

namespace didcnc {
namespace {

TEST(FlowLp, TwoNodeBoundIsLinkCapacity) {
  const Scenario s = testing::two_node_scenario();
  const ThroughputBound b = max_throughput_lp(s);
  ASSERT_EQ(b.status, LpSolution::Status::kOptimal);
  // Processing at S sends one output packet per request over the 20-packet link.
  EXPECT_NEAR(b.theta, 20.0, 1e-9);
  EXPECT_NEAR(b.client_rates[0], 20.0, 1e-9);
  EXPECT_NEAR(b.link_load[0], 20.0, 1e-9);
}

TEST(FlowLp, HomogeneousInBaseRates) {
  const ThroughputBound one = max_throughput_lp(testing::two_node_scenario(1.0), false);
  const ThroughputBound four = max_throughput_lp(testing::two_node_scenario(4.0), false);
  EXPECT_NEAR(four.theta * 4.0, one.theta, 1e-9);
  EXPECT_NEAR(four.client_rates[0], one.client_rates[0], 1e-9);
}

TEST(FlowLp, RespectsEffectiveCapacities) {
  Scenario s = testing::two_node_scenario();
  s.alpha_tx = 0.5;
  EXPECT_NEAR(max_throughput_lp(s, false).theta, 10.0, 1e-9);
}

TEST(FlowLp, WitnessCarriesProcessingRate) {
  const Scenario s = testing::two_node_scenario();
  const ThroughputBound b = max_throughput_lp(s);
  double proc = 0.0;
  for (const WitnessEdge& e : b.witness) {
    if (e.kind == AlgEdgeKind::kProcessing && !e.is_static) proc += e.flow;
  }
  EXPECT_NEAR(proc, 20.0, 1e-9);
  std::ostringstream os;
  write_witness_csv(os, s, b);
  const std::string csv = os.str();
  EXPECT_EQ(csv.rfind("client,kind,stage,tail,head,flow\n", 0), 0u);
  EXPECT_NE(csv.find(",proc,"), std::string::npos);
}

TEST(FlowLp, UnreachableDestinationGivesZero) {
  Scenario s = testing::two_node_scenario();
  s.clients[0].source = 1;
  s.clients[0].destination = 0;
  const ThroughputBound b = max_throughput_lp(s, false);
  EXPECT_EQ(b.status, LpSolution::Status::kOptimal);
  EXPECT_NEAR(b.theta, 0.0, 1e-12);
}

TEST(Enumeration, TwoNodeInstanceHasTwoRoutes) {
  const Scenario s = testing::two_node_scenario();
  const AugmentedLayeredGraph alg(s.graph, s.clients[0].service);
  EXPECT_EQ(enumerate_routes(alg, s.clients[0]).size(), 2u);
}

TEST(Enumeration, DisconnectedIsEmpty) {
  Scenario s = testing::two_node_scenario();
  s.clients[0].source = 1;
  s.clients[0].destination = 0;
  const AugmentedLayeredGraph alg(s.graph, s.clients[0].service);
  EXPECT_TRUE(enumerate_routes(alg, s.clients[0]).empty());
}

TEST(Enumeration, EveryRouteIsValidAndDistinct) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing::random_small_scenario(rng, 4, 2);
    const AugmentedLayeredGraph alg(s.graph, s.clients[0].service);
    auto routes = enumerate_routes(alg, s.clients[0]);
    for (const EmbeddedRoute& r : routes) {
      EXPECT_TRUE(validate_route(r, alg, s.clients[0]).empty());
    }
    std::sort(routes.begin(), routes.end(), [](const auto& a, const auto& b) {
      return route_precedes(a, 0.0, b, 0.0);
    });
    EXPECT_EQ(std::adjacent_find(routes.begin(), routes.end()), routes.end());
  }
}

TEST(Enumeration, GuardRejectsLargeInstances) {
  const Scenario s = default_grid_scenario();
  const AugmentedLayeredGraph alg(s.graph, s.clients[0].service);
  EXPECT_THROW(enumerate_routes(alg, s.clients[0]), EnumerationGuardError);
  Scenario line = testing::line_scenario(3, 1.0, 1.0);
  line.graph.set_static_sources("k", {0});
  ServiceSpec deep;
  for (int m = 0; m < 3; ++m) deep.functions.push_back(FunctionSpec{1.0, 1.0, "k", 0});
  const AugmentedLayeredGraph alg3(line.graph, deep);
  const ClientSpec c{0, 2, deep, 1.0};
  EXPECT_THROW(enumerate_routes(alg3, c), EnumerationGuardError);
}

TEST(PathLp, AgreesWithFlowLp) {
  std::mt19937_64 rng(77);
  int compared = 0;
  for (int trial = 0; trial < 25; ++trial) {
    Scenario s = testing::random_small_scenario(rng, 4, 2);
    // A second client over the same service shares the capacities.
    std::uniform_int_distribution<int> node(0, static_cast<int>(s.graph.node_count()) - 1);
    s.clients.push_back({node(rng), node(rng), s.clients[0].service, 0.5});
    const ThroughputBound flow = max_throughput_lp(s, false);
    const PathThroughputBound path = max_throughput_path_lp(s);
    ASSERT_EQ(flow.status, LpSolution::Status::kOptimal);
    ASSERT_EQ(path.status, LpSolution::Status::kOptimal);
    EXPECT_NEAR(flow.theta, path.theta, 1e-7 * (1.0 + flow.theta)) << "trial " << trial;
    ++compared;
  }
  EXPECT_EQ(compared, 25);
}

TEST(PathLp, SplitsAcrossProcessingSites) {
  // Line n0 - n1 with small processing capacity at both ends.
  Scenario s = testing::line_scenario(2, 1.0, 8.0);
  s.graph.set_static_sources("k", {1});
  s.clients.push_back({0, 1, ServiceSpec{{FunctionSpec{1.0, 0.5, "k", 0}}}, 1.0});
  const PathThroughputBound b = max_throughput_path_lp(s);
  ASSERT_EQ(b.status, LpSolution::Status::kOptimal);
  // Two nodes of capacity 1 at r = 1/2 give 4 requests per slot in total.
  EXPECT_NEAR(b.theta, 4.0, 1e-9);
  double total = 0.0;
  for (double r : b.rates[0]) total += r;
  EXPECT_NEAR(total, 4.0, 1e-9);
}

}  // namespace
}  // namespace didcnc
