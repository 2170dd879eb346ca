#include <gtest/gtest.h>

#include <random>

#include "didcnc/control.hpp"
#include "didcnc/oracle.hpp"
#include "fixtures.hpp"

namespace didcnc {
namespace {

std::vector<AugmentedLayeredGraph> build_algs(const Scenario& s) {
  std::vector<AugmentedLayeredGraph> out;
  for (const ClientSpec& c : s.clients) out.emplace_back(s.graph, c.service);
  return out;
}

TEST(Admit, ZeroArrivalsAdmitNothing) {
  const Scenario s = testing::two_node_scenario();
  const auto algs = build_algs(s);
  const VirtualQueueState q(s);
  const std::vector<int> none{0};
  const AdmissionResult r = admit(s.clients, none, algs, q, Policy::kDiDcnc);
  EXPECT_TRUE(r.admitted.empty());
  EXPECT_EQ(r.dropped, std::vector<int>{0});
}

TEST(Admit, AllArrivalsOfASlotShareOneRoute) {
  const Scenario s = testing::two_node_scenario();
  const auto algs = build_algs(s);
  const VirtualQueueState q(s);
  const std::vector<int> three{3};
  const AdmissionResult r = admit(s.clients, three, algs, q, Policy::kDiDcnc);
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(r.admitted[0].count, 3);
  EXPECT_EQ(r.admitted[0].client, 0);
  const LoadVector a = accumulate_loads(r.admitted, 2, 1);
  // Processing at S: one unit per request on S, one output packet on S->D.
  EXPECT_DOUBLE_EQ(a.node_load[0], 3.0);
  EXPECT_DOUBLE_EQ(a.link_load[0], 3.0);
}

TEST(Admit, CongestedLineMatchesBruteForce) {
  Scenario s = testing::line_scenario(4, 2.0, 4.0);
  s.graph.set_static_sources("k", {3});
  s.clients.push_back({0, 2, ServiceSpec{{FunctionSpec{0.5, 1.0, "k", 1}}}, 1.0});
  const auto algs = build_algs(s);
  VirtualQueueState q(s);
  q.set_node_backlog(0, 6.0);
  q.set_node_backlog(1, 2.0);
  q.set_link_backlog(0, 3.0);
  const std::vector<int> two{2};
  const AdmissionResult r = admit(s.clients, two, algs, q, Policy::kDiDcnc);
  ASSERT_EQ(r.admitted.size(), 1u);
  const RouteChoice want = brute_force_min_star(algs[0], s.clients[0], q);
  EXPECT_EQ(r.admitted[0].choice.route, want.route);
  EXPECT_EQ(r.admitted[0].choice.weight, want.weight);
}

TEST(Admit, InfeasibleClientIsDropped) {
  Scenario s = testing::two_node_scenario();
  s.clients.push_back({1, 0, s.clients[0].service, 1.0});
  const auto algs = build_algs(s);
  const VirtualQueueState q(s);
  const std::vector<int> arrivals{1, 4};
  const AdmissionResult r = admit(s.clients, arrivals, algs, q, Policy::kDiDcnc);
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(r.dropped, (std::vector<int>{0, 4}));
}

TEST(Admit, SelectorOverridesPolicy) {
  const Scenario s = testing::two_node_scenario();
  const auto algs = build_algs(s);
  VirtualQueueState q(s);
  q.set_node_backlog(0, 500.0);
  const std::vector<int> one{1};
  const AdmissionResult r = admit(s.clients, one, algs, q, policy_selector(Policy::kL2S));
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(r.admitted[0].choice.route.processing, std::vector<NodeId>{0});
}

TEST(AccumulateLoads, ScalesEachRouteByItsCount) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing::random_small_scenario(rng, 5, 2);
    const auto algs = build_algs(s);
    const VirtualQueueState q = testing::random_queues(s, rng);
    const std::vector<int> arrivals{std::uniform_int_distribution<int>(1, 6)(rng)};
    AdmissionResult r;
    try {
      r = admit(s.clients, arrivals, algs, q, Policy::kDiDcnc);
    } catch (const InfeasibleRoute&) {
      continue;
    }
    if (r.admitted.empty()) continue;
    const Admission& a = r.admitted[0];
    const LoadVector total = accumulate_loads(r.admitted, s.graph.node_count(), s.graph.link_count());
    const LoadVector one = route_loads(a.choice.route, s.graph, s.clients[0].service);
    for (std::size_t i = 0; i < one.node_load.size(); ++i) {
      EXPECT_DOUBLE_EQ(total.node_load[i], a.count * one.node_load[i]);
    }
    for (std::size_t l = 0; l < one.link_load.size(); ++l) {
      EXPECT_DOUBLE_EQ(total.link_load[l], a.count * one.link_load[l]);
    }
    // The weight of the chosen route is the queue-weighted load it adds.
    EXPECT_NEAR(a.choice.weight, load_weight(one, q), 1e-12 * (1.0 + a.choice.weight));
  }
}

TEST(UpdateVirtualQueues, AddsLoadsAndDrainsCapacity) {
  const Scenario s = testing::two_node_scenario();
  VirtualQueueState q(s);
  q.set_node_backlog(0, 150.0);
  const LoadVector a{{30.0, 0.0}, {25.0}};
  const VirtualQueueState next = update_virtual_queues(q, a);
  EXPECT_DOUBLE_EQ(next.node_backlog(0), 80.0);
  EXPECT_DOUBLE_EQ(next.node_backlog(1), 0.0);
  EXPECT_DOUBLE_EQ(next.link_backlog(0), 5.0);
}

}  // namespace
}  // namespace didcnc
