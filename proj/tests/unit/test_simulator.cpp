#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "didcnc/ento.hpp"
#include "didcnc/oracle.hpp"
#include "didcnc/simulator.hpp"
#include "fixtures.hpp"

namespace didcnc {
namespace {

EngineOptions checked() {
  EngineOptions o;
  o.check_invariants = true;
  o.warmup_slots = 0;
  return o;
}

void drain(Engine& e, int slots) {
  const std::vector<int> none(e.algs().size(), 0);
  for (int t = 0; t < slots; ++t) e.step(none);
}

RouteSelector fixed(EmbeddedRoute route) {
  return [route](int, const AugmentedLayeredGraph& alg, const ClientSpec&,
                 const VirtualQueueState& q) {
    return RouteChoice{route, route_weight(route, alg, q)};
  };
}

TEST(EntoQueue, ServesFewestCrossedFirst) {
  EntoQueue q;
  q.push(2, 0, 0, 10, 1);
  q.push(0, 5, 1, 11, 1);
  q.push(1, 3, 2, 12, 1);
  std::vector<int> sent;
  auto send = [&](int id, int units, bool) { sent.insert(sent.end(), units, id); };
  auto start = [](int id, bool) { return id; };
  EntoQueue::SlotReport r = q.serve(2.0, send, start);
  EXPECT_EQ(sent, (std::vector<int>{11, 12}));
  EXPECT_EQ(r.units_sent, 2);
  EXPECT_TRUE(r.order_ok);
  r = q.serve(2.0, send, start);
  EXPECT_EQ(sent.back(), 10);
  EXPECT_DOUBLE_EQ(r.used, 1.0);
  EXPECT_TRUE(q.empty());
}

TEST(EntoQueue, BirthBreaksCrossedTies) {
  EntoQueue q;
  q.push(1, 7, 0, 1, 2);
  q.push(1, 4, 9, 2, 1);
  std::vector<int> sent;
  q.serve(1.0, [&](int id, int, bool) { sent.push_back(id); }, [](int id, bool) { return id; });
  EXPECT_EQ(sent, std::vector<int>{2});
}

TEST(EntoQueue, FractionalCapacityCarriesPartialUnit) {
  EntoQueue q;
  q.push(0, 0, 0, 3, 2);
  int sent = 0;
  auto send = [&](int, int units, bool) { sent += units; };
  auto start = [](int id, bool) { return id; };
  q.serve(0.75, send, start);
  EXPECT_EQ(sent, 0);
  EXPECT_EQ(q.in_service(), 3);
  EXPECT_DOUBLE_EQ(q.progress(), 0.75);
  q.serve(0.75, send, start);  // finishes the first unit, starts the second
  EXPECT_EQ(sent, 1);
  EXPECT_DOUBLE_EQ(q.progress(), 0.5);
  q.serve(0.75, send, start);
  EXPECT_EQ(sent, 2);
  EXPECT_TRUE(q.empty());
}

TEST(Engine, NoArrivalsNoActivity) {
  Scenario s = testing::two_node_scenario(0.0);
  s.slot_count = 200;
  const MetricsRecord m = run(s, checked());
  EXPECT_EQ(m.arrivals[0], 0);
  EXPECT_EQ(m.delivered[0], 0);
  for (double b : m.backlog) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(m.invariants.violations, 0);
}

TEST(Engine, DeterministicForASeed) {
  Scenario s = default_grid_scenario();
  for (auto& c : s.clients) c.arrival_rate = 4.0;
  s.slot_count = 300;
  const MetricsRecord a = run(s);
  const MetricsRecord b = run(s);
  EXPECT_EQ(a.arrivals, b.arrivals);
  EXPECT_EQ(a.delivered, b.delivered);
  EXPECT_EQ(a.backlog, b.backlog);
  s.seed = 2;
  EXPECT_NE(run(s).arrivals, a.arrivals);
}

TEST(Engine, SingleRequestDelayAndLoads) {
  const Scenario s = testing::two_node_scenario();
  Engine e(s, checked());
  const std::vector<int> one{1};
  e.step(one);
  drain(e, 5);
  const MetricsRecord& m = e.metrics();
  EXPECT_EQ(m.delivered[0], 1);
  EXPECT_EQ(m.completed[0], 1);
  ASSERT_EQ(m.delay_count, 1);
  // Processed at S in the arrival slot, sent over S->D in the next slot.
  EXPECT_DOUBLE_EQ(m.mean_delay(), 2.0);
  EXPECT_EQ(m.delay_bound_violations, 0);
  EXPECT_EQ(m.invariants.violations, 0);
  EXPECT_GT(m.invariants.checks, 0);
}

TEST(Engine, HalfScalingEmitsOneOutputPerTwoRequests) {
  Scenario s = testing::two_node_scenario();
  s.clients[0].service.functions[0] = FunctionSpec{0.5, 1.0, "k", 0};
  Engine e(s, checked());
  const std::vector<int> one{1};
  e.step(one);
  drain(e, 4);
  EXPECT_EQ(e.metrics().delivered[0], 0);
  e.step(one);
  drain(e, 4);
  EXPECT_EQ(e.metrics().delivered[0], 1);
  EXPECT_EQ(e.metrics().completed[0], 2);
  EXPECT_EQ(e.metrics().invariants.violations, 0);
}

TEST(Engine, StaticPacketsShareTheLink) {
  // Processing at D: one live and zeta = 2 static packets cross S->D.
  const EmbeddedRoute at_d{{1}, {{0, 1}}, {{0, 1}}, {1}};
  auto delay_with_link = [&](double cap) {
    Scenario s = testing::two_node_scenario();
    s.clients[0].service.functions[0].merging_ratio = 2;
    s.graph = NetworkGraph();
    s.graph.add_node("S", 100.0);
    s.graph.add_node("D", 100.0);
    s.graph.add_link(0, 1, cap);
    s.graph.set_static_sources("k", {0});
    EngineOptions o = checked();
    o.selector = fixed(at_d);
    Engine e(s, o);
    const std::vector<int> one{1};
    e.step(one);
    drain(e, 6);
    EXPECT_EQ(e.metrics().delivered[0], 1);
    EXPECT_EQ(e.metrics().invariants.violations, 0);
    return e.metrics().mean_delay();
  };
  // With capacity 2 the second static packet waits one slot.
  EXPECT_DOUBLE_EQ(delay_with_link(2.0), delay_with_link(20.0) + 1.0);
}

TEST(Engine, FractionalProcessingCapacity) {
  Scenario s = testing::two_node_scenario();
  s.graph = NetworkGraph();
  s.graph.add_node("S", 0.5);
  s.graph.add_node("D", 0.5);
  s.graph.add_link(0, 1, 20.0);
  s.graph.set_static_sources("k", {0});
  Engine e(s, checked());
  const std::vector<int> one{1};
  e.step(one);
  drain(e, 8);
  // One processing unit at half a unit per slot takes two slots.
  EXPECT_DOUBLE_EQ(e.metrics().mean_delay(), 3.0);
  EXPECT_EQ(e.metrics().invariants.violations, 0);
}

TEST(Engine, TandemCarriesOfferedLoad) {
  Scenario s = testing::line_scenario(4, 4.0, 4.0);
  s.graph.set_static_sources("k", {1});
  s.clients.push_back({0, 3, ServiceSpec{{FunctionSpec{1.0, 1.0, "k", 1}}}, 1.5});
  s.slot_count = 20000;
  const MetricsRecord m = run(s, EngineOptions{});
  const RunSummary sum = summarize(s, m);
  EXPECT_TRUE(sum.stable);
  EXPECT_NEAR(sum.throughput, 1.5, 0.05);
  EXPECT_EQ(m.delay_bound_violations, 0);
  EXPECT_GE(m.mean_delay(), 3.0);
}

TEST(Engine, InvariantsHoldOnTheGrid) {
  Scenario s = default_grid_scenario();
  for (auto& c : s.clients) c.arrival_rate = 6.0;
  s.slot_count = 400;
  for (Policy p : {Policy::kDiDcnc, Policy::kS2L, Policy::kL2S}) {
    s.policy = p;
    const MetricsRecord m = run(s, checked());
    EXPECT_EQ(m.invariants.violations, 0) << policy_name(p);
    EXPECT_GT(m.invariants.operations, 1000) << policy_name(p);
  }
}

TEST(Engine, OverloadIsUnstable) {
  Scenario s = testing::two_node_scenario(30.0);
  s.slot_count = 20000;
  const MetricsRecord m = run(s);
  const RunSummary sum = summarize(s, m);
  EXPECT_FALSE(sum.stable);
  EXPECT_TRUE(std::isinf(sum.mean_delay));
}

TEST(Engine, StationarySelectorBelowBoundIsStable) {
  Scenario s = testing::line_scenario(3, 2.0, 4.0);
  s.graph.set_static_sources("k", {2});
  s.clients.push_back({0, 2, ServiceSpec{{FunctionSpec{1.0, 1.0, "k", 1}}}, 1.0});
  const PathThroughputBound b = max_throughput_path_lp(s);
  ASSERT_GT(b.theta, 0.0);
  s.clients[0].arrival_rate = 0.8 * b.theta;
  s.slot_count = 20000;
  EngineOptions o;
  o.selector = stationary_selector(b, 5);
  EXPECT_TRUE(summarize(s, run(s, o)).stable);
}

TEST(Stability, SlopeOfLastHalf) {
  std::vector<double> flat(kMinStabilitySeries, 7.0);
  EXPECT_TRUE(detect_stability(flat, 10.0).stable);
  std::vector<double> growing(kMinStabilitySeries);
  for (std::size_t t = 0; t < growing.size(); ++t) growing[t] = 0.5 * static_cast<double>(t);
  const StabilityVerdict v = detect_stability(growing, 10.0);
  EXPECT_NEAR(v.slope, 0.5, 1e-9);
  EXPECT_NEAR(v.normalized_slope, 0.05, 1e-9);
  EXPECT_FALSE(v.stable);
  EXPECT_TRUE(detect_stability(growing, 100.0).stable);
  std::vector<double> short_series(100, 0.0);
  EXPECT_THROW(detect_stability(short_series, 1.0), std::invalid_argument);
}

TEST(Traces, HeadersAndRouteLines) {
  Scenario s = testing::two_node_scenario(2.0);
  s.slot_count = 20;
  std::ostringstream metrics;
  std::ostringstream queues;
  std::ostringstream routes;
  EngineOptions o;
  o.metrics_csv = &metrics;
  o.queue_trace = &queues;
  o.route_trace = &routes;
  run(s, o);
  EXPECT_EQ(metrics.str().rfind("slot,total_backlog,delivered,mean_delay_window\n", 0), 0u);
  EXPECT_EQ(queues.str().rfind("slot,entity,backlog,normalized\n", 0), 0u);
  EXPECT_NE(queues.str().find("link:S-D"), std::string::npos);
  EXPECT_EQ(routes.str().rfind("slot=", 0), 0u);
  EXPECT_NE(routes.str().find(" client=0 "), std::string::npos);
  EXPECT_NE(routes.str().find("policy=DI-DCNC"), std::string::npos);

  std::ostringstream summary;
  write_summary_header(summary);
  EXPECT_EQ(summary.str(),
            "policy,lambda,alpha1,alpha2,cache_index,throughput,mean_delay,stable\n");
}

}  // namespace
}  // namespace didcnc
