#pragma once

#include <random>
#include <string>
#include <vector>

#include "didcnc/model.hpp"
#include "didcnc/queue_state.hpp"

namespace didcnc::testing {

// S -> D, one link of 20, ample processing, database "k" at S. One client
// S -> D with a single function (xi = 1, r = 1, zeta = 1).
inline Scenario two_node_scenario(double rate = 1.0) {
  Scenario s;
  const NodeId a = s.graph.add_node("S", 100.0);
  const NodeId b = s.graph.add_node("D", 100.0);
  s.graph.add_link(a, b, 20.0);
  s.graph.set_static_sources("k", {a});
  s.clients.push_back({a, b, ServiceSpec{{FunctionSpec{1.0, 1.0, "k", 1}}}, rate});
  return s;
}

// Bidirectional line n0 - n1 - ... - n{n-1}.
inline Scenario line_scenario(int nodes, double proc, double link) {
  Scenario s;
  for (int i = 0; i < nodes; ++i) s.graph.add_node("n" + std::to_string(i), proc);
  for (int i = 0; i + 1 < nodes; ++i) {
    s.graph.add_link(i, i + 1, link);
    s.graph.add_link(i + 1, i, link);
  }
  return s;
}

// Small random instance with dyadic capacities and coefficients so every
// route weight is exact in binary floating point.
inline Scenario random_small_scenario(std::mt19937_64& rng, int max_nodes = 5,
                                      int max_stages = 2) {
  auto pick = [&](auto const& values) {
    std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
    return values[d(rng)];
  };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const std::vector<double> caps{1.0, 2.0, 4.0, 8.0};
  const int n = std::uniform_int_distribution<int>(2, max_nodes)(rng);
  Scenario s;
  for (int i = 0; i < n; ++i) s.graph.add_node("v" + std::to_string(i), pick(caps));
  for (int i = 1; i < n; ++i) {
    const NodeId j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    s.graph.add_link(i, j, pick(caps));
    s.graph.add_link(j, i, pick(caps));
  }
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i != j && !s.graph.find_link(i, j) && coin(0.25)) s.graph.add_link(i, j, pick(caps));
    }
  }
  const int stages = std::uniform_int_distribution<int>(1, max_stages)(rng);
  ServiceSpec service;
  for (int m = 0; m < stages; ++m) {
    FunctionSpec f;
    f.scaling_factor = pick(std::vector<double>{0.5, 1.0, 2.0});
    f.workload = pick(std::vector<double>{0.0, 0.25, 0.5, 1.0});
    f.merging_ratio = pick(std::vector<int>{0, 1, 2});
    f.database = "k" + std::to_string(m);
    std::vector<NodeId> hosts{std::uniform_int_distribution<int>(0, n - 1)(rng)};
    if (coin(0.4)) hosts.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
    s.graph.set_static_sources(f.database, hosts);
    service.functions.push_back(f);
  }
  std::uniform_int_distribution<int> node(0, n - 1);
  s.clients.push_back({node(rng), node(rng), service, 1.0});
  return s;
}

// Integer backlogs in [0, max] (dyadic capacities keep the factors exact).
inline VirtualQueueState random_queues(const Scenario& s, std::mt19937_64& rng,
                                       int max = 12, double zero_prob = 0.3) {
  VirtualQueueState q(s);
  std::uniform_int_distribution<int> value(0, max);
  std::bernoulli_distribution zero(zero_prob);
  for (std::size_t i = 0; i < s.graph.node_count(); ++i) {
    q.set_node_backlog(static_cast<NodeId>(i), zero(rng) ? 0.0 : value(rng));
  }
  for (std::size_t l = 0; l < s.graph.link_count(); ++l) {
    q.set_link_backlog(static_cast<LinkId>(l), zero(rng) ? 0.0 : value(rng));
  }
  return q;
}

}  // namespace didcnc::testing
