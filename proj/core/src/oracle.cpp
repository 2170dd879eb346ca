#include "didcnc/oracle.hpp"

#include <memory>
#include <ostream>
#include <random>

#include <fmt/format.h>

namespace didcnc {

namespace {

using Sense = LinearProgram::Sense;
using Terms = std::vector<std::pair<int, double>>;

// Variable ids of one client's edge-form flows.
struct ClientVars {
  std::vector<std::vector<int>> live;    // [layer][link]
  std::vector<std::vector<int>> stat;    // [stage][link]
  std::vector<std::vector<int>> proc;    // [stage][node]
  std::vector<std::vector<std::pair<NodeId, int>>> source;  // [stage] -> (cache, var)
};

std::string_view kind_label(const WitnessEdge& e) {
  switch (e.kind) {
    case AlgEdgeKind::kTransmission:
      return e.is_static ? "static" : "live";
    case AlgEdgeKind::kProcessing:
      return e.is_static ? "proc_static" : "proc";
    case AlgEdgeKind::kStaticSource:
      return "source";
  }
  return "?";
}

// All simple paths from a to b (a == b gives the single-node path).
std::vector<std::vector<std::vector<NodePath>>> all_simple_paths(const NetworkGraph& g) {
  const auto n = static_cast<NodeId>(g.node_count());
  std::vector<std::vector<std::vector<NodePath>>> out(
      n, std::vector<std::vector<NodePath>>(n));
  for (NodeId a = 0; a < n; ++a) {
    NodePath path{a};
    std::vector<bool> on(n, false);
    on[a] = true;
    std::function<void(NodeId)> dfs = [&](NodeId u) {
      out[a][u].push_back(path);
      for (LinkId l : g.out_links(u)) {
        const NodeId v = g.link(l).to;
        if (on[v]) continue;
        on[v] = true;
        path.push_back(v);
        dfs(v);
        path.pop_back();
        on[v] = false;
      }
    };
    dfs(a);
  }
  return out;
}

}  // namespace

ThroughputBound max_throughput_lp(const Scenario& scenario, bool with_witness) {
  scenario.validate();
  const NetworkGraph& g = scenario.graph;
  const auto n = static_cast<NodeId>(g.node_count());
  const auto links = static_cast<LinkId>(g.link_count());
  LinearProgram lp;
  const int theta = lp.add_variable(1.0);

  std::vector<Terms> node_cap(n);
  std::vector<Terms> link_cap(links);
  std::vector<ClientVars> vars(scenario.clients.size());

  for (std::size_t c = 0; c < scenario.clients.size(); ++c) {
    const ClientSpec& client = scenario.clients[c];
    if (client.arrival_rate <= 0.0) continue;
    const ServiceSpec& s = client.service;
    const int stages = s.stage_count();
    ClientVars& v = vars[c];
    v.live.assign(stages + 1, std::vector<int>(links));
    v.stat.assign(stages, std::vector<int>(links));
    v.proc.assign(stages, std::vector<int>(n));
    v.source.assign(stages, {});
    for (int layer = 0; layer <= stages; ++layer) {
      for (LinkId l = 0; l < links; ++l) {
        v.live[layer][l] = lp.add_variable();
        link_cap[l].emplace_back(v.live[layer][l], 1.0);
      }
    }
    for (int m = 0; m < stages; ++m) {
      const FunctionSpec& fn = s.function(m);
      for (LinkId l = 0; l < links; ++l) {
        v.stat[m][l] = lp.add_variable();
        link_cap[l].emplace_back(v.stat[m][l], 1.0);
      }
      for (NodeId i = 0; i < n; ++i) {
        v.proc[m][i] = lp.add_variable();
        if (fn.workload != 0.0) node_cap[i].emplace_back(v.proc[m][i], fn.workload);
      }
      for (NodeId host : g.static_sources(fn.database)) {
        v.source[m].emplace_back(host, lp.add_variable());
      }
    }
    const double lambda = client.arrival_rate;
    const double out_volume = s.stream_scale(stages);
    // Live and output layers: inflow = outflow at every node.
    for (int layer = 0; layer <= stages; ++layer) {
      for (NodeId i = 0; i < n; ++i) {
        Terms row;
        for (LinkId l : g.in_links(i)) row.emplace_back(v.live[layer][l], 1.0);
        for (LinkId l : g.out_links(i)) row.emplace_back(v.live[layer][l], -1.0);
        if (layer == 0 && i == client.source) row.emplace_back(theta, lambda);
        if (layer > 0) {
          row.emplace_back(v.proc[layer - 1][i], s.function(layer - 1).scaling_factor);
        }
        if (layer < stages) row.emplace_back(v.proc[layer][i], -1.0);
        if (layer == stages && i == client.destination) {
          row.emplace_back(theta, -lambda * out_volume);
        }
        lp.add_row(std::move(row), Sense::kEq, 0.0);
      }
    }
    // Static pipelines: cache injection feeds zeta packets per live packet.
    for (int m = 0; m < stages; ++m) {
      const int zeta = s.function(m).merging_ratio;
      for (NodeId i = 0; i < n; ++i) {
        Terms row;
        for (LinkId l : g.in_links(i)) row.emplace_back(v.stat[m][l], 1.0);
        for (LinkId l : g.out_links(i)) row.emplace_back(v.stat[m][l], -1.0);
        for (const auto& [host, var] : v.source[m]) {
          if (host == i) row.emplace_back(var, 1.0);
        }
        if (zeta != 0) row.emplace_back(v.proc[m][i], -static_cast<double>(zeta));
        lp.add_row(std::move(row), Sense::kEq, 0.0);
      }
    }
  }
  for (NodeId i = 0; i < n; ++i) {
    if (node_cap[i].empty()) continue;
    lp.add_row(node_cap[i], Sense::kLe, scenario.effective_proc_capacity(i));
  }
  for (LinkId l = 0; l < links; ++l) {
    if (link_cap[l].empty()) continue;
    lp.add_row(link_cap[l], Sense::kLe, scenario.effective_link_capacity(l));
  }

  const LpSolution sol = solve(lp);
  ThroughputBound out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.status != LpSolution::Status::kOptimal) return out;
  out.theta = sol.x[theta];
  for (const ClientSpec& c : scenario.clients) out.client_rates.push_back(out.theta * c.arrival_rate);
  out.node_load.assign(n, 0.0);
  out.link_load.assign(links, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    for (const auto& [var, coef] : node_cap[i]) out.node_load[i] += coef * sol.x[var];
  }
  for (LinkId l = 0; l < links; ++l) {
    for (const auto& [var, coef] : link_cap[l]) out.link_load[l] += coef * sol.x[var];
  }
  if (!with_witness) return out;
  constexpr double kZero = 1e-12;
  for (std::size_t c = 0; c < vars.size(); ++c) {
    const ClientVars& v = vars[c];
    const int client = static_cast<int>(c);
    for (std::size_t layer = 0; layer < v.live.size(); ++layer) {
      for (LinkId l = 0; l < links; ++l) {
        const double f = sol.x[v.live[layer][l]];
        if (f > kZero) {
          out.witness.push_back({client, AlgEdgeKind::kTransmission, false,
                                 static_cast<int>(layer), g.link(l).from, g.link(l).to, f});
        }
      }
    }
    for (std::size_t m = 0; m < v.stat.size(); ++m) {
      const int zeta = scenario.clients[c].service.function(static_cast<int>(m)).merging_ratio;
      const int stage = static_cast<int>(m);
      for (LinkId l = 0; l < links; ++l) {
        const double f = sol.x[v.stat[m][l]];
        if (f > kZero) {
          out.witness.push_back({client, AlgEdgeKind::kTransmission, true, stage,
                                 g.link(l).from, g.link(l).to, f});
        }
      }
      for (NodeId i = 0; i < n; ++i) {
        const double f = sol.x[v.proc[m][i]];
        if (f <= kZero) continue;
        out.witness.push_back({client, AlgEdgeKind::kProcessing, false, stage, i, i, f});
        if (zeta) {
          out.witness.push_back({client, AlgEdgeKind::kProcessing, true, stage, i, i, zeta * f});
        }
      }
      for (const auto& [host, var] : v.source[m]) {
        const double f = sol.x[var];
        if (f > kZero) {
          out.witness.push_back({client, AlgEdgeKind::kStaticSource, true, stage, kNoNode,
                                 host, f});
        }
      }
    }
  }
  return out;
}

void write_witness_csv(std::ostream& os, const Scenario& scenario,
                       const ThroughputBound& bound) {
  const NetworkGraph& g = scenario.graph;
  auto name = [&](NodeId i) -> std::string {
    return i == kNoNode ? std::string("o'") : g.node_name(i);
  };
  os << "client,kind,stage,tail,head,flow\n";
  for (const WitnessEdge& e : bound.witness) {
    os << fmt::format("{},{},{},{},{},{:.12g}\n", e.client, kind_label(e), e.stage,
                      name(e.tail), name(e.head), e.flow);
  }
}

void for_each_route(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                    const std::function<void(const EmbeddedRoute&)>& visit) {
  const NetworkGraph& g = alg.graph();
  const int stages = alg.stage_count();
  if (g.node_count() > kEnumerationMaxNodes || stages > kEnumerationMaxStages) {
    throw EnumerationGuardError(fmt::format(
        "route enumeration limited to {} nodes and {} stages (got {} and {})",
        kEnumerationMaxNodes, kEnumerationMaxStages, g.node_count(), stages));
  }
  const auto paths = all_simple_paths(g);
  const auto n = static_cast<NodeId>(g.node_count());
  EmbeddedRoute route;
  route.processing.resize(stages);
  route.live_paths.resize(stages);
  route.static_paths.resize(stages);

  std::function<void(int, NodeId)> stage_step = [&](int m, NodeId at) {
    if (m == stages) {
      for (const NodePath& out : paths[at][client.destination]) {
        route.output_path = out;
        visit(route);
      }
      return;
    }
    const auto caches = g.static_sources(alg.service().function(m).database);
    for (NodeId p = 0; p < n; ++p) {
      if (paths[at][p].empty()) continue;
      route.processing[m] = p;
      for (const NodePath& live : paths[at][p]) {
        route.live_paths[m] = live;
        for (NodeId v : caches) {
          for (const NodePath& st : paths[v][p]) {
            route.static_paths[m] = st;
            stage_step(m + 1, p);
          }
        }
      }
    }
  };
  stage_step(0, client.source);
}

std::vector<EmbeddedRoute> enumerate_routes(const AugmentedLayeredGraph& alg,
                                            const ClientSpec& client) {
  std::vector<EmbeddedRoute> out;
  for_each_route(alg, client, [&](const EmbeddedRoute& r) { out.push_back(r); });
  return out;
}

RouteChoice brute_force_min_star(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                                 const VirtualQueueState& queues) {
  RouteChoice best;
  bool found = false;
  for_each_route(alg, client, [&](const EmbeddedRoute& r) {
    const double w = route_weight(r, alg, queues);
    if (!found || route_precedes(r, w, best.route, best.weight)) {
      best.route = r;
      best.weight = w;
      found = true;
    }
  });
  if (!found) throw InfeasibleRoute("no embedded route for client");
  return best;
}

PathThroughputBound max_throughput_path_lp(const Scenario& scenario) {
  scenario.validate();
  const NetworkGraph& g = scenario.graph;
  LinearProgram lp;
  const int theta = lp.add_variable(1.0);
  std::vector<Terms> node_cap(g.node_count());
  std::vector<Terms> link_cap(g.link_count());
  std::vector<std::vector<EmbeddedRoute>> routes(scenario.clients.size());
  std::vector<std::vector<int>> ids(scenario.clients.size());
  for (std::size_t c = 0; c < scenario.clients.size(); ++c) {
    const ClientSpec& client = scenario.clients[c];
    if (client.arrival_rate <= 0.0) continue;
    const AugmentedLayeredGraph alg(g, client.service);
    routes[c] = enumerate_routes(alg, client);
    Terms demand{{theta, -client.arrival_rate}};
    for (const EmbeddedRoute& r : routes[c]) {
      const int var = lp.add_variable();
      ids[c].push_back(var);
      demand.emplace_back(var, 1.0);
      const LoadVector rho = route_loads(r, g, client.service);
      for (std::size_t i = 0; i < rho.node_load.size(); ++i) {
        if (rho.node_load[i] != 0.0) node_cap[i].emplace_back(var, rho.node_load[i]);
      }
      for (std::size_t l = 0; l < rho.link_load.size(); ++l) {
        if (rho.link_load[l] != 0.0) link_cap[l].emplace_back(var, rho.link_load[l]);
      }
    }
    lp.add_row(std::move(demand), Sense::kEq, 0.0);
  }
  for (std::size_t i = 0; i < node_cap.size(); ++i) {
    if (!node_cap[i].empty()) {
      lp.add_row(node_cap[i], Sense::kLe,
                 scenario.effective_proc_capacity(static_cast<NodeId>(i)));
    }
  }
  for (std::size_t l = 0; l < link_cap.size(); ++l) {
    if (!link_cap[l].empty()) {
      lp.add_row(link_cap[l], Sense::kLe,
                 scenario.effective_link_capacity(static_cast<LinkId>(l)));
    }
  }
  const LpSolution sol = solve(lp);
  PathThroughputBound out;
  out.status = sol.status;
  out.routes.resize(scenario.clients.size());
  out.rates.resize(scenario.clients.size());
  if (sol.status != LpSolution::Status::kOptimal) return out;
  out.theta = sol.x[theta];
  for (std::size_t c = 0; c < routes.size(); ++c) {
    for (std::size_t k = 0; k < routes[c].size(); ++k) {
      const double rate = sol.x[ids[c][k]];
      if (rate <= 1e-12) continue;
      out.routes[c].push_back(routes[c][k]);
      out.rates[c].push_back(rate);
    }
  }
  return out;
}

RouteSelector stationary_selector(const PathThroughputBound& bound, std::uint64_t seed) {
  struct State {
    std::vector<std::vector<EmbeddedRoute>> routes;
    std::vector<std::discrete_distribution<int>> pick;
    std::mt19937_64 rng;
  };
  auto state = std::make_shared<State>();
  state->routes = bound.routes;
  for (const auto& rates : bound.rates) {
    state->pick.emplace_back(rates.begin(), rates.end());
  }
  state->rng.seed(seed);
  return [state](int client, const AugmentedLayeredGraph& alg, const ClientSpec&,
                 const VirtualQueueState& queues) {
    const auto& options = state->routes.at(client);
    if (options.empty()) throw InfeasibleRoute("stationary policy has no route for client");
    RouteChoice choice;
    choice.route = options[state->pick[client](state->rng)];
    choice.weight = route_weight(choice.route, alg, queues);
    return choice;
  };
}

}  // namespace didcnc
