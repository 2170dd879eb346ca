#include "didcnc/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <tuple>

namespace didcnc {

NodeId NetworkGraph::add_node(std::string name, double proc_capacity) {
  if (find_node(name)) {
    throw ScenarioError("nodes: duplicate node id \"" + name + "\"");
  }
  names_.push_back(std::move(name));
  proc_capacity_.push_back(proc_capacity);
  out_.emplace_back();
  in_.emplace_back();
  return static_cast<NodeId>(names_.size() - 1);
}

LinkId NetworkGraph::add_link(NodeId from, NodeId to, double capacity) {
  const auto n = static_cast<NodeId>(node_count());
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw ScenarioError("links: endpoint is not a declared node");
  }
  if (from == to) {
    throw ScenarioError("links: self-loop at node \"" + names_[from] + "\"");
  }
  if (find_link(from, to)) {
    throw ScenarioError("links: duplicate link " + names_[from] + "->" +
                        names_[to]);
  }
  links_.push_back(Link{from, to, capacity});
  const auto id = static_cast<LinkId>(links_.size() - 1);
  out_[from].push_back(id);
  in_[to].push_back(id);
  return id;
}

void NetworkGraph::set_static_sources(std::string db,
                                      std::vector<NodeId> hosts) {
  std::sort(hosts.begin(), hosts.end());
  hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
  for (NodeId h : hosts) {
    if (h < 0 || h >= static_cast<NodeId>(node_count())) {
      throw ScenarioError("databases." + db + ": host is not a declared node");
    }
  }
  static_sources_[std::move(db)] = std::move(hosts);
}

std::optional<NodeId> NetworkGraph::find_node(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<NodeId>(it - names_.begin());
}

NodeId NetworkGraph::node_by_name(std::string_view name) const {
  if (auto id = find_node(name)) return *id;
  throw ScenarioError("unknown node id \"" + std::string(name) + "\"");
}

std::optional<LinkId> NetworkGraph::find_link(NodeId from, NodeId to) const {
  if (from < 0 || from >= static_cast<NodeId>(out_.size())) return std::nullopt;
  for (LinkId l : out_[from]) {
    if (links_[l].to == to) return l;
  }
  return std::nullopt;
}

std::span<const NodeId> NetworkGraph::static_sources(
    const std::string& db) const {
  auto it = static_sources_.find(db);
  if (it == static_sources_.end()) {
    throw ScenarioError("databases: unknown database \"" + db + "\"");
  }
  return it->second;
}

void NetworkGraph::validate() const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!(proc_capacity_[i] > 0.0) || !std::isfinite(proc_capacity_[i])) {
      throw ScenarioError("nodes." + names_[i] +
                          ".capacity: must be positive and finite");
    }
  }
  for (const Link& l : links_) {
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity)) {
      throw ScenarioError("links." + names_[l.from] + "->" + names_[l.to] +
                          ".capacity: must be positive and finite");
    }
  }
  for (const auto& [db, hosts] : static_sources_) {
    if (hosts.empty()) {
      throw ScenarioError("databases." + db + ": empty static-source set");
    }
  }
}

double ServiceSpec::stream_scale(int stage) const {
  double scale = 1.0;
  for (int m = 0; m < stage; ++m) scale *= functions.at(m).scaling_factor;
  return scale;
}

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::kDiDcnc:
      return "DI-DCNC";
    case Policy::kS2L:
      return "S2L";
    case Policy::kL2S:
      return "L2S";
  }
  return "?";
}

Policy parse_policy(std::string_view name) {
  for (Policy p : {Policy::kDiDcnc, Policy::kS2L, Policy::kL2S}) {
    if (name == policy_name(p)) return p;
  }
  if (name == "di-dcnc" || name == "didcnc") return Policy::kDiDcnc;
  if (name == "s2l") return Policy::kS2L;
  if (name == "l2s") return Policy::kL2S;
  throw ScenarioError("policy: unknown policy \"" + std::string(name) + "\"");
}

std::vector<double> Scenario::effective_proc_capacities() const {
  std::vector<double> caps(graph.node_count());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    caps[i] = effective_proc_capacity(static_cast<NodeId>(i));
  }
  return caps;
}

std::vector<double> Scenario::effective_link_capacities() const {
  std::vector<double> caps(graph.link_count());
  for (std::size_t l = 0; l < caps.size(); ++l) {
    caps[l] = effective_link_capacity(static_cast<LinkId>(l));
  }
  return caps;
}

int Scenario::arrival_cap(const ClientSpec& client) const {
  if (max_arrivals_per_slot) return *max_arrivals_per_slot;
  if (client.arrival_rate <= 0.0) return 0;
  return std::max(1, static_cast<int>(std::ceil(10.0 * client.arrival_rate)));
}

void Scenario::validate() const {
  graph.validate();
  if (!(alpha_proc > 0.0 && alpha_proc <= 1.0)) {
    throw ScenarioError("alpha_proc: must lie in (0, 1]");
  }
  if (!(alpha_tx > 0.0 && alpha_tx <= 1.0)) {
    throw ScenarioError("alpha_tx: must lie in (0, 1]");
  }
  if (slot_count < 0) throw ScenarioError("slots: must be non-negative");
  if (max_arrivals_per_slot && *max_arrivals_per_slot < 0) {
    throw ScenarioError("max_arrivals_per_slot: must be non-negative");
  }
  const auto n = static_cast<NodeId>(graph.node_count());
  for (std::size_t c = 0; c < clients.size(); ++c) {
    const ClientSpec& client = clients[c];
    const std::string where = "clients[" + std::to_string(c) + "]";
    if (client.source < 0 || client.source >= n) {
      throw ScenarioError(where + ".source: not a node of the graph");
    }
    if (client.destination < 0 || client.destination >= n) {
      throw ScenarioError(where + ".destination: not a node of the graph");
    }
    if (!(client.arrival_rate >= 0.0) || !std::isfinite(client.arrival_rate)) {
      throw ScenarioError(where + ".rate: must be non-negative");
    }
    if (client.service.functions.empty()) {
      throw ScenarioError(where + ".service: needs at least one function");
    }
    for (std::size_t m = 0; m < client.service.functions.size(); ++m) {
      const FunctionSpec& f = client.service.functions[m];
      const std::string fn = where + ".service[" + std::to_string(m) + "]";
      if (!(f.scaling_factor > 0.0) || !std::isfinite(f.scaling_factor)) {
        throw ScenarioError(fn + ".scaling_factor: must be positive");
      }
      if (!(f.workload >= 0.0) || !std::isfinite(f.workload)) {
        throw ScenarioError(fn + ".workload: must be non-negative");
      }
      if (f.merging_ratio < 0) {
        throw ScenarioError(fn + ".merging_ratio: must be non-negative");
      }
      auto it = graph.databases().find(f.database);
      if (it == graph.databases().end() || it->second.empty()) {
        throw ScenarioError(fn + ".database: \"" + f.database +
                            "\" has no static source");
      }
    }
  }
}

namespace {

struct GridNode {
  const char* name;
  int row;
  int col;
  double capacity;
};

// Order of declaration fixes node indices (A = 0 ... P = 15).
constexpr GridNode kGrid[] = {
    {"A", 1, 1, 10}, {"B", 1, 2, 10}, {"C", 2, 1, 10}, {"D", 2, 2, 10},
    {"E", 0, 0, 5},  {"F", 0, 3, 5},  {"G", 3, 0, 5},  {"H", 3, 3, 5},
    {"I", 0, 1, 5},  {"J", 0, 2, 5},  {"K", 1, 3, 5},  {"L", 2, 3, 5},
    {"M", 3, 2, 5},  {"N", 3, 1, 5},  {"O", 2, 0, 5},  {"P", 1, 0, 5},
};

FunctionSpec fn(double xi, double r, const char* db, int zeta) {
  return FunctionSpec{xi, r, db, zeta};
}

}  // namespace

Scenario default_grid_scenario() {
  Scenario s;
  NetworkGraph& g = s.graph;
  for (const GridNode& node : kGrid) g.add_node(node.name, node.capacity);

  auto at = [](int row, int col) -> NodeId {
    for (std::size_t i = 0; i < std::size(kGrid); ++i) {
      if (kGrid[i].row == row && kGrid[i].col == col) {
        return static_cast<NodeId>(i);
      }
    }
    return kNoNode;
  };
  // Links in row-major order of their tail, then by direction.
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      const NodeId u = at(row, col);
      constexpr int kDr[] = {-1, 0, 0, 1};
      constexpr int kDc[] = {0, -1, 1, 0};
      for (int d = 0; d < 4; ++d) {
        const int r2 = row + kDr[d];
        const int c2 = col + kDc[d];
        if (r2 < 0 || r2 > 3 || c2 < 0 || c2 > 3) continue;
        g.add_link(u, at(r2, c2), 20.0);
      }
    }
  }
  const char* const kHosts[] = {"G", "M", "H", "N", "F", "J", "L", "P"};
  for (int k = 0; k < 8; ++k) {
    g.set_static_sources(std::to_string(k + 1), {g.node_by_name(kHosts[k])});
  }

  auto client = [&](const char* src, const char* dst, FunctionSpec f1,
                    FunctionSpec f2) {
    ClientSpec c;
    c.source = g.node_by_name(src);
    c.destination = g.node_by_name(dst);
    c.service.functions = {std::move(f1), std::move(f2)};
    c.arrival_rate = 4.0;
    s.clients.push_back(std::move(c));
  };
  client("E", "H", fn(1, 0.2, "1", 1), fn(2, 0.2, "2", 1));
  client("F", "G", fn(1, 0.5, "3", 2), fn(1.0 / 2, 0.5, "4", 3));
  client("G", "F", fn(1, 0.1, "5", 1), fn(3, 0.1, "6", 1));
  client("H", "E", fn(1.0 / 2, 1, "7", 5), fn(1.0 / 3, 1, "8", 10));
  return s;
}

std::vector<int> hop_distances(const NetworkGraph& graph, NodeId root) {
  std::vector<int> dist(graph.node_count(), -1);
  std::deque<NodeId> frontier{root};
  dist.at(root) = 0;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (LinkId l : graph.out_links(u)) {
      const NodeId v = graph.link(l).to;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

Scenario with_cache_index(const Scenario& base, int index) {
  const auto n = static_cast<int>(base.graph.node_count());
  if (index < 1 || index > n) {
    throw ScenarioError("cache_index: must lie in 1.." + std::to_string(n));
  }
  Scenario out = base;
  for (const auto& [db, hosts] : base.graph.databases()) {
    if (hosts.empty()) continue;
    const std::vector<int> dist = hop_distances(base.graph, hosts.front());
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](NodeId v) {
      return std::make_tuple(dist[v] < 0 ? n + 1 : dist[v], v);
    };
    std::sort(order.begin(), order.end(),
              [&](NodeId a, NodeId b) { return key(a) < key(b); });
    order.resize(index);
    out.graph.set_static_sources(db, std::move(order));
  }
  return out;
}

}  // namespace didcnc
