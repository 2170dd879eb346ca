#include "didcnc/alg.hpp"

#include <algorithm>
#include <sstream>

namespace didcnc {

AugmentedLayeredGraph::AugmentedLayeredGraph(const NetworkGraph& graph,
                                             const ServiceSpec& service)
    : graph_(&graph),
      service_(service),
      stages_(service.stage_count()),
      n_(graph.node_count()) {
  if (stages_ < 1) throw ScenarioError("service: needs at least one function");
  for (int m = 0; m < stages_; ++m) {
    const std::string& db = service.function(m).database;
    if (!graph.has_database(db) || graph.static_sources(db).empty()) {
      throw ScenarioError("service[" + std::to_string(m) + "].database: \"" +
                          db + "\" has no static source");
    }
  }

  const std::size_t total = (2 * stages_ + 1) * n_ + stages_;
  vertices_.resize(total);
  out_.resize(total);
  in_.resize(total);
  for (int layer = 0; layer <= stages_; ++layer) {
    for (std::size_t i = 0; i < n_; ++i) {
      vertices_[live_vertex(layer, static_cast<NodeId>(i))] =
          AlgVertex{static_cast<NodeId>(i), layer, AlgVertex::Pipeline::kLive};
    }
  }
  for (int m = 0; m < stages_; ++m) {
    for (std::size_t i = 0; i < n_; ++i) {
      vertices_[static_vertex(m, static_cast<NodeId>(i))] =
          AlgVertex{static_cast<NodeId>(i), m, AlgVertex::Pipeline::kStatic};
    }
    vertices_[super_source(m)] =
        AlgVertex{kNoNode, m, AlgVertex::Pipeline::kStatic};
  }

  for (int layer = 0; layer <= stages_; ++layer) {
    live_coef_.push_back(service.stream_scale(layer));
  }
  for (int m = 0; m < stages_; ++m) {
    const FunctionSpec& f = service.function(m);
    static_coef_.push_back(f.merging_ratio * live_coef_[m]);
    proc_coef_.push_back(f.workload * live_coef_[m]);
  }

  // Transmission edges: one copy of every link per live layer and per
  // static pipeline.
  for (int layer = 0; layer <= stages_; ++layer) {
    for (LinkId l = 0; l < static_cast<LinkId>(graph.link_count()); ++l) {
      const Link& link = graph.link(l);
      add_edge(AlgEdge{live_vertex(layer, link.from), live_vertex(layer, link.to),
                       AlgEdgeKind::kTransmission, l, kNoNode, layer, false});
    }
  }
  for (int m = 0; m < stages_; ++m) {
    for (LinkId l = 0; l < static_cast<LinkId>(graph.link_count()); ++l) {
      const Link& link = graph.link(l);
      add_edge(AlgEdge{static_vertex(m, link.from), static_vertex(m, link.to),
                       AlgEdgeKind::kTransmission, l, kNoNode, m, true});
    }
  }
  // Processing edges into the next live layer, from the live layer and from
  // the static pipeline of the stage.
  for (int m = 0; m < stages_; ++m) {
    for (std::size_t i = 0; i < n_; ++i) {
      const auto node = static_cast<NodeId>(i);
      add_edge(AlgEdge{live_vertex(m, node), live_vertex(m + 1, node),
                       AlgEdgeKind::kProcessing, kNoLink, node, m, false});
      add_edge(AlgEdge{static_vertex(m, node), live_vertex(m + 1, node),
                       AlgEdgeKind::kProcessing, kNoLink, node, m, true});
    }
  }
  for (int m = 0; m < stages_; ++m) {
    for (NodeId v : graph.static_sources(service.function(m).database)) {
      add_edge(AlgEdge{super_source(m), static_vertex(m, v),
                       AlgEdgeKind::kStaticSource, kNoLink, v, m, true});
    }
  }
}

AlgEdgeId AugmentedLayeredGraph::add_edge(AlgEdge e) {
  const auto id = static_cast<AlgEdgeId>(edges_.size());
  out_[e.tail].push_back(id);
  in_[e.head].push_back(id);
  edges_.push_back(e);
  return id;
}

VertexId AugmentedLayeredGraph::live_vertex(int layer, NodeId i) const {
  return static_cast<VertexId>(layer * n_ + i);
}

VertexId AugmentedLayeredGraph::static_vertex(int stage, NodeId i) const {
  return static_cast<VertexId>((stages_ + 1 + stage) * n_ + i);
}

VertexId AugmentedLayeredGraph::super_source(int stage) const {
  return static_cast<VertexId>((2 * stages_ + 1) * n_ + stage);
}

std::size_t AugmentedLayeredGraph::count_edges(AlgEdgeKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(),
      [kind](const AlgEdge& e) { return e.kind == kind; }));
}

std::string AugmentedLayeredGraph::to_dot() const {
  std::ostringstream os;
  auto label = [&](VertexId v) {
    const AlgVertex& x = vertices_[v];
    if (x.is_super_source()) return "o'" + std::to_string(x.layer + 1);
    std::string name = graph_->node_name(x.node);
    if (x.pipeline == AlgVertex::Pipeline::kStatic) {
      return name + "'" + std::to_string(x.layer + 1);
    }
    return name + "_" + std::to_string(x.layer + 1);
  };
  os << "digraph alg {\n  rankdir=LR;\n";
  for (int layer = 0; layer <= stages_; ++layer) {
    os << "  subgraph cluster_live_" << layer << " {\n    label=\""
       << (layer == stages_ ? "output" : "live layer " + std::to_string(layer + 1))
       << "\";\n";
    for (std::size_t i = 0; i < n_; ++i) {
      const VertexId v = live_vertex(layer, static_cast<NodeId>(i));
      os << "    v" << v << " [label=\"" << label(v) << "\"];\n";
    }
    os << "  }\n";
  }
  for (int m = 0; m < stages_; ++m) {
    os << "  subgraph cluster_static_" << m << " {\n    label=\"static "
       << (m + 1) << " (" << service_.function(m).database << ")\";\n";
    for (std::size_t i = 0; i < n_; ++i) {
      const VertexId v = static_vertex(m, static_cast<NodeId>(i));
      os << "    v" << v << " [label=\"" << label(v) << "\"];\n";
    }
    os << "    v" << super_source(m) << " [label=\"" << label(super_source(m))
       << "\", shape=box];\n  }\n";
  }
  for (const AlgEdge& e : edges_) {
    os << "  v" << e.tail << " -> v" << e.head;
    switch (e.kind) {
      case AlgEdgeKind::kTransmission:
        os << (e.is_static ? " [color=green]" : " [color=blue]");
        break;
      case AlgEdgeKind::kProcessing:
        os << " [style=bold, color=red]";
        break;
      case AlgEdgeKind::kStaticSource:
        os << " [style=dashed]";
        break;
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

AugmentedLayeredGraph build_alg(const NetworkGraph& graph,
                                const ServiceSpec& service) {
  return AugmentedLayeredGraph(graph, service);
}

int EmbeddedRoute::alg_edge_count() const {
  int count = 0;
  for (const NodePath& p : live_paths) count += static_cast<int>(p.size()) - 1;
  for (const NodePath& p : static_paths) count += static_cast<int>(p.size()) + 1;
  count += stage_count();
  count += static_cast<int>(output_path.size()) - 1;
  return count;
}

int EmbeddedRoute::live_hop_count() const {
  int count = 0;
  for (const NodePath& p : live_paths) count += static_cast<int>(p.size()) - 1;
  return count + static_cast<int>(output_path.size()) - 1;
}

std::vector<NodeId> EmbeddedRoute::node_sequence() const {
  std::vector<NodeId> seq;
  for (std::size_t m = 0; m < live_paths.size(); ++m) {
    seq.insert(seq.end(), live_paths[m].begin(), live_paths[m].end());
    if (m < static_paths.size()) {
      seq.insert(seq.end(), static_paths[m].begin(), static_paths[m].end());
    }
  }
  seq.insert(seq.end(), output_path.begin(), output_path.end());
  return seq;
}

double edge_weight(const AugmentedLayeredGraph& alg, const AlgEdge& edge,
                   const VirtualQueueState& queues) {
  switch (edge.kind) {
    case AlgEdgeKind::kStaticSource:
      return 0.0;
    case AlgEdgeKind::kProcessing:
      if (edge.is_static) return 0.0;
      return alg.processing_coefficient(edge.stage) * queues.node_factor(edge.node);
    case AlgEdgeKind::kTransmission:
      if (edge.is_static) {
        return alg.static_coefficient(edge.stage) * queues.link_factor(edge.link);
      }
      return alg.live_coefficient(edge.stage) * queues.link_factor(edge.link);
  }
  return 0.0;
}

std::vector<double> edge_weights(const AugmentedLayeredGraph& alg,
                                 const VirtualQueueState& queues) {
  std::vector<double> w;
  w.reserve(alg.edge_count());
  for (const AlgEdge& e : alg.edges()) w.push_back(edge_weight(alg, e, queues));
  return w;
}

namespace {

void check_shape(const EmbeddedRoute& route, int stages) {
  if (route.stage_count() != stages ||
      static_cast<int>(route.live_paths.size()) != stages ||
      static_cast<int>(route.static_paths.size()) != stages) {
    throw RouteError("route does not match the service stage count");
  }
  for (int m = 0; m < stages; ++m) {
    if (route.live_paths[m].empty() || route.static_paths[m].empty()) {
      throw RouteError("route has an empty path at stage " + std::to_string(m));
    }
  }
  if (route.output_path.empty()) throw RouteError("route has no output path");
}

template <class Fn>
void for_each_hop(const NetworkGraph& graph, const NodePath& path, Fn&& fn) {
  for (std::size_t h = 0; h + 1 < path.size(); ++h) {
    auto l = graph.find_link(path[h], path[h + 1]);
    if (!l) {
      throw RouteError("path step " + std::to_string(path[h]) + "->" +
                       std::to_string(path[h + 1]) + " is not a link");
    }
    fn(*l);
  }
}

}  // namespace

LoadVector route_loads(const EmbeddedRoute& route, const NetworkGraph& graph,
                       const ServiceSpec& service) {
  const int stages = service.stage_count();
  check_shape(route, stages);
  LoadVector loads;
  loads.node_load.assign(graph.node_count(), 0.0);
  loads.link_load.assign(graph.link_count(), 0.0);
  for (int m = 0; m < stages; ++m) {
    const FunctionSpec& f = service.function(m);
    const double kappa = service.stream_scale(m);
    if (route.live_paths[m].back() != route.processing[m] ||
        route.static_paths[m].back() != route.processing[m]) {
      throw RouteError("path/processing mismatch at stage " + std::to_string(m));
    }
    loads.node_load.at(route.processing[m]) += f.workload * kappa;
    for_each_hop(graph, route.live_paths[m],
                 [&](LinkId l) { loads.link_load[l] += kappa; });
    const double static_scale = f.merging_ratio * kappa;
    for_each_hop(graph, route.static_paths[m],
                 [&](LinkId l) { loads.link_load[l] += static_scale; });
  }
  const double out_scale = service.stream_scale(stages);
  for_each_hop(graph, route.output_path,
               [&](LinkId l) { loads.link_load[l] += out_scale; });
  return loads;
}

double route_weight(const EmbeddedRoute& route,
                    const AugmentedLayeredGraph& alg,
                    const VirtualQueueState& queues) {
  const NetworkGraph& graph = alg.graph();
  const int stages = alg.stage_count();
  check_shape(route, stages);
  double acc = 0.0;
  for (int m = 0; m < stages; ++m) {
    const double live = alg.live_coefficient(m);
    for_each_hop(graph, route.live_paths[m],
                 [&](LinkId l) { acc += live * queues.link_factor(l); });
    double fetch = 0.0;
    const double stat = alg.static_coefficient(m);
    for_each_hop(graph, route.static_paths[m],
                 [&](LinkId l) { fetch += stat * queues.link_factor(l); });
    acc += alg.processing_coefficient(m) * queues.node_factor(route.processing[m]) +
           fetch;
  }
  const double out = alg.live_coefficient(stages);
  for_each_hop(graph, route.output_path,
               [&](LinkId l) { acc += out * queues.link_factor(l); });
  return acc;
}

double load_weight(const LoadVector& loads, const VirtualQueueState& queues) {
  double total = 0.0;
  for (std::size_t i = 0; i < loads.node_load.size(); ++i) {
    total += loads.node_load[i] * queues.node_factor(static_cast<NodeId>(i));
  }
  for (std::size_t l = 0; l < loads.link_load.size(); ++l) {
    total += loads.link_load[l] * queues.link_factor(static_cast<LinkId>(l));
  }
  return total;
}

std::vector<AlgEdgeId> route_alg_edges(const EmbeddedRoute& route,
                                       const AugmentedLayeredGraph& alg) {
  const int stages = alg.stage_count();
  check_shape(route, stages);
  auto find_edge = [&](VertexId tail, VertexId head) {
    for (AlgEdgeId e : alg.out_edges(tail)) {
      if (alg.edge(e).head == head) return e;
    }
    throw RouteError("route step is not an ALG edge");
  };
  std::vector<AlgEdgeId> out;
  auto walk = [&](const NodePath& path, auto&& vertex_of) {
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      out.push_back(find_edge(vertex_of(path[h]), vertex_of(path[h + 1])));
    }
  };
  for (int m = 0; m < stages; ++m) {
    walk(route.live_paths[m], [&](NodeId i) { return alg.live_vertex(m, i); });
    const NodePath& sp = route.static_paths[m];
    out.push_back(find_edge(alg.super_source(m), alg.static_vertex(m, sp.front())));
    walk(sp, [&](NodeId i) { return alg.static_vertex(m, i); });
    const NodeId p = route.processing[m];
    out.push_back(find_edge(alg.static_vertex(m, p), alg.live_vertex(m + 1, p)));
    out.push_back(find_edge(alg.live_vertex(m, p), alg.live_vertex(m + 1, p)));
  }
  walk(route.output_path, [&](NodeId i) { return alg.live_vertex(stages, i); });
  return out;
}

std::string_view violation_name(RouteViolation::Kind kind) {
  switch (kind) {
    case RouteViolation::Kind::kShape:
      return "shape";
    case RouteViolation::Kind::kNotALink:
      return "not-a-link";
    case RouteViolation::Kind::kAcyclic:
      return "acyclic";
    case RouteViolation::Kind::kDisconnected:
      return "disconnected";
    case RouteViolation::Kind::kMerging:
      return "merging";
    case RouteViolation::Kind::kStaticSource:
      return "static-source";
  }
  return "?";
}

std::vector<RouteViolation> validate_route(const EmbeddedRoute& route,
                                           const AugmentedLayeredGraph& alg,
                                           const ClientSpec& client) {
  using Kind = RouteViolation::Kind;
  std::vector<RouteViolation> out;
  const NetworkGraph& graph = alg.graph();
  const int stages = alg.stage_count();
  if (route.stage_count() != stages ||
      static_cast<int>(route.live_paths.size()) != stages ||
      static_cast<int>(route.static_paths.size()) != stages ||
      route.output_path.empty()) {
    out.push_back({Kind::kShape, "route has the wrong number of stages or paths"});
    return out;
  }
  auto check_path = [&](const NodePath& path, const std::string& name) {
    if (path.empty()) {
      out.push_back({Kind::kShape, name + " is empty"});
      return false;
    }
    std::vector<NodeId> sorted = path;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      out.push_back({Kind::kAcyclic, name + " repeats a node"});
    }
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      if (!graph.find_link(path[h], path[h + 1])) {
        out.push_back({Kind::kNotALink, name + " step " +
                                            graph.node_name(path[h]) + "->" +
                                            graph.node_name(path[h + 1]) +
                                            " is not a link"});
      }
    }
    return true;
  };

  NodeId at = client.source;
  for (int m = 0; m < stages; ++m) {
    const std::string stage = std::to_string(m + 1);
    const NodeId p = route.processing[m];
    const NodePath& live = route.live_paths[m];
    const NodePath& stat = route.static_paths[m];
    if (check_path(live, "live path " + stage)) {
      if (live.front() != at || live.back() != p) {
        out.push_back({Kind::kDisconnected,
                       "live path " + stage + " does not join the previous hop to "
                       "the processing node"});
      }
    }
    if (check_path(stat, "static path " + stage)) {
      if (stat.back() != p) {
        out.push_back({Kind::kMerging,
                       "merging: static path " + stage + " ends at " +
                           graph.node_name(stat.back()) + " but stage " + stage +
                           " is processed at " + graph.node_name(p)});
      }
      const auto hosts = graph.static_sources(alg.service().function(m).database);
      if (!std::binary_search(hosts.begin(), hosts.end(), stat.front())) {
        out.push_back({Kind::kStaticSource,
                       "static path " + stage + " starts at " +
                           graph.node_name(stat.front()) +
                           ", which does not cache the database"});
      }
    }
    at = p;
  }
  if (check_path(route.output_path, "output path")) {
    if (route.output_path.front() != at ||
        route.output_path.back() != client.destination) {
      out.push_back({Kind::kDisconnected,
                     "output path does not join the last processing node to the "
                     "destination"});
    }
  }
  return out;
}

}  // namespace didcnc
