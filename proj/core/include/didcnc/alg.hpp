#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "didcnc/model.hpp"
#include "didcnc/queue_state.hpp"

namespace didcnc {

using VertexId = std::int32_t;
using AlgEdgeId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;

// Vertex of the augmented layered graph. Stages are 0-based throughout the
// library: live layer L holds packets that have completed L processing
// stages (layer M is the output pipeline) and static pipeline m carries
// the database of stage m.
struct AlgVertex {
  enum class Pipeline : std::uint8_t { kLive, kStatic };

  NodeId node = kNoNode;  // kNoNode marks the super static source
  int layer = 0;          // live layer, or the stage of a static pipeline
  Pipeline pipeline = Pipeline::kLive;

  bool is_super_source() const { return node == kNoNode; }
};

enum class AlgEdgeKind : std::uint8_t { kTransmission, kProcessing, kStaticSource };

struct AlgEdge {
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  AlgEdgeKind kind = AlgEdgeKind::kTransmission;
  LinkId link = kNoLink;  // transmission edges
  NodeId node = kNoNode;  // processing edges (and the cache host of
                          // static-source edges)
  int stage = 0;          // live layer or stage the edge belongs to
  bool is_static = false; // static pipeline edge (incl. static processing)
};

// Multi-layer, multi-pipeline routing graph of one service over a network.
// Holds a pointer to the network: the graph must outlive it.
class AugmentedLayeredGraph {
 public:
  AugmentedLayeredGraph(const NetworkGraph& graph, const ServiceSpec& service);

  const NetworkGraph& graph() const { return *graph_; }
  const ServiceSpec& service() const { return service_; }
  int stage_count() const { return stages_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const AlgVertex& vertex(VertexId v) const { return vertices_.at(v); }
  const AlgEdge& edge(AlgEdgeId e) const { return edges_.at(e); }
  const std::vector<AlgEdge>& edges() const { return edges_; }
  const std::vector<AlgEdgeId>& out_edges(VertexId v) const { return out_.at(v); }
  const std::vector<AlgEdgeId>& in_edges(VertexId v) const { return in_.at(v); }

  VertexId live_vertex(int layer, NodeId i) const;
  VertexId static_vertex(int stage, NodeId i) const;
  VertexId super_source(int stage) const;

  // Per-request volume coefficients: kappa_L of live layer L, and the
  // static (zeta_m kappa_m) and processing (r_m kappa_m) loads of stage m.
  double live_coefficient(int layer) const { return live_coef_.at(layer); }
  double static_coefficient(int stage) const { return static_coef_.at(stage); }
  double processing_coefficient(int stage) const { return proc_coef_.at(stage); }

  std::size_t count_edges(AlgEdgeKind kind) const;

  // Graphviz DOT rendering (one cluster per pipeline).
  std::string to_dot() const;

 private:
  AlgEdgeId add_edge(AlgEdge e);

  const NetworkGraph* graph_;
  ServiceSpec service_;
  int stages_;
  std::size_t n_;
  std::vector<AlgVertex> vertices_;
  std::vector<AlgEdge> edges_;
  std::vector<std::vector<AlgEdgeId>> out_;
  std::vector<std::vector<AlgEdgeId>> in_;
  std::vector<double> live_coef_;
  std::vector<double> static_coef_;
  std::vector<double> proc_coef_;
};

// Throws ScenarioError when a database of the service has no static source.
AugmentedLayeredGraph build_alg(const NetworkGraph& graph,
                                const ServiceSpec& service);

using NodePath = std::vector<NodeId>;

// Embedded route of one request: a processing location per stage plus the
// acyclic live, static and output paths that feed and drain it.
//
// live_paths[m] runs from the client source (m = 0) or the previous
// processing node to processing[m]; static_paths[m] starts at the selected
// cache of the stage-m database and ends at processing[m]; output_path runs
// from the last processing node to the destination.
struct EmbeddedRoute {
  std::vector<NodeId> processing;
  std::vector<NodePath> live_paths;
  std::vector<NodePath> static_paths;
  NodePath output_path;

  int stage_count() const { return static_cast<int>(processing.size()); }
  NodeId static_source(int stage) const { return static_paths.at(stage).front(); }

  // Number of ALG edges the route occupies, counting the static-source and
  // both processing edges of every stage.
  int alg_edge_count() const;
  // Link hops along the live/output chain.
  int live_hop_count() const;
  // Canonical node sequence used for tie-breaking: live_0, static_0, live_1,
  // static_1, ..., output.
  std::vector<NodeId> node_sequence() const;

  friend bool operator==(const EmbeddedRoute&, const EmbeddedRoute&) = default;
};

class RouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadVector {
  std::vector<double> node_load;
  std::vector<double> link_load;
};

double edge_weight(const AugmentedLayeredGraph& alg, const AlgEdge& edge,
                   const VirtualQueueState& queues);
std::vector<double> edge_weights(const AugmentedLayeredGraph& alg,
                                 const VirtualQueueState& queues);

// Per-request resource loads rho of a route. Throws RouteError when a path
// step is not a link of the network or the route shape does not match.
LoadVector route_loads(const EmbeddedRoute& route, const NetworkGraph& graph,
                       const ServiceSpec& service);

// Route weight accumulated edge by edge in canonical order: live path of
// stage m, then (processing weight + static path weight), then the next
// stage, then the output path. Routing accumulates in the same order, so
// equal routes produce bit-identical weights.
double route_weight(const EmbeddedRoute& route,
                    const AugmentedLayeredGraph& alg,
                    const VirtualQueueState& queues);

// sum_i rho_i Q_i / C_i + sum_ij rho_ij Q_ij / C_ij
double load_weight(const LoadVector& loads, const VirtualQueueState& queues);

// ALG edges of the route in crossing order per pipeline: for each stage the
// live path, the static-source edge, the static path, the static and live
// processing edges; then the output path.
std::vector<AlgEdgeId> route_alg_edges(const EmbeddedRoute& route,
                                       const AugmentedLayeredGraph& alg);

struct RouteViolation {
  enum class Kind { kShape, kNotALink, kAcyclic, kDisconnected, kMerging, kStaticSource };
  Kind kind;
  std::string detail;
};

std::string_view violation_name(RouteViolation::Kind kind);

// Unit-flow check of conservation, merging and acyclicity for one request.
std::vector<RouteViolation> validate_route(const EmbeddedRoute& route,
                                           const AugmentedLayeredGraph& alg,
                                           const ClientSpec& client);

}  // namespace didcnc
