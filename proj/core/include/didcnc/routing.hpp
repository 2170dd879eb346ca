#pragma once

#include <limits>
#include <span>
#include <vector>

#include "didcnc/alg.hpp"
#include "didcnc/model.hpp"
#include "didcnc/queue_state.hpp"

namespace didcnc {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

enum class SearchDirection { kForward, kReverse };

// Single-source (forward) or single-sink (reverse) shortest paths over an
// ALG with caller-supplied non-negative edge weights.
//
// Ties are broken by fewer edges, then by the vertex-id sequence read from
// the root outwards. Unreachable vertices carry kUnreachable.
struct ShortestPathTable {
  VertexId root = kNoVertex;
  SearchDirection direction = SearchDirection::kForward;
  std::vector<double> weight;
  std::vector<int> hops;
  std::vector<VertexId> parent;  // neighbour one step closer to the root

  bool reachable(VertexId v) const { return weight.at(v) != kUnreachable; }
  // Vertex path in travel order: root..v (forward) or v..root (reverse).
  std::vector<VertexId> path(VertexId v) const;
};

ShortestPathTable sssp(const AugmentedLayeredGraph& alg,
                       std::span<const double> edge_weights, VertexId root,
                       SearchDirection direction);

class InfeasibleRoute : public RouteError {
 public:
  using RouteError::RouteError;
};

struct RouteChoice {
  EmbeddedRoute route;
  double weight = 0.0;  // route_weight() of the route under the given queues
};

// Route selection shares one total order on routes: lower weight, then fewer
// ALG edges, then the smaller processing-node sequence, then the smaller
// canonical node sequence (EmbeddedRoute::node_sequence).

// Minimum-weight embedded route. One static-pipeline search per stage, then
// a layered search over the live/output pipelines where each processing edge
// carries the cheapest static fetch to that node.
RouteChoice min_star(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                     const VirtualQueueState& queues);

// Live-first benchmark: processing locations and live/output paths chosen
// with every static term dropped, then each stage's static data fetched
// along its cheapest static path to the chosen node.
RouteChoice s2l_route(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                      const VirtualQueueState& queues);

// Static-first benchmark: stage m may only be processed at a cache of its
// database; static paths are empty.
RouteChoice l2s_route(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                      const VirtualQueueState& queues);

RouteChoice select_route(Policy policy, const AugmentedLayeredGraph& alg,
                         const ClientSpec& client, const VirtualQueueState& queues);

// Strict-weak "a before b" under the shared route order, given both weights.
bool route_precedes(const EmbeddedRoute& a, double weight_a,
                    const EmbeddedRoute& b, double weight_b);

}  // namespace didcnc
