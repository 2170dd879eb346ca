#include "didcnc/routing.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace didcnc {

namespace {

struct Label {
  double weight = kUnreachable;
  int hops = 0;
  int parent = -1;
  bool settled = false;
};

// Dijkstra over (weight, hops) with a caller-decided tie-break for
// candidates whose weight and hop count are both equal. Every edge must
// carry at least one hop, so tied candidates always come from vertices
// settled earlier and the label order is preserved by extension.
//
// expand(u, relax) calls relax(v, weight, hops) per outgoing edge.
// prefer(v, candidate_parent) returns true when reaching v through
// candidate_parent beats the current label of v.
template <class Expand, class Prefer>
void tie_breaking_dijkstra(std::vector<Label>& labels, Expand&& expand,
                           Prefer&& prefer) {
  using Entry = std::tuple<double, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int v = 0; v < static_cast<int>(labels.size()); ++v) {
    if (labels[v].weight != kUnreachable) heap.emplace(labels[v].weight, labels[v].hops, v);
  }
  while (!heap.empty()) {
    const auto [w, h, u] = heap.top();
    heap.pop();
    Label& lu = labels[u];
    if (lu.settled || w != lu.weight || h != lu.hops) continue;
    lu.settled = true;
    expand(u, [&](int v, double ew, int eh) {
      Label& lv = labels[v];
      if (lv.settled) return;
      const double cw = lu.weight + ew;
      const int ch = lu.hops + eh;
      bool better = cw < lv.weight || (cw == lv.weight && ch < lv.hops);
      if (!better && cw == lv.weight && ch == lv.hops) better = prefer(v, u);
      if (!better) return;
      const bool key_changed = cw != lv.weight || ch != lv.hops;
      lv.weight = cw;
      lv.hops = ch;
      lv.parent = u;
      if (key_changed) heap.emplace(cw, ch, v);
    });
  }
}

// Parent chain of v with the final step through `last_parent`, root first.
template <class Seq>
void chain(const std::vector<Label>& labels, int v, int last_parent, Seq& out) {
  out.clear();
  out.push_back(v);
  for (int x = last_parent; x >= 0; x = labels[x].parent) out.push_back(x);
  std::reverse(out.begin(), out.end());
}

// Per-node static fetch folded into a stage's processing edge.
struct StageFold {
  std::vector<double> weight;  // kUnreachable when the node may not process
  std::vector<int> hops;       // ALG edges added besides the live processing edge
  std::vector<NodePath> path;  // static path tokens (may be empty)
};

// Cheapest static path of stage m from any cache to every node, on the
// static pipeline copy of the network (ties: fewer edges, then the
// lexicographically smaller node sequence from the cache).
StageFold static_fetch(const AugmentedLayeredGraph& alg, int stage,
                       const VirtualQueueState& queues) {
  const NetworkGraph& g = alg.graph();
  const auto n = static_cast<int>(g.node_count());
  const double coef = alg.static_coefficient(stage);
  std::vector<Label> labels(n);
  for (NodeId v : g.static_sources(alg.service().function(stage).database)) {
    labels[v].weight = 0.0;  // static-source edge weighs nothing
    labels[v].hops = 1;
  }
  std::vector<int> a, b;
  tie_breaking_dijkstra(
      labels,
      [&](int u, auto&& relax) {
        for (LinkId l : g.out_links(u)) {
          relax(g.link(l).to, coef * queues.link_factor(l), 1);
        }
      },
      [&](int v, int cand) {
        chain(labels, v, cand, a);
        chain(labels, v, labels[v].parent, b);
        return a < b;
      });
  StageFold fold;
  fold.weight.resize(n);
  fold.hops.resize(n);
  fold.path.resize(n);
  for (int v = 0; v < n; ++v) {
    fold.weight[v] = labels[v].weight;
    fold.hops[v] = labels[v].hops + 1;  // plus the static processing edge
    if (labels[v].weight == kUnreachable) continue;
    for (int x = v; x >= 0; x = labels[x].parent) fold.path[v].push_back(x);
    std::reverse(fold.path[v].begin(), fold.path[v].end());
  }
  return fold;
}

// Layered search over live layers 0..M. Vertex id = layer * n + node.
class LayeredSearch {
 public:
  LayeredSearch(const AugmentedLayeredGraph& alg, const VirtualQueueState& queues,
                const std::vector<StageFold>& folds)
      : alg_(alg), queues_(queues), folds_(folds),
        n_(static_cast<int>(alg.graph().node_count())) {}

  bool run(NodeId source, NodeId destination) {
    const int stages = alg_.stage_count();
    labels_.assign((stages + 1) * n_, Label{});
    labels_[source].weight = 0.0;
    labels_[source].hops = 0;
    const NetworkGraph& g = alg_.graph();
    tie_breaking_dijkstra(
        labels_,
        [&](int u, auto&& relax) {
          const int layer = u / n_;
          const NodeId i = u % n_;
          const double coef = alg_.live_coefficient(layer);
          for (LinkId l : g.out_links(i)) {
            relax(layer * n_ + g.link(l).to, coef * queues_.link_factor(l), 1);
          }
          if (layer < stages) {
            const StageFold& f = folds_[layer];
            if (f.weight[i] != kUnreachable) {
              const double pw =
                  alg_.processing_coefficient(layer) * queues_.node_factor(i) +
                  f.weight[i];
              relax((layer + 1) * n_ + i, pw, 1 + f.hops[i]);
            }
          }
        },
        [&](int v, int cand) {
          keys(v, cand, proc_a_, seq_a_);
          keys(v, labels_[v].parent, proc_b_, seq_b_);
          if (proc_a_ != proc_b_) return proc_a_ < proc_b_;
          return seq_a_ < seq_b_;
        });
    target_ = stages * n_ + destination;
    return labels_[target_].weight != kUnreachable;
  }

  double weight() const { return labels_[target_].weight; }

  // Live/output skeleton of the best route; static paths come from folds.
  EmbeddedRoute route() const {
    const int stages = alg_.stage_count();
    std::vector<int> vs;
    for (int x = target_; x >= 0; x = labels_[x].parent) vs.push_back(x);
    std::reverse(vs.begin(), vs.end());
    EmbeddedRoute r;
    r.live_paths.resize(stages);
    r.static_paths.resize(stages);
    NodePath current;
    int layer = 0;
    for (int x : vs) {
      const int lx = x / n_;
      const NodeId node = x % n_;
      if (lx != layer) {
        r.processing.push_back(node);
        r.live_paths[layer] = std::move(current);
        r.static_paths[layer] = folds_[layer].path[node];
        current.clear();
        layer = lx;
      }
      current.push_back(node);
    }
    r.output_path = std::move(current);
    return r;
  }

 private:
  // Processing sequence and canonical node sequence of the path reaching v
  // through `parent`.
  void keys(int v, int parent, std::vector<NodeId>& proc,
            std::vector<NodeId>& seq) {
    chain(labels_, v, parent, chain_);
    proc.clear();
    seq.clear();
    for (std::size_t k = 0; k < chain_.size(); ++k) {
      const int x = chain_[k];
      if (k > 0 && x / n_ != chain_[k - 1] / n_) {
        const NodeId node = x % n_;
        proc.push_back(node);
        const NodePath& sp = folds_[chain_[k - 1] / n_].path[node];
        seq.insert(seq.end(), sp.begin(), sp.end());
      }
      seq.push_back(x % n_);
    }
  }

  const AugmentedLayeredGraph& alg_;
  const VirtualQueueState& queues_;
  const std::vector<StageFold>& folds_;
  int n_;
  int target_ = -1;
  std::vector<Label> labels_;
  std::vector<int> chain_;
  std::vector<NodeId> proc_a_, proc_b_, seq_a_, seq_b_;
};

RouteChoice finish(const AugmentedLayeredGraph& alg, const VirtualQueueState& queues,
                   EmbeddedRoute route) {
  RouteChoice choice;
  choice.weight = route_weight(route, alg, queues);
  choice.route = std::move(route);
  return choice;
}

[[noreturn]] void infeasible(const AugmentedLayeredGraph& alg,
                             const ClientSpec& client) {
  const NetworkGraph& g = alg.graph();
  throw InfeasibleRoute("no finite-weight route from " +
                        g.node_name(client.source) + " to " +
                        g.node_name(client.destination) +
                        " (destination or database unreachable)");
}

}  // namespace

std::vector<VertexId> ShortestPathTable::path(VertexId v) const {
  std::vector<VertexId> out;
  if (!reachable(v)) return out;
  for (VertexId x = v; x != kNoVertex; x = parent[x]) out.push_back(x);
  if (direction == SearchDirection::kForward) std::reverse(out.begin(), out.end());
  return out;
}

ShortestPathTable sssp(const AugmentedLayeredGraph& alg,
                       std::span<const double> edge_weights, VertexId root,
                       SearchDirection direction) {
  if (edge_weights.size() != alg.edge_count()) {
    throw std::invalid_argument("sssp: one weight per ALG edge required");
  }
  for (double w : edge_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("sssp: negative edge weight");
  }
  const bool forward = direction == SearchDirection::kForward;
  std::vector<Label> labels(alg.vertex_count());
  labels.at(root).weight = 0.0;
  std::vector<int> a, b;
  tie_breaking_dijkstra(
      labels,
      [&](int u, auto&& relax) {
        const auto& adj = forward ? alg.out_edges(u) : alg.in_edges(u);
        for (AlgEdgeId e : adj) {
          const AlgEdge& edge = alg.edge(e);
          relax(forward ? edge.head : edge.tail, edge_weights[e], 1);
        }
      },
      [&](int v, int cand) {
        chain(labels, v, cand, a);
        chain(labels, v, labels[v].parent, b);
        return a < b;
      });
  ShortestPathTable table;
  table.root = root;
  table.direction = direction;
  table.weight.reserve(labels.size());
  for (const Label& l : labels) {
    table.weight.push_back(l.weight);
    table.hops.push_back(l.weight == kUnreachable ? -1 : l.hops);
    table.parent.push_back(l.parent);
  }
  return table;
}

RouteChoice min_star(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                     const VirtualQueueState& queues) {
  std::vector<StageFold> folds;
  for (int m = 0; m < alg.stage_count(); ++m) {
    folds.push_back(static_fetch(alg, m, queues));
  }
  LayeredSearch search(alg, queues, folds);
  if (!search.run(client.source, client.destination)) infeasible(alg, client);
  return finish(alg, queues, search.route());
}

RouteChoice s2l_route(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                      const VirtualQueueState& queues) {
  const auto n = alg.graph().node_count();
  std::vector<StageFold> fetch;
  std::vector<StageFold> blind;
  for (int m = 0; m < alg.stage_count(); ++m) {
    fetch.push_back(static_fetch(alg, m, queues));
    StageFold f;
    f.weight.assign(n, 0.0);
    f.hops.assign(n, 0);
    f.path.assign(n, NodePath{});
    for (std::size_t i = 0; i < n; ++i) {
      if (fetch.back().weight[i] == kUnreachable) f.weight[i] = kUnreachable;
    }
    blind.push_back(std::move(f));
  }
  LayeredSearch search(alg, queues, blind);
  if (!search.run(client.source, client.destination)) infeasible(alg, client);
  EmbeddedRoute route = search.route();
  for (int m = 0; m < alg.stage_count(); ++m) {
    route.static_paths[m] = fetch[m].path[route.processing[m]];
  }
  return finish(alg, queues, std::move(route));
}

RouteChoice l2s_route(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                      const VirtualQueueState& queues) {
  const NetworkGraph& g = alg.graph();
  const auto n = g.node_count();
  std::vector<StageFold> folds;
  for (int m = 0; m < alg.stage_count(); ++m) {
    StageFold f;
    f.weight.assign(n, kUnreachable);
    f.hops.assign(n, 0);
    f.path.assign(n, NodePath{});
    for (NodeId v : g.static_sources(alg.service().function(m).database)) {
      f.weight[v] = 0.0;
      f.hops[v] = 2;  // static-source edge + static processing edge
      f.path[v] = NodePath{v};
    }
    folds.push_back(std::move(f));
  }
  LayeredSearch search(alg, queues, folds);
  if (!search.run(client.source, client.destination)) infeasible(alg, client);
  return finish(alg, queues, search.route());
}

RouteChoice select_route(Policy policy, const AugmentedLayeredGraph& alg,
                         const ClientSpec& client, const VirtualQueueState& queues) {
  switch (policy) {
    case Policy::kDiDcnc:
      return min_star(alg, client, queues);
    case Policy::kS2L:
      return s2l_route(alg, client, queues);
    case Policy::kL2S:
      return l2s_route(alg, client, queues);
  }
  return min_star(alg, client, queues);
}

bool route_precedes(const EmbeddedRoute& a, double weight_a,
                    const EmbeddedRoute& b, double weight_b) {
  if (weight_a != weight_b) return weight_a < weight_b;
  const int ha = a.alg_edge_count();
  const int hb = b.alg_edge_count();
  if (ha != hb) return ha < hb;
  if (a.processing != b.processing) return a.processing < b.processing;
  return a.node_sequence() < b.node_sequence();
}

}  // namespace didcnc
