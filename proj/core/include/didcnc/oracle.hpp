#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "didcnc/alg.hpp"
#include "didcnc/control.hpp"
#include "didcnc/lp.hpp"
#include "didcnc/model.hpp"
#include "didcnc/routing.hpp"

namespace didcnc {

// One ALG edge with its flow rate (packets per slot) in an LP witness.
struct WitnessEdge {
  int client = 0;
  AlgEdgeKind kind = AlgEdgeKind::kTransmission;
  bool is_static = false;
  int stage = 0;       // live layer or static stage
  NodeId tail = kNoNode;  // kNoNode for the super static source
  NodeId head = kNoNode;
  double flow = 0.0;
};

struct ThroughputBound {
  LpSolution::Status status = LpSolution::Status::kInfeasible;
  double theta = 0.0;               // max uniform scale of the base rates
  std::vector<double> client_rates;  // theta * lambda_c
  std::vector<double> node_load;     // processing units per slot at theta
  std::vector<double> link_load;     // packets per slot at theta
  std::vector<WitnessEdge> witness;
  int iterations = 0;
};

// max theta such that every client c can carry theta * lambda_c through its
// ALG under live/output conservation, static conservation with merging, and
// the effective node/link capacities. Path-form and edge-form are equivalent
// by flow decomposition; this is the edge form.
ThroughputBound max_throughput_lp(const Scenario& scenario, bool with_witness = true);

// client,kind,stage,tail,head,flow with kind in {live,static,proc,proc_static,source}.
void write_witness_csv(std::ostream& os, const Scenario& scenario,
                       const ThroughputBound& bound);

class EnumerationGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kEnumerationMaxNodes = 6;
inline constexpr int kEnumerationMaxStages = 2;

// Visits every embedded route built from simple paths (one per segment) for
// the client. Throws EnumerationGuardError beyond 6 nodes or 2 stages.
void for_each_route(const AugmentedLayeredGraph& alg, const ClientSpec& client,
                    const std::function<void(const EmbeddedRoute&)>& visit);

std::vector<EmbeddedRoute> enumerate_routes(const AugmentedLayeredGraph& alg,
                                            const ClientSpec& client);

// Exhaustive argmin of route_weight under the shared route order.
RouteChoice brute_force_min_star(const AugmentedLayeredGraph& alg,
                                 const ClientSpec& client,
                                 const VirtualQueueState& queues);

// Path form: one rate variable per enumerated route.
struct PathThroughputBound {
  LpSolution::Status status = LpSolution::Status::kInfeasible;
  double theta = 0.0;
  std::vector<std::vector<EmbeddedRoute>> routes;  // per client, rate > 0
  std::vector<std::vector<double>> rates;
};

PathThroughputBound max_throughput_path_lp(const Scenario& scenario);

// Stationary randomized policy: each slot client c draws route sigma with
// probability rate(sigma) / sum of its rates, independent of the queues.
RouteSelector stationary_selector(const PathThroughputBound& bound, std::uint64_t seed);

}  // namespace didcnc
