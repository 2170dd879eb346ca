#pragma once

#include <functional>
#include <span>
#include <vector>

#include "didcnc/alg.hpp"
#include "didcnc/model.hpp"
#include "didcnc/queue_state.hpp"
#include "didcnc/routing.hpp"

namespace didcnc {

// All arrivals of one client in one slot, bound to a single route.
struct Admission {
  int client = 0;
  int count = 0;
  RouteChoice choice;
  LoadVector loads;  // per-request rho of choice.route
};

struct AdmissionResult {
  std::vector<Admission> admitted;
  std::vector<int> dropped;  // per client; non-zero only when infeasible
};

// Chooses the route of a client for the current slot. The default
// selectors wrap select_route(policy, ...).
using RouteSelector = std::function<RouteChoice(
    int client, const AugmentedLayeredGraph& alg, const ClientSpec& spec,
    const VirtualQueueState& queues)>;

RouteSelector policy_selector(Policy policy);

// a~_i = sum rho_i a, a~_ij = sum rho_ij a over the slot's admissions.
LoadVector accumulate_loads(std::span<const Admission> admissions,
                            std::size_t node_count, std::size_t link_count);

// Q~(t+1) = [Q~(t) - C + a~(t)]^+ with the effective capacities stored in
// the state.
VirtualQueueState update_virtual_queues(VirtualQueueState state,
                                        const LoadVector& loads);

// Binds every arrival of client c to the route the selector returns for c
// on the (pre-update) queue snapshot. Clients without arrivals are skipped;
// infeasible routing drops that client's arrivals.
AdmissionResult admit(std::span<const ClientSpec> clients,
                      std::span<const int> arrivals,
                      std::span<const AugmentedLayeredGraph> algs,
                      const VirtualQueueState& queues,
                      const RouteSelector& selector);

AdmissionResult admit(std::span<const ClientSpec> clients,
                      std::span<const int> arrivals,
                      std::span<const AugmentedLayeredGraph> algs,
                      const VirtualQueueState& queues, Policy policy);

}  // namespace didcnc
