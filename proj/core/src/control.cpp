#include "didcnc/control.hpp"

namespace didcnc {

RouteSelector policy_selector(Policy policy) {
  return [policy](int, const AugmentedLayeredGraph& alg, const ClientSpec& spec,
                  const VirtualQueueState& queues) {
    return select_route(policy, alg, spec, queues);
  };
}

LoadVector accumulate_loads(std::span<const Admission> admissions,
                            std::size_t node_count, std::size_t link_count) {
  LoadVector total;
  total.node_load.assign(node_count, 0.0);
  total.link_load.assign(link_count, 0.0);
  for (const Admission& a : admissions) {
    if (a.count == 0) continue;
    for (std::size_t i = 0; i < node_count; ++i) {
      total.node_load[i] += a.loads.node_load[i] * a.count;
    }
    for (std::size_t l = 0; l < link_count; ++l) {
      total.link_load[l] += a.loads.link_load[l] * a.count;
    }
  }
  return total;
}

VirtualQueueState update_virtual_queues(VirtualQueueState state,
                                        const LoadVector& loads) {
  state.apply_update(loads.node_load, loads.link_load);
  return state;
}

AdmissionResult admit(std::span<const ClientSpec> clients,
                      std::span<const int> arrivals,
                      std::span<const AugmentedLayeredGraph> algs,
                      const VirtualQueueState& queues,
                      const RouteSelector& selector) {
  AdmissionResult result;
  result.dropped.assign(clients.size(), 0);
  for (std::size_t c = 0; c < clients.size(); ++c) {
    if (arrivals[c] == 0) continue;
    try {
      Admission a;
      a.client = static_cast<int>(c);
      a.count = arrivals[c];
      a.choice = selector(a.client, algs[c], clients[c], queues);
      a.loads = route_loads(a.choice.route, algs[c].graph(), clients[c].service);
      result.admitted.push_back(std::move(a));
    } catch (const InfeasibleRoute&) {
      result.dropped[c] += arrivals[c];
    }
  }
  return result;
}

AdmissionResult admit(std::span<const ClientSpec> clients,
                      std::span<const int> arrivals,
                      std::span<const AugmentedLayeredGraph> algs,
                      const VirtualQueueState& queues, Policy policy) {
  return admit(clients, arrivals, algs, queues, policy_selector(policy));
}

}  // namespace didcnc
