#include "didcnc/queue_state.hpp"

#include <algorithm>
#include <stdexcept>

namespace didcnc {

namespace {

double factor(double backlog, double capacity) {
  return (backlog / capacity) / capacity;
}

}  // namespace

VirtualQueueState::VirtualQueueState(std::vector<double> node_capacity,
                                     std::vector<double> link_capacity)
    : node_cap_(std::move(node_capacity)),
      link_cap_(std::move(link_capacity)),
      node_q_(node_cap_.size(), 0.0),
      link_q_(link_cap_.size(), 0.0),
      node_factor_(node_cap_.size(), 0.0),
      link_factor_(link_cap_.size(), 0.0) {
  for (double c : node_cap_) {
    if (!(c > 0.0)) throw std::invalid_argument("node capacity must be > 0");
  }
  for (double c : link_cap_) {
    if (!(c > 0.0)) throw std::invalid_argument("link capacity must be > 0");
  }
}

VirtualQueueState::VirtualQueueState(const Scenario& scenario)
    : VirtualQueueState(scenario.effective_proc_capacities(),
                        scenario.effective_link_capacities()) {}

void VirtualQueueState::set_node_backlog(NodeId i, double value) {
  node_q_.at(i) = std::max(0.0, value);
  node_factor_[i] = factor(node_q_[i], node_cap_[i]);
}

void VirtualQueueState::set_link_backlog(LinkId l, double value) {
  link_q_.at(l) = std::max(0.0, value);
  link_factor_[l] = factor(link_q_[l], link_cap_[l]);
}

void VirtualQueueState::apply_update(std::span<const double> node_load,
                                     std::span<const double> link_load) {
  if (node_load.size() != node_q_.size() ||
      link_load.size() != link_q_.size()) {
    throw std::invalid_argument("load vector size mismatch");
  }
  for (std::size_t i = 0; i < node_q_.size(); ++i) {
    node_q_[i] = std::max(0.0, node_q_[i] - node_cap_[i] + node_load[i]);
    node_factor_[i] = factor(node_q_[i], node_cap_[i]);
  }
  for (std::size_t l = 0; l < link_q_.size(); ++l) {
    link_q_[l] = std::max(0.0, link_q_[l] - link_cap_[l] + link_load[l]);
    link_factor_[l] = factor(link_q_[l], link_cap_[l]);
  }
}

bool VirtualQueueState::all_zero() const {
  auto zero = [](double v) { return v == 0.0; };
  return std::all_of(node_q_.begin(), node_q_.end(), zero) &&
         std::all_of(link_q_.begin(), link_q_.end(), zero);
}

}  // namespace didcnc
