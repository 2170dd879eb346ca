#pragma once

#include <span>
#include <vector>

#include "didcnc/model.hpp"

namespace didcnc {

// Virtual node/link queues Q~ (in processing units and packets) together
// with the effective capacities they are normalised by. Normalised values
// Q = Q~ / C read as queuing delay in slots; route weights use Q / C.
class VirtualQueueState {
 public:
  VirtualQueueState() = default;
  VirtualQueueState(std::vector<double> node_capacity,
                    std::vector<double> link_capacity);
  explicit VirtualQueueState(const Scenario& scenario);

  std::size_t node_count() const { return node_q_.size(); }
  std::size_t link_count() const { return link_q_.size(); }

  double node_backlog(NodeId i) const { return node_q_[i]; }
  double link_backlog(LinkId l) const { return link_q_[l]; }
  double node_capacity(NodeId i) const { return node_cap_[i]; }
  double link_capacity(LinkId l) const { return link_cap_[l]; }

  double node_delay(NodeId i) const { return node_q_[i] / node_cap_[i]; }
  double link_delay(LinkId l) const { return link_q_[l] / link_cap_[l]; }

  // Per-unit-load weight factors Q / C used by every route weight.
  double node_factor(NodeId i) const { return node_factor_[i]; }
  double link_factor(LinkId l) const { return link_factor_[l]; }

  void set_node_backlog(NodeId i, double value);
  void set_link_backlog(LinkId l, double value);

  std::span<const double> node_backlogs() const { return node_q_; }
  std::span<const double> link_backlogs() const { return link_q_; }

  // Q~(t+1) = [Q~(t) - C + a~(t)]^+, elementwise.
  void apply_update(std::span<const double> node_load,
                    std::span<const double> link_load);

  bool all_zero() const;

 private:
  std::vector<double> node_cap_;
  std::vector<double> link_cap_;
  std::vector<double> node_q_;
  std::vector<double> link_q_;
  std::vector<double> node_factor_;
  std::vector<double> link_factor_;
};

}  // namespace didcnc
