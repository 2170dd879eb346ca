#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace didcnc {

using NodeId = std::int32_t;
using LinkId = std::int32_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr LinkId kNoLink = -1;

// Raised for malformed scenario files and for domain invariant violations.
// The message always names the offending field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Link {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  double capacity = 0.0;

  friend bool operator==(const Link&, const Link&) = default;
};

// Directed network. Nodes and links are addressed by dense indices in
// declaration order; node names are only used for I/O and tie-breaking is
// by index.
class NetworkGraph {
 public:
  NodeId add_node(std::string name, double proc_capacity);
  LinkId add_link(NodeId from, NodeId to, double capacity);
  // Replaces the static-source set V(k) of database `db`.
  void set_static_sources(std::string db, std::vector<NodeId> hosts);

  std::size_t node_count() const { return names_.size(); }
  std::size_t link_count() const { return links_.size(); }

  const std::string& node_name(NodeId i) const { return names_.at(i); }
  std::optional<NodeId> find_node(std::string_view name) const;
  NodeId node_by_name(std::string_view name) const;  // throws ScenarioError

  double proc_capacity(NodeId i) const { return proc_capacity_.at(i); }
  const Link& link(LinkId l) const { return links_.at(l); }
  std::span<const Link> links() const { return links_; }
  std::optional<LinkId> find_link(NodeId from, NodeId to) const;

  std::span<const LinkId> out_links(NodeId i) const { return out_.at(i); }
  std::span<const LinkId> in_links(NodeId i) const { return in_.at(i); }

  const std::map<std::string, std::vector<NodeId>>& databases() const {
    return static_sources_;
  }
  bool has_database(const std::string& db) const {
    return static_sources_.contains(db);
  }
  // Hosts of `db` sorted by node index; throws ScenarioError when unknown.
  std::span<const NodeId> static_sources(const std::string& db) const;

  // Endpoints declared, no self loops, positive capacities, non-empty V(k).
  void validate() const;

  friend bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
    return a.names_ == b.names_ && a.proc_capacity_ == b.proc_capacity_ &&
           a.links_ == b.links_ && a.static_sources_ == b.static_sources_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<double> proc_capacity_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
  std::map<std::string, std::vector<NodeId>> static_sources_;
};

// One processing step of a service: (xi, r, k, zeta).
struct FunctionSpec {
  double scaling_factor = 1.0;  // output packets per input live packet
  double workload = 0.0;        // processing units per input live packet
  std::string database;         // object name k
  int merging_ratio = 0;        // static packets per input live packet

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

struct ServiceSpec {
  std::vector<FunctionSpec> functions;

  int stage_count() const { return static_cast<int>(functions.size()); }
  const FunctionSpec& function(int stage) const { return functions.at(stage); }
  // Live volume entering stage `stage` (0-based) per request: the product of
  // the scaling factors of all earlier stages. stage == stage_count() gives
  // the output volume delivered per request.
  double stream_scale(int stage) const;

  friend bool operator==(const ServiceSpec&, const ServiceSpec&) = default;
};

struct ClientSpec {
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  ServiceSpec service;
  double arrival_rate = 0.0;

  friend bool operator==(const ClientSpec&, const ClientSpec&) = default;
};

enum class Policy { kDiDcnc, kS2L, kL2S };

std::string_view policy_name(Policy p);
Policy parse_policy(std::string_view name);  // throws ScenarioError

struct Scenario {
  NetworkGraph graph;
  std::vector<ClientSpec> clients;
  std::int64_t slot_count = 100000;
  std::uint64_t seed = 1;
  double alpha_proc = 1.0;
  double alpha_tx = 1.0;
  Policy policy = Policy::kDiDcnc;
  // Global arrival cap; when unset each client uses ceil(10 * lambda).
  std::optional<int> max_arrivals_per_slot;

  double effective_proc_capacity(NodeId i) const {
    return alpha_proc * graph.proc_capacity(i);
  }
  double effective_link_capacity(LinkId l) const {
    return alpha_tx * graph.link(l).capacity;
  }
  std::vector<double> effective_proc_capacities() const;
  std::vector<double> effective_link_capacities() const;

  int arrival_cap(const ClientSpec& client) const;

  // Full invariant check; throws ScenarioError naming the field at fault.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// 4x4 grid with the resource and client tables of the reference experiment.
//
// Grid coordinates (row, col), node order A..P:
//   A(1,1) B(1,2) C(2,1) D(2,2)    central, C_i = 10
//   E(0,0) F(0,3) G(3,0) H(3,3)    corners, C_i = 5
//   I(0,1) J(0,2) K(1,3) L(2,3)    edge nodes, clockwise from the top row,
//   M(3,2) N(3,1) O(2,0) P(1,0)    C_i = 5
// Every grid edge is two directed links with C_ij = 20. Database k = 1..8
// is cached once: 1->G, 2->M, 3->H, 4->N, 5->F, 6->J, 7->L, 8->P.
Scenario default_grid_scenario();

// Copy of `base` where each database is cached at the `index` nodes nearest
// (hop distance, ties by node index) to its first index-1 host.
Scenario with_cache_index(const Scenario& base, int index);

// Unweighted BFS hop distances from `root` over directed links.
std::vector<int> hop_distances(const NetworkGraph& graph, NodeId root);

}  // namespace didcnc
