#include "didcnc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "didcnc/arrivals.hpp"
#include "didcnc/ento.hpp"

namespace didcnc {

namespace {

constexpr double kEps = 1e-9;
constexpr std::size_t kMaxSamples = 16;

// Route with its per-path link ids resolved once.
struct Plan {
  EmbeddedRoute route;
  std::vector<std::vector<LinkId>> live_links;    // layers 0..M (M = output)
  std::vector<std::vector<LinkId>> static_links;  // stages 0..M-1
  int live_hops = 0;
};

std::vector<LinkId> resolve(const NetworkGraph& graph, const NodePath& path) {
  std::vector<LinkId> out;
  for (std::size_t k = 1; k < path.size(); ++k) {
    out.push_back(*graph.find_link(path[k - 1], path[k]));
  }
  return out;
}

std::shared_ptr<const Plan> make_plan(const EmbeddedRoute& route,
                                      const NetworkGraph& graph) {
  auto plan = std::make_shared<Plan>();
  plan->route = route;
  for (const NodePath& p : route.live_paths) plan->live_links.push_back(resolve(graph, p));
  plan->live_links.push_back(resolve(graph, route.output_path));
  for (const NodePath& p : route.static_paths) {
    plan->static_links.push_back(resolve(graph, p));
  }
  plan->live_hops = route.live_hop_count();
  return plan;
}

// Bundle of identical unit packets travelling together.
struct Item {
  std::shared_ptr<const Plan> plan;
  std::vector<std::int64_t> riders;  // requests whose data this packet carries
  std::int64_t request = 0;
  std::int64_t flow = 0;
  std::int64_t birth = 0;
  int client = 0;
  int layer = 0;  // live layer, or static stage
  int units = 0;
  int crossed = 0;
  int pos = 0;  // links already crossed on the current path
  bool is_static = false;
};

// Priority key: fewer ALG edges crossed, older birth, lower request, then
// insertion order.
using Key = std::tuple<int, std::int64_t, std::int64_t, std::int64_t, int>;
using MinHeap = std::priority_queue<Key, std::vector<Key>, std::greater<Key>>;

struct NodeQueue {
  MinHeap heap;  // formed pairs, keyed by the live packet
  int service = -1;
  double remaining = 0.0;
};

struct Waiting {
  int live = -1;
  NodeId node = kNoNode;
  int static_units = 0;
};

struct Accumulator {
  double credit = 0.0;
  std::vector<std::int64_t> pending;
};

struct Request {
  std::int64_t birth = 0;
  int refs = 0;
  int client = 0;
  int live_hops = 0;
};

bool key_less(const Key& a, const Key& b) {
  return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a), std::get<3>(a)) <
         std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b), std::get<3>(b));
}

double slope_of(std::span<const double> series) {
  const std::size_t n = series.size();
  const std::size_t start = n / 2;
  const std::size_t m = n - start;
  if (m < 2) return 0.0;
  const double xbar = (static_cast<double>(m) - 1.0) / 2.0;
  double ybar = 0.0;
  for (std::size_t k = start; k < n; ++k) ybar += series[k];
  ybar /= static_cast<double>(m);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = static_cast<double>(k) - xbar;
    sxy += dx * (series[start + k] - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::string join_path(const NodePath& path, const NetworkGraph& graph) {
  std::string out;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k) out += '>';
    out += graph.node_name(path[k]);
  }
  return out;
}

}  // namespace

double MetricsRecord::mean_delay() const {
  if (delay_count == 0) return std::numeric_limits<double>::quiet_NaN();
  return delay_sum / static_cast<double>(delay_count);
}

std::vector<double> MetricsRecord::throughput(const Scenario& scenario) const {
  std::vector<double> out(scenario.clients.size(), 0.0);
  const double window = static_cast<double>(std::max<std::int64_t>(1, slots - warmup_slots));
  for (std::size_t c = 0; c < out.size() && c < delivered_after_warmup.size(); ++c) {
    const ServiceSpec& s = scenario.clients[c].service;
    const double volume = s.stream_scale(s.stage_count());
    out[c] = static_cast<double>(delivered_after_warmup[c]) / volume / window;
  }
  return out;
}

class Engine::Impl {
 public:
  Impl(const Scenario& scenario, EngineOptions options)
      : scenario_(scenario),
        options_(std::move(options)),
        arrivals_(scenario_),
        queues_(scenario_),
        node_cap_(scenario_.effective_proc_capacities()),
        link_cap_(scenario_.effective_link_capacities()),
        link_q_(scenario_.graph.link_count()),
        node_q_(scenario_.graph.node_count()) {
    scenario_.validate();
    for (const ClientSpec& c : scenario_.clients) {
      algs_.emplace_back(scenario_.graph, c.service);
      max_stages_ = std::max(max_stages_, c.service.stage_count());
    }
    if (!options_.selector) options_.selector = policy_selector(scenario_.policy);
    const std::size_t clients = scenario_.clients.size();
    metrics_.arrivals.assign(clients, 0);
    metrics_.dropped.assign(clients, 0);
    metrics_.delivered.assign(clients, 0);
    metrics_.delivered_after_warmup.assign(clients, 0);
    metrics_.completed.assign(clients, 0);
    node_used_.assign(scenario_.graph.node_count(), 0.0);
    link_used_.assign(scenario_.graph.link_count(), 0.0);
    warmup_ = options_.warmup_slots >= 0
                  ? options_.warmup_slots
                  : std::min<std::int64_t>(10000, scenario_.slot_count / 10);
    metrics_.warmup_slots = warmup_;
    offered_ = offered_packets_per_slot(scenario_);
    if (options_.metrics_csv) {
      *options_.metrics_csv << "slot,total_backlog,delivered,mean_delay_window\n";
    }
    if (options_.queue_trace) *options_.queue_trace << "slot,entity,backlog,normalized\n";
  }

  void step(std::span<const int> arrivals) {
    if (arrivals.size() != scenario_.clients.size()) {
      throw std::invalid_argument("step: one arrival count per client required");
    }
    delivered_slot_ = 0;
    admit_and_inject(arrivals);
    transmit();
    process();
    land();
    update_queues();
    record();
    ++t_;
  }

  void step() { step(arrivals_.next_slot()); }

  MetricsRecord run() {
    while (t_ < scenario_.slot_count && !aborted_) step();
    return finish();
  }

  MetricsRecord finish() {
    MetricsRecord out = metrics_;
    out.slots = t_;
    out.aborted = aborted_;
    out.node_utilization.resize(node_used_.size());
    out.link_utilization.resize(link_used_.size());
    const double slots = static_cast<double>(std::max<std::int64_t>(1, t_));
    for (std::size_t i = 0; i < node_used_.size(); ++i) {
      out.node_utilization[i] = node_used_[i] / (node_cap_[i] * slots);
    }
    for (std::size_t l = 0; l < link_used_.size(); ++l) {
      out.link_utilization[l] = link_used_[l] / (link_cap_[l] * slots);
    }
    return out;
  }

  std::int64_t slot() const { return t_; }
  bool aborted() const { return aborted_; }
  double total_backlog() const { return static_cast<double>(backlog_units_); }
  const VirtualQueueState& virtual_queues() const { return queues_; }
  const MetricsRecord& metrics() {
    metrics_.slots = t_;
    metrics_.aborted = aborted_;
    return metrics_;
  }
  const std::vector<AugmentedLayeredGraph>& algs() const { return algs_; }

 private:
  // ---- invariant bookkeeping

  void check(bool ok, const std::function<std::string()>& message) {
    if (!options_.check_invariants) return;
    ++metrics_.invariants.checks;
    if (ok) return;
    ++metrics_.invariants.violations;
    if (metrics_.invariants.samples.size() < kMaxSamples) {
      metrics_.invariants.samples.push_back(fmt::format("slot {}: {}", t_, message()));
    }
  }

  // ---- item pool

  int alloc() {
    if (!free_.empty()) {
      const int idx = free_.back();
      free_.pop_back();
      return idx;
    }
    items_.emplace_back();
    return static_cast<int>(items_.size()) - 1;
  }

  void release(int idx) {
    items_[idx] = Item{};
    free_.push_back(idx);
  }

  Key key_of(int idx) {
    const Item& it = items_[idx];
    return {it.crossed, it.birth, it.request, seq_++, idx};
  }

  const std::vector<LinkId>& path_of(const Item& it) const {
    return it.is_static ? it.plan->static_links[it.layer] : it.plan->live_links[it.layer];
  }

  NodeId end_of(const Item& it) const {
    const EmbeddedRoute& r = it.plan->route;
    if (it.is_static) return r.processing[it.layer];
    if (it.layer == r.stage_count()) return r.output_path.back();
    return r.processing[it.layer];
  }

  // ---- movement

  // Item sits at a node at the end of slot `at`: queue it on its next link,
  // or hand it to pairing / delivery when its current path is exhausted.
  void place(int idx, std::int64_t at) {
    Item& it = items_[idx];
    const auto& links = path_of(it);
    if (it.pos < static_cast<int>(links.size())) {
      link_q_[links[it.pos]].push(it.crossed, it.birth, it.request, idx, it.units);
      return;
    }
    if (!it.is_static && it.layer == it.plan->route.stage_count()) {
      deliver(idx, at);
      return;
    }
    arrive_for_pairing(idx);
  }

  void arrive_for_pairing(int idx) {
    Item& it = items_[idx];
    const NodeId node = end_of(it);
    Waiting& w = waiting_[it.flow];
    if (w.node == kNoNode) w.node = node;
    check(w.node == node, [&] { return fmt::format("flow {} pairs at two nodes", it.flow); });
    const int need =
        scenario_.clients[it.client].service.function(it.layer).merging_ratio;
    if (it.is_static) {
      w.static_units += it.units;
      check(w.static_units <= need, [&] {
        return fmt::format("flow {}: {} static packets for ratio {}", it.flow,
                           w.static_units, need);
      });
      release(idx);
    } else {
      check(w.live == -1, [&] { return fmt::format("flow {}: second live packet", it.flow); });
      w.live = idx;
    }
    if (w.live != -1 && w.static_units == need) {
      const int live = w.live;
      waiting_.erase(items_[live].flow);
      const Item& l = items_[live];
      work_backlog_ += scenario_.clients[l.client].service.function(l.layer).workload;
      node_q_[node].heap.push(key_of(live));
    }
  }

  void deliver(int idx, std::int64_t at) {
    Item& it = items_[idx];
    metrics_.delivered[it.client] += it.units;
    if (at >= warmup_) metrics_.delivered_after_warmup[it.client] += it.units;
    delivered_slot_ += it.units;
    backlog_units_ -= it.units;
    release_ref(it.request, at, true);
    for (std::int64_t r : it.riders) release_ref(r, at, false);
    release(idx);
  }

  void release_ref(std::int64_t request, std::int64_t at, bool primary) {
    auto found = requests_.find(request);
    if (found == requests_.end()) return;
    Request& r = found->second;
    if (--r.refs > 0) return;
    const std::int64_t delay = at - r.birth;
    ++metrics_.completed[r.client];
    if (primary && delay < r.live_hops) ++metrics_.delay_bound_violations;
    window_delay_sum_ += static_cast<double>(delay);
    ++window_delay_count_;
    if (r.birth >= warmup_) {
      metrics_.delay_sum += static_cast<double>(delay);
      ++metrics_.delay_count;
    }
    requests_.erase(found);
  }

  // ---- slot phases

  void admit_and_inject(std::span<const int> arrivals) {
    for (std::size_t c = 0; c < arrivals.size(); ++c) metrics_.arrivals[c] += arrivals[c];
    AdmissionResult result =
        admit(scenario_.clients, arrivals, algs_, queues_, options_.selector);
    for (std::size_t c = 0; c < result.dropped.size(); ++c) {
      metrics_.dropped[c] += result.dropped[c];
    }
    for (const Admission& a : result.admitted) {
      const ClientSpec& client = scenario_.clients[a.client];
      if (options_.check_invariants) {
        const double w = load_weight(a.loads, queues_);
        check(std::abs(w - a.choice.weight) <= kEps * (1.0 + std::abs(w)), [&] {
          return fmt::format("client {}: route weight {} vs load weight {}", a.client,
                             a.choice.weight, w);
        });
        const auto problems = validate_route(a.choice.route, algs_[a.client], client);
        check(problems.empty(), [&] {
          return fmt::format("client {}: invalid route ({})", a.client,
                             problems.empty() ? "" : problems.front().detail);
        });
      }
      if (options_.route_trace) {
        *options_.route_trace << format_route_line(t_, a.client, next_request_, a.count,
                                                   policy_label(), a.choice,
                                                   scenario_.graph)
                              << '\n';
      }
      auto plan = make_plan(a.choice.route, scenario_.graph);
      const int zeta = client.service.function(0).merging_ratio;
      for (int k = 0; k < a.count; ++k) {
        const std::int64_t id = next_request_++;
        requests_[id] = Request{t_, 1, a.client, plan->live_hops};
        const std::int64_t flow = next_flow_++;
        spawn(plan, a.client, 0, false, id, flow, t_, 1, 0, {}, t_);
        if (zeta > 0) spawn(plan, a.client, 0, true, id, flow, t_, zeta, 1, {}, t_);
      }
    }
    admitted_ = std::move(result.admitted);
  }

  std::string_view policy_label() const { return policy_name(scenario_.policy); }

  void spawn(const std::shared_ptr<const Plan>& plan, int client, int layer,
             bool is_static, std::int64_t request, std::int64_t flow,
             std::int64_t birth, int units, int crossed,
             std::vector<std::int64_t> riders, std::int64_t at,
             std::vector<int>* defer = nullptr) {
    const int idx = alloc();
    Item& it = items_[idx];
    it.plan = plan;
    it.riders = std::move(riders);
    it.request = request;
    it.flow = flow;
    it.birth = birth;
    it.client = client;
    it.layer = layer;
    it.units = units;
    it.crossed = crossed;
    it.pos = 0;
    it.is_static = is_static;
    backlog_units_ += units;
    if (defer) {
      defer->push_back(idx);
    } else {
      place(idx, at);
    }
  }

  void forward(int idx) {
    Item& it = items_[idx];
    ++it.crossed;
    ++it.pos;
    landing_.push_back(idx);
  }

  // Splits `units` packets off item idx into a new item (same flow/request).
  int split(int idx, int units) {
    const int fresh = alloc();
    Item& src = items_[idx];
    Item& dst = items_[fresh];
    dst = src;
    dst.riders.clear();
    dst.units = units;
    src.units -= units;
    if (!dst.is_static) {
      auto found = requests_.find(dst.request);
      if (found != requests_.end()) ++found->second.refs;
    }
    return fresh;
  }

  void transmit() {
    for (std::size_t l = 0; l < link_q_.size(); ++l) {
      const double cap = link_cap_[l];
      const auto report = link_q_[l].serve(
          cap,
          [&](int id, int units, bool whole) { forward(whole ? id : split(id, units)); },
          [&](int id, bool whole) { return whole ? id : split(id, 1); });
      metrics_.invariants.operations += report.units_sent;
      check(report.used <= cap + 1e-6, [&] {
        return fmt::format("link {}: {} units sent over capacity {}", l, report.used, cap);
      });
      check(report.order_ok,
            [&] { return fmt::format("link {}: waiting packet outranks a sent one", l); });
      link_used_[l] += report.used;
    }
  }

  void process() {
    for (std::size_t i = 0; i < node_q_.size(); ++i) {
      NodeQueue& q = node_q_[i];
      const double cap = node_cap_[i];
      double budget = cap;
      double used = 0.0;
      if (q.service != -1) {
        const double take = std::min(budget, q.remaining);
        q.remaining -= take;
        budget -= take;
        used += take;
        work_backlog_ -= take;
        if (q.remaining <= kEps) {
          work_backlog_ -= q.remaining;
          complete(static_cast<NodeId>(i), q.service);
          q.service = -1;
          q.remaining = 0.0;
        }
      }
      bool served_any = false;
      Key last{};
      while (q.service == -1 && !q.heap.empty()) {
        const Key top = q.heap.top();
        const int idx = std::get<4>(top);
        const Item& it = items_[idx];
        const double work =
            scenario_.clients[it.client].service.function(it.layer).workload;
        if (work > budget + kEps && budget <= kEps) break;
        if (options_.check_invariants) {
          check(!served_any || !key_less(top, last),
                [&] { return fmt::format("node {}: ENTO order broken", i); });
        }
        served_any = true;
        last = top;
        q.heap.pop();
        ++metrics_.invariants.operations;
        if (work <= budget + kEps) {
          const double take = std::min(work, budget);
          budget -= take;
          used += take;
          work_backlog_ -= work;
          complete(static_cast<NodeId>(i), idx);
        } else {
          q.service = idx;
          q.remaining = work - budget;
          used += budget;
          work_backlog_ -= budget;
          budget = 0.0;
        }
      }
      if (options_.check_invariants) {
        check(used <= cap + 1e-6, [&] {
          return fmt::format("node {}: {} units processed over capacity {}", i, used, cap);
        });
        if (served_any && !q.heap.empty()) {
          check(!key_less(q.heap.top(), last),
                [&] { return fmt::format("node {}: waiting pair outranks a served one", i); });
        }
      }
      node_used_[i] += used;
    }
  }

  // Live packet idx (with its paired static packets) finished processing at
  // `node` this slot.
  void complete(NodeId node, int idx) {
    Item& it = items_[idx];
    const ServiceSpec& service = scenario_.clients[it.client].service;
    const int m = it.layer;
    const FunctionSpec& fn = service.function(m);
    backlog_units_ -= 1 + fn.merging_ratio;

    const std::int64_t acc_key =
        (static_cast<std::int64_t>(it.client) * static_cast<std::int64_t>(node_q_.size()) +
         node) * max_stages_ + m;
    Accumulator& acc = acc_[acc_key];
    acc.credit += fn.scaling_factor;
    acc.pending.insert(acc.pending.end(), it.riders.begin(), it.riders.end());
    const int k = static_cast<int>(std::floor(acc.credit + kEps));
    acc.credit = std::max(0.0, acc.credit - k);
    if (k == 0) {
      acc.pending.push_back(it.request);
      release(idx);
      return;
    }
    std::vector<std::int64_t> riders = std::move(acc.pending);
    acc.pending.clear();
    const std::int64_t request = it.request;
    auto found = requests_.find(request);
    const auto plan = it.plan;
    const int client = it.client;
    const int crossed = it.crossed + 1;
    const std::int64_t birth = it.birth;
    release(idx);
    if (m + 1 < service.stage_count()) {
      const int zeta = service.function(m + 1).merging_ratio;
      if (found != requests_.end()) found->second.refs += k - 1;
      for (int j = 0; j < k; ++j) {
        const std::int64_t flow = next_flow_++;
        std::vector<std::int64_t> carry;
        if (j == k - 1) carry = std::move(riders);
        spawn(plan, client, m + 1, false, request, flow, birth, 1, crossed,
              std::move(carry), t_, &deferred_);
        if (zeta > 0) {
          spawn(plan, client, m + 1, true, request, flow, birth, zeta, 1, {}, t_,
                &deferred_);
        }
      }
    } else {
      spawn(plan, client, m + 1, false, request, next_flow_++, birth, k, crossed,
            std::move(riders), t_, &deferred_);
    }
  }

  void land() {
    // Emitted this slot without crossing a link: usable next slot.
    std::vector<int> deferred = std::move(deferred_);
    deferred_.clear();
    for (int idx : deferred) place(idx, t_);
    // Received at the start of the next slot.
    std::vector<int> landing = std::move(landing_);
    landing_.clear();
    for (int idx : landing) place(idx, t_ + 1);
  }

  void update_queues() {
    const LoadVector loads = accumulate_loads(admitted_, scenario_.graph.node_count(),
                                              scenario_.graph.link_count());
    if (options_.check_invariants) {
      VirtualQueueState before = queues_;
      queues_.apply_update(loads.node_load, loads.link_load);
      for (std::size_t i = 0; i < loads.node_load.size(); ++i) {
        const auto id = static_cast<NodeId>(i);
        const double expect = std::max(
            0.0, before.node_backlog(id) - node_cap_[i] + loads.node_load[i]);
        check(std::abs(expect - queues_.node_backlog(id)) <= kEps * (1.0 + expect),
              [&] { return fmt::format("node {}: virtual queue update", i); });
      }
      for (std::size_t l = 0; l < loads.link_load.size(); ++l) {
        const auto id = static_cast<LinkId>(l);
        const double expect = std::max(
            0.0, before.link_backlog(id) - link_cap_[l] + loads.link_load[l]);
        check(std::abs(expect - queues_.link_backlog(id)) <= kEps * (1.0 + expect),
              [&] { return fmt::format("link {}: virtual queue update", l); });
      }
    } else {
      queues_.apply_update(loads.node_load, loads.link_load);
    }
    admitted_.clear();
  }

  void record() {
    const double backlog = static_cast<double>(backlog_units_);
    metrics_.backlog.push_back(backlog);
    metrics_.work_backlog.push_back(std::max(0.0, work_backlog_));
    window_delivered_ += delivered_slot_;
    const std::int64_t stride = std::max<std::int64_t>(1, options_.metrics_stride);
    if ((t_ + 1) % stride == 0) {
      if (options_.metrics_csv) {
        const double window_mean =
            window_delay_count_ ? window_delay_sum_ / static_cast<double>(window_delay_count_)
                                : 0.0;
        *options_.metrics_csv << t_ << ',' << backlog << ',' << window_delivered_ << ','
                              << window_mean << '\n';
      }
      if (options_.queue_trace) write_queue_trace();
      window_delay_sum_ = 0.0;
      window_delay_count_ = 0;
      window_delivered_ = 0;
    }
    if (options_.abort_backlog_slots > 0.0 && offered_ > 0.0 &&
        backlog > options_.abort_backlog_slots * offered_) {
      aborted_ = true;
    }
  }

  void write_queue_trace() {
    std::ostream& os = *options_.queue_trace;
    const NetworkGraph& g = scenario_.graph;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const auto id = static_cast<NodeId>(i);
      os << t_ << ",node:" << g.node_name(id) << ',' << queues_.node_backlog(id) << ','
         << queues_.node_delay(id) << '\n';
    }
    for (std::size_t l = 0; l < g.link_count(); ++l) {
      const auto id = static_cast<LinkId>(l);
      const Link& link = g.link(id);
      os << t_ << ",link:" << g.node_name(link.from) << '-' << g.node_name(link.to) << ','
         << queues_.link_backlog(id) << ',' << queues_.link_delay(id) << '\n';
    }
  }

  Scenario scenario_;
  EngineOptions options_;
  ArrivalProcess arrivals_;
  VirtualQueueState queues_;
  std::vector<double> node_cap_;
  std::vector<double> link_cap_;
  std::vector<AugmentedLayeredGraph> algs_;
  int max_stages_ = 1;

  std::vector<Item> items_;
  std::vector<int> free_;
  std::vector<EntoQueue> link_q_;
  std::vector<NodeQueue> node_q_;
  std::unordered_map<std::int64_t, Waiting> waiting_;
  std::unordered_map<std::int64_t, Accumulator> acc_;
  std::unordered_map<std::int64_t, Request> requests_;
  std::vector<int> landing_;
  std::vector<int> deferred_;
  std::vector<Admission> admitted_;

  std::int64_t t_ = 0;
  std::int64_t warmup_ = 0;
  std::int64_t seq_ = 0;
  std::int64_t next_request_ = 0;
  std::int64_t next_flow_ = 0;
  std::int64_t backlog_units_ = 0;
  double work_backlog_ = 0.0;
  double offered_ = 0.0;
  bool aborted_ = false;

  std::int64_t delivered_slot_ = 0;
  std::int64_t window_delivered_ = 0;
  double window_delay_sum_ = 0.0;
  std::int64_t window_delay_count_ = 0;

  std::vector<double> node_used_;
  std::vector<double> link_used_;
  MetricsRecord metrics_;
};

Engine::Engine(const Scenario& scenario, EngineOptions options)
    : impl_(std::make_unique<Impl>(scenario, std::move(options))) {}
Engine::~Engine() = default;

void Engine::step() { impl_->step(); }
void Engine::step(std::span<const int> arrivals) { impl_->step(arrivals); }
MetricsRecord Engine::run() { return impl_->run(); }
std::int64_t Engine::slot() const { return impl_->slot(); }
bool Engine::aborted() const { return impl_->aborted(); }
double Engine::total_backlog() const { return impl_->total_backlog(); }
const VirtualQueueState& Engine::virtual_queues() const { return impl_->virtual_queues(); }
const MetricsRecord& Engine::metrics() const { return impl_->metrics(); }
const std::vector<AugmentedLayeredGraph>& Engine::algs() const { return impl_->algs(); }

MetricsRecord run(const Scenario& scenario, const EngineOptions& options) {
  Engine engine(scenario, options);
  return engine.run();
}

std::string format_route_line(std::int64_t slot, int client, std::int64_t first_request,
                              int count, std::string_view policy,
                              const RouteChoice& choice, const NetworkGraph& graph) {
  const EmbeddedRoute& r = choice.route;
  std::string proc;
  for (std::size_t m = 0; m < r.processing.size(); ++m) {
    if (m) proc += ',';
    proc += graph.node_name(r.processing[m]);
  }
  auto join_all = [&](const std::vector<NodePath>& paths) {
    std::string out;
    for (std::size_t m = 0; m < paths.size(); ++m) {
      if (m) out += '|';
      out += join_path(paths[m], graph);
    }
    return out;
  };
  return fmt::format("slot={} client={} request={} count={} policy={} weight={:.17g} "
                     "proc={} live={} static={} out={}",
                     slot, client, first_request, count, policy, choice.weight, proc,
                     join_all(r.live_paths), join_all(r.static_paths),
                     join_path(r.output_path, graph));
}

StabilityVerdict detect_stability(std::span<const double> backlog, double arrivals_per_slot,
                                  double threshold) {
  if (static_cast<std::int64_t>(backlog.size()) < kMinStabilitySeries) {
    throw std::invalid_argument(fmt::format(
        "stability detection needs at least {} slots, got {}", kMinStabilitySeries,
        backlog.size()));
  }
  StabilityVerdict v;
  v.slope = slope_of(backlog);
  v.normalized_slope = arrivals_per_slot > 0.0 ? v.slope / arrivals_per_slot : v.slope;
  v.stable = v.normalized_slope <= threshold;
  return v;
}

double offered_packets_per_slot(const Scenario& scenario) {
  double total = 0.0;
  for (const ClientSpec& c : scenario.clients) {
    const ServiceSpec& s = c.service;
    double per_request = s.stream_scale(s.stage_count());
    for (int m = 0; m < s.stage_count(); ++m) {
      per_request += s.stream_scale(m) * (1.0 + s.function(m).merging_ratio);
    }
    total += c.arrival_rate * per_request;
  }
  return total;
}

double arrivals_per_slot(const Scenario& scenario) {
  double total = 0.0;
  for (const ClientSpec& c : scenario.clients) total += c.arrival_rate;
  return total;
}

RunSummary summarize(const Scenario& scenario, const MetricsRecord& metrics,
                     double threshold) {
  RunSummary s;
  s.verdict.slope = slope_of(metrics.backlog);
  const double arrivals = arrivals_per_slot(scenario);
  s.verdict.normalized_slope = arrivals > 0.0 ? s.verdict.slope / arrivals : s.verdict.slope;
  s.verdict.stable = s.verdict.normalized_slope <= threshold;
  const double delay = metrics.mean_delay();
  s.stable = s.verdict.stable && !metrics.aborted && !(delay >= kUnstableDelay);
  s.mean_delay = s.stable ? delay : std::numeric_limits<double>::infinity();
  const auto tp = metrics.throughput(scenario);
  s.throughput = tp.empty() ? 0.0 : std::accumulate(tp.begin(), tp.end(), 0.0) /
                                        static_cast<double>(tp.size());
  return s;
}

void write_summary_header(std::ostream& os) {
  os << "policy,lambda,alpha1,alpha2,cache_index,throughput,mean_delay,stable\n";
}

void write_summary_row(std::ostream& os, const Scenario& scenario, int cache_index,
                       const RunSummary& summary) {
  const double lambda =
      scenario.clients.empty() ? 0.0 : scenario.clients.front().arrival_rate;
  os << fmt::format("{},{:.6g},{:.6g},{:.6g},{},{:.6g},{},{}\n",
                    policy_name(scenario.policy), lambda, scenario.alpha_proc,
                    scenario.alpha_tx, cache_index, summary.throughput,
                    std::isfinite(summary.mean_delay) ? fmt::format("{:.6g}", summary.mean_delay)
                                                      : std::string("inf"),
                    summary.stable ? 1 : 0);
}

}  // namespace didcnc
