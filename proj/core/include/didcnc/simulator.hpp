#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "didcnc/control.hpp"
#include "didcnc/model.hpp"
#include "didcnc/queue_state.hpp"

namespace didcnc {

struct EngineOptions {
  // Run the in-engine invariant checks (capacity, pairing, ENTO order,
  // virtual-queue arithmetic, weight/load identity) on every operation.
  bool check_invariants = false;
  // Slots excluded from delay and throughput averages; negative selects
  // min(10^4, T / 10).
  std::int64_t warmup_slots = -1;
  // Stop early once the packet backlog exceeds this many slots' worth of
  // mean offered packets (Little's law: mean delay far beyond 10^3 slots).
  // Zero disables the cut-off.
  double abort_backlog_slots = 2000.0;
  // Overrides the scenario policy when set.
  RouteSelector selector;

  // Optional traces; null streams are skipped.
  std::ostream* metrics_csv = nullptr;   // slot,total_backlog,delivered,mean_delay_window
  std::int64_t metrics_stride = 1;
  std::ostream* queue_trace = nullptr;   // slot,entity,backlog,normalized
  std::ostream* route_trace = nullptr;   // one line per admission
};

struct InvariantReport {
  std::int64_t operations = 0;  // scheduled transmissions/processings checked
  std::int64_t checks = 0;      // individual assertions evaluated
  std::int64_t violations = 0;
  std::vector<std::string> samples;  // first few violation messages
};

struct MetricsRecord {
  std::int64_t slots = 0;
  std::int64_t warmup_slots = 0;
  bool aborted = false;  // backlog cut-off hit before the horizon

  std::vector<std::int64_t> arrivals;        // per client
  std::vector<std::int64_t> dropped;         // per client (infeasible routing)
  std::vector<std::int64_t> delivered;       // output packets at d, per client
  std::vector<std::int64_t> delivered_after_warmup;
  std::vector<std::int64_t> completed;       // requests finished, per client

  double delay_sum = 0.0;  // over requests born after warm-up
  std::int64_t delay_count = 0;
  std::int64_t delay_bound_violations = 0;  // delay < live hop count

  std::vector<double> backlog;       // packets queued anywhere, per slot
  std::vector<double> work_backlog;  // processing units of formed pairs

  std::vector<double> node_utilization;  // fraction of effective capacity
  std::vector<double> link_utilization;

  InvariantReport invariants;

  double mean_delay() const;
  // Per-client output rate over the measured window, expressed in requests
  // per slot (delivered output / output volume per request).
  std::vector<double> throughput(const Scenario& scenario) const;
};

// Discrete-time engine. Each slot: draw arrivals, admit on the pre-update
// virtual queues, inject, transmit on links, process at nodes, land
// transmitted packets, update virtual queues, record metrics.
class Engine {
 public:
  explicit Engine(const Scenario& scenario, EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // One full slot with arrivals drawn from the scenario's processes.
  void step();
  // One slot with the given per-client arrival counts.
  void step(std::span<const int> arrivals);
  // Runs until the scenario horizon (or the backlog cut-off).
  MetricsRecord run();

  std::int64_t slot() const;
  bool aborted() const;
  double total_backlog() const;
  const VirtualQueueState& virtual_queues() const;
  const MetricsRecord& metrics() const;
  const std::vector<AugmentedLayeredGraph>& algs() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

MetricsRecord run(const Scenario& scenario, const EngineOptions& options = {});

// Trace line: slot, client, first request id, count, policy, weight, and the
// processing/live/static/output node sequences.
std::string format_route_line(std::int64_t slot, int client,
                              std::int64_t first_request, int count,
                              std::string_view policy, const RouteChoice& choice,
                              const NetworkGraph& graph);

struct StabilityVerdict {
  bool stable = true;
  double slope = 0.0;             // packets per slot^2, last half of the run
  double normalized_slope = 0.0;  // slope / mean arrivals per slot
};

inline constexpr double kDefaultSlopeThreshold = 0.01;
inline constexpr std::int64_t kMinStabilitySeries = 10000;

// Least-squares slope of the backlog over the last half of the series,
// normalised by the mean arrivals (requests) per slot; unstable when above
// `threshold`. Throws std::invalid_argument for series shorter than
// kMinStabilitySeries.
StabilityVerdict detect_stability(std::span<const double> backlog,
                                  double arrivals_per_slot,
                                  double threshold = kDefaultSlopeThreshold);

// Sum of the client arrival rates (requests per slot).
double arrivals_per_slot(const Scenario& scenario);

// Mean packets injected per slot at the scenario's rates (live + static +
// emitted output volume per request, summed over clients).
double offered_packets_per_slot(const Scenario& scenario);

// Run summary used by sweeps: stable only when the slope test passes, the
// run was not cut off and the mean delay is below 10^3 slots.
struct RunSummary {
  bool stable = false;
  double mean_delay = 0.0;  // +inf when unstable
  double throughput = 0.0;  // mean per-client request rate delivered
  StabilityVerdict verdict;
};

inline constexpr double kUnstableDelay = 1000.0;

RunSummary summarize(const Scenario& scenario, const MetricsRecord& metrics,
                     double threshold = kDefaultSlopeThreshold);

// Writes the final per-run CSV row (see docs/formats.md).
void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, const Scenario& scenario,
                       int cache_index, const RunSummary& summary);

}  // namespace didcnc
