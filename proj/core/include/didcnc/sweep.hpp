#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "didcnc/model.hpp"
#include "didcnc/simulator.hpp"

namespace didcnc {

class SweepError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SweepKind { kLambda, kAlpha, kCacheIndex };

std::string_view sweep_kind_name(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view name);  // lambda | alpha | cache | cache_index

struct SweepSpec {
  SweepKind kind = SweepKind::kLambda;
  std::string name = "sweep";  // stem of the output files
  Scenario base = default_grid_scenario();
  std::vector<Policy> policies{Policy::kDiDcnc, Policy::kS2L, Policy::kL2S};
  // lambda: per-client arrival rates; alpha: transmission levels alpha2 of
  // the border curve; cache_index: cache indices.
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::int64_t slots = 100000;
  std::int64_t warmup_slots = -1;

  // Boundary search: `bisection_iterations` halvings of
  // [0, bisection_headroom * LP bound].
  bool boundary = true;
  int bisection_iterations = 8;
  double bisection_headroom = 1.2;

  // alpha / cache_index sweeps: fixed per-client rate and delay bound.
  double lambda = 4.0;
  double delay_bound = 20.0;
  int alpha_iterations = 8;
  // cache_index: also search the minimal diagonal alpha at `lambda`.
  bool occupation = true;

  std::filesystem::path output_dir = ".";
  bool force = false;  // ignore cached grid points
  int jobs = 0;        // worker threads; 0 = hardware concurrency

  void validate() const;  // throws SweepError
};

// JSON sweep description (see docs/formats.md). Relative scenario paths are
// resolved against `base_dir`. `kind` fills in a missing "kind" key and
// must match a present one.
SweepSpec parse_sweep_spec(std::string_view text, const std::filesystem::path& base_dir = ".",
                           std::optional<SweepKind> kind = std::nullopt);
SweepSpec load_sweep_spec(const std::filesystem::path& path,
                          std::optional<SweepKind> kind = std::nullopt);

// One simulated grid point, possibly aggregated over seeds.
struct PointResult {
  Policy policy = Policy::kDiDcnc;
  double lambda = 0.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  int cache_index = 1;
  int seeds = 0;
  int stable_seeds = 0;
  bool stable = false;  // majority of seeds
  double mean_delay = std::numeric_limits<double>::infinity();
  double throughput = 0.0;
  double slope = 0.0;  // largest normalized slope over the seeds
  bool reused = false;
};

// Simulates one point for every seed of the spec (or reuses the cached
// per-seed CSV files under output_dir/points) and takes the majority vote.
// The mean delay averages the stable seeds; infinite when the vote fails.
class PointEvaluator {
 public:
  explicit PointEvaluator(const SweepSpec& spec);

  PointResult evaluate(const Scenario& scenario, int cache_index) const;
  // Stable and mean delay within the spec's delay bound.
  bool feasible(const PointResult& r) const;

  std::int64_t simulated_runs() const { return simulated_; }
  std::int64_t reused_runs() const { return reused_; }

 private:
  const SweepSpec* spec_;
  mutable std::atomic<std::int64_t> simulated_{0};
  mutable std::atomic<std::int64_t> reused_{0};
};

// Copy of `base` with every client rate set to `lambda`, the given
// capacity scalings and policy.
Scenario configure(const Scenario& base, Policy policy, double lambda, double alpha1,
                   double alpha2);

// LP bound on the common per-client rate (all base rates set to 1).
double lp_rate_bound(const Scenario& base);

struct BoundaryEstimate {
  Policy policy = Policy::kDiDcnc;
  int cache_index = 1;
  double lower = 0.0;  // largest rate found stable (the reported boundary)
  double upper = 0.0;  // smallest rate found unstable, or the search limit
  double lp_bound = 0.0;
  std::vector<PointResult> probes;
};

BoundaryEstimate bisect_boundary(const PointEvaluator& eval, const SweepSpec& spec,
                                 const Scenario& base, Policy policy, int cache_index = 1);

// Smallest a in (0, 1] meeting the delay bound at spec.lambda, where
// alphas(a) gives (alpha1, alpha2). NaN when even a = 1 fails.
struct AlphaEstimate {
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double infeasible_below = 0.0;
  std::vector<PointResult> probes;
};

AlphaEstimate bisect_alpha(const PointEvaluator& eval, const SweepSpec& spec,
                           const Scenario& base, Policy policy, int cache_index,
                           const std::function<std::pair<double, double>(double)>& alphas);

struct LambdaSweepResult {
  double lp_bound = 0.0;
  std::vector<PointResult> delays;  // per policy, per grid value
  std::vector<BoundaryEstimate> boundaries;
};

struct BorderPoint {
  Policy policy = Policy::kDiDcnc;
  double alpha2 = 1.0;
  double alpha1 = std::numeric_limits<double>::quiet_NaN();  // minimal feasible
};

struct SavingSummary {
  Policy policy = Policy::kDiDcnc;
  double diagonal_alpha = std::numeric_limits<double>::quiet_NaN();
  double diagonal_saving = 0.0;    // 1 - diagonal_alpha
  double processing_saving = 0.0;  // 1 - minimal alpha1 at alpha2 = 1
};

struct AlphaSweepResult {
  std::vector<BorderPoint> border;
  std::vector<SavingSummary> savings;
};

struct CachePoint {
  Policy policy = Policy::kDiDcnc;
  int cache_index = 1;
  double lp_bound = 0.0;
  double boundary = 0.0;
  double min_alpha = std::numeric_limits<double>::quiet_NaN();  // diagonal, at spec.lambda
};

struct CacheSweepResult {
  std::vector<CachePoint> points;
};

// Each sweep writes its tables (CSV) and plots (SVG) into spec.output_dir.
LambdaSweepResult sweep_lambda(const SweepSpec& spec);
AlphaSweepResult sweep_alpha(const SweepSpec& spec);
CacheSweepResult sweep_cache_index(const SweepSpec& spec);

// Files a sweep writes, relative to the output directory.
std::vector<std::string> sweep_outputs(const SweepSpec& spec);

}  // namespace didcnc
