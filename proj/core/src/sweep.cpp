#include "didcnc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "didcnc/oracle.hpp"
#include "didcnc/plot.hpp"
#include "didcnc/scenario_io.hpp"

namespace didcnc {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::kLambda:
      return "lambda";
    case SweepKind::kAlpha:
      return "alpha";
    case SweepKind::kCacheIndex:
      return "cache_index";
  }
  return "?";
}

SweepKind parse_sweep_kind(std::string_view name) {
  if (name == "lambda") return SweepKind::kLambda;
  if (name == "alpha") return SweepKind::kAlpha;
  if (name == "cache" || name == "cache_index") return SweepKind::kCacheIndex;
  throw SweepError("kind: unknown sweep kind \"" + std::string(name) + "\"");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw SweepError("grid: must not be empty");
  for (double v : grid) {
    switch (kind) {
      case SweepKind::kLambda:
        if (!(v >= 0.0)) throw SweepError(fmt::format("grid: arrival rate {} is negative", v));
        break;
      case SweepKind::kAlpha:
        if (!(v > 0.0 && v <= 1.0)) throw SweepError(fmt::format("grid: alpha {} outside (0, 1]", v));
        break;
      case SweepKind::kCacheIndex: {
        const auto n = static_cast<double>(base.graph.node_count());
        if (v != std::floor(v) || v < 1.0 || v > n) {
          throw SweepError(fmt::format("grid: cache index {} outside 1..{}", v, n));
        }
        break;
      }
    }
  }
  if (policies.empty()) throw SweepError("policies: must not be empty");
  if (seeds.empty()) throw SweepError("seeds: must not be empty");
  if (slots < kMinStabilitySeries) {
    throw SweepError(fmt::format("slots: at least {} needed by the stability test", kMinStabilitySeries));
  }
  if (bisection_iterations < 1 || alpha_iterations < 1) throw SweepError("iterations: must be >= 1");
  if (!(bisection_headroom >= 1.0)) throw SweepError("bisection_headroom: must be >= 1");
  if (!(lambda >= 0.0)) throw SweepError("lambda: must be >= 0");
  if (!(delay_bound > 0.0)) throw SweepError("delay_bound: must be > 0");
  base.validate();
}

SweepSpec parse_sweep_spec(std::string_view text, const fs::path& base_dir,
                           std::optional<SweepKind> kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SweepError(std::string("sweep spec: ") + e.what());
  }
  if (!doc.is_object()) throw SweepError("sweep spec: expected an object");
  static const std::vector<std::string> kKeys{
      "kind", "name", "scenario", "policies", "grid", "seeds", "slots", "warmup_slots",
      "boundary", "bisection_iterations", "bisection_headroom", "lambda", "delay_bound",
      "alpha_iterations", "occupation", "force", "jobs"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw SweepError("sweep spec." + key + ": unknown key");
    }
  }
  SweepSpec spec;
  try {
    if (doc.contains("kind")) {
      spec.kind = parse_sweep_kind(doc["kind"].get<std::string>());
      if (kind && *kind != spec.kind) {
        throw SweepError(fmt::format("sweep spec.kind: file says {}, command asks for {}",
                                     sweep_kind_name(spec.kind), sweep_kind_name(*kind)));
      }
    } else if (kind) {
      spec.kind = *kind;
    } else {
      throw SweepError("sweep spec.kind: missing required field");
    }
    spec.name = doc.value("name", std::string(sweep_kind_name(spec.kind)));
    if (doc.contains("scenario")) {
      const std::string path = doc["scenario"].get<std::string>();
      if (path != "default") {
        fs::path p(path);
        if (p.is_relative()) p = base_dir / p;
        spec.base = load_scenario(p);
      }
    }
    if (doc.contains("policies")) {
      spec.policies.clear();
      for (const auto& p : doc["policies"]) spec.policies.push_back(parse_policy(p.get<std::string>()));
    }
    if (doc.contains("grid")) spec.grid = doc["grid"].get<std::vector<double>>();
    if (doc.contains("seeds")) spec.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    spec.slots = doc.value("slots", spec.slots);
    spec.warmup_slots = doc.value("warmup_slots", spec.warmup_slots);
    spec.boundary = doc.value("boundary", spec.boundary);
    spec.bisection_iterations = doc.value("bisection_iterations", spec.bisection_iterations);
    spec.bisection_headroom = doc.value("bisection_headroom", spec.bisection_headroom);
    spec.lambda = doc.value("lambda", spec.lambda);
    spec.delay_bound = doc.value("delay_bound", spec.delay_bound);
    spec.alpha_iterations = doc.value("alpha_iterations", spec.alpha_iterations);
    spec.occupation = doc.value("occupation", spec.occupation);
    spec.force = doc.value("force", spec.force);
    spec.jobs = doc.value("jobs", spec.jobs);
  } catch (const json::exception& e) {
    throw SweepError(std::string("sweep spec: ") + e.what());
  } catch (const ScenarioError& e) {
    throw SweepError(std::string("sweep spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const fs::path& path, std::optional<SweepKind> kind) {
  std::ifstream in(path);
  if (!in) throw SweepError("cannot open sweep spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_spec(buf.str(), path.parent_path(), kind);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr const char* kPointHeader =
    "policy,lambda,alpha1,alpha2,cache_index,seed,slots,throughput,mean_delay,stable,slope,"
    "normalized_slope,aborted";

struct SeedRun {
  RunSummary summary;
};

std::optional<SeedRun> read_point(const fs::path& path) {
  std::ifstream in(path);
  std::string header, row;
  if (!in || !std::getline(in, header) || header != kPointHeader || !std::getline(in, row)) {
    return std::nullopt;
  }
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  if (cells.size() != 13) return std::nullopt;
  try {
    SeedRun r;
    r.summary.throughput = std::stod(cells[7]);
    r.summary.mean_delay = std::stod(cells[8]);
    r.summary.stable = cells[9] == "1";
    r.summary.verdict.slope = std::stod(cells[10]);
    r.summary.verdict.normalized_slope = std::stod(cells[11]);
    r.summary.verdict.stable = r.summary.stable;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void write_point(const fs::path& path, const Scenario& s, int cache_index,
                 const MetricsRecord& m, const RunSummary& sum) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << kPointHeader << '\n';
    const double lambda = s.clients.empty() ? 0.0 : s.clients.front().arrival_rate;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", policy_name(s.policy), lambda,
               s.alpha_proc, s.alpha_tx, cache_index, s.seed, m.slots, sum.throughput,
               sum.mean_delay, sum.stable ? 1 : 0, sum.verdict.slope,
               sum.verdict.normalized_slope, m.aborted ? 1 : 0);
  }
  fs::rename(tmp, path);
}

// Runs fn(0..n-1) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

fs::path output_file(const SweepSpec& spec, std::string_view suffix) {
  return spec.output_dir / (spec.name + std::string(suffix));
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  if (!out) throw SweepError("cannot write " + path.string());
  return out;
}

void write_plot(const fs::path& path, const std::vector<PlotSeries>& series,
                const PlotOptions& options) {
  std::ofstream out = open_output(path);
  write_svg_plot(out, series, options);
}

}  // namespace

PointEvaluator::PointEvaluator(const SweepSpec& spec) : spec_(&spec) {}

PointResult PointEvaluator::evaluate(const Scenario& scenario, int cache_index) const {
  PointResult r;
  r.policy = scenario.policy;
  r.lambda = scenario.clients.empty() ? 0.0 : scenario.clients.front().arrival_rate;
  r.alpha1 = scenario.alpha_proc;
  r.alpha2 = scenario.alpha_tx;
  r.cache_index = cache_index;
  const fs::path dir = spec_->output_dir / "points";
  fs::create_directories(dir);

  double delay_sum = 0.0;
  double throughput_sum = 0.0;
  bool all_reused = true;
  for (std::uint64_t seed : spec_->seeds) {
    Scenario s = scenario;
    s.seed = seed;
    s.slot_count = spec_->slots;
    const std::string text = serialize_scenario(s);
    const fs::path path =
        dir / fmt::format("{}_l{}_a{}x{}_c{}_s{}_w{}_{:016x}.csv", policy_name(s.policy),
                          r.lambda, r.alpha1, r.alpha2, cache_index, seed, spec_->warmup_slots,
                          fnv1a(text));
    std::optional<SeedRun> run_result;
    if (!spec_->force) run_result = read_point(path);
    if (run_result) {
      ++reused_;
    } else {
      all_reused = false;
      EngineOptions options;
      options.warmup_slots = spec_->warmup_slots;
      const MetricsRecord m = run(s, options);
      run_result = SeedRun{summarize(s, m)};
      write_point(path, s, cache_index, m, run_result->summary);
      ++simulated_;
    }
    const RunSummary& sum = run_result->summary;
    ++r.seeds;
    r.slope = std::max(r.slope, sum.verdict.normalized_slope);
    throughput_sum += sum.throughput;
    if (sum.stable) {
      ++r.stable_seeds;
      delay_sum += sum.mean_delay;
    }
  }
  r.reused = all_reused;
  r.stable = 2 * r.stable_seeds > r.seeds;
  r.throughput = throughput_sum / r.seeds;
  r.mean_delay = r.stable ? delay_sum / r.stable_seeds : std::numeric_limits<double>::infinity();
  return r;
}

bool PointEvaluator::feasible(const PointResult& r) const {
  return r.stable && r.mean_delay <= spec_->delay_bound;
}

Scenario configure(const Scenario& base, Policy policy, double lambda, double alpha1,
                   double alpha2) {
  Scenario s = base;
  s.policy = policy;
  s.alpha_proc = alpha1;
  s.alpha_tx = alpha2;
  for (ClientSpec& c : s.clients) c.arrival_rate = lambda;
  return s;
}

double lp_rate_bound(const Scenario& base) {
  Scenario s = base;
  for (ClientSpec& c : s.clients) c.arrival_rate = 1.0;
  const ThroughputBound b = max_throughput_lp(s, false);
  if (b.status != LpSolution::Status::kOptimal) {
    throw SweepError("LP bound: solver returned " + to_string(b.status));
  }
  return b.theta;
}

BoundaryEstimate bisect_boundary(const PointEvaluator& eval, const SweepSpec& spec,
                                 const Scenario& base, Policy policy, int cache_index) {
  BoundaryEstimate b;
  b.policy = policy;
  b.cache_index = cache_index;
  b.lp_bound = lp_rate_bound(base);
  double lo = 0.0;
  double hi = spec.bisection_headroom * b.lp_bound;
  for (int i = 0; i < spec.bisection_iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const PointResult p =
        eval.evaluate(configure(base, policy, mid, base.alpha_proc, base.alpha_tx), cache_index);
    b.probes.push_back(p);
    (p.stable ? lo : hi) = mid;
  }
  b.lower = lo;
  b.upper = hi;
  return b;
}

AlphaEstimate bisect_alpha(const PointEvaluator& eval, const SweepSpec& spec,
                           const Scenario& base, Policy policy, int cache_index,
                           const std::function<std::pair<double, double>(double)>& alphas) {
  AlphaEstimate a;
  auto probe = [&](double x) {
    const auto [a1, a2] = alphas(x);
    const PointResult p = eval.evaluate(configure(base, policy, spec.lambda, a1, a2), cache_index);
    a.probes.push_back(p);
    return eval.feasible(p);
  };
  if (!probe(1.0)) {
    a.infeasible_below = 1.0;
    return a;
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < spec.alpha_iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? hi : lo) = mid;
  }
  a.alpha = hi;
  a.infeasible_below = lo;
  return a;
}

LambdaSweepResult sweep_lambda(const SweepSpec& spec) {
  spec.validate();
  if (spec.kind != SweepKind::kLambda) throw SweepError("kind: expected lambda");
  const PointEvaluator eval(spec);
  LambdaSweepResult result;
  result.lp_bound = lp_rate_bound(spec.base);
  const std::size_t np = spec.policies.size();
  std::vector<std::vector<PointResult>> delays(np);
  std::vector<std::optional<BoundaryEstimate>> bounds(np);
  parallel_for(np, spec.jobs, [&](std::size_t k) {
    const Policy p = spec.policies[k];
    const Scenario& b = spec.base;
    for (double lambda : spec.grid) {
      delays[k].push_back(eval.evaluate(configure(b, p, lambda, b.alpha_proc, b.alpha_tx), 1));
    }
    if (spec.boundary) bounds[k] = bisect_boundary(eval, spec, b, p);
  });
  for (std::size_t k = 0; k < np; ++k) {
    result.delays.insert(result.delays.end(), delays[k].begin(), delays[k].end());
    if (bounds[k]) result.boundaries.push_back(*bounds[k]);
  }

  std::ofstream out = open_output(output_file(spec, "_delay.csv"));
  out << "policy,lambda,mean_delay,throughput,stable,stable_seeds,seeds\n";
  for (const PointResult& r : result.delays) {
    fmt::print(out, "{},{},{},{},{},{},{}\n", policy_name(r.policy), num(r.lambda),
               num(r.mean_delay), num(r.throughput), r.stable ? 1 : 0, r.stable_seeds, r.seeds);
  }
  if (spec.boundary) {
    std::ofstream bo = open_output(output_file(spec, "_boundary.csv"));
    bo << "policy,boundary,upper,lp_bound\n";
    for (const BoundaryEstimate& b : result.boundaries) {
      fmt::print(bo, "{},{},{},{}\n", policy_name(b.policy), num(b.lower), num(b.upper),
                 num(b.lp_bound));
    }
  }
  std::vector<PlotSeries> series;
  for (std::size_t k = 0; k < np; ++k) {
    PlotSeries s{std::string(policy_name(spec.policies[k])), {}};
    for (const PointResult& r : delays[k]) s.points.emplace_back(r.lambda, r.mean_delay);
    series.push_back(std::move(s));
  }
  write_plot(output_file(spec, "_delay.svg"), series,
             {"Average delay vs arrival rate", "arrival rate (packets/slot)",
              "average delay (slots)", {}, {}, {}, {}});
  return result;
}

AlphaSweepResult sweep_alpha(const SweepSpec& spec) {
  spec.validate();
  if (spec.kind != SweepKind::kAlpha) throw SweepError("kind: expected alpha");
  const PointEvaluator eval(spec);
  const std::size_t np = spec.policies.size();
  std::vector<std::vector<BorderPoint>> border(np);
  std::vector<SavingSummary> savings(np);
  parallel_for(np, spec.jobs, [&](std::size_t k) {
    const Policy p = spec.policies[k];
    double axis = std::numeric_limits<double>::quiet_NaN();
    for (double a2 : spec.grid) {
      const AlphaEstimate e = bisect_alpha(eval, spec, spec.base, p, 1,
                                           [a2](double a) { return std::pair{a, a2}; });
      border[k].push_back({p, a2, e.alpha});
      if (a2 == 1.0) axis = e.alpha;
    }
    if (std::isnan(axis) && std::find(spec.grid.begin(), spec.grid.end(), 1.0) == spec.grid.end()) {
      axis = bisect_alpha(eval, spec, spec.base, p, 1, [](double a) { return std::pair{a, 1.0}; })
                 .alpha;
    }
    const AlphaEstimate diag =
        bisect_alpha(eval, spec, spec.base, p, 1, [](double a) { return std::pair{a, a}; });
    SavingSummary& s = savings[k];
    s.policy = p;
    s.diagonal_alpha = diag.alpha;
    s.diagonal_saving = std::isnan(diag.alpha) ? 0.0 : 1.0 - diag.alpha;
    s.processing_saving = std::isnan(axis) ? 0.0 : 1.0 - axis;
  });
  AlphaSweepResult result;
  for (std::size_t k = 0; k < np; ++k) {
    result.border.insert(result.border.end(), border[k].begin(), border[k].end());
  }
  result.savings = savings;

  std::ofstream out = open_output(output_file(spec, "_border.csv"));
  out << "policy,alpha2,alpha1\n";
  for (const BorderPoint& b : result.border) {
    fmt::print(out, "{},{},{}\n", policy_name(b.policy), num(b.alpha2), num(b.alpha1));
  }
  std::ofstream so = open_output(output_file(spec, "_saving.csv"));
  so << "policy,diagonal_alpha,diagonal_saving,processing_saving\n";
  for (const SavingSummary& s : result.savings) {
    fmt::print(so, "{},{},{},{}\n", policy_name(s.policy), num(s.diagonal_alpha),
               num(s.diagonal_saving), num(s.processing_saving));
  }
  std::vector<PlotSeries> series;
  for (std::size_t k = 0; k < np; ++k) {
    PlotSeries s{std::string(policy_name(spec.policies[k])), {}};
    for (const BorderPoint& b : border[k]) s.points.emplace_back(b.alpha1, b.alpha2);
    series.push_back(std::move(s));
  }
  write_plot(output_file(spec, "_border.svg"), series,
             {"Feasible region border", "alpha1 (processing)", "alpha2 (transmission)", 0.0, 1.0,
              0.0, 1.0});
  return result;
}

CacheSweepResult sweep_cache_index(const SweepSpec& spec) {
  spec.validate();
  if (spec.kind != SweepKind::kCacheIndex) throw SweepError("kind: expected cache_index");
  const PointEvaluator eval(spec);
  const std::size_t np = spec.policies.size();
  const std::size_t ni = spec.grid.size();
  std::vector<CachePoint> points(np * ni);
  parallel_for(np * ni, spec.jobs, [&](std::size_t job) {
    const std::size_t k = job / ni;
    const int index = static_cast<int>(spec.grid[job % ni]);
    const Scenario base = with_cache_index(spec.base, index);
    CachePoint& c = points[job];
    c.policy = spec.policies[k];
    c.cache_index = index;
    c.lp_bound = lp_rate_bound(base);
    if (spec.boundary) c.boundary = bisect_boundary(eval, spec, base, c.policy, index).lower;
    if (spec.occupation) {
      c.min_alpha = bisect_alpha(eval, spec, base, c.policy, index, [](double a) {
                      return std::pair{a, a};
                    }).alpha;
    }
  });
  CacheSweepResult result{points};

  std::ofstream out = open_output(output_file(spec, "_cache.csv"));
  out << "policy,cache_index,lp_bound,boundary,min_alpha\n";
  for (const CachePoint& c : points) {
    fmt::print(out, "{},{},{},{},{}\n", policy_name(c.policy), c.cache_index, num(c.lp_bound),
               spec.boundary ? num(c.boundary) : "nan", num(c.min_alpha));
  }
  auto series_of = [&](double CachePoint::*field) {
    std::vector<PlotSeries> series;
    for (std::size_t k = 0; k < np; ++k) {
      PlotSeries s{std::string(policy_name(spec.policies[k])), {}};
      for (std::size_t i = 0; i < ni; ++i) {
        const CachePoint& c = points[k * ni + i];
        s.points.emplace_back(c.cache_index, c.*field);
      }
      series.push_back(std::move(s));
    }
    return series;
  };
  if (spec.boundary) {
    write_plot(output_file(spec, "_throughput.svg"), series_of(&CachePoint::boundary),
               {"Throughput vs cache index", "cache index", "boundary rate (packets/slot)", {},
                {}, {}, {}});
  }
  if (spec.occupation) {
    write_plot(output_file(spec, "_occupation.svg"), series_of(&CachePoint::min_alpha),
               {"Resource occupation vs cache index", "cache index", "minimal alpha", {}, {}, 0.0,
                1.0});
  }
  return result;
}

std::vector<std::string> sweep_outputs(const SweepSpec& spec) {
  switch (spec.kind) {
    case SweepKind::kLambda:
      if (!spec.boundary) return {spec.name + "_delay.csv", spec.name + "_delay.svg"};
      return {spec.name + "_delay.csv", spec.name + "_boundary.csv", spec.name + "_delay.svg"};
    case SweepKind::kAlpha:
      return {spec.name + "_border.csv", spec.name + "_saving.csv", spec.name + "_border.svg"};
    case SweepKind::kCacheIndex: {
      std::vector<std::string> out{spec.name + "_cache.csv"};
      if (spec.boundary) out.push_back(spec.name + "_throughput.svg");
      if (spec.occupation) out.push_back(spec.name + "_occupation.svg");
      return out;
    }
  }
  return {};
}

}  // namespace didcnc
