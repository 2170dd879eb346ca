#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "didcnc/alg.hpp"
#include "didcnc/oracle.hpp"
#include "didcnc/scenario_io.hpp"
#include "didcnc/simulator.hpp"
#include "didcnc/sweep.hpp"

namespace fs = std::filesystem;
using namespace didcnc;

namespace {

constexpr const char* kOutDirVar = "DIDCNC_OUT_DIR";

fs::path output_dir() {
  const char* env = std::getenv(kOutDirVar);
  fs::path dir = env && *env ? fs::path(env) : fs::path("out");
  fs::create_directories(dir);
  return dir;
}

Scenario load(const std::string& arg) {
  if (arg == "default") return default_grid_scenario();
  return load_scenario(arg);
}

std::ofstream open(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct RunArgs {
  std::string scenario;
  std::optional<std::string> policy;
  std::optional<std::int64_t> slots;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<double> alpha1;
  std::optional<double> alpha2;
  int cache_index = 1;
  std::int64_t warmup = -1;
  bool invariants = false;
  bool metrics = false;
  std::int64_t stride = 100;
  bool queues = false;
  bool routes = false;
};

int cmd_run(const RunArgs& a) {
  Scenario s = load(a.scenario);
  if (a.cache_index != 1) s = with_cache_index(s, a.cache_index);
  if (a.policy) s.policy = parse_policy(*a.policy);
  if (a.slots) s.slot_count = *a.slots;
  if (a.seed) s.seed = *a.seed;
  if (a.lambda) {
    for (ClientSpec& c : s.clients) c.arrival_rate = *a.lambda;
  }
  if (a.alpha1) s.alpha_proc = *a.alpha1;
  if (a.alpha2) s.alpha_tx = *a.alpha2;
  s.validate();

  const fs::path dir = output_dir();
  EngineOptions o;
  o.check_invariants = a.invariants;
  o.warmup_slots = a.warmup;
  o.metrics_stride = a.stride;
  std::ofstream metrics, queues, routes;
  if (a.metrics) {
    metrics = open(dir / "run_metrics.csv");
    o.metrics_csv = &metrics;
  }
  if (a.queues) {
    queues = open(dir / "run_queues.csv");
    o.queue_trace = &queues;
  }
  if (a.routes) {
    routes = open(dir / "run_routes.txt");
    o.route_trace = &routes;
  }
  const MetricsRecord m = run(s, o);
  const RunSummary sum = summarize(s, m);
  {
    std::ofstream out = open(dir / "run_summary.csv");
    write_summary_header(out);
    write_summary_row(out, s, a.cache_index, sum);
  }
  fmt::print("policy      {}\n", policy_name(s.policy));
  fmt::print("slots       {}{}\n", m.slots, m.aborted ? " (backlog cut-off)" : "");
  fmt::print("stable      {} (normalized slope {:.4g})\n", sum.stable ? "yes" : "no",
             sum.verdict.normalized_slope);
  fmt::print("throughput  {:.4f} requests/slot per client\n", sum.throughput);
  if (std::isinf(sum.mean_delay)) {
    fmt::print("mean delay  inf\n");
  } else {
    fmt::print("mean delay  {:.3f} slots\n", sum.mean_delay);
  }
  if (a.invariants) {
    fmt::print("invariants  {} operations, {} checks, {} violations\n", m.invariants.operations,
               m.invariants.checks, m.invariants.violations);
    for (const std::string& v : m.invariants.samples) fmt::print("  {}\n", v);
  }
  fmt::print("wrote       {}\n", (dir / "run_summary.csv").string());
  return a.invariants && m.invariants.violations > 0 ? 3 : 0;
}

int cmd_sweep(const std::string& kind, const std::string& spec_path, bool force,
              std::optional<int> jobs) {
  SweepSpec spec = load_sweep_spec(spec_path, parse_sweep_kind(kind));
  spec.output_dir = output_dir();
  spec.force = spec.force || force;
  if (jobs) spec.jobs = *jobs;
  switch (spec.kind) {
    case SweepKind::kLambda: {
      const LambdaSweepResult r = sweep_lambda(spec);
      fmt::print("LP bound {:.4f} packets/slot per client\n", r.lp_bound);
      for (const BoundaryEstimate& b : r.boundaries) {
        fmt::print("{:8} boundary {:.3f} (next probe {:.3f} unstable)\n", policy_name(b.policy),
                   b.lower, b.upper);
      }
      break;
    }
    case SweepKind::kAlpha: {
      const AlphaSweepResult r = sweep_alpha(spec);
      for (const SavingSummary& s : r.savings) {
        fmt::print("{:8} diagonal saving {:.1f}%  processing-axis saving {:.1f}%\n",
                   policy_name(s.policy), 100 * s.diagonal_saving, 100 * s.processing_saving);
      }
      break;
    }
    case SweepKind::kCacheIndex: {
      const CacheSweepResult r = sweep_cache_index(spec);
      for (const CachePoint& c : r.points) {
        fmt::print("{:8} index {:2}  boundary {:.3f}  min alpha {:.3f}\n", policy_name(c.policy),
                   c.cache_index, c.boundary, c.min_alpha);
      }
      break;
    }
  }
  for (const std::string& f : sweep_outputs(spec)) {
    fmt::print("wrote {}\n", (spec.output_dir / f).string());
  }
  return 0;
}

int cmd_oracle_lp(const std::string& scenario, bool per_client_rates) {
  Scenario s = load(scenario);
  if (!per_client_rates) {
    for (ClientSpec& c : s.clients) c.arrival_rate = 1.0;
  }
  const ThroughputBound b = max_throughput_lp(s);
  if (b.status != LpSolution::Status::kOptimal) {
    fmt::print(std::cerr, "LP {}\n", to_string(b.status));
    return 2;
  }
  const fs::path dir = output_dir();
  {
    std::ofstream out = open(dir / "lp_witness.csv");
    write_witness_csv(out, s, b);
  }
  {
    std::ofstream out = open(dir / "lp_bound.csv");
    out << "client,base_rate,max_rate\n";
    for (std::size_t c = 0; c < s.clients.size(); ++c) {
      fmt::print(out, "{},{},{}\n", c, s.clients[c].arrival_rate, b.client_rates[c]);
    }
  }
  fmt::print("theta* = {:.6f} ({} simplex iterations)\n", b.theta, b.iterations);
  for (std::size_t c = 0; c < s.clients.size(); ++c) {
    fmt::print("client {}: {:.4f} packets/slot\n", c, b.client_rates[c]);
  }
  fmt::print("wrote {} and {}\n", (dir / "lp_bound.csv").string(),
             (dir / "lp_witness.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge stream-processing network simulator and throughput oracle"};
  app.require_subcommand(1);
  app.footer(fmt::format("Outputs go to ${} (default ./out).", kOutDirVar));

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("scenario", run_args.scenario, "Scenario file, or 'default'")->required();
  run->add_option("--policy", run_args.policy, "DI-DCNC, S2L or L2S");
  run->add_option("--slots", run_args.slots, "Horizon T");
  run->add_option("--seed", run_args.seed, "RNG seed");
  run->add_option("--lambda", run_args.lambda, "Set every client's arrival rate");
  run->add_option("--alpha1", run_args.alpha1, "Processing capacity scaling");
  run->add_option("--alpha2", run_args.alpha2, "Transmission capacity scaling");
  run->add_option("--cache-index", run_args.cache_index, "Caches per database")
      ->check(CLI::Range(1, 1 << 20));
  run->add_option("--warmup", run_args.warmup, "Warm-up slots (negative: default)");
  run->add_flag("--invariants", run_args.invariants, "Run the in-engine invariant checks");
  run->add_flag("--metrics", run_args.metrics, "Write run_metrics.csv");
  run->add_option("--metrics-stride", run_args.stride, "Slots between metrics rows");
  run->add_flag("--trace-queues", run_args.queues, "Write run_queues.csv");
  run->add_flag("--trace-routes", run_args.routes, "Write run_routes.txt");

  std::string sweep_kind, sweep_spec;
  bool sweep_force = false;
  std::optional<int> sweep_jobs;
  CLI::App* sweep = app.add_subcommand("sweep", "Run an experiment sweep");
  sweep->add_option("kind", sweep_kind, "lambda, alpha or cache")
      ->required()
      ->check(CLI::IsMember({"lambda", "alpha", "cache", "cache_index"}));
  sweep->add_option("spec", sweep_spec, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_flag("--force", sweep_force, "Recompute cached grid points");
  sweep->add_option("--jobs", sweep_jobs, "Worker threads");

  std::string oracle_kind, oracle_scenario;
  bool oracle_rates = false;
  CLI::App* oracle = app.add_subcommand("oracle", "Throughput bound");
  oracle->add_option("kind", oracle_kind, "lp")->required()->check(CLI::IsMember({"lp"}));
  oracle->add_option("scenario", oracle_scenario, "Scenario file, or 'default'")->required();
  oracle->add_flag("--scenario-rates", oracle_rates,
                   "Scale the scenario's own rates instead of unit rates");

  std::string alg_scenario;
  int alg_client = 0;
  CLI::App* alg = app.add_subcommand("alg", "Print a client's layered graph as DOT");
  alg->add_option("scenario", alg_scenario, "Scenario file, or 'default'")->required();
  alg->add_option("--client", alg_client, "Client index");

  std::string dump_path;
  CLI::App* dump = app.add_subcommand("scenario", "Write the default grid scenario");
  dump->add_option("path", dump_path, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_kind, sweep_spec, sweep_force, sweep_jobs);
    if (*oracle) return cmd_oracle_lp(oracle_scenario, oracle_rates);
    if (*alg) {
      const Scenario s = load(alg_scenario);
      if (alg_client < 0 || static_cast<std::size_t>(alg_client) >= s.clients.size()) {
        throw std::out_of_range(fmt::format("--client: no client {}", alg_client));
      }
      std::cout << AugmentedLayeredGraph(s.graph, s.clients[alg_client].service).to_dot();
      return 0;
    }
    if (*dump) {
      if (dump_path.empty()) {
        std::cout << serialize_scenario(default_grid_scenario());
      } else {
        save_scenario(default_grid_scenario(), dump_path);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
