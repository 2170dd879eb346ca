#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "didcnc/plot.hpp"
#include "didcnc/sweep.hpp"
#include "fixtures.hpp"

namespace didcnc {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("didcnc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

SweepSpec small_spec(SweepKind kind, const std::string& dir) {
  SweepSpec spec;
  spec.kind = kind;
  spec.name = "t";
  spec.base = testing::two_node_scenario();
  spec.policies = {Policy::kDiDcnc};
  spec.seeds = {1};
  spec.slots = kMinStabilitySeries;
  spec.bisection_iterations = 6;
  spec.alpha_iterations = 5;
  spec.output_dir = scratch(dir);
  spec.jobs = 1;
  return spec;
}

TEST(SweepSpec, ParsesAndValidates) {
  const SweepSpec s = parse_sweep_spec(R"({"kind": "cache", "grid": [1, 4, 16],
      "policies": ["DI-DCNC", "l2s"], "seeds": [7], "slots": 20000, "lambda": 15})");
  EXPECT_EQ(s.kind, SweepKind::kCacheIndex);
  EXPECT_EQ(s.name, "cache_index");
  EXPECT_EQ(s.policies, (std::vector<Policy>{Policy::kDiDcnc, Policy::kL2S}));
  EXPECT_EQ(s.seeds, std::vector<std::uint64_t>{7});
  EXPECT_DOUBLE_EQ(s.lambda, 15.0);
  EXPECT_EQ(s.base, default_grid_scenario());
}

TEST(SweepSpec, RejectsBadInput) {
  auto message = [](const char* text) {
    try {
      parse_sweep_spec(text);
    } catch (const SweepError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"kind": "lambda", "grid": []})").find("grid"), std::string::npos);
  EXPECT_NE(message(R"({"kind": "lambda", "grid": [-1]})").find("negative"), std::string::npos);
  EXPECT_NE(message(R"({"kind": "alpha", "grid": [0]})").find("(0, 1]"), std::string::npos);
  EXPECT_NE(message(R"({"kind": "cache", "grid": [17]})").find("1..16"), std::string::npos);
  EXPECT_NE(message(R"({"kind": "lambda", "grid": [1], "slots": 100})").find("slots"),
            std::string::npos);
  EXPECT_NE(message(R"({"kind": "lambda", "grid": [1], "colour": 1})").find("colour"),
            std::string::npos);
  EXPECT_NE(message(R"({"kind": "heat", "grid": [1]})").find("heat"), std::string::npos);
}

TEST(PointEvaluator, ReusesCachedPointsUnlessForced) {
  SweepSpec spec = small_spec(SweepKind::kLambda, "points");
  spec.grid = {1.0};
  spec.seeds = {1, 2, 3};
  const Scenario s = configure(spec.base, Policy::kDiDcnc, 5.0, 1.0, 1.0);
  const PointEvaluator first(spec);
  const PointResult a = first.evaluate(s, 1);
  EXPECT_EQ(first.simulated_runs(), 3);
  EXPECT_TRUE(a.stable);
  EXPECT_EQ(a.stable_seeds, 3);
  EXPECT_NEAR(a.throughput, 5.0, 0.25);

  const PointEvaluator second(spec);
  const PointResult b = second.evaluate(s, 1);
  EXPECT_EQ(second.simulated_runs(), 0);
  EXPECT_EQ(second.reused_runs(), 3);
  EXPECT_TRUE(b.reused);
  EXPECT_DOUBLE_EQ(a.mean_delay, b.mean_delay);

  spec.force = true;
  const PointEvaluator forced(spec);
  forced.evaluate(s, 1);
  EXPECT_EQ(forced.simulated_runs(), 3);
}

TEST(Bisection, BracketsTheTwoNodeBound) {
  const SweepSpec spec = small_spec(SweepKind::kLambda, "bisect");
  const PointEvaluator eval(spec);
  const BoundaryEstimate b = bisect_boundary(eval, spec, spec.base, Policy::kDiDcnc);
  EXPECT_NEAR(b.lp_bound, 20.0, 1e-9);
  EXPECT_EQ(b.probes.size(), 6u);
  // Bracket width after six halvings of [0, 24].
  EXPECT_NEAR(b.upper - b.lower, 24.0 / 64.0, 1e-12);
  EXPECT_LE(b.lower, 20.0);
  EXPECT_GE(b.lower, 17.0);
}

TEST(Bisection, MinimalAlphaForTheDelayBound) {
  SweepSpec spec = small_spec(SweepKind::kAlpha, "alpha");
  spec.lambda = 10.0;
  const PointEvaluator eval(spec);
  const AlphaEstimate a = bisect_alpha(eval, spec, spec.base, Policy::kDiDcnc, 1,
                                       [](double x) { return std::pair{x, x}; });
  // The S->D link carries 10 packets per slot: alpha2 >= 1/2.
  EXPECT_GE(a.alpha, 0.5);
  EXPECT_LE(a.alpha, 0.5 + 2.0 / 32.0);
  spec.lambda = 30.0;
  EXPECT_TRUE(std::isnan(bisect_alpha(eval, spec, spec.base, Policy::kDiDcnc, 1,
                                      [](double x) { return std::pair{x, x}; })
                             .alpha));
}

TEST(Sweeps, LambdaWritesTablesAndPlot) {
  SweepSpec spec = small_spec(SweepKind::kLambda, "lambda");
  spec.grid = {0.0, 4.0, 30.0};
  spec.policies = {Policy::kDiDcnc, Policy::kL2S};
  spec.bisection_iterations = 3;
  const LambdaSweepResult r = sweep_lambda(spec);
  ASSERT_EQ(r.delays.size(), 6u);
  EXPECT_TRUE(r.delays[1].stable);
  EXPECT_TRUE(std::isinf(r.delays[2].mean_delay));
  ASSERT_EQ(r.boundaries.size(), 2u);
  for (const std::string& f : sweep_outputs(spec)) {
    EXPECT_TRUE(fs::exists(spec.output_dir / f)) << f;
  }
  EXPECT_EQ(first_line(spec.output_dir / "t_delay.csv"),
            "policy,lambda,mean_delay,throughput,stable,stable_seeds,seeds");
  EXPECT_EQ(first_line(spec.output_dir / "t_boundary.csv"), "policy,boundary,upper,lp_bound");
  std::ifstream in(spec.output_dir / "t_delay.csv");
  std::stringstream all;
  all << in.rdbuf();
  EXPECT_NE(all.str().find("DI-DCNC,30,inf,"), std::string::npos);
}

TEST(Sweeps, AlphaWritesBorderAndSavings) {
  SweepSpec spec = small_spec(SweepKind::kAlpha, "alpha_sweep");
  spec.grid = {0.5, 1.0};
  spec.lambda = 5.0;
  spec.alpha_iterations = 3;
  const AlphaSweepResult r = sweep_alpha(spec);
  ASSERT_EQ(r.border.size(), 2u);
  ASSERT_EQ(r.savings.size(), 1u);
  EXPECT_NEAR(r.savings[0].diagonal_saving, 1.0 - r.savings[0].diagonal_alpha, 1e-12);
  EXPECT_EQ(first_line(spec.output_dir / "t_border.csv"), "policy,alpha2,alpha1");
  EXPECT_EQ(first_line(spec.output_dir / "t_saving.csv"),
            "policy,diagonal_alpha,diagonal_saving,processing_saving");
  EXPECT_TRUE(fs::exists(spec.output_dir / "t_border.svg"));
}

TEST(Sweeps, CacheIndexRaisesTheBound) {
  SweepSpec spec = small_spec(SweepKind::kCacheIndex, "cache");
  spec.base = testing::line_scenario(3, 2.0, 4.0);
  spec.base.graph.set_static_sources("k", {2});
  spec.base.clients.push_back({0, 1, ServiceSpec{{FunctionSpec{1.0, 1.0, "k", 2}}}, 1.0});
  spec.grid = {1.0, 3.0};
  spec.bisection_iterations = 3;
  spec.occupation = false;
  const CacheSweepResult r = sweep_cache_index(spec);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_LT(r.points[0].lp_bound, r.points[1].lp_bound);
  EXPECT_TRUE(std::isnan(r.points[0].min_alpha));
  EXPECT_EQ(first_line(spec.output_dir / "t_cache.csv"),
            "policy,cache_index,lp_bound,boundary,min_alpha");
  EXPECT_TRUE(fs::exists(spec.output_dir / "t_throughput.svg"));
  EXPECT_FALSE(fs::exists(spec.output_dir / "t_occupation.svg"));
}

TEST(Plot, SkipsNonFinitePoints) {
  std::ostringstream os;
  write_svg_plot(os,
                 {{"a<b", {{0.0, 1.0}, {1.0, INFINITY}, {2.0, 3.0}}}, {"empty", {}}},
                 {"title", "x", "y", {}, {}, {}, {}});
  const std::string svg = os.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  // Two separate pen-down moves around the gap.
  std::size_t moves = 0;
  for (std::size_t p = svg.find("d=\"M"); p != std::string::npos; p = svg.find(" M", p + 1)) ++moves;
  EXPECT_EQ(moves, 2u);
}

}  // namespace
}  // namespace didcnc
