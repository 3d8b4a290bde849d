// Command-line front end: simulate, benchmark and verify.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "acceptance.h"
#include "bwcr/benchmark.h"
#include "bwcr/harness.h"

namespace {

constexpr int kConfigExit = 2;
constexpr int kGenerationExit = 3;

int simulate(const std::string& path, std::optional<std::uint64_t> seed_override,
             const std::string& out_dir, int threads) {
  bwcr::ExperimentConfig cfg = bwcr::load_experiment(path);
  if (seed_override) cfg.seeds = {*seed_override};
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (cfg.output_dir.empty()) cfg.output_dir = "bwcr_out";
  if (threads > 0) cfg.threads = threads;
  const bwcr::ExperimentResult result = bwcr::run_experiment(cfg);
  for (const std::string& file : result.files) std::cerr << "wrote " << file << '\n';
  bwcr::Json brief = result.summary;
  for (auto& entry : brief["results"]) entry.erase("runs");
  brief.erase("instance");
  std::cout << brief.dump(2) << '\n';
  return 0;
}

int benchmark(const std::string& path) {
  const bwcr::ExperimentConfig cfg = bwcr::load_experiment(path);
  const bwcr::Problem problem = bwcr::resolve_problem(cfg);
  const bwcr::BenchmarkResult bench = bwcr::compute_opt(
      problem.instance, bwcr::evaluation_objective(problem), bwcr::evaluation_set(problem));
  if (!bench.feasible) {
    std::cout << "infeasible: no mixed strategy reaches the target set\n";
    return 0;
  }
  std::cout << "OPT " << bwcr::format_double(bench.opt_value) << "\np*";
  for (int i = 0; i < bench.p_star.weights.size(); ++i) {
    std::cout << ' ' << bwcr::format_double(bench.p_star.weights[i]);
  }
  std::cout << '\n';
  return 0;
}

int verify(const std::vector<int>& ids) {
  const auto results = bwcr::acceptance::run(ids);
  bwcr::acceptance::print_table(std::cout, results);
  for (const auto& r : results) {
    if (!r.passed) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandits with concave rewards and convex knapsacks: simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir;
  int threads = 0;
  auto* sim = app.add_subcommand("simulate", "run the configured experiment and write CSV traces");
  sim->add_option("--config", config_path, "experiment JSON")->required();
  sim->add_option("--seed-override", seed_override, "run this single seed instead of the list");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--threads", threads, "seeds run concurrently");

  std::string bench_path;
  auto* bench = app.add_subcommand("benchmark", "print the benchmark value and strategy");
  bench->add_option("--config", bench_path, "experiment JSON")->required();

  std::vector<int> only;
  auto* ver = app.add_subcommand("verify", "run the acceptance suite and print a pass/fail table");
  ver->add_option("--only", only, "criterion ids to run");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(config_path, seed_override, out_dir, threads);
    if (*bench) return benchmark(bench_path);
    if (*ver) return verify(only);
  } catch (const bwcr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const bwcr::GenerationError& e) {
    std::cerr << "generation error: " << e.what() << '\n';
    return kGenerationExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
