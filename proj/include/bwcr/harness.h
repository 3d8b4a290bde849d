#ifndef BWCR_HARNESS_H_
#define BWCR_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwcr/algorithms.h"
#include "bwcr/benchmark.h"
#include "bwcr/core.h"
#include "bwcr/serialization.h"

namespace bwcr {

// kind: random_bernoulli | bwk | sensor_network | contextual. Parameters are
// kept as JSON and validated by the generator.
struct GeneratorSpec {
  std::string kind;
  Json params = Json::object();
  // Instance seed; fixed across run seeds so that runs share one instance.
  std::uint64_t seed = 0;
};

struct Problem {
  InstanceModel instance;
  std::optional<Objective> objective;
  std::optional<ConvexSet> target;
  // Knapsack problems: B / T.
  std::optional<double> budget_ratio;
};

// Draws a problem satisfying the feasibility assumption (some p has V p in S),
// retrying up to kMaxGenerationTries times before throwing GenerationError.
inline constexpr int kMaxGenerationTries = 1000;
Problem generate_instance(const GeneratorSpec& spec, const std::optional<ConvexSet>& target = {});

struct ExperimentConfig {
  std::optional<InstanceModel> instance;
  std::optional<GeneratorSpec> generator;
  std::optional<Json> objective_json;
  std::optional<Json> set_json;
  AlgorithmConfig algorithm;
  std::optional<double> budget_ratio;
  std::vector<int> horizons;
  std::vector<std::uint64_t> seeds;
  double delta = 0.05;
  Norm norm = Norm::kL2;
  std::string output_dir;  // empty: no files written
  std::string output_prefix = "run";
  int threads = 1;

  void validate() const;
};

ExperimentConfig experiment_from_json(const Json& j);
ExperimentConfig load_experiment(const std::string& path);

// Builds the instance, objective and target set of an experiment.
Problem resolve_problem(const ExperimentConfig& cfg);
// Objective and set against which regret is measured (the knapsack
// convention supplies them when the problem has a budget).
std::optional<Objective> evaluation_objective(const Problem& problem);
std::optional<ConvexSet> evaluation_set(const Problem& problem);

// Algorithm configuration for one horizon.
AlgorithmConfig algorithm_for(const ExperimentConfig& cfg, const Problem& problem, int horizon);

struct RunResult {
  std::uint64_t seed = 0;
  int horizon = 0;
  RunHistory history;
  RegretTrace trace;
  std::optional<RegretDecomposition> decomposition;
  Vec xbar;  // (1/T) sum of A_t p_t
  Vec budget_spent;
  bool stopped = false;
};

// One seeded run. Arms and observations draw from separate substreams of `seed`.
RunResult run_single(const Problem& problem, const AlgorithmConfig& algorithm,
                     const BenchmarkResult& bench, std::uint64_t seed, Norm norm = Norm::kL2);

// CSV trace: header t,arm,v_1..v_d,areg1,areg2[,reward_bwk],stopped; one row per step
// up to the horizon (steps after a stop are idle rows). Floats use %.17g.
std::string trace_csv(const RunResult& run, const Problem& problem, const BenchmarkResult& bench,
                      Norm norm, bool knapsack);

struct Quantiles {
  double q10 = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};
Quantiles quantiles(std::vector<double> values);

struct ExperimentResult {
  Json summary;
  std::vector<std::string> files;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string format_double(double x);

}  // namespace bwcr

#endif  // BWCR_HARNESS_H_
