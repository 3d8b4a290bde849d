#include "bwcr/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace bwcr {
namespace {

template <typename T>
T param(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("generator field '") + key + "': " + e.what());
  }
}

template <typename T>
T required_param(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("generator needs '") + key + "'");
  return param<T>(j, key, T{});
}

bool feasible_for(const Mat& mean, const std::optional<ConvexSet>& target) {
  if (!target) return true;
  return compute_opt(mean, std::nullopt, target).feasible;
}

Problem knapsack_problem(InstanceModel instance, double ratio) {
  const int d = instance.d();
  Vec c = Vec::Zero(d);
  c[0] = 1.0;
  Vec hi = Vec::Constant(d, std::min(1.0, ratio));
  hi[0] = 1.0;
  return {std::move(instance), Objective::linear(c), ConvexSet::box(Vec::Zero(d), hi), ratio};
}

Problem generate_random_bernoulli(const Json& p, Rng& rng, const std::optional<ConvexSet>& target) {
  const int d = required_param<int>(p, "d");
  const int m = required_param<int>(p, "m");
  const double lo = param<double>(p, "low", 0.0);
  const double hi = param<double>(p, "high", 1.0);
  if (d < 1 || m < 1 || !(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
    throw ConfigError("random_bernoulli: bad parameters");
  }
  for (int attempt = 0; attempt < kMaxGenerationTries; ++attempt) {
    Mat mean(d, m);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < m; ++i) mean(j, i) = rng.uniform(lo, hi);
    }
    if (feasible_for(mean, target)) return {InstanceModel(mean), std::nullopt, target, std::nullopt};
  }
  throw GenerationError("random_bernoulli: no feasible instance after retries");
}

Problem generate_bwk(const Json& p, Rng& rng) {
  const int m = required_param<int>(p, "m");
  const int resources = required_param<int>(p, "resources");
  const double ratio = required_param<double>(p, "budget_ratio");
  if (m < 1 || resources < 1 || !(ratio > 0.0)) throw ConfigError("bwk: bad parameters");
  const int d = resources + 1;
  for (int attempt = 0; attempt < kMaxGenerationTries; ++attempt) {
    Mat mean(d, m);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < m; ++i) mean(j, i) = rng.uniform();
    }
    LpProblem lp{mean.row(0).transpose(), mean.bottomRows(resources), ratio, 0.0, false};
    if (solve_lp(lp)) return knapsack_problem(InstanceModel(mean), ratio);
  }
  throw GenerationError("bwk: no feasible instance after retries");
}

Problem generate_sensor_network(const Json& p, Rng& rng) {
  const double quota = required_param<double>(p, "quota_ratio");
  std::vector<std::vector<int>> coverage;
  Vec q;
  const bool explicit_layout = p.contains("coverage");
  for (int attempt = 0; attempt < kMaxGenerationTries; ++attempt) {
    int points = 0;
    if (explicit_layout) {
      coverage = param<std::vector<std::vector<int>>>(p, "coverage", {});
      for (const auto& a : coverage) {
        for (int k : a) points = std::max(points, k + 1);
      }
      q = vec_from_json(required_param<Json>(p, "q"), "q");
      if (static_cast<std::size_t>(q.size()) != coverage.size()) {
        throw ConfigError("sensor_network: q and coverage sizes differ");
      }
    } else {
      const int m = required_param<int>(p, "m");
      points = required_param<int>(p, "points");
      const double cover = param<double>(p, "cover_prob", 0.5);
      const auto q_range = param<std::vector<double>>(p, "q_range", {0.5, 1.0});
      if (m < 1 || points < 1 || q_range.size() != 2) throw ConfigError("sensor_network: bad parameters");
      coverage.assign(m, {});
      q.resize(m);
      for (int i = 0; i < m; ++i) {
        for (int k = 0; k < points; ++k) {
          if (rng.bernoulli(cover)) coverage[i].push_back(k);
        }
        q[i] = rng.uniform(q_range[0], q_range[1]);
      }
    }
    const int m = static_cast<int>(coverage.size());
    // One covering row per point: -sum_{i covers k} x_i <= -quota. Duplicates dropped.
    std::set<std::vector<int>> seen;
    std::vector<Eigen::RowVectorXd> rows;
    bool uncovered = false;
    for (int k = 0; k < points; ++k) {
      std::vector<int> who;
      for (int i = 0; i < m; ++i) {
        if (std::find(coverage[i].begin(), coverage[i].end(), k) != coverage[i].end()) who.push_back(i);
      }
      if (who.empty()) {
        uncovered = true;
        break;
      }
      if (!seen.insert(who).second) continue;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m);
      for (int i : who) row[i] = -1.0;
      rows.push_back(row);
    }
    if (uncovered) {
      if (explicit_layout) throw GenerationError("sensor_network: a point is not covered");
      continue;
    }
    Mat a(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t r = 0; r < rows.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = rows[r];
    const Vec b = Vec::Constant(a.rows(), -quota);
    std::optional<ConvexSet> set;
    try {
      set = ConvexSet::halfspaces(a, b);
    } catch (const ContractError&) {
      if (explicit_layout) throw GenerationError("sensor_network: quota unattainable");
      continue;
    }
    const Mat mean = q.asDiagonal().toDenseMatrix();
    if (feasible_for(mean, set)) return {InstanceModel(mean), std::nullopt, set, std::nullopt};
    if (explicit_layout) throw GenerationError("sensor_network: no feasible policy");
  }
  throw GenerationError("sensor_network: no feasible instance after retries");
}

Problem generate_contextual(const Json& p, Rng& rng, const std::optional<ConvexSet>& target) {
  const int n = required_param<int>(p, "n");
  const int m = required_param<int>(p, "m");
  const int d = required_param<int>(p, "d");
  const bool orthonormal = param<bool>(p, "orthonormal", false);
  if (n < 1 || m < 1 || d < 1) throw ConfigError("contextual: bad parameters");
  for (int attempt = 0; attempt < kMaxGenerationTries; ++attempt) {
    ContextualModel cm;
    cm.n = n;
    cm.contexts.assign(d, std::vector<Vec>(m));
    for (int j = 0; j < d; ++j) {
      Vec w(n);
      if (orthonormal) {
        for (int k = 0; k < n; ++k) w[k] = rng.uniform();
      } else {
        // Nonnegative weights summing to one keep x.w inside [0,1] for x in the cube.
        for (int k = 0; k < n; ++k) w[k] = -std::log(1.0 - rng.uniform());
        w /= w.sum();
      }
      cm.weights.push_back(w);
      for (int i = 0; i < m; ++i) {
        Vec x = Vec::Zero(n);
        if (orthonormal) {
          x[i % n] = 1.0;
        } else {
          for (int k = 0; k < n; ++k) x[k] = rng.uniform();
        }
        cm.contexts[j][i] = x;
      }
    }
    InstanceModel inst = InstanceModel::from_contexts(std::move(cm));
    if (feasible_for(inst.mean(), target)) return {inst, std::nullopt, target, std::nullopt};
  }
  throw GenerationError("contextual: no feasible instance after retries");
}

std::vector<double> finite_only(const std::vector<double>& xs) {
  std::vector<double> out;
  for (double x : xs) {
    if (std::isfinite(x)) out.push_back(x);
  }
  return out;
}

Json quantiles_json(const std::vector<double>& xs) {
  const std::vector<double> finite = finite_only(xs);
  if (finite.empty()) return nullptr;
  const Quantiles q = quantiles(finite);
  return {{"q10", q.q10}, {"median", q.median}, {"q90", q.q90}};
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Problem generate_instance(const GeneratorSpec& spec, const std::optional<ConvexSet>& target) {
  Rng rng = Rng::for_stream(spec.seed, 0, Stream::kInstance);
  if (spec.kind == "random_bernoulli") return generate_random_bernoulli(spec.params, rng, target);
  if (spec.kind == "bwk") return generate_bwk(spec.params, rng);
  if (spec.kind == "sensor_network") return generate_sensor_network(spec.params, rng);
  if (spec.kind == "contextual") return generate_contextual(spec.params, rng, target);
  throw ConfigError("unknown generator kind '" + spec.kind + "'");
}

void ExperimentConfig::validate() const {
  if (instance.has_value() == generator.has_value()) {
    throw ConfigError("config needs exactly one of 'instance' or 'generator'");
  }
  if (horizons.empty()) throw ConfigError("config needs at least one horizon T");
  for (int t : horizons) {
    if (t < 1) throw ConfigError("horizon T must be at least 1");
  }
  if (seeds.empty()) throw ConfigError("config needs a nonempty seed list");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (budget_ratio && !(*budget_ratio > 0.0)) throw ConfigError("budget_ratio must be positive");
}

ExperimentConfig experiment_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("instance")) cfg.instance = instance_from_json(j.at("instance"));
    if (j.contains("generator")) {
      const Json& g = j.at("generator");
      GeneratorSpec spec;
      spec.kind = g.value("kind", "");
      spec.seed = g.value("seed", std::uint64_t{0});
      spec.params = g;
      cfg.generator = spec;
    }
    if (j.contains("objective")) cfg.objective_json = j.at("objective");
    if (j.contains("set")) cfg.set_json = j.at("set");
    if (!j.contains("algorithm")) throw ConfigError("config needs an 'algorithm' block");
    cfg.algorithm = algorithm_from_json(j.at("algorithm"));
    if (j.at("algorithm").contains("budget_ratio")) {
      cfg.budget_ratio = j.at("algorithm").at("budget_ratio").get<double>();
    }
    if (!j.contains("T")) throw ConfigError("config needs 'T'");
    const Json& t = j.at("T");
    if (t.is_array()) {
      cfg.horizons = t.get<std::vector<int>>();
    } else {
      cfg.horizons = {t.get<int>()};
    }
    if (!j.contains("seeds")) throw ConfigError("config needs 'seeds'");
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.delta = j.value("delta", 0.05);
    cfg.norm = norm_from_string(j.value("norm", std::string("l2")));
    cfg.algorithm.delta = cfg.delta;
    cfg.algorithm.norm = cfg.norm;
    if (j.contains("output")) {
      const Json& o = j.at("output");
      if (o.is_string()) {
        cfg.output_dir = o.get<std::string>();
      } else {
        cfg.output_dir = o.value("dir", std::string());
        cfg.output_prefix = o.value("prefix", std::string("run"));
      }
    }
    cfg.threads = j.value("threads", 1);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return experiment_from_json(j);
}

Problem resolve_problem(const ExperimentConfig& cfg) {
  std::optional<ConvexSet> set;
  int d = cfg.instance ? cfg.instance->d() : 0;
  if (cfg.generator && cfg.set_json) {
    d = cfg.generator->params.value("d", cfg.generator->params.value("m", 0));
  }
  if (cfg.set_json) set = set_from_json(*cfg.set_json, d);
  Problem problem = cfg.instance ? Problem{*cfg.instance, std::nullopt, set, std::nullopt}
                                 : generate_instance(*cfg.generator, set);
  if (set) problem.target = set;
  if (cfg.objective_json) {
    problem.objective = objective_from_json(*cfg.objective_json, problem.instance.d(), cfg.norm);
  }
  if (is_bwk(cfg.algorithm.variant) && !problem.budget_ratio) {
    if (!cfg.budget_ratio) throw ConfigError("knapsack variants need algorithm.budget_ratio");
    problem = knapsack_problem(problem.instance, *cfg.budget_ratio);
  }
  return problem;
}

std::optional<Objective> evaluation_objective(const Problem& problem) { return problem.objective; }

std::optional<ConvexSet> evaluation_set(const Problem& problem) { return problem.target; }

AlgorithmConfig algorithm_for(const ExperimentConfig& cfg, const Problem& problem, int horizon) {
  AlgorithmConfig alg = cfg.algorithm;
  alg.horizon = horizon;
  if (is_bwk(alg.variant)) {
    const double ratio = problem.budget_ratio.value_or(cfg.budget_ratio.value_or(0.0));
    alg.budget = ratio * horizon;
  } else {
    alg.objective = problem.objective;
    alg.target = problem.target;
  }
  return alg;
}

RunResult run_single(const Problem& problem, const AlgorithmConfig& algorithm,
                     const BenchmarkResult& bench, std::uint64_t seed, Norm norm) {
  const InstanceModel& inst = problem.instance;
  AlgorithmState state(algorithm, inst.d(), inst.m(), inst.contextual_ptr());
  Rng arm_rng = Rng::for_stream(seed, 0, Stream::kArms);
  Rng obs_rng = Rng::for_stream(seed, 0, Stream::kObservations);
  RunResult out;
  out.seed = seed;
  out.horizon = algorithm.horizon;
  out.history.stop_time = algorithm.horizon + 1;
  Vec x_sum = Vec::Zero(inst.d());
  for (int t = 1; t <= algorithm.horizon; ++t) {
    const Decision dec = step(state);
    if (dec.stop) {
      out.history.stop_time = t;
      out.stopped = true;
      break;
    }
    const ArmChoice arm = draw_arm(dec.policy, arm_rng);
    const Vec v = arm ? sample_observation(inst, *arm, obs_rng) : Vec(Vec::Zero(inst.d()));
    observe(state, arm, v);
    x_sum += state.last_x;
    out.history.append(arm, v, dec.policy);
  }
  out.xbar = x_sum / static_cast<double>(algorithm.horizon);
  out.budget_spent = state.budget_spent;
  const bool knapsack = is_bwk(algorithm.variant);
  if (out.history.size() > 0) {
    out.trace = regret_trace(out.history, algorithm.horizon, bench, evaluation_objective(problem),
                             evaluation_set(problem), norm, knapsack);
    if (const auto f = evaluation_objective(problem); f && bench.feasible) {
      out.decomposition = decompose_regret(*f, bench, out.xbar, out.trace.final_average);
    }
  }
  return out;
}

std::string trace_csv(const RunResult& run, const Problem& problem, const BenchmarkResult& bench,
                      Norm norm, bool knapsack) {
  const int d = problem.instance.d();
  std::ostringstream os;
  os << "t,arm";
  for (int j = 1; j <= d; ++j) os << ",v_" << j;
  os << ",areg1,areg2";
  if (knapsack) os << ",reward_bwk";
  os << ",stopped\n";
  const auto f = evaluation_objective(problem);
  const auto set = evaluation_set(problem);
  Vec sum = Vec::Zero(d);
  const Vec idle = Vec::Zero(d);
  for (int t = 1; t <= run.horizon; ++t) {
    const bool live = t <= static_cast<int>(run.history.size());
    const Vec& v = live ? run.history.observations[t - 1] : idle;
    const int arm = live && run.history.arms[t - 1] ? *run.history.arms[t - 1] : -1;
    sum += v;
    const Vec avg = sum / static_cast<double>(t);
    const double areg1 = (f && bench.feasible) ? bench.opt_value - f->value(avg)
                                               : std::numeric_limits<double>::quiet_NaN();
    const double areg2 = set ? set->distance(avg, norm) : 0.0;
    os << t << ',' << arm;
    for (int j = 0; j < d; ++j) os << ',' << format_double(v[j]);
    os << ',' << format_double(areg1) << ',' << format_double(areg2);
    if (knapsack) os << ',' << format_double(sum[0]);
    os << ',' << (live ? 0 : 1) << '\n';
  }
  return os.str();
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw ContractError("quantiles of an empty list");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.1), at(0.5), at(0.9)};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const Problem problem = resolve_problem(cfg);
  const bool knapsack = is_bwk(cfg.algorithm.variant);
  ExperimentResult result;
  result.summary["instance"] = instance_to_json(problem.instance);
  result.summary["algorithm"] = to_string(cfg.algorithm.variant);
  result.summary["delta"] = cfg.delta;
  result.summary["norm"] = to_string(cfg.norm);
  Json per_t = Json::array();
  if (!cfg.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  }
  for (int horizon : cfg.horizons) {
    const AlgorithmConfig alg = algorithm_for(cfg, problem, horizon);
    const BenchmarkResult bench = compute_opt(problem.instance, evaluation_objective(problem), evaluation_set(problem));
    std::vector<RunResult> runs(cfg.seeds.size());
    std::vector<std::string> errors(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) {
        try {
          runs[k] = run_single(problem, alg, bench, cfg.seeds[k], cfg.norm);
          if (!cfg.output_dir.empty()) {
            const std::string path = cfg.output_dir + "/" + cfg.output_prefix + "_T" +
                                     std::to_string(horizon) + "_seed" +
                                     std::to_string(cfg.seeds[k]) + ".csv";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write '" + path + "'");
            out << trace_csv(runs[k], problem, bench, cfg.norm, knapsack);
            if (!out) throw std::runtime_error("write failed for '" + path + "'");
          }
        } catch (const std::exception& e) {
          errors[k] = e.what();
        }
      }
    };
    const int n_threads = std::min<int>(cfg.threads, static_cast<int>(cfg.seeds.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const std::string& e : errors) {
      if (!e.empty()) throw std::runtime_error(e);
    }

    Json entry;
    entry["T"] = horizon;
    entry["benchmark"] = {{"feasible", bench.feasible},
                          {"opt_value", bench.feasible ? Json(bench.opt_value) : Json(nullptr)},
                          {"p_star", to_json(bench.p_star.weights)}};
    Json run_list = Json::array();
    std::vector<double> a1, a2, reg, stops;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const RunResult& r = runs[k];
      Json rj;
      rj["seed"] = r.seed;
      rj["areg1"] = std::isfinite(r.trace.final_areg1) ? Json(r.trace.final_areg1) : Json(nullptr);
      rj["areg2"] = r.trace.final_areg2;
      rj["stop_time"] = r.history.stop_time;
      if (knapsack) rj["reg_bwk"] = r.trace.reg_bwk;
      if (r.decomposition) {
        rj["decomposition"] = {{"optimization_term", r.decomposition->optimization_term},
                               {"estimation_term", r.decomposition->estimation_term},
                               {"holds", r.decomposition->holds()}};
      }
      if (!cfg.output_dir.empty()) {
        const std::string path = cfg.output_dir + "/" + cfg.output_prefix + "_T" +
                                 std::to_string(horizon) + "_seed" + std::to_string(r.seed) + ".csv";
        result.files.push_back(path);
      }
      run_list.push_back(rj);
      a1.push_back(r.trace.final_areg1);
      a2.push_back(r.trace.final_areg2);
      reg.push_back(r.trace.reg_bwk);
      stops.push_back(r.stopped ? 1.0 : 0.0);
    }
    entry["runs"] = run_list;
    entry["areg1"] = quantiles_json(a1);
    entry["areg2"] = quantiles_json(a2);
    if (knapsack) {
      entry["reg_bwk"] = quantiles_json(reg);
      double early = 0.0;
      for (double s : stops) early += s;
      entry["early_stop_fraction"] = early / static_cast<double>(stops.size());
    }
    per_t.push_back(entry);
  }
  result.summary["results"] = per_t;
  result.summary["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!cfg.output_dir.empty()) {
    const std::string path = cfg.output_dir + "/" + cfg.output_prefix + "_summary.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << result.summary.dump(2) << '\n';
    result.files.push_back(path);
  }
  return result;
}

}  // namespace bwcr
