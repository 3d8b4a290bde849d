#include "bwcr/serialization.h"

#include <string>

namespace bwcr {
namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw ConfigError(std::string(what) + ": expected a number");
  return j.get<double>();
}

}  // namespace

Vec vec_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

Mat mat_from_json(const Json& j, int rows, int cols, const char* what) {
  const Vec flat = vec_from_json(j, what);
  if (flat.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(rows * cols) + " entries");
  }
  Mat out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = flat[r * cols + c];
  }
  return out;
}

Mat mat_from_rows(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + ": expected rows");
  const Vec first = vec_from_json(j[0], what);
  Mat out(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = vec_from_json(j[r], what);
    if (row.size() != first.size()) throw ConfigError(std::string(what) + ": ragged rows");
    out.row(static_cast<Eigen::Index>(r)) = row;
  }
  return out;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json instance_to_json(const InstanceModel& instance) {
  Json j;
  j["d"] = instance.d();
  j["m"] = instance.m();
  j["outcome_kind"] = to_string(instance.outcome_kind());
  j["beta_concentration"] = instance.beta_concentration();
  Json flat = Json::array();
  for (int r = 0; r < instance.d(); ++r) {
    for (int c = 0; c < instance.m(); ++c) flat.push_back(instance.mean()(r, c));
  }
  j["mean_matrix"] = flat;
  if (instance.is_contextual()) {
    const ContextualModel& cm = instance.contextual();
    Json ctx;
    ctx["n"] = cm.n;
    Json contexts = Json::array();
    for (const auto& row : cm.contexts) {
      Json r = Json::array();
      for (const Vec& x : row) r.push_back(to_json(x));
      contexts.push_back(r);
    }
    ctx["contexts"] = contexts;
    Json weights = Json::array();
    for (const Vec& w : cm.weights) weights.push_back(to_json(w));
    ctx["weights"] = weights;
    j["contextual"] = ctx;
  }
  return j;
}

InstanceModel instance_from_json(const Json& j) {
  const OutcomeKind kind =
      outcome_kind_from_string(get_or<std::string>(j, "outcome_kind", "bernoulli"));
  const double kappa = get_or<double>(j, "beta_concentration", 4.0);
  try {
    if (j.contains("contextual")) {
      const Json& ctx = j.at("contextual");
      ContextualModel cm;
      cm.n = require(ctx, "n").get<int>();
      for (const Json& w : require(ctx, "weights")) cm.weights.push_back(vec_from_json(w, "weights"));
      for (const Json& row : require(ctx, "contexts")) {
        std::vector<Vec> r;
        for (const Json& x : row) r.push_back(vec_from_json(x, "contexts"));
        cm.contexts.push_back(std::move(r));
      }
      InstanceModel inst = InstanceModel::from_contexts(std::move(cm), kind, kappa);
      if (j.contains("mean_matrix")) {
        const Mat given = mat_from_json(j.at("mean_matrix"), inst.d(), inst.m(), "mean_matrix");
        if ((given - inst.mean()).cwiseAbs().maxCoeff() > 1e-12) {
          throw ConfigError("mean_matrix disagrees with contexts and weights");
        }
      }
      return inst;
    }
    const int d = require(j, "d").get<int>();
    const int m = require(j, "m").get<int>();
    return InstanceModel(mat_from_json(require(j, "mean_matrix"), d, m, "mean_matrix"), kind, kappa);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
}

Json set_to_json(const ConvexSet& set) {
  Json j;
  switch (set.kind()) {
    case ConvexSet::Kind::kBox:
      j["kind"] = "box";
      j["lo"] = to_json(set.lo());
      j["hi"] = to_json(set.hi());
      break;
    case ConvexSet::Kind::kHalfspaces: {
      j["kind"] = "halfspaces";
      Json rows = Json::array();
      for (Eigen::Index r = 0; r < set.a().rows(); ++r) rows.push_back(to_json(set.a().row(r).transpose()));
      j["a"] = rows;
      j["b"] = to_json(set.b());
      j["lo"] = to_json(set.lo());
      j["hi"] = to_json(set.hi());
      break;
    }
    case ConvexSet::Kind::kVertices: {
      j["kind"] = "vertices";
      Json pts = Json::array();
      for (Eigen::Index c = 0; c < set.points().cols(); ++c) pts.push_back(to_json(set.points().col(c)));
      j["points"] = pts;
      j["downward_closed"] = set.is_downward_closed();
      break;
    }
  }
  return j;
}

ConvexSet set_from_json(const Json& j, int d) {
  const std::string kind = get_or<std::string>(j, "kind", "");
  try {
    ConvexSet out = [&] {
      if (kind == "box") {
        const Vec lo = j.contains("lo") ? vec_from_json(j.at("lo"), "lo") : Vec(Vec::Zero(d));
        const Vec hi = j.contains("hi") ? vec_from_json(j.at("hi"), "hi") : Vec(Vec::Ones(d));
        return ConvexSet::box(lo, hi);
      }
      if (kind == "halfspaces") {
        const Mat a = mat_from_rows(require(j, "a"), "a");
        const Vec b = vec_from_json(require(j, "b"), "b");
        const Vec lo = j.contains("lo") ? vec_from_json(j.at("lo"), "lo") : Vec(Vec::Zero(d));
        const Vec hi = j.contains("hi") ? vec_from_json(j.at("hi"), "hi") : Vec(Vec::Ones(d));
        return ConvexSet::halfspaces(a, b, lo, hi);
      }
      if (kind == "vertices") {
        const Mat pts = mat_from_rows(require(j, "points"), "points");
        return ConvexSet::vertices(pts.transpose(), get_or<bool>(j, "downward_closed", false));
      }
      throw ConfigError("unknown set kind '" + kind + "'");
    }();
    if (out.dim() != d) throw ConfigError("set dimension does not match the instance");
    return out;
  } catch (const ContractError& e) {
    throw ConfigError(std::string("set: ") + e.what());
  }
}

Json objective_to_json(const Objective& f) {
  Json j;
  j["norm"] = to_string(f.norm());
  switch (f.kind()) {
    case Objective::Kind::kLinear:
      j["kind"] = "linear";
      j["c"] = to_json(f.coefficients());
      break;
    case Objective::Kind::kNegDistance:
      j["kind"] = "neg_distance";
      j["set"] = set_to_json(f.target());
      break;
    case Objective::Kind::kSeparable: {
      j["kind"] = "separable";
      Json terms = Json::array();
      for (const SeparableTerm& t : f.terms()) {
        terms.push_back({{"kind", to_string(t.kind)}, {"weight", t.weight}, {"center", t.center}});
      }
      j["terms"] = terms;
      break;
    }
    case Objective::Kind::kCustom:
      j["kind"] = "custom";
      break;
  }
  return j;
}

Objective objective_from_json(const Json& j, int d, Norm default_norm) {
  const std::string kind = get_or<std::string>(j, "kind", "");
  const Norm norm = j.contains("norm") ? norm_from_string(j.at("norm").get<std::string>())
                                       : default_norm;
  try {
    Objective f = [&] {
      if (kind == "linear") return Objective::linear(vec_from_json(require(j, "c"), "c"), norm);
      if (kind == "neg_distance") {
        return Objective::neg_distance(set_from_json(require(j, "set"), d), norm);
      }
      if (kind == "separable") {
        std::vector<SeparableTerm> terms;
        for (const Json& t : require(j, "terms")) {
          SeparableTerm term;
          term.kind = separable_kind_from_string(get_or<std::string>(t, "kind", ""));
          term.weight = get_or<double>(t, "weight", 1.0);
          term.center = get_or<double>(t, "center", 0.5);
          terms.push_back(term);
        }
        return Objective::separable(std::move(terms), norm);
      }
      throw ConfigError("unknown objective kind '" + kind + "'");
    }();
    if (f.dim() != d) throw ConfigError("objective dimension does not match the instance");
    if (j.contains("lipschitz")) f = f.with_lipschitz(number(j.at("lipschitz"), "lipschitz"));
    return f;
  } catch (const ContractError& e) {
    throw ConfigError(std::string("objective: ") + e.what());
  }
}

AlgorithmConfig algorithm_from_json(const Json& j) {
  AlgorithmConfig cfg;
  cfg.variant = variant_from_string(get_or<std::string>(j, "variant", ""));
  cfg.budget = get_or<double>(j, "budget", 0.0);
  if (j.contains("eps")) cfg.eps = number(j.at("eps"), "eps");
  if (j.contains("gamma")) cfg.gamma = number(j.at("gamma"), "gamma");
  cfg.oco = oco_kind_from_string(get_or<std::string>(j, "oco", "ogd"));
  cfg.theta_update = update_rule_from_string(get_or<std::string>(j, "theta_update", "dual"));
  cfg.phi_update = update_rule_from_string(get_or<std::string>(j, "phi_update", "dual"));
  if (j.contains("sigma")) {
    if (j.at("sigma").is_string() && j.at("sigma") == "auto") {
      cfg.sigma_auto = true;
    } else {
      cfg.sigma = number(j.at("sigma"), "sigma");
    }
  }
  cfg.allow_idle = get_or<bool>(j, "allow_idle", false);
  cfg.use_contexts = get_or<bool>(j, "use_contexts", false);
  return cfg;
}

}  // namespace bwcr
