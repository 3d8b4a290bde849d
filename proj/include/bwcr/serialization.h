#ifndef BWCR_SERIALIZATION_H_
#define BWCR_SERIALIZATION_H_

#include <json.hpp>

#include "bwcr/algorithms.h"
#include "bwcr/core.h"
#include "bwcr/geometry.h"
#include "bwcr/objective.h"

namespace bwcr {

using Json = nlohmann::json;

// All readers throw ConfigError on malformed documents.
Vec vec_from_json(const Json& j, const char* what);
Mat mat_from_json(const Json& j, int rows, int cols, const char* what);  // row-major flat
Mat mat_from_rows(const Json& j, const char* what);                      // array of rows
Json to_json(const Vec& v);

// {d, m, outcome_kind, mean_matrix (row-major d*m), beta_concentration?, contextual?}
Json instance_to_json(const InstanceModel& instance);
InstanceModel instance_from_json(const Json& j);

// {"kind":"box","lo":[..],"hi":[..]} | {"kind":"halfspaces","a":[[..]],"b":[..],"lo"?,"hi"?}
// | {"kind":"vertices","points":[[..],..] (one point per entry),"downward_closed"?}
Json set_to_json(const ConvexSet& set);
ConvexSet set_from_json(const Json& j, int d);

// {"kind":"linear","c":[..]} | {"kind":"neg_distance","set":{..}}
// | {"kind":"separable","terms":[{"kind":"sqrt"|"log1p"|"quadratic","weight","center"}]}
// plus optional "norm" and "lipschitz" override.
Json objective_to_json(const Objective& f);
Objective objective_from_json(const Json& j, int d, Norm default_norm);

// Reads the "algorithm" block; objective/target/horizon are filled in by the caller.
AlgorithmConfig algorithm_from_json(const Json& j);

}  // namespace bwcr

#endif  // BWCR_SERIALIZATION_H_
