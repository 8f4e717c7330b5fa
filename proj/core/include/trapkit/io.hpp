#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trapkit/dynamics.hpp"
#include "trapkit/env.hpp"
#include "trapkit/explore.hpp"
#include "trapkit/green.hpp"
#include "trapkit/stats.hpp"

namespace trapkit {

using json = nlohmann::ordered_json;

json site_to_json(const Site& s, int dim);
/// Dimension is the array length.
Site site_from_json(const json& j);

json to_json(const InverseCdfTable& t);
InverseCdfTable inverse_cdf_from_json(const json& j);

/// {"alpha", "d", "seed", "law": "pareto" | {"u": [...], "tau": [...]}}
json to_json(const EnvParams& p);
EnvParams env_params_from_json(const json& j);

/// {"variant": "bouchaud", "a": 0.3} or {"variant": "metropolis"} / {"variant": "heat-bath"}
json to_json(const DynamicsSpec& s);
DynamicsSpec dynamics_from_json(const json& j);

json to_json(const EnvWindow& w);
EnvWindow env_window_from_json(const json& j);

/// {value, n, method, residual, bounds: [lower, upper] | null, std_error, iterations}
json to_json(const GreenEstimate& g);
GreenEstimate green_estimate_from_json(const json& j);

json to_json(const DeepTrapRecord& r, int dim);
DeepTrapRecord deep_trap_from_json(const json& j);

json to_json(const Verdict& v);
Verdict verdict_from_json(const json& j);

/// JSONL event stream of a path: a start record, one record per jump
/// {"t", "site", "tau"}, and a closing {"horizon"} record.
void write_path_jsonl(std::ostream& os, const PathSample& path, const Environment& env);
/// Reads a path back; the taus give the clock slopes.
TimeChangedWalk read_path_jsonl(std::istream& is);

}  // namespace trapkit
