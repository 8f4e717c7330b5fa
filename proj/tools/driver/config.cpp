#include "driver/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace trapkit::driver {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"balance", "range",  "deep-traps", "green",
                                              "characterize", "clock", "fk", "quenched"};
  return names;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool descending(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

template <class T>
std::vector<T> list_of(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string(key) + " must be an array");
  std::vector<T> out;
  for (const auto& x : j) out.push_back(x.get<T>());
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), experiment) != names.end(),
          "unknown experiment '" + experiment + "'");
  try {
    env.validate();
    dynamics.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(!epsilons.empty(), "epsilons must not be empty");
  require(!deltas.empty(), "deltas must not be empty");
  for (double e : epsilons) require(e > 0.0 && e <= 1.0, "epsilons must lie in (0, 1]");
  for (double d : deltas) require(d > 0.0, "deltas must be positive");
  require(descending(epsilons), "epsilons must be sorted in strictly descending order");
  require(descending(deltas), "deltas must be sorted in strictly descending order");
  require(replicas > 0, "replicas must be positive");
  if (horizons.steps) require(*horizons.steps > 0, "horizons.steps must be positive");
  if (horizons.time) require(*horizons.time > 0.0, "horizons.time must be positive");
  if (horizons.rescaled) require(*horizons.rescaled > 0.0, "horizons.rescaled must be positive");
  require(!box_radii.empty(), "box_radii must not be empty");
  for (int n : box_radii) require(n >= 1, "box radii must be >= 1");
  require(!lambdas.empty(), "lambdas must not be empty");
  for (double l : lambdas) require(l > 0.0, "lambdas must be positive");
  require(options.is_object(), "options must be an object");
}

double ExperimentConfig::option(const std::string& key, double fallback) const {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  if (!it->is_number()) throw ConfigError("option " + key + " must be a number");
  return it->get<double>();
}

std::size_t ExperimentConfig::option_count(const std::string& key, std::size_t fallback) const {
  const double v = option(key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("option " + key + " must be a count");
  return static_cast<std::size_t>(v);
}

std::vector<double> ExperimentConfig::option_list(const std::string& key,
                                                  std::vector<double> fallback) const {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  return list_of<double>(*it, key.c_str());
}

bool ExperimentConfig::option_flag(const std::string& key, bool fallback) const {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError("option " + key + " must be true or false");
  return it->get<bool>();
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{
      "experiment", "env", "dynamics", "epsilons", "deltas", "replicas", "horizons", "box_radii",
      "lambdas", "test_functions", "output_dir", "seed", "options"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  ExperimentConfig c;
  try {
    c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("env")) c.env = env_params_from_json(j["env"]);
    if (j.contains("dynamics")) c.dynamics = dynamics_from_json(j["dynamics"]);
    if (j.contains("epsilons")) c.epsilons = list_of<double>(j["epsilons"], "epsilons");
    if (j.contains("deltas")) c.deltas = list_of<double>(j["deltas"], "deltas");
    if (j.contains("replicas")) {
      const auto r = j["replicas"].get<std::int64_t>();
      if (r <= 0) throw ConfigError("replicas must be positive");
      c.replicas = static_cast<std::size_t>(r);
    }
    if (j.contains("horizons")) {
      const json& h = j["horizons"];
      if (h.contains("steps")) c.horizons.steps = h["steps"].get<std::size_t>();
      if (h.contains("time")) c.horizons.time = h["time"].get<double>();
      if (h.contains("rescaled")) c.horizons.rescaled = h["rescaled"].get<double>();
    }
    if (j.contains("box_radii")) c.box_radii = list_of<int>(j["box_radii"], "box_radii");
    if (j.contains("lambdas")) c.lambdas = list_of<double>(j["lambdas"], "lambdas");
    if (j.contains("test_functions")) {
      c.test_functions = list_of<std::string>(j["test_functions"], "test_functions");
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("options")) c.options = j["options"];
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["env"] = to_json(c.env);
  j["dynamics"] = to_json(c.dynamics);
  j["epsilons"] = c.epsilons;
  j["deltas"] = c.deltas;
  j["replicas"] = c.replicas;
  json h = json::object();
  if (c.horizons.steps) h["steps"] = *c.horizons.steps;
  if (c.horizons.time) h["time"] = *c.horizons.time;
  if (c.horizons.rescaled) h["rescaled"] = *c.horizons.rescaled;
  j["horizons"] = h;
  j["box_radii"] = c.box_radii;
  j["lambdas"] = c.lambdas;
  j["test_functions"] = c.test_functions;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["options"] = c.options;
  return j;
}

std::string config_fingerprint(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  // FNV-1a over the compact dump: stable across platforms and builds.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace trapkit::driver
