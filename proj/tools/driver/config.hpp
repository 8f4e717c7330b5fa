#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trapkit/dynamics.hpp"
#include "trapkit/env.hpp"
#include "trapkit/io.hpp"

namespace trapkit::driver {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Run lengths. Which of them an experiment reads is listed in its
/// documentation; unset ones fall back to the experiment's default.
struct Horizons {
  std::optional<std::size_t> steps;
  /// X-hat time.
  std::optional<double> time;
  /// Rescaled time t (as in H^(eps)(t)).
  std::optional<double> rescaled;
};

struct ExperimentConfig {
  std::string experiment;
  EnvParams env;
  DynamicsSpec dynamics;
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  std::vector<double> deltas{1.0, 0.5, 0.25};
  std::size_t replicas = 200;
  Horizons horizons;
  std::vector<int> box_radii{3};
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  std::vector<std::string> test_functions{"inv1p-e1", "exp-pair", "ratio-2e1"};
  std::string output_dir;
  std::uint64_t seed = 1;
  /// Experiment-specific knobs.
  json options = json::object();

  /// Throws ConfigError.
  void validate() const;

  double option(const std::string& key, double fallback) const;
  std::size_t option_count(const std::string& key, std::size_t fallback) const;
  std::vector<double> option_list(const std::string& key, std::vector<double> fallback) const;
  bool option_flag(const std::string& key, bool fallback) const;
};

const std::vector<std::string>& experiment_names();

ExperimentConfig config_from_json(const json& j);
/// Full echo, including defaults that were filled in.
json to_json(const ExperimentConfig& c);
/// The part of the config that determines the records: everything except the
/// output directory.
std::string config_fingerprint(const ExperimentConfig& c);

}  // namespace trapkit::driver
