// Experiment configuration: defaults, JSON loading with field-level
// diagnostics, validation, and the fully resolved echo written next to every
// run so results can be reproduced from the output directory alone.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqsense/agent.hpp"

namespace vqsense {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int n_qubits = 6;
  int layers = 2;
  int horizon = 100;
  double sawtooth_period = 15.0;
  double sawtooth_t0 = 0.0;
  double dt = 1.0;
  Policy policy = Policy::kAdaptive;
  NoiseSpec noise;
  int mc_samples = 64;
  double action_lr = 0.2;
  double model_lr = 0.001;
  double fixed_std = 0.25;
  int agents = 1;
  int probes = 1;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;  // explicit sweep masters; empty = derive
  int sweep_seeds = 10;              // how many masters to derive from `seed`
  std::vector<double> sweep_p = {0.1, 0.2, 0.4};
  MeasurementAxis measurement_axis = MeasurementAxis::kY;
  std::string out_dir = "out";
};

// Parse "none", "gauss:STD" or "bitflip:P".
NoiseSpec parse_noise(const std::string& text);
std::string noise_to_string(const NoiseSpec& noise);

Policy parse_policy(const std::string& text);
std::string policy_to_string(Policy policy);

MeasurementAxis parse_axis(const std::string& text);
std::string axis_to_string(MeasurementAxis axis);

// Load a JSON config file. Unknown keys and ill-typed values are rejected
// with the offending field named in the ConfigError message.
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

// Every field, defaults materialized; stable key order, so identical configs
// serialize to identical bytes.
std::string config_to_json_text(const ExperimentConfig& cfg);

// Range checks; throws ConfigError naming the field.
void validate(const ExperimentConfig& cfg);

// The masters actually used by a sweep: the explicit list if given, else
// sweep_seeds values derived from `seed`.
std::vector<std::uint64_t> resolve_sweep_seeds(const ExperimentConfig& cfg);

EpisodeSpec make_episode_spec(const ExperimentConfig& cfg, std::uint64_t master,
                              int agent_index, int model_outputs);

}  // namespace vqsense
