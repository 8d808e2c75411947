#include "vqsense/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vqsense {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

template <typename T>
T get_field(const json& doc, const std::string& key, const T& fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    fail(key, "has the wrong type");
  }
}

double parse_suffix_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("noise spec: cannot parse " + what + " from '" + text + "'");
  }
  if (used != text.size())
    throw ConfigError("noise spec: trailing junk after " + what + " in '" + text + "'");
  return value;
}

}  // namespace

NoiseSpec parse_noise(const std::string& text) {
  NoiseSpec spec;
  if (text == "none") return spec;
  if (text.rfind("gauss:", 0) == 0) {
    spec.kind = NoiseSpec::Kind::kParamGauss;
    spec.std = parse_suffix_number(text.substr(6), "std");
    return spec;
  }
  if (text.rfind("bitflip:", 0) == 0) {
    spec.kind = NoiseSpec::Kind::kBitFlip;
    spec.p = parse_suffix_number(text.substr(8), "probability");
    return spec;
  }
  throw ConfigError("noise spec must be none, gauss:STD or bitflip:P (got '" +
                    text + "')");
}

std::string noise_to_string(const NoiseSpec& noise) {
  // json::dump prints the shortest digits that parse back to the same double,
  // so the echoed config reproduces the run exactly.
  switch (noise.kind) {
    case NoiseSpec::Kind::kNone:
      return "none";
    case NoiseSpec::Kind::kParamGauss:
      return "gauss:" + json(noise.std).dump();
    case NoiseSpec::Kind::kBitFlip:
      return "bitflip:" + json(noise.p).dump();
  }
  return "none";
}

Policy parse_policy(const std::string& text) {
  if (text == "adaptive") return Policy::kAdaptive;
  if (text == "random") return Policy::kRandom;
  throw ConfigError("policy must be adaptive or random (got '" + text + "')");
}

std::string policy_to_string(Policy policy) {
  return policy == Policy::kAdaptive ? "adaptive" : "random";
}

MeasurementAxis parse_axis(const std::string& text) {
  if (text == "y") return MeasurementAxis::kY;
  if (text == "z") return MeasurementAxis::kZ;
  throw ConfigError("measurement_axis must be y or z (got '" + text + "')");
}

std::string axis_to_string(MeasurementAxis axis) {
  return axis == MeasurementAxis::kY ? "y" : "z";
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

  static const std::vector<std::string> known{
      "n_qubits", "layers", "horizon", "sawtooth_period", "sawtooth_t0",
      "dt", "policy", "noise", "mc_samples", "action_lr",
      "model_lr", "fixed_std", "agents", "probes", "seed",
      "seeds", "sweep_seeds", "sweep_p", "measurement_axis", "out_dir"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(key, "is not a recognized setting");
  }

  ExperimentConfig cfg;
  cfg.n_qubits = get_field(doc, "n_qubits", cfg.n_qubits);
  cfg.layers = get_field(doc, "layers", cfg.layers);
  cfg.horizon = get_field(doc, "horizon", cfg.horizon);
  cfg.sawtooth_period = get_field(doc, "sawtooth_period", cfg.sawtooth_period);
  cfg.sawtooth_t0 = get_field(doc, "sawtooth_t0", cfg.sawtooth_t0);
  cfg.dt = get_field(doc, "dt", cfg.dt);
  cfg.policy = parse_policy(get_field<std::string>(doc, "policy", "adaptive"));
  cfg.noise = parse_noise(get_field<std::string>(doc, "noise", "none"));
  cfg.mc_samples = get_field(doc, "mc_samples", cfg.mc_samples);
  cfg.action_lr = get_field(doc, "action_lr", cfg.action_lr);
  cfg.model_lr = get_field(doc, "model_lr", cfg.model_lr);
  cfg.fixed_std = get_field(doc, "fixed_std", cfg.fixed_std);
  cfg.agents = get_field(doc, "agents", cfg.agents);
  cfg.probes = get_field(doc, "probes", cfg.probes);
  cfg.seed = get_field(doc, "seed", cfg.seed);
  cfg.seeds = get_field(doc, "seeds", cfg.seeds);
  cfg.sweep_seeds = get_field(doc, "sweep_seeds", cfg.sweep_seeds);
  cfg.sweep_p = get_field(doc, "sweep_p", cfg.sweep_p);
  cfg.measurement_axis =
      parse_axis(get_field<std::string>(doc, "measurement_axis", "y"));
  cfg.out_dir = get_field(doc, "out_dir", cfg.out_dir);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["n_qubits"] = cfg.n_qubits;
  doc["layers"] = cfg.layers;
  doc["horizon"] = cfg.horizon;
  doc["sawtooth_period"] = cfg.sawtooth_period;
  doc["sawtooth_t0"] = cfg.sawtooth_t0;
  doc["dt"] = cfg.dt;
  doc["policy"] = policy_to_string(cfg.policy);
  doc["noise"] = noise_to_string(cfg.noise);
  doc["mc_samples"] = cfg.mc_samples;
  doc["action_lr"] = cfg.action_lr;
  doc["model_lr"] = cfg.model_lr;
  doc["fixed_std"] = cfg.fixed_std;
  doc["agents"] = cfg.agents;
  doc["probes"] = cfg.probes;
  doc["seed"] = cfg.seed;
  doc["seeds"] = cfg.seeds;
  doc["sweep_seeds"] = cfg.sweep_seeds;
  doc["sweep_p"] = cfg.sweep_p;
  doc["measurement_axis"] = axis_to_string(cfg.measurement_axis);
  doc["out_dir"] = cfg.out_dir;
  return doc.dump(2) + "\n";
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_qubits < 1 || cfg.n_qubits > 12)
    fail("n_qubits", "must be in [1, 12]");
  if (cfg.layers < 1 || cfg.layers > 8) fail("layers", "must be in [1, 8]");
  if (cfg.horizon < 1 || cfg.horizon > 1000000)
    fail("horizon", "must be in [1, 1000000]");
  if (!(cfg.sawtooth_period > 0.0) || !std::isfinite(cfg.sawtooth_period))
    fail("sawtooth_period", "must be positive");
  if (!std::isfinite(cfg.sawtooth_t0)) fail("sawtooth_t0", "must be finite");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) fail("dt", "must be positive");
  if (cfg.mc_samples < 2 || cfg.mc_samples > 100000)
    fail("mc_samples", "must be in [2, 100000]");
  if (!(cfg.action_lr > 0.0) || !std::isfinite(cfg.action_lr))
    fail("action_lr", "must be positive");
  if (cfg.model_lr < 0.0 || !std::isfinite(cfg.model_lr))
    fail("model_lr", "must be nonnegative");
  if (!(cfg.fixed_std > 0.0) || !std::isfinite(cfg.fixed_std))
    fail("fixed_std", "must be positive");
  if (cfg.agents < 1 || cfg.agents > 64) fail("agents", "must be in [1, 64]");
  if (cfg.probes < 1 || cfg.probes > 16) fail("probes", "must be in [1, 16]");
  if (cfg.noise.kind == NoiseSpec::Kind::kParamGauss &&
      (cfg.noise.std < 0.0 || !std::isfinite(cfg.noise.std)))
    fail("noise", "gaussian std must be nonnegative");
  if (cfg.noise.kind == NoiseSpec::Kind::kBitFlip &&
      !(cfg.noise.p >= 0.0 && cfg.noise.p <= 1.0))
    fail("noise", "flip probability must be in [0, 1]");
  if (cfg.sweep_seeds < 1 || cfg.sweep_seeds > 1000)
    fail("sweep_seeds", "must be in [1, 1000]");
  if (cfg.sweep_p.empty()) fail("sweep_p", "must list at least one value");
  for (const double p : cfg.sweep_p)
    if (!(p >= 0.0 && p <= 1.0)) fail("sweep_p", "entries must be in [0, 1]");
  if (cfg.out_dir.empty()) fail("out_dir", "must not be empty");
}

std::vector<std::uint64_t> resolve_sweep_seeds(const ExperimentConfig& cfg) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  std::vector<std::uint64_t> masters(cfg.sweep_seeds);
  for (int i = 0; i < cfg.sweep_seeds; ++i)
    masters[i] = derive_seed(cfg.seed, 0x5EED0000ULL + std::uint64_t(i));
  return masters;
}

EpisodeSpec make_episode_spec(const ExperimentConfig& cfg, std::uint64_t master,
                              int agent_index, int model_outputs) {
  EpisodeSpec spec;
  spec.n_qubits = cfg.n_qubits;
  spec.layers = cfg.layers;
  spec.sawtooth = {cfg.sawtooth_period, cfg.sawtooth_t0, cfg.horizon, cfg.dt};
  spec.policy = cfg.policy;
  spec.noise = cfg.noise;
  spec.planner.mc_samples = cfg.mc_samples;
  spec.planner.action_lr = cfg.action_lr;
  spec.planner.axis = cfg.measurement_axis;
  spec.model_lr = cfg.model_lr;
  spec.fixed_std = cfg.fixed_std;
  spec.probes = cfg.probes;
  spec.model_outputs = model_outputs;
  spec.master_seed = master;
  spec.agent_index = agent_index;
  return spec;
}

}  // namespace vqsense
