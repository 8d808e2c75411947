// Configuration checks: parsing, field-level diagnostics, byte-stable
// serialization, and the mapping into episode specs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "vqsense/config.hpp"

using namespace vqsense;

namespace {

bool mentions(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

template <typename Fn>
std::string error_message(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults validate and serialize to a stable round trip") {
  const ExperimentConfig cfg;
  validate(cfg);
  const std::string text = config_to_json_text(cfg);
  const ExperimentConfig back = config_from_json_text(text);
  CHECK(config_to_json_text(back) == text);
  CHECK(back.n_qubits == 6);
  CHECK(back.mc_samples == 64);
  CHECK(back.policy == Policy::kAdaptive);
  CHECK(back.noise.kind == NoiseSpec::Kind::kNone);
  CHECK(back.sweep_p == std::vector<double>{0.1, 0.2, 0.4});
}

TEST_CASE("noise specs parse and print losslessly") {
  CHECK(parse_noise("none").kind == NoiseSpec::Kind::kNone);

  const NoiseSpec g = parse_noise("gauss:0.1");
  CHECK(g.kind == NoiseSpec::Kind::kParamGauss);
  CHECK(g.std == 0.1);
  CHECK(noise_to_string(g) == "gauss:0.1");

  const NoiseSpec b = parse_noise("bitflip:0.25");
  CHECK(b.kind == NoiseSpec::Kind::kBitFlip);
  CHECK(b.p == 0.25);
  CHECK(noise_to_string(b) == "bitflip:0.25");

  // An awkward double still round-trips exactly through the string form.
  NoiseSpec odd;
  odd.kind = NoiseSpec::Kind::kParamGauss;
  odd.std = 0.1 + 0.2;
  CHECK(parse_noise(noise_to_string(odd)).std == odd.std);

  CHECK_THROWS_AS(parse_noise("gauss:"), ConfigError);
  CHECK_THROWS_AS(parse_noise("gauss:abc"), ConfigError);
  CHECK_THROWS_AS(parse_noise("gauss:0.1x"), ConfigError);
  CHECK_THROWS_AS(parse_noise("flip:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_policy("greedy"), ConfigError);
  CHECK_THROWS_AS(parse_axis("x"), ConfigError);
}

TEST_CASE("partial configs inherit defaults, unknown keys are named") {
  const ExperimentConfig cfg = config_from_json_text(R"({"n_qubits": 3})");
  CHECK(cfg.n_qubits == 3);
  CHECK(cfg.layers == 2);
  CHECK(cfg.horizon == 100);

  const std::string msg =
      error_message([] { config_from_json_text(R"({"frobnicate": 1})"); });
  CHECK(msg.find("frobnicate") != std::string::npos);

  CHECK_THROWS_AS(config_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text("[1, 2]"), ConfigError);
}

TEST_CASE("type errors name the offending field") {
  try {
    config_from_json_text(R"({"n_qubits": "six"})");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "n_qubits"));
  }
}

TEST_CASE("validation names the field that is out of range") {
  auto expect_field = [](void (*mutate)(ExperimentConfig&), const char* field) {
    ExperimentConfig cfg;
    mutate(cfg);
    try {
      validate(cfg);
      FAIL_CHECK("expected a ConfigError for " << field);
    } catch (const ConfigError& e) {
      CHECK(mentions(e, field));
    }
  };
  expect_field([](ExperimentConfig& c) { c.n_qubits = 0; }, "n_qubits");
  expect_field([](ExperimentConfig& c) { c.n_qubits = 13; }, "n_qubits");
  expect_field([](ExperimentConfig& c) { c.layers = 9; }, "layers");
  expect_field([](ExperimentConfig& c) { c.horizon = 0; }, "horizon");
  expect_field([](ExperimentConfig& c) { c.sawtooth_period = 0.0; }, "sawtooth_period");
  expect_field([](ExperimentConfig& c) { c.dt = -1.0; }, "dt");
  expect_field([](ExperimentConfig& c) { c.mc_samples = 1; }, "mc_samples");
  expect_field([](ExperimentConfig& c) { c.action_lr = 0.0; }, "action_lr");
  expect_field([](ExperimentConfig& c) { c.model_lr = -0.1; }, "model_lr");
  expect_field([](ExperimentConfig& c) { c.fixed_std = 0.0; }, "fixed_std");
  expect_field([](ExperimentConfig& c) { c.agents = 65; }, "agents");
  expect_field([](ExperimentConfig& c) { c.probes = 0; }, "probes");
  expect_field([](ExperimentConfig& c) { c.sweep_seeds = 0; }, "sweep_seeds");
  expect_field([](ExperimentConfig& c) { c.sweep_p = {1.5}; }, "sweep_p");
  expect_field([](ExperimentConfig& c) { c.sweep_p.clear(); }, "sweep_p");
  expect_field([](ExperimentConfig& c) { c.out_dir.clear(); }, "out_dir");
  expect_field(
      [](ExperimentConfig& c) {
        c.noise.kind = NoiseSpec::Kind::kBitFlip;
        c.noise.p = 2.0;
      },
      "noise");
}

TEST_CASE("config files load from disk and report missing paths") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "vqsense_cfg_test.json").string();
  {
    std::ofstream out(path);
    out << R"({"horizon": 7, "noise": "bitflip:0.5", "policy": "random"})";
  }
  const ExperimentConfig cfg = load_config_file(path);
  std::remove(path.c_str());
  CHECK(cfg.horizon == 7);
  CHECK(cfg.policy == Policy::kRandom);
  CHECK(cfg.noise.kind == NoiseSpec::Kind::kBitFlip);
  CHECK(cfg.noise.p == 0.5);
  CHECK_THROWS_AS(load_config_file("/nonexistent/vqsense.json"), ConfigError);
}

TEST_CASE("sweep seeds come from the explicit list or are derived") {
  ExperimentConfig cfg;
  cfg.seeds = {11, 22, 33};
  CHECK(resolve_sweep_seeds(cfg) == std::vector<std::uint64_t>{11, 22, 33});

  cfg.seeds.clear();
  cfg.sweep_seeds = 4;
  const std::vector<std::uint64_t> derived = resolve_sweep_seeds(cfg);
  CHECK(derived.size() == 4);
  CHECK(derived == resolve_sweep_seeds(cfg));  // deterministic
  CHECK(derived[0] != derived[1]);

  cfg.seed = 2;
  CHECK(resolve_sweep_seeds(cfg) != derived);  // master seed matters
}

TEST_CASE("episode specs mirror the configuration fields") {
  ExperimentConfig cfg;
  cfg.n_qubits = 4;
  cfg.layers = 3;
  cfg.horizon = 55;
  cfg.sawtooth_period = 9.0;
  cfg.sawtooth_t0 = -1.5;
  cfg.dt = 0.5;
  cfg.policy = Policy::kRandom;
  cfg.noise = parse_noise("gauss:0.2");
  cfg.mc_samples = 12;
  cfg.action_lr = 0.05;
  cfg.model_lr = 0.002;
  cfg.fixed_std = 0.4;
  cfg.probes = 2;
  cfg.measurement_axis = MeasurementAxis::kZ;

  const EpisodeSpec spec = make_episode_spec(cfg, 99, 5, 2);
  CHECK(spec.n_qubits == 4);
  CHECK(spec.layers == 3);
  CHECK(spec.sawtooth.horizon == 55);
  CHECK(spec.sawtooth.period == 9.0);
  CHECK(spec.sawtooth.t0 == -1.5);
  CHECK(spec.sawtooth.dt == 0.5);
  CHECK(spec.policy == Policy::kRandom);
  CHECK(spec.noise.kind == NoiseSpec::Kind::kParamGauss);
  CHECK(spec.noise.std == 0.2);
  CHECK(spec.planner.mc_samples == 12);
  CHECK(spec.planner.action_lr == 0.05);
  CHECK(spec.planner.axis == MeasurementAxis::kZ);
  CHECK(spec.model_lr == 0.002);
  CHECK(spec.fixed_std == 0.4);
  CHECK(spec.probes == 2);
  CHECK(spec.model_outputs == 2);
  CHECK(spec.master_seed == 99);
  CHECK(spec.agent_index == 5);
}
