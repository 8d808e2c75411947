// Command-line front end. Subcommands: single, baseline, multi, sweep-noise.
// Resolution order: built-in defaults, then --config JSON, then flags.
// Exit codes: 0 success, 1 malformed config or usage, 2 numerical abort.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqsense/harness.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::uint64_t seed = 0;
  int steps = 0;
  std::string policy;
  std::string noise;
  int agents = 0;
  int probes = 0;
  std::string out;
  int sweep_seeds = 0;
  std::vector<double> sweep_p;
};

void add_common_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--steps", o.steps, "episode length in steps");
  sub->add_option("--policy", o.policy, "adaptive or random");
  sub->add_option("--noise", o.noise, "none, gauss:STD or bitflip:P");
  sub->add_option("--agents", o.agents, "number of agents (multi / sweep arms)");
  sub->add_option("--probes", o.probes, "probes deployed per step");
  sub->add_option("--out", o.out, "output directory");
}

vqsense::ExperimentConfig resolve(const CLI::App* sub, const Overrides& o) {
  vqsense::ExperimentConfig cfg;
  if (sub->count("--config")) cfg = vqsense::load_config_file(o.config_path);
  if (sub->count("--seed")) cfg.seed = o.seed;
  if (sub->count("--steps")) cfg.horizon = o.steps;
  if (sub->count("--policy")) cfg.policy = vqsense::parse_policy(o.policy);
  if (sub->count("--noise")) cfg.noise = vqsense::parse_noise(o.noise);
  if (sub->count("--agents")) cfg.agents = o.agents;
  if (sub->count("--probes")) cfg.probes = o.probes;
  if (sub->count("--out")) cfg.out_dir = o.out;
  const CLI::Option* seeds_opt = sub->get_option_no_throw("--seeds");
  if (seeds_opt != nullptr && seeds_opt->count() > 0) {
    cfg.sweep_seeds = o.sweep_seeds;
    cfg.seeds.clear();  // the count wins over any list from the file
  }
  const CLI::Option* p_opt = sub->get_option_no_throw("--p");
  if (p_opt != nullptr && p_opt->count() > 0) cfg.sweep_p = o.sweep_p;
  vqsense::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive single-shot quantum phase sensing simulator"};
  app.require_subcommand(1);

  Overrides o;
  CLI::App* single = app.add_subcommand("single", "one adaptive agent against the sawtooth");
  CLI::App* baseline = app.add_subcommand("baseline", "same loop with random actions");
  CLI::App* multi = app.add_subcommand("multi", "K agents with per-step fusion");
  CLI::App* sweep = app.add_subcommand(
      "sweep-noise", "bit-flip sweep: fused agents vs one multi-probe agent");
  for (CLI::App* sub : {single, baseline, multi, sweep}) add_common_options(sub, o);
  sweep->add_option("--p", o.sweep_p, "flip probabilities to sweep")->delimiter(',');
  sweep->add_option("--seeds", o.sweep_seeds, "number of derived master seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (single->parsed()) {
      vqsense::run_single_experiment(resolve(single, o), false);
    } else if (baseline->parsed()) {
      vqsense::run_single_experiment(resolve(baseline, o), true);
    } else if (multi->parsed()) {
      vqsense::run_multi_experiment(resolve(multi, o));
    } else if (sweep->parsed()) {
      vqsense::run_sweep_experiment(resolve(sweep, o));
    }
  } catch (const vqsense::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const vqsense::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
