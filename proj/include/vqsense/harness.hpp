// Turns episodes into files: trajectory/fusion CSVs, summary JSON, the
// resolved-config echo, and the three experiment commands the CLI exposes.
// All writes are atomic (temp file plus rename) and byte-deterministic.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vqsense/config.hpp"
#include "vqsense/fusion.hpp"

namespace vqsense {

// First 30 steps are the model's settling window; comparative summaries
// report the window after it alongside the full horizon.
inline constexpr int kBurnInSteps = 30;

// Shortest-round-trip-safe decimal rendering (17 significant digits).
std::string format_sig17(double value);

// Columns: t, x_true, x_hat, wrapped_error, raw_error, mi_nats, loss,
// a_0..a_{D-1}, s_0..s_{B-1}. One row per step, '.' decimal separator.
std::string trajectory_csv_text(const std::vector<StepRecord>& records);

// Columns: t, x_true, x_fused, gamma, wrapped_error, raw_error, then
// x_hat_k, sigma_k per agent.
std::string fused_csv_text(const MultiResult& result);

struct ErrorStats {
  int count = 0;
  double raw_mean = 0.0;
  double raw_std = 0.0;       // population std of x - x_hat
  double wrapped_abs_mean = 0.0;
  double wrapped_abs_std = 0.0;
};

// Stats over (x_true, x_hat) pairs with index >= from.
ErrorStats error_stats(const std::vector<std::pair<double, double>>& pairs,
                       std::size_t from);
std::vector<std::pair<double, double>> error_pairs(const std::vector<StepRecord>& records);
std::vector<std::pair<double, double>> fused_error_pairs(const MultiResult& result);

void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Runs fn(0..count-1) on a small worker pool; completion order is arbitrary
// but every index runs exactly once, so writers keyed by index stay
// deterministic.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// One agent against the sawtooth; `baseline` swaps in the random policy.
// Writes config_resolved.json, trajectory.csv and summary.json under
// cfg.out_dir and echoes the resolved config to stdout.
void run_single_experiment(const ExperimentConfig& cfg, bool baseline);

// K agents plus per-step fusion; writes agent_<k>.csv, fused.csv, the echo
// and summary.json.
void run_multi_experiment(const ExperimentConfig& cfg);

// Bit-flip strength sweep comparing K fused single-probe agents against one
// agent carrying K probes, over resolve_sweep_seeds(cfg) masters per p.
void run_sweep_experiment(const ExperimentConfig& cfg);

}  // namespace vqsense
