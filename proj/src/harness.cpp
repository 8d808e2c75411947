#include "vqsense/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace vqsense {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kSummarySchemaVersion = 1;
constexpr int kCsvSchemaVersion = 1;

json stats_to_json(const ErrorStats& s) {
  json out;
  out["count"] = s.count;
  out["raw_error_mean"] = s.raw_mean;
  out["raw_error_std"] = s.raw_std;
  out["wrapped_abs_mean"] = s.wrapped_abs_mean;
  out["wrapped_abs_std"] = s.wrapped_abs_std;
  return out;
}

json trajectory_summary(const std::vector<StepRecord>& records) {
  const auto pairs = error_pairs(records);
  json out;
  out["steps"] = records.size();
  out["full"] = stats_to_json(error_stats(pairs, 0));
  out["post_burn_in"] = stats_to_json(error_stats(pairs, kBurnInSteps));
  double mi_sum = 0.0;
  int flagged = 0;
  for (const auto& r : records) {
    mi_sum += r.mi_value;
    if (!r.plan_ok || !r.update_ok) ++flagged;
  }
  out["mi_nats_mean"] = records.empty() ? 0.0 : mi_sum / double(records.size());
  out["flagged_steps"] = flagged;
  return out;
}

json fused_summary(const MultiResult& result) {
  const auto pairs = fused_error_pairs(result);
  json out;
  out["full"] = stats_to_json(error_stats(pairs, 0));
  out["post_burn_in"] = stats_to_json(error_stats(pairs, kBurnInSteps));
  return out;
}

void write_echo(const ExperimentConfig& cfg, const fs::path& dir) {
  const std::string text = config_to_json_text(cfg);
  atomic_write_file(dir / "config_resolved.json", text);
  std::cout << text;  // reproducibility: the run is fully determined by this
}

ordered_json summary_header(const ExperimentConfig& cfg, const std::string& command) {
  ordered_json doc;
  doc["schema_version"] = kSummarySchemaVersion;
  doc["csv_schema_version"] = kCsvSchemaVersion;
  doc["command"] = command;
  doc["seed"] = cfg.seed;
  doc["burn_in_steps"] = kBurnInSteps;
  return doc;
}

void write_summary(const fs::path& dir, const ordered_json& doc) {
  atomic_write_file(dir / "summary.json", doc.dump(2) + "\n");
}

}  // namespace

std::string format_sig17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trajectory_csv_text(const std::vector<StepRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records to serialize");
  const Eigen::Index dim_a = records.front().action.dim();
  const std::size_t n_bits = records.front().observation.bits.size();

  std::ostringstream out;
  out << "t,x_true,x_hat,wrapped_error,raw_error,mi_nats,loss";
  for (Eigen::Index j = 0; j < dim_a; ++j) out << ",a_" << j;
  for (std::size_t b = 0; b < n_bits; ++b) out << ",s_" << b;
  out << "\n";

  for (const auto& r : records) {
    out << r.t;
    out << ',' << format_sig17(r.x_true);
    out << ',' << format_sig17(r.x_hat);
    out << ',' << format_sig17(wrapped_abs_error(r.x_true, r.x_hat));
    out << ',' << format_sig17(r.x_true - r.x_hat);
    out << ',' << format_sig17(r.mi_value);
    out << ',' << format_sig17(r.loss);
    const RVector a = r.action.flatten();
    for (Eigen::Index j = 0; j < dim_a; ++j) out << ',' << format_sig17(a[j]);
    for (std::size_t b = 0; b < n_bits; ++b) out << ',' << int(r.observation.bits[b]);
    out << "\n";
  }
  return out.str();
}

std::string fused_csv_text(const MultiResult& result) {
  if (result.fused.empty()) throw std::invalid_argument("no fusion records to serialize");
  const std::size_t K = result.fused.front().per_agent.size();

  std::ostringstream out;
  out << "t,x_true,x_fused,gamma,wrapped_error,raw_error";
  for (std::size_t k = 0; k < K; ++k) out << ",x_hat_" << k << ",sigma_" << k;
  out << "\n";
  for (const auto& r : result.fused) {
    out << r.t;
    out << ',' << format_sig17(r.x_true);
    out << ',' << format_sig17(r.fused);
    out << ',' << format_sig17(r.gamma);
    out << ',' << format_sig17(wrapped_abs_error(r.x_true, r.fused));
    out << ',' << format_sig17(r.x_true - r.fused);
    for (const auto& pa : r.per_agent)
      out << ',' << format_sig17(pa.x_hat) << ',' << format_sig17(pa.sigma);
    out << "\n";
  }
  return out.str();
}

ErrorStats error_stats(const std::vector<std::pair<double, double>>& pairs,
                       std::size_t from) {
  ErrorStats stats;
  if (from >= pairs.size()) return stats;
  double raw_sum = 0.0, raw_sq = 0.0, wrap_sum = 0.0, wrap_sq = 0.0;
  for (std::size_t i = from; i < pairs.size(); ++i) {
    const double raw = pairs[i].first - pairs[i].second;
    const double wrapped = wrapped_abs_error(pairs[i].first, pairs[i].second);
    raw_sum += raw;
    raw_sq += raw * raw;
    wrap_sum += wrapped;
    wrap_sq += wrapped * wrapped;
    ++stats.count;
  }
  const double n = double(stats.count);
  stats.raw_mean = raw_sum / n;
  stats.raw_std = std::sqrt(std::max(0.0, raw_sq / n - stats.raw_mean * stats.raw_mean));
  stats.wrapped_abs_mean = wrap_sum / n;
  stats.wrapped_abs_std =
      std::sqrt(std::max(0.0, wrap_sq / n - stats.wrapped_abs_mean * stats.wrapped_abs_mean));
  return stats;
}

std::vector<std::pair<double, double>> error_pairs(const std::vector<StepRecord>& records) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.emplace_back(r.x_true, r.x_hat);
  return pairs;
}

std::vector<std::pair<double, double>> fused_error_pairs(const MultiResult& result) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(result.fused.size());
  for (const auto& r : result.fused) pairs.emplace_back(r.x_true, r.fused);
  return pairs;
}

void atomic_write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);  // atomic on POSIX within one filesystem
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(count, hw);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void run_single_experiment(const ExperimentConfig& cfg_in, bool baseline) {
  ExperimentConfig cfg = cfg_in;
  if (baseline) cfg.policy = Policy::kRandom;
  validate(cfg);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_echo(cfg, dir);

  EpisodeSpec spec = make_episode_spec(cfg, cfg.seed, 0, 1);
  const std::vector<StepRecord> records = run_episode(spec);
  atomic_write_file(dir / "trajectory.csv", trajectory_csv_text(records));

  ordered_json doc = summary_header(cfg, baseline ? "baseline" : "single");
  doc["trajectory"] = trajectory_summary(records);
  write_summary(dir, doc);
}

void run_multi_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_echo(cfg, dir);

  EpisodeSpec base = make_episode_spec(cfg, cfg.seed, 0, 2);
  const MultiResult result = run_multi(base, cfg.agents);
  for (int k = 0; k < cfg.agents; ++k)
    atomic_write_file(dir / ("agent_" + std::to_string(k) + ".csv"),
                      trajectory_csv_text(result.per_agent[k]));
  atomic_write_file(dir / "fused.csv", fused_csv_text(result));

  ordered_json doc = summary_header(cfg, "multi");
  doc["agents"] = cfg.agents;
  doc["fused"] = fused_summary(result);
  json per_agent = json::array();
  for (int k = 0; k < cfg.agents; ++k)
    per_agent.push_back(trajectory_summary(result.per_agent[k]));
  doc["per_agent"] = per_agent;
  write_summary(dir, doc);
}

void run_sweep_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_echo(cfg, dir);

  const std::vector<std::uint64_t> masters = resolve_sweep_seeds(cfg);
  struct Cell {
    ErrorStats fused_full, fused_post;
    ErrorStats single_full, single_post;
  };
  const std::size_t n_p = cfg.sweep_p.size();
  std::vector<Cell> cells(n_p * masters.size());

  parallel_for(cells.size(), [&](std::size_t i) {
    const std::size_t pi = i / masters.size();
    const std::size_t si = i % masters.size();
    ExperimentConfig run_cfg = cfg;
    run_cfg.noise.kind = NoiseSpec::Kind::kBitFlip;
    run_cfg.noise.std = 0.0;
    run_cfg.noise.p = cfg.sweep_p[pi];

    const std::string tag =
        "p" + json(cfg.sweep_p[pi]).dump() + "_s" + std::to_string(si);

    // Arm A: K single-probe agents fused per step.
    EpisodeSpec multi_base = make_episode_spec(run_cfg, masters[si], 0, 2);
    multi_base.probes = 1;
    const MultiResult multi = run_multi(multi_base, run_cfg.agents);
    const auto fused_pairs = fused_error_pairs(multi);
    cells[i].fused_full = error_stats(fused_pairs, 0);
    cells[i].fused_post = error_stats(fused_pairs, kBurnInSteps);
    const fs::path multi_dir = dir / "runs" / tag / "multi_agent";
    for (int k = 0; k < run_cfg.agents; ++k)
      atomic_write_file(multi_dir / ("agent_" + std::to_string(k) + ".csv"),
                        trajectory_csv_text(multi.per_agent[k]));
    atomic_write_file(multi_dir / "fused.csv", fused_csv_text(multi));

    // Arm B: one agent carrying K probes of the same action each step.
    EpisodeSpec single = make_episode_spec(run_cfg, masters[si], 0, 1);
    single.probes = run_cfg.agents;
    const std::vector<StepRecord> records = run_episode(single);
    const auto single_pairs = error_pairs(records);
    cells[i].single_full = error_stats(single_pairs, 0);
    cells[i].single_post = error_stats(single_pairs, kBurnInSteps);
    atomic_write_file(dir / "runs" / tag / "single_multi_probe" / "trajectory.csv",
                      trajectory_csv_text(records));
  });

  ordered_json doc = summary_header(cfg, "sweep-noise");
  doc["agents"] = cfg.agents;
  doc["seeds"] = masters;
  json per_p = json::array();
  for (std::size_t pi = 0; pi < n_p; ++pi) {
    json block;
    block["p"] = cfg.sweep_p[pi];
    json multi_seed = json::array(), single_seed = json::array();
    double multi_acc = 0.0, single_acc = 0.0;
    for (std::size_t si = 0; si < masters.size(); ++si) {
      const Cell& c = cells[pi * masters.size() + si];
      json m;
      m["seed"] = masters[si];
      m["error_std_full"] = c.fused_full.raw_std;
      m["error_std_post_burn_in"] = c.fused_post.raw_std;
      multi_seed.push_back(m);
      multi_acc += c.fused_post.raw_std;
      json s;
      s["seed"] = masters[si];
      s["error_std_full"] = c.single_full.raw_std;
      s["error_std_post_burn_in"] = c.single_post.raw_std;
      single_seed.push_back(s);
      single_acc += c.single_post.raw_std;
    }
    block["multi_agent"] = {{"per_seed", multi_seed},
                            {"mean_error_std_post_burn_in", multi_acc / double(masters.size())}};
    block["single_multi_probe"] = {{"per_seed", single_seed},
                                   {"mean_error_std_post_burn_in", single_acc / double(masters.size())}};
    per_p.push_back(block);
  }
  doc["per_p"] = per_p;
  write_summary(dir, doc);
}

}  // namespace vqsense
