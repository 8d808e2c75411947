#include "vqsense/fusion.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace vqsense {

FuseResult fuse(const RVector& estimates, const RVector& stds) {
  if (estimates.size() < 1)
    throw std::invalid_argument("fusion needs at least one estimate");
  if (estimates.size() != stds.size())
    throw std::invalid_argument("estimates and stds must have equal length");
  double inv_sum = 0.0;
  double weighted = 0.0;
  for (Eigen::Index k = 0; k < estimates.size(); ++k) {
    if (!(stds[k] > 0.0) || !std::isfinite(stds[k]))
      throw std::invalid_argument("fusion stds must be positive and finite");
    const double inv = 1.0 / (stds[k] * stds[k]);
    inv_sum += inv;
    weighted += estimates[k] * inv;
  }
  FuseResult res;
  res.gamma = 1.0 / inv_sum;
  // One contributor passes through untouched; avoids a pointless rounding trip.
  res.fused = estimates.size() == 1 ? estimates[0] : res.gamma * weighted;
  return res;
}

MultiResult run_multi(const EpisodeSpec& base, int agents) {
  if (agents < 1) throw std::invalid_argument("need at least one agent");
  std::vector<int> indices(agents);
  std::iota(indices.begin(), indices.end(), 0);
  return run_multi_indexed(base, indices);
}

MultiResult run_multi_indexed(const EpisodeSpec& base,
                              const std::vector<int>& agent_indices) {
  const std::size_t K = agent_indices.size();
  if (K == 0) throw std::invalid_argument("need at least one agent");

  std::vector<EpisodeSpec> specs(K, base);
  std::vector<AgentStreams> streams;
  std::vector<AgentState> states;
  std::vector<FailureMonitor> monitors(K);
  streams.reserve(K);
  states.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    specs[k].agent_index = agent_indices[k];
    specs[k].model_outputs = 2;  // fusion weights come from the learned head
    Rng init_rng = make_init_stream(base.master_seed, agent_indices[k]);
    streams.push_back(make_agent_streams(base.master_seed, agent_indices[k]));
    states.push_back(make_agent(specs[k], init_rng, streams.back().policy));
  }

  MultiResult result;
  result.per_agent.resize(K);
  result.fused.reserve(base.sawtooth.horizon);
  for (int t = 0; t < base.sawtooth.horizon; ++t) {
    const double x = target_phase(base.sawtooth, t);
    FusionRecord frec;
    frec.t = t;
    frec.x_true = x;
    std::vector<double> est, sig;
    for (std::size_t k = 0; k < K; ++k) {
      const StepRecord rec = agent_step(states[k], t, x, specs[k], streams[k]);
      monitors[k].record(rec.plan_ok && rec.update_ok);
      result.per_agent[k].push_back(rec);
      const bool usable = std::isfinite(rec.x_hat) && rec.belief_std > 0.0 &&
                          std::isfinite(rec.belief_std);
      frec.per_agent.push_back({rec.x_hat, rec.belief_std,
                                usable && rec.plan_ok && rec.update_ok});
      if (usable) {
        est.push_back(rec.x_hat);
        sig.push_back(rec.belief_std);
      }
    }
    if (est.empty()) {
      frec.fused = std::numeric_limits<double>::quiet_NaN();
      frec.gamma = std::numeric_limits<double>::quiet_NaN();
    } else {
      const FuseResult fr = fuse(Eigen::Map<const RVector>(est.data(), est.size()),
                                 Eigen::Map<const RVector>(sig.data(), sig.size()));
      frec.fused = fr.fused;
      frec.gamma = fr.gamma;
    }
    result.fused.push_back(std::move(frec));
  }
  return result;
}

}  // namespace vqsense
