// Inverse-variance combination of several agents' phase estimates, and the
// multi-agent runner that steps K independent agents against the same target
// and fuses their beliefs once per step.

#pragma once

#include "vqsense/agent.hpp"

namespace vqsense {

struct FuseResult {
  double fused = 0.0;
  double gamma = 0.0;  // (sum_k 1/sigma_k^2)^-1; gamma/sigma_k^2 are the weights
};

// fused = gamma * sum_k estimates[k] / stds[k]^2. Throws on any
// nonpositive or non-finite std.
FuseResult fuse(const RVector& estimates, const RVector& stds);

struct FusionRecord {
  int t = 0;
  double x_true = 0.0;
  struct PerAgent {
    double x_hat = 0.0;
    double sigma = 0.0;
    bool ok = true;  // step unflagged and the estimate usable for fusion
  };
  std::vector<PerAgent> per_agent;
  double fused = 0.0;
  double gamma = 0.0;
};

struct MultiResult {
  std::vector<FusionRecord> fused;
  std::vector<std::vector<StepRecord>> per_agent;
};

// K agents with two-output nets (learned variances), independent streams
// derived from (master seed, agent index), stepped in lockstep against the
// same target and noise model. Any agent's trajectory matches a standalone
// run_episode with the same spec and agent index bit for bit.
MultiResult run_multi(const EpisodeSpec& base, int agents);

// Same, with explicit agent indices; lets tests run degenerate setups such as
// every agent sharing one stream block.
MultiResult run_multi_indexed(const EpisodeSpec& base,
                              const std::vector<int>& agent_indices);

}  // namespace vqsense
