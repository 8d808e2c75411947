// The closed loop: predict the phase from the previous transition, pick the
// next action (information-gain ascent or the random baseline), take one shot
// per probe, then learn from the revealed phase with a single optimizer step.

#pragma once

#include <optional>
#include <vector>

#include "vqsense/env.hpp"
#include "vqsense/info_gain.hpp"

namespace vqsense {

struct StepRecord {
  int t = 0;
  Action action;            // executed this step
  Observation observation;  // n_qubits * probes bits
  double x_true = 0.0;
  double x_hat = 0.0;      // belief mean used for planning, fixed before the shot
  double belief_std = 0.0;
  double mi_value = 0.0;   // nats, scored at the executed/previous action
  double loss = 0.0;       // pre-step model loss; NaN when the update failed
  bool plan_ok = true;
  bool update_ok = true;
};

struct AgentState {
  NetParams net;
  AdamState adam;
  Action last_action;
  std::optional<StepRecord> last_record;
};

// Everything one episode needs, independent of how the files/CLI spell it.
struct EpisodeSpec {
  int n_qubits = 6;
  int layers = 2;
  SawtoothConfig sawtooth;  // horizon lives here
  Policy policy = Policy::kAdaptive;
  NoiseSpec noise;
  PlannerConfig planner;
  double model_lr = 0.001;
  double fixed_std = 0.25;  // belief std for single-output nets
  int probes = 1;           // shots per step, all with the same action
  int model_outputs = 1;    // 1 mean-only, 2 mean plus log variance
  std::uint64_t master_seed = 1;
  int agent_index = 0;      // offsets the derived streams, one block per agent
};

// Independent streams per agent: action/planning draws, preparation noise,
// measurement sampling. Weight initialization takes a fourth stream.
struct AgentStreams {
  Rng policy;
  Rng noise;
  Rng meas;
};

AgentStreams make_agent_streams(std::uint64_t master, int agent_index);

// Stream feeding the net's weight initialization, separate from the three
// above so identical nets can be re-created without replaying an episode.
Rng make_init_stream(std::uint64_t master, int agent_index);

// Fresh net (Glorot), zeroed optimizer, uniform initial action.
AgentState make_agent(const EpisodeSpec& spec, Rng& init_rng, Rng& policy_rng);

// Previous transition flattened for the net; all zeros when there is none.
ModelInput build_model_input(const std::optional<StepRecord>& last, int n_bits,
                             Eigen::Index action_dim);

// One pass through predict -> act -> shoot -> reveal -> update. Failures in
// planning or in the update are flagged on the record and leave the
// corresponding state untouched.
StepRecord agent_step(AgentState& state, int t, double x_true,
                      const EpisodeSpec& spec, AgentStreams& streams);

// Aborts a run after more than `limit` consecutive failed steps.
struct FailureMonitor {
  int limit = 10;
  int consecutive = 0;
  void record(bool ok) {
    consecutive = ok ? 0 : consecutive + 1;
    if (consecutive > limit)
      throw NumericalError("aborting: more than 10 consecutive failed steps");
  }
};

std::vector<StepRecord> run_episode(const EpisodeSpec& spec);

// |((x - x_hat + pi) mod 2pi) - pi|, the circle distance between the two.
double wrapped_abs_error(double x, double x_hat);

}  // namespace vqsense
