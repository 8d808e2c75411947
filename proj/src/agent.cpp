#include "vqsense/agent.hpp"

#include <cmath>
#include <limits>

namespace vqsense {

namespace {

// Stream ids within an agent's block of four.
enum StreamSlot { kInitSlot = 0, kPolicySlot = 1, kNoiseSlot = 2, kMeasSlot = 3 };

std::uint64_t stream_id(int agent_index, StreamSlot slot) {
  return std::uint64_t(agent_index) * 4 + slot;
}

Action draw_uniform_action(const EpisodeSpec& spec, Rng& rng) {
  Action a;
  a.theta.layers = spec.layers;
  a.theta.angles = RVector(4L * spec.layers);
  for (Eigen::Index i = 0; i < a.theta.angles.size(); ++i)
    a.theta.angles[i] = uniform_angle(rng);
  a.mu.angles = RVector(spec.n_qubits);
  for (int q = 0; q < spec.n_qubits; ++q) a.mu.angles[q] = uniform_angle(rng);
  return a;
}

void check_spec(const EpisodeSpec& spec) {
  if (spec.n_qubits < 1) throw std::invalid_argument("need at least one qubit");
  if (spec.layers < 1) throw std::invalid_argument("need at least one ansatz layer");
  if (spec.probes < 1) throw std::invalid_argument("need at least one probe");
  if (spec.model_outputs != 1 && spec.model_outputs != 2)
    throw std::invalid_argument("model must have one or two outputs");
  if (!(spec.fixed_std > 0.0)) throw std::invalid_argument("fixed_std must be positive");
  if (spec.sawtooth.horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (spec.planner.mc_samples < 1)
    throw std::invalid_argument("planner needs at least one sample");
}

}  // namespace

AgentStreams make_agent_streams(std::uint64_t master, int agent_index) {
  AgentStreams s;
  s.policy = Rng(derive_seed(master, stream_id(agent_index, kPolicySlot)));
  s.noise = Rng(derive_seed(master, stream_id(agent_index, kNoiseSlot)));
  s.meas = Rng(derive_seed(master, stream_id(agent_index, kMeasSlot)));
  return s;
}

Rng make_init_stream(std::uint64_t master, int agent_index) {
  return Rng(derive_seed(master, stream_id(agent_index, kInitSlot)));
}

AgentState make_agent(const EpisodeSpec& spec, Rng& init_rng, Rng& policy_rng) {
  check_spec(spec);
  const int n_bits = spec.n_qubits * spec.probes;
  const int action_dim = 4 * spec.layers + spec.n_qubits;
  std::vector<int> dims{n_bits + 1 + action_dim};
  for (int l = 0; l < kHiddenLayers; ++l) dims.push_back(kHiddenWidth);
  dims.push_back(spec.model_outputs);

  AgentState state;
  state.net = NetParams::glorot(dims, init_rng);
  AdamConfig adam_cfg;
  adam_cfg.lr = spec.model_lr;
  state.adam = AdamState::zeros_like(state.net, adam_cfg);
  state.last_action = draw_uniform_action(spec, policy_rng);
  return state;
}

ModelInput build_model_input(const std::optional<StepRecord>& last, int n_bits,
                             Eigen::Index action_dim) {
  ModelInput input = RVector::Zero(n_bits + 1 + action_dim);
  if (!last.has_value()) return input;
  if (static_cast<int>(last->observation.bits.size()) != n_bits)
    throw std::invalid_argument("previous observation has the wrong bit count");
  for (int i = 0; i < n_bits; ++i)
    input[i] = last->observation.bits[i] ? 1.0 : -1.0;
  input[n_bits] = last->x_true;
  input.tail(action_dim) = last->action.flatten();
  return input;
}

StepRecord agent_step(AgentState& state, int t, double x_true,
                      const EpisodeSpec& spec, AgentStreams& streams) {
  check_spec(spec);
  const int n_bits = spec.n_qubits * spec.probes;
  const Eigen::Index action_dim = state.last_action.dim();

  // (1) + (2): belief about the phase from the previous transition alone.
  const ModelInput input = build_model_input(state.last_record, n_bits, action_dim);
  const Belief belief =
      predict(state.net, input,
              spec.model_outputs == 1 ? std::optional<double>(spec.fixed_std)
                                      : std::nullopt);

  StepRecord rec;
  rec.t = t;
  rec.x_true = x_true;
  rec.x_hat = belief.mean;
  rec.belief_std = belief.std;

  // (3): choose the action before anything about x_true leaks in.
  if (spec.policy == Policy::kAdaptive) {
    const PlanResult plan = plan_action(state.last_action, belief, spec.planner,
                                        streams.policy);
    rec.plan_ok = plan.ok;
    rec.action = plan.action;
    rec.mi_value = plan.estimate.value;
  } else {
    rec.action = draw_uniform_action(spec, streams.policy);
    rec.mi_value = estimate_mi(belief, rec.action, spec.planner, streams.policy).value;
  }

  // (4): one shot per probe, all with the same action.
  rec.observation.bits.reserve(n_bits);
  for (int probe = 0; probe < spec.probes; ++probe) {
    const Observation shot = true_execute(rec.action, x_true, spec.noise,
                                          streams.noise, streams.meas,
                                          spec.planner.axis);
    rec.observation.bits.insert(rec.observation.bits.end(), shot.bits.begin(),
                                shot.bits.end());
  }

  // (5) + (6): the phase is revealed; learn from the step-(1) input.
  const LossKind kind =
      spec.model_outputs == 2 ? LossKind::kGaussianNll : LossKind::kSquared;
  try {
    rec.loss = online_update(state.net, state.adam, input, x_true, kind);
    rec.update_ok = true;
  } catch (const NumericalError&) {
    rec.loss = std::numeric_limits<double>::quiet_NaN();
    rec.update_ok = false;
  }

  state.last_action = rec.action;
  state.last_record = rec;
  return rec;
}

std::vector<StepRecord> run_episode(const EpisodeSpec& spec) {
  check_spec(spec);
  Rng init_rng = make_init_stream(spec.master_seed, spec.agent_index);
  AgentStreams streams = make_agent_streams(spec.master_seed, spec.agent_index);
  AgentState state = make_agent(spec, init_rng, streams.policy);

  std::vector<StepRecord> records;
  records.reserve(spec.sawtooth.horizon);
  FailureMonitor monitor;
  for (int t = 0; t < spec.sawtooth.horizon; ++t) {
    const double x = target_phase(spec.sawtooth, t);
    records.push_back(agent_step(state, t, x, spec, streams));
    monitor.record(records.back().plan_ok && records.back().update_ok);
  }
  return records;
}

double wrapped_abs_error(double x, double x_hat) {
  double d = std::fmod(x - x_hat + kPi, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return std::abs(d - kPi);
}

}  // namespace vqsense
