#include "vqsense/env.hpp"

#include <cmath>

namespace vqsense {

double target_phase(const SawtoothConfig& cfg, int t) {
  if (!(cfg.period > 0.0)) throw std::invalid_argument("sawtooth period must be positive");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("step duration must be positive");
  if (t < 0 || t > cfg.horizon)
    throw std::invalid_argument("step index outside [0, horizon]");
  const double u = (double(t) * cfg.dt - cfg.t0) / cfg.period;
  double frac = u - std::floor(u);
  if (frac >= 1.0) frac = 0.0;  // guards the rounding edge just below integers
  return kTwoPi * frac;
}

Observation true_execute(const Action& action, double x, const NoiseSpec& noise,
                         Rng& noise_rng, Rng& meas_rng, MeasurementAxis axis) {
  const int n = static_cast<int>(action.mu.angles.size());
  StateVector state;
  switch (noise.kind) {
    case NoiseSpec::Kind::kNone:
      state = prepare_probe(action.theta, n);
      break;
    case NoiseSpec::Kind::kParamGauss: {
      if (noise.std < 0.0) throw std::invalid_argument("noise std must be nonnegative");
      ProbeParams jittered = action.theta;
      for (Eigen::Index i = 0; i < jittered.angles.size(); ++i)
        jittered.angles[i] += noise.std * gaussian(noise_rng);
      state = prepare_probe(jittered, n);
      break;
    }
    case NoiseSpec::Kind::kBitFlip: {
      if (noise.p < 0.0 || noise.p > 1.0)
        throw std::invalid_argument("flip probability must be in [0, 1]");
      if (action.theta.layers < 1 || action.theta.angles.size() != 4L * action.theta.layers)
        throw std::invalid_argument("probe angle vector must hold 4 angles per layer");
      state = zero_state(n);
      for (int layer = 0; layer < action.theta.layers; ++layer) {
        apply_ansatz_layer(state, action.theta.angles.segment<4>(4L * layer));
        // Draw per qubit even when p rules the flip out, so trajectories stay
        // aligned across different p values.
        for (int q = 0; q < n; ++q)
          if (uniform01(noise_rng) < noise.p) apply_pauli_x(state, q);
      }
      break;
    }
  }
  state = apply_channel(std::move(state), x);
  return sample_observation(outcome_distribution(state, action.mu, axis), meas_rng);
}

}  // namespace vqsense
