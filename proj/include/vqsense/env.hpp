// The world the agent cannot see into: the scheduled phase trajectory and the
// noisy physical execution of a step. Noise lives only here; the planning
// code never receives a NoiseSpec.

#pragma once

#include "vqsense/sim_core.hpp"

namespace vqsense {

struct SawtoothConfig {
  double period = 15.0;  // seconds
  double t0 = 0.0;       // time offset, same units as t * dt
  int horizon = 100;     // steps
  double dt = 1.0;       // seconds per step
};

// Scheduled phase at step t: 2 pi times the fractional part of
// (t dt - t0) / period. Always in [0, 2 pi).
double target_phase(const SawtoothConfig& cfg, int t);

struct NoiseSpec {
  enum class Kind { kNone, kParamGauss, kBitFlip };
  Kind kind = Kind::kNone;
  double std = 0.0;  // gaussian perturbation of every probe angle
  double p = 0.0;    // per-qubit flip probability after each ansatz layer
};

// One physical shot: prepare the (possibly perturbed) probe, imprint the true
// phase, rotate into the measurement basis and sample. Noise draws come from
// noise_rng and the measurement draw from meas_rng, so sweeps over noise
// levels stay comparable shot by shot.
Observation true_execute(const Action& action, double x, const NoiseSpec& noise,
                         Rng& noise_rng, Rng& meas_rng,
                         MeasurementAxis axis = MeasurementAxis::kY);

}  // namespace vqsense
