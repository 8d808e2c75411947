// Monte-Carlo estimate of the information a single shot carries about the
// phase, and its exact gradient with respect to the action. Phase samples are
// drawn from the current belief; the same frozen samples back the estimate,
// the gradient and the planner's one ascent step (common random numbers).

#pragma once

#include <vector>

#include "vqsense/sim_core.hpp"
#include "vqsense/world_model.hpp"

namespace vqsense {

struct PlannerConfig {
  int mc_samples = 64;
  double action_lr = 0.2;
  double shift = kPi / 2;  // two-term shift-rule offset; pi/2 is exact here
  MeasurementAxis axis = MeasurementAxis::kY;
};

// Everything estimate_mi computed, kept so callers can reuse the sample set.
struct MIEstimate {
  double value = 0.0;               // nats
  std::vector<double> samples;      // phase draws x_1..x_M
  std::vector<OutcomeDistribution> per_sample;
  OutcomeDistribution mixture;      // entrywise mean of per_sample
};

// Entropy in nats with the 0 log 0 = 0 convention.
double shannon_entropy(const RVector& probs);

// Plug-in estimate H(mixture) - mean_i H(p_i) over a frozen sample set.
// Nonnegative by concavity; roundoff-negative values are clamped to zero.
MIEstimate estimate_mi_at(const std::vector<double>& samples, const Action& action,
                          MeasurementAxis axis = MeasurementAxis::kY);

// Draws mc_samples phases from the belief, then scores them.
MIEstimate estimate_mi(const Belief& belief, const Action& action,
                       const PlannerConfig& cfg, Rng& rng);

// Exact gradient of the frozen-sample estimate. Probabilities below 1e-15 are
// clamped inside the logarithms only. Throws NumericalError if any entry
// comes out non-finite.
RVector mi_gradient(const std::vector<double>& samples, const Action& action,
                    const PlannerConfig& cfg);

struct PlanResult {
  Action action;        // prev + action_lr * gradient, or prev on failure
  MIEstimate estimate;  // scored at prev on the same frozen samples
  bool ok = true;
};

// One gradient-ascent step on the estimated information gain, warm-started
// from the previous action. No projection; the angles are periodic.
PlanResult plan_action(const Action& prev, const Belief& belief,
                       const PlannerConfig& cfg, Rng& rng);

}  // namespace vqsense
