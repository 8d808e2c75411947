#include "vqsense/info_gain.hpp"

#include <cmath>

namespace vqsense {

namespace {

constexpr double kLogClamp = 1e-15;

// Entrywise 1 + ln(max(p, clamp)); the entropy gradient kernel.
RVector entropy_grad_kernel(const RVector& p) {
  RVector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    out[i] = 1.0 + std::log(std::max(p[i], kLogClamp));
  return out;
}

}  // namespace

double shannon_entropy(const RVector& probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

MIEstimate estimate_mi_at(const std::vector<double>& samples, const Action& action,
                          MeasurementAxis axis) {
  if (samples.empty())
    throw std::invalid_argument("information estimate needs at least one sample");
  const int n = static_cast<int>(action.mu.angles.size());

  MIEstimate est;
  est.samples = samples;
  est.per_sample.reserve(samples.size());
  RVector mix = RVector::Zero(Eigen::Index(1) << n);
  double mean_entropy = 0.0;
  for (const double x : samples) {
    OutcomeDistribution dist = pipeline_distribution(x, action, axis);
    mix += dist.probs;
    mean_entropy += shannon_entropy(dist.probs);
    est.per_sample.push_back(std::move(dist));
  }
  const double m = static_cast<double>(samples.size());
  mix /= m;
  mean_entropy /= m;
  est.mixture.n = n;
  est.mixture.probs = mix;
  est.value = std::max(0.0, shannon_entropy(mix) - mean_entropy);
  return est;
}

MIEstimate estimate_mi(const Belief& belief, const Action& action,
                       const PlannerConfig& cfg, Rng& rng) {
  return estimate_mi_at(sample_belief(belief, cfg.mc_samples, rng), action, cfg.axis);
}

RVector mi_gradient(const std::vector<double>& samples, const Action& action,
                    const PlannerConfig& cfg) {
  if (samples.empty())
    throw std::invalid_argument("information gradient needs at least one sample");
  const int n = static_cast<int>(action.mu.angles.size());
  const double m = static_cast<double>(samples.size());

  const std::vector<ShiftJacobian> jacs =
      shift_jacobians(samples, action, n, cfg.axis, cfg.shift);

  // d I / d a = -J_bar' u(p_bar) + (1/M) sum_i J_i' u(p_i), u(p) = 1 + ln p.
  // Fixed accumulation order keeps results bit-identical run to run.
  RVector mix = RVector::Zero(Eigen::Index(1) << n);
  RMatrix jac_mean = RMatrix::Zero(jacs.front().d.rows(), jacs.front().d.cols());
  RVector grad = RVector::Zero(action.dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RVector p = pipeline_distribution(samples[i], action, cfg.axis).probs;
    mix += p;
    jac_mean += jacs[i].d;
    grad += jacs[i].d.transpose() * entropy_grad_kernel(p);
  }
  mix /= m;
  jac_mean /= m;
  grad /= m;
  grad -= jac_mean.transpose() * entropy_grad_kernel(mix);

  if (!grad.allFinite())
    throw NumericalError("non-finite information-gain gradient");
  return grad;
}

PlanResult plan_action(const Action& prev, const Belief& belief,
                       const PlannerConfig& cfg, Rng& rng) {
  const std::vector<double> samples = sample_belief(belief, cfg.mc_samples, rng);
  PlanResult res;
  res.estimate = estimate_mi_at(samples, prev, cfg.axis);
  res.action = prev;
  try {
    const RVector step = cfg.action_lr * mi_gradient(samples, prev, cfg);
    const RVector next = prev.flatten() + step;
    if (!next.allFinite()) throw NumericalError("non-finite planned action");
    res.action = Action::unflatten(next, prev.theta.layers,
                                   static_cast<int>(prev.mu.angles.size()));
    res.ok = true;
  } catch (const NumericalError&) {
    res.action = prev;
    res.ok = false;
  }
  return res;
}

}  // namespace vqsense
