// Online regression model of the unknown phase: a fully connected ReLU net
// trained one Adam step per time step on the most recent transition. One
// output head predicts the mean; an optional second head carries the log
// variance used for fusion weights.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vqsense/rng.hpp"
#include "vqsense/types.hpp"

namespace vqsense {

// Flattened previous transition fed to the net: observed bits recoded to
// -1/+1, then the revealed phase, then the executed action. All zeros before
// the first step.
using ModelInput = RVector;

inline constexpr int kHiddenWidth = 256;
inline constexpr int kHiddenLayers = 3;
inline constexpr double kStdFloor = 1e-3;
inline constexpr double kStdCeil = 10.0;

struct NetParams {
  std::vector<RMatrix> weights;  // weights[l] maps layer l to layer l+1
  std::vector<RVector> biases;

  Eigen::Index input_dim() const { return weights.front().cols(); }
  Eigen::Index output_dim() const { return weights.back().rows(); }

  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases. dims lists
  // every layer width including input and output.
  static NetParams glorot(const std::vector<int>& dims, Rng& rng);
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 0.001;
};

struct AdamState {
  std::vector<RMatrix> m_w, v_w;
  std::vector<RVector> m_b, v_b;
  long step = 0;
  AdamConfig cfg;

  static AdamState zeros_like(const NetParams& net, const AdamConfig& cfg);
};

struct Belief {
  double mean = 0.0;
  double std = 0.0;
};

enum class LossKind { kSquared, kGaussianNll };

RVector forward(const NetParams& net, const ModelInput& input);

// Belief over the phase. Single-output nets report the provided fixed_std;
// two-output nets read std = exp(0.5 * out1) clamped to [kStdFloor, kStdCeil].
Belief predict(const NetParams& net, const ModelInput& input,
               std::optional<double> fixed_std = std::nullopt);

// Loss and full parameter gradient; exposed so the finite-difference tests
// can probe backprop directly.
struct LossGrad {
  double loss = 0.0;
  std::vector<RMatrix> d_w;
  std::vector<RVector> d_b;
};
LossGrad loss_gradient(const NetParams& net, const ModelInput& input,
                       double target, LossKind kind);

// One bias-corrected Adam step on the chosen loss. Returns the pre-step loss.
// A non-finite loss or gradient throws NumericalError and leaves both the
// parameters and the optimizer state untouched.
double online_update(NetParams& net, AdamState& adam, const ModelInput& input,
                     double target, LossKind kind);

// M independent gaussian draws from the belief.
std::vector<double> sample_belief(const Belief& belief, int count, Rng& rng);

// Checkpointing of net plus optimizer state as JSON (shape header plus flat
// row-major coefficient arrays); round-trips bit exactly.
void save_checkpoint(const std::string& path, const NetParams& net,
                     const AdamState& adam);
std::pair<NetParams, AdamState> load_checkpoint(const std::string& path);

}  // namespace vqsense
