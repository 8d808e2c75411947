// Shared dense types for the sensing library. Everything numeric is an Eigen
// vector or matrix over double; angles are radians throughout.

#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace vqsense {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Thrown when a computation produces non-finite values. Callers that can
// recover (the per-step agent loop) flag the step and keep previous state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MeasurementAxis { kY, kZ };
enum class Policy { kAdaptive, kRandom };

// Pure n-qubit state. Basis index b carries qubit 0 in the most significant
// of its n bits, so |q0 q1 ... q_{n-1}> lives at index sum_j q_j << (n-1-j).
struct StateVector {
  int n = 0;
  CVector amps;  // length 2^n, unit norm
};

// Shared ansatz angles, flattened layer-major as (alpha, beta, gamma, phi)
// per layer. Within a layer every qubit sees the same Euler rotation
// Rz(alpha) Ry(beta) Rz(gamma) and every ring pair the same coupling angle.
struct ProbeParams {
  int layers = 0;
  RVector angles;  // 4 * layers entries
};

// One local measurement-basis rotation angle per qubit.
struct MeasurementParams {
  RVector angles;
};

// Full controllable parameter set of a step: probe plus measurement angles.
// Flattening order is theta (layer-major) followed by mu (qubit order); the
// same order is used for gradients, model inputs and CSV columns.
struct Action {
  ProbeParams theta;
  MeasurementParams mu;

  Eigen::Index dim() const { return theta.angles.size() + mu.angles.size(); }

  RVector flatten() const {
    RVector out(dim());
    out.head(theta.angles.size()) = theta.angles;
    out.tail(mu.angles.size()) = mu.angles;
    return out;
  }

  static Action unflatten(const RVector& flat, int layers, int n) {
    if (flat.size() != 4L * layers + n)
      throw std::invalid_argument("action vector length does not match layers/qubits");
    Action a;
    a.theta.layers = layers;
    a.theta.angles = flat.head(4L * layers);
    a.mu.angles = flat.tail(n);
    return a;
  }
};

// Probabilities over the 2^n computational-basis outcomes after the local
// measurement rotations. Entries are clamped to be nonnegative on build.
struct OutcomeDistribution {
  int n = 0;
  RVector probs;
};

// One measurement shot: n bits in qubit order (multi-probe steps concatenate
// the shots probe by probe).
struct Observation {
  std::vector<std::uint8_t> bits;
};

// d p(s) / d a_j for the full prepare -> channel -> measure pipeline.
// Row s indexes outcomes, column j the flattened action coordinate.
struct ShiftJacobian {
  RMatrix d;
};

}  // namespace vqsense
