#include "vqsense/sim_core.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

namespace vqsense {

namespace {

void check_qubit_count(int n) {
  if (n < 1 || n > 24)
    throw std::invalid_argument("qubit count must be in [1, 24]");
}

void check_probe_params(const ProbeParams& theta) {
  if (theta.layers < 1)
    throw std::invalid_argument("probe must have at least one layer");
  if (theta.angles.size() != 4L * theta.layers)
    throw std::invalid_argument("probe angle vector must hold 4 angles per layer");
  if (!theta.angles.allFinite())
    throw std::invalid_argument("probe angles must be finite");
}

Eigen::Index qubit_mask(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n)
    throw std::invalid_argument("qubit index out of range");
  return Eigen::Index(1) << (state.n - 1 - qubit);
}

// Identifies one gate occurrence of a shared probe angle: the layer, which of
// the four layer angles (0 alpha, 1 beta, 2 gamma, 3 phi), and the qubit or
// ring-pair site it acts on. Used to realise the per-occurrence shift rule.
struct ThetaShift {
  int layer = 0;
  int param = 0;
  int site = 0;
  double delta = 0.0;
};

void apply_layer_impl(StateVector& state, const Eigen::Vector4d& a,
                      int layer_index, const ThetaShift* shift) {
  const int n = state.n;
  for (int q = 0; q < n; ++q) {
    double euler[3] = {a[0], a[1], a[2]};
    if (shift && shift->layer == layer_index && shift->param < 3 && shift->site == q)
      euler[shift->param] += shift->delta;
    apply_single_qubit(state, q, euler_gate(euler[0], euler[1], euler[2]));
  }
  if (n < 2) return;
  for (int r = 0; r < n; ++r) {
    double phi = a[3];
    if (shift && shift->layer == layer_index && shift->param == 3 && shift->site == r)
      phi += shift->delta;
    apply_zz(state, r, (r + 1) % n, phi);
  }
}

StateVector prepare_probe_impl(const ProbeParams& theta, int n,
                               const ThetaShift* shift) {
  check_probe_params(theta);
  StateVector state = zero_state(n);
  for (int layer = 0; layer < theta.layers; ++layer)
    apply_layer_impl(state, theta.angles.segment<4>(4L * layer), layer, shift);
  return state;
}

void check_action(const Action& action, int n) {
  check_probe_params(action.theta);
  if (action.mu.angles.size() != n)
    throw std::invalid_argument("measurement params must hold one angle per qubit");
  if (!action.mu.angles.allFinite())
    throw std::invalid_argument("measurement angles must be finite");
}

}  // namespace

StateVector zero_state(int n) {
  check_qubit_count(n);
  StateVector state;
  state.n = n;
  state.amps = CVector::Zero(Eigen::Index(1) << n);
  state.amps[0] = Complex(1.0, 0.0);
  return state;
}

Eigen::Matrix2cd rz_matrix(double angle) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::polar(1.0, -angle / 2.0);
  m(1, 1) = std::polar(1.0, angle / 2.0);
  return m;
}

Eigen::Matrix2cd ry_matrix(double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Eigen::Matrix2cd m;
  m << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
  return m;
}

Eigen::Matrix2cd euler_gate(double alpha, double beta, double gamma) {
  return rz_matrix(alpha) * ry_matrix(beta) * rz_matrix(gamma);
}

void apply_single_qubit(StateVector& state, int qubit, const Eigen::Matrix2cd& u) {
  const Eigen::Index mask = qubit_mask(state, qubit);
  const Eigen::Index dim = state.amps.size();
  for (Eigen::Index b = 0; b < dim; ++b) {
    if (b & mask) continue;
    const Complex a0 = state.amps[b];
    const Complex a1 = state.amps[b | mask];
    state.amps[b] = u(0, 0) * a0 + u(0, 1) * a1;
    state.amps[b | mask] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

void apply_pauli_x(StateVector& state, int qubit) {
  const Eigen::Index mask = qubit_mask(state, qubit);
  const Eigen::Index dim = state.amps.size();
  for (Eigen::Index b = 0; b < dim; ++b)
    if (!(b & mask)) std::swap(state.amps[b], state.amps[b | mask]);
}

void apply_zz(StateVector& state, int q1, int q2, double phi) {
  const Eigen::Index m1 = qubit_mask(state, q1);
  const Eigen::Index m2 = qubit_mask(state, q2);
  if (q1 == q2) throw std::invalid_argument("zz coupling needs two distinct qubits");
  const Complex agree = std::polar(1.0, -phi / 2.0);
  const Complex differ = std::polar(1.0, phi / 2.0);
  const Eigen::Index dim = state.amps.size();
  for (Eigen::Index b = 0; b < dim; ++b) {
    const bool b1 = (b & m1) != 0;
    const bool b2 = (b & m2) != 0;
    state.amps[b] *= (b1 == b2) ? agree : differ;
  }
}

void apply_ansatz_layer(StateVector& state, const Eigen::Vector4d& layer_angles) {
  apply_layer_impl(state, layer_angles, 0, nullptr);
}

StateVector prepare_probe(const ProbeParams& theta, int n) {
  return prepare_probe_impl(theta, n, nullptr);
}

StateVector apply_channel(StateVector state, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("channel phase must be finite");
  const int n = state.n;
  // The phase only depends on the number of set bits, so tabulate it.
  std::vector<Complex> phase(n + 1);
  for (int k = 0; k <= n; ++k)
    phase[k] = std::polar(1.0, -x * double(n - 2 * k) / 2.0);
  const Eigen::Index dim = state.amps.size();
  for (Eigen::Index b = 0; b < dim; ++b)
    state.amps[b] *= phase[std::popcount(static_cast<std::uint64_t>(b))];
  return state;
}

OutcomeDistribution outcome_distribution(const StateVector& state,
                                         const MeasurementParams& mu,
                                         MeasurementAxis axis) {
  if (mu.angles.size() != state.n)
    throw std::invalid_argument("measurement params must hold one angle per qubit");
  if (!mu.angles.allFinite())
    throw std::invalid_argument("measurement angles must be finite");
  StateVector rotated = state;
  for (int q = 0; q < state.n; ++q) {
    const Eigen::Matrix2cd u = axis == MeasurementAxis::kY
                                   ? ry_matrix(mu.angles[q])
                                   : rz_matrix(mu.angles[q]);
    apply_single_qubit(rotated, q, u);
  }
  OutcomeDistribution dist;
  dist.n = state.n;
  dist.probs = rotated.amps.cwiseAbs2().cwiseMax(0.0);
  return dist;
}

OutcomeDistribution pipeline_distribution(double x, const Action& action,
                                          MeasurementAxis axis) {
  const int n = static_cast<int>(action.mu.angles.size());
  return outcome_distribution(apply_channel(prepare_probe(action.theta, n), x),
                              action.mu, axis);
}

Observation sample_observation(const OutcomeDistribution& dist, Rng& rng) {
  if (dist.n < 1 || dist.probs.size() != (Eigen::Index(1) << dist.n))
    throw std::invalid_argument("outcome distribution has inconsistent shape");
  const double u = uniform01(rng);
  double cum = 0.0;
  Eigen::Index pick = dist.probs.size() - 1;
  for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
    cum += std::max(dist.probs[i], 0.0);
    if (u < cum) {
      pick = i;
      break;
    }
  }
  Observation obs;
  obs.bits.resize(dist.n);
  for (int q = 0; q < dist.n; ++q)
    obs.bits[q] = static_cast<std::uint8_t>((pick >> (dist.n - 1 - q)) & 1);
  return obs;
}

ShiftJacobian shift_jacobian(double x, const Action& action, int n,
                             MeasurementAxis axis, double shift) {
  return shift_jacobians(std::vector<double>{x}, action, n, axis, shift).front();
}

std::vector<ShiftJacobian> shift_jacobians(const std::vector<double>& xs,
                                           const Action& action, int n,
                                           MeasurementAxis axis, double shift) {
  check_action(action, n);
  const int layers = action.theta.layers;
  const Eigen::Index dim_theta = 4L * layers;
  const Eigen::Index dim_a = action.dim();
  const Eigen::Index outcomes = Eigen::Index(1) << n;

  const StateVector base = prepare_probe(action.theta, n);

  // Every probe-angle occurrence contributes one pair of shifted probes; the
  // preparations do not depend on the channel phase, so build them once and
  // reuse across all requested phases.
  std::vector<int> occ_column;
  std::vector<StateVector> occ_plus, occ_minus;
  for (int layer = 0; layer < layers; ++layer) {
    for (int param = 0; param < 4; ++param) {
      if (param == 3 && n < 2) continue;  // no coupling pair on one qubit
      for (int site = 0; site < n; ++site) {
        ThetaShift plus{layer, param, site, shift};
        ThetaShift minus{layer, param, site, -shift};
        occ_column.push_back(4 * layer + param);
        occ_plus.push_back(prepare_probe_impl(action.theta, n, &plus));
        occ_minus.push_back(prepare_probe_impl(action.theta, n, &minus));
      }
    }
  }

  std::vector<ShiftJacobian> result;
  result.reserve(xs.size());
  for (const double x : xs) {
    ShiftJacobian jac;
    jac.d = RMatrix::Zero(outcomes, dim_a);
    const StateVector base_x = apply_channel(base, x);
    for (std::size_t o = 0; o < occ_column.size(); ++o) {
      const RVector p_plus =
          outcome_distribution(apply_channel(occ_plus[o], x), action.mu, axis).probs;
      const RVector p_minus =
          outcome_distribution(apply_channel(occ_minus[o], x), action.mu, axis).probs;
      jac.d.col(occ_column[o]) += (p_plus - p_minus) / 2.0;
    }
    for (int q = 0; q < n; ++q) {
      MeasurementParams mu_plus = action.mu;
      MeasurementParams mu_minus = action.mu;
      mu_plus.angles[q] += shift;
      mu_minus.angles[q] -= shift;
      const RVector p_plus = outcome_distribution(base_x, mu_plus, axis).probs;
      const RVector p_minus = outcome_distribution(base_x, mu_minus, axis).probs;
      jac.d.col(dim_theta + q) = (p_plus - p_minus) / 2.0;
    }
    result.push_back(std::move(jac));
  }
  return result;
}

}  // namespace vqsense
