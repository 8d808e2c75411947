// Statevector simulator for the sensing pipeline: permutation-symmetric
// probe preparation, the collective phase channel (Rz(x) on every qubit),
// local measurement rotations, sampling, and exact parameter-shift
// derivatives of the outcome probabilities.

#pragma once

#include <vector>

#include "vqsense/rng.hpp"
#include "vqsense/types.hpp"

namespace vqsense {

StateVector zero_state(int n);

Eigen::Matrix2cd rz_matrix(double angle);
Eigen::Matrix2cd ry_matrix(double angle);
// Rz(alpha) Ry(beta) Rz(gamma); the gamma rotation acts first.
Eigen::Matrix2cd euler_gate(double alpha, double beta, double gamma);

void apply_single_qubit(StateVector& state, int qubit, const Eigen::Matrix2cd& u);
void apply_pauli_x(StateVector& state, int qubit);
// Two-qubit coupling exp(-i (phi/2) Z Z) on the pair (q1, q2); diagonal, the
// amplitude phase depends on whether the two bits agree.
void apply_zz(StateVector& state, int q1, int q2, double phi);

// One ansatz layer: the shared Euler rotation on every qubit, then the shared
// ZZ coupling on ring pairs (0,1), (1,2), ..., (n-1,0). A single qubit has no
// distinct successive pair, so n == 1 skips the coupling.
void apply_ansatz_layer(StateVector& state, const Eigen::Vector4d& layer_angles);

// |0...0> run through every ansatz layer.
StateVector prepare_probe(const ProbeParams& theta, int n);

// Collective phase imprint Rz(x) on every qubit; diagonal, so the basis
// amplitude at index b picks up exp(-i x (n - 2 popcount(b)) / 2).
StateVector apply_channel(StateVector state, double x);

// Rotate each qubit by the local measurement angle (Ry by default, Rz for the
// inert z-axis variant) and read out computational-basis probabilities.
OutcomeDistribution outcome_distribution(const StateVector& state,
                                         const MeasurementParams& mu,
                                         MeasurementAxis axis = MeasurementAxis::kY);

// Convenience composition prepare -> channel -> measure used all over the
// planner and the tests.
OutcomeDistribution pipeline_distribution(double x, const Action& action,
                                          MeasurementAxis axis = MeasurementAxis::kY);

// One categorical draw from the distribution, returned as bits in qubit order.
Observation sample_observation(const OutcomeDistribution& dist, Rng& rng);

// Exact derivative of the pipeline probabilities with respect to every action
// coordinate via the two-term shift rule. Each probe angle is shared by n
// gates, so its column is the sum over gate occurrences of
// (P(occurrence + pi/2) - P(occurrence - pi/2)) / 2; measurement angles occur
// once and shift directly. Columns follow Action::flatten order.
ShiftJacobian shift_jacobian(double x, const Action& action, int n,
                             MeasurementAxis axis = MeasurementAxis::kY,
                             double shift = kPi / 2);

// Batched variant sharing the shifted probe preparations across many channel
// phases; bit-identical to calling shift_jacobian per phase.
std::vector<ShiftJacobian> shift_jacobians(const std::vector<double>& xs,
                                           const Action& action, int n,
                                           MeasurementAxis axis = MeasurementAxis::kY,
                                           double shift = kPi / 2);

}  // namespace vqsense
