// Copyright 2026 The qme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QME_FEEDBACK_HPP_
#define QME_FEEDBACK_HPP_

#include <cmath>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qme/dynamics.hpp"
#include "qme/errors.hpp"
#include "qme/gaussian_state.hpp"

namespace qme {

// Coefficients of the feedback Hamiltonian H_fb = f1 x + f2 p.
template <typename Scalar> struct FeedbackAmplitudes {
  Scalar f1 = Scalar(0);
  Scalar f2 = Scalar(0);

  // Velocity H_fb adds to the means: dq1/dt += f2, dq2/dt -= f1.
  Vector2<Scalar> control() const { return {f2, -f1}; }
};

// Measurement-free rotation of the initial means, qbar(t) = exp(A t) q(0).
template <typename Scalar> struct PredictedMeans {
  Vector2<Scalar> initial = Vector2<Scalar>::Zero();

  Vector2<Scalar> at(Scalar t) const { return free_rotation<Scalar>(initial, t); }
};

/*
 * Linear feedback that cancels the innovation relative to the predicted means:
 *
 *   f2 = -(q3 / 2 tau1)(r1 - qbar1) - (q4 / 2 tau2)(r2 - qbar2)
 *   f1 =  (q4 / 2 tau1)(r1 - qbar1) + (q5 / 2 tau2)(r2 - qbar2)
 *
 * `predicted` is qbar evaluated at the current step.
 */
template <typename Scalar>
FeedbackAmplitudes<Scalar> feedback_amplitudes(const GaussianState<Scalar>& state,
                                               const ReadoutSample<Scalar>& readout,
                                               const Vector2<Scalar>& predicted,
                                               const MeasurementChannels<Scalar>& channels) {
  const Vector2<Scalar> gain = state.cov * channels.gain_weights() * (readout.r - predicted);
  return {gain(1), -gain(0)};
}

/*
 * Work increment q1 dq1 + q2 dq2 in Stratonovich form: the midpoint of the means
 * times the innovation part of their change. Only the measurement-driven
 * displacement enters; the harmonic drift does no work on (q1^2 + q2^2)/2.
 */
template <typename Scalar>
Scalar work_increment_stratonovich(const GaussianState<Scalar>& prev, const GaussianState<Scalar>& next,
                                   const ReadoutSample<Scalar>& readout,
                                   const MeasurementChannels<Scalar>& channels, Scalar dt) {
  const Vector2<Scalar> kick = dt * innovation_velocity(prev, channels, readout);
  const Vector2<Scalar> midpoint = (prev.mean + next.mean) / Scalar(2);
  return midpoint.dot(kick);
}

// Tolerance on |q3 - q5| and |q4| for the Ito ledger's normal-form precondition.
inline constexpr double kNormalFormTolerance = 1e-9;

/*
 * Ito form of the same increment, defined for tau1 = tau2 = tau in normal
 * form: dW = (nu^2 / tau) dt + (q1 q3 / 2 sqrt(tau)) dW1 + (q2 q5 / 2 sqrt(tau)) dW2.
 */
template <typename Scalar>
Scalar work_increment_ito(const GaussianState<Scalar>& state, const ReadoutSample<Scalar>& readout,
                          const MeasurementChannels<Scalar>& channels, Scalar dt) {
  if (!channels.symmetric()) {
    throw UnsupportedConfiguration("work_increment_ito: requires tau1 == tau2");
  }
  const Scalar scale = std::max(Scalar(1), std::abs(state.q3()));
  if (!state.in_normal_form(Scalar(kNormalFormTolerance) * scale)) {
    throw UnsupportedConfiguration("work_increment_ito: covariance is not in normal form");
  }
  // half_rate = 1/(2 tau), so nu^2 / tau = 2 nu^2 half_rate and 1/(2 sqrt(tau)) = sqrt(half_rate / 2).
  const Scalar half_rate = channels.half_rate(0);
  const Scalar nu = state.nu();
  const Scalar noise_gain = std::sqrt(half_rate / Scalar(2));
  const Vector2<Scalar> dw = readout.wiener_increments();
  return Scalar(2) * nu * nu * half_rate * dt +
         noise_gain * (state.q1() * state.q3() * dw(0) + state.q2() * state.q5() * dw(1));
}

// Drift part of the Ito increment, nu^2 dt / tau.
template <typename Scalar>
Scalar ito_drift(const GaussianState<Scalar>& state, const MeasurementChannels<Scalar>& channels, Scalar dt) {
  const Scalar nu = state.nu();
  return Scalar(2) * nu * nu * channels.half_rate(0) * dt;
}

template <typename Scalar> struct ResetResult {
  GaussianState<Scalar> state;
  Scalar extracted = Scalar(0);
};

// Sudden trap shift onto the current means: extracts (q1^2 + q2^2)/2, keeps the covariance.
template <typename Scalar> ResetResult<Scalar> apply_reset(const GaussianState<Scalar>& state) {
  ResetResult<Scalar> out{state, state.mean.squaredNorm() / Scalar(2)};
  out.state.mean.setZero();
  return out;
}

enum class Scheme { kStratonovich, kIto };

std::string_view to_string(Scheme scheme);

// Per-step work increments along one trajectory and their running sum.
struct WorkLedger {
  Scheme scheme = Scheme::kStratonovich;
  std::vector<double> increments;
  std::vector<double> cumulative;

  void push(double increment) {
    increments.push_back(increment);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + increment);
  }

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

} // namespace qme

#endif // QME_FEEDBACK_HPP_
