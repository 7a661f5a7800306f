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

#ifndef QME_DYNAMICS_HPP_
#define QME_DYNAMICS_HPP_

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "qme/errors.hpp"
#include "qme/gaussian_state.hpp"
#include "qme/noise.hpp"

namespace qme {

// Relative slack on det(cov) >= 1 before a covariance step is rejected.
inline constexpr double kUncertaintyTolerance = 1e-6;

/*
 * Readouts of one time step, r_i = q_i + sqrt(tau_i / dt) g_i. The standard
 * normal deviates g are kept so that work ledgers can rebuild the Wiener
 * increments sqrt(dt) g exactly. A switched-off channel reads back q_i.
 */
template <typename Scalar> struct ReadoutSample {
  Vector2<Scalar> r = Vector2<Scalar>::Zero();
  Vector2<Scalar> deviates = Vector2<Scalar>::Zero();
  Scalar dt = Scalar(0);

  Scalar r1() const { return r(0); }
  Scalar r2() const { return r(1); }

  Vector2<Scalar> wiener_increments() const { return deviates * std::sqrt(dt); }
};

template <typename Scalar>
ReadoutSample<Scalar> make_readout(const GaussianState<Scalar>& state,
                                   const MeasurementChannels<Scalar>& channels, Scalar dt,
                                   const Vector2<Scalar>& deviates) {
  ReadoutSample<Scalar> out;
  out.dt = dt;
  out.deviates = deviates;
  for (int i = 0; i < 2; ++i) {
    out.r(i) = state.mean(i);
    if (channels.measured(i)) {
      out.r(i) += std::sqrt(channels.tau(i) / dt) * deviates(i);
    }
  }
  return out;
}

template <typename Scalar>
ReadoutSample<Scalar> sample_readout(const GaussianState<Scalar>& state,
                                     const MeasurementChannels<Scalar>& channels, Scalar dt,
                                     NoiseSource& noise) {
  Vector2<Scalar> g;
  g(0) = Scalar(noise.normal());
  g(1) = Scalar(noise.normal());
  return make_readout(state, channels, dt, g);
}

// Generator of the free harmonic motion, dq1/dt = q2, dq2/dt = -q1.
template <typename Scalar> Matrix2<Scalar> harmonic_generator() {
  Matrix2<Scalar> a;
  a << Scalar(0), Scalar(1), Scalar(-1), Scalar(0);
  return a;
}

// exp(A t) q: the measurement-free evolution of the means.
template <typename Scalar> Vector2<Scalar> free_rotation(const Vector2<Scalar>& q, Scalar t) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(t);
  const Scalar s = sin(t);
  return {c * q(0) + s * q(1), -s * q(0) + c * q(1)};
}

// Riccati flow of the covariance: dS/dt = A S + S A^T - S R S + N.
template <typename Scalar>
Matrix2<Scalar> covariance_rate(const Matrix2<Scalar>& cov, const MeasurementChannels<Scalar>& channels) {
  const Matrix2<Scalar> a = harmonic_generator<Scalar>();
  return a * cov + cov * a.transpose() - cov * channels.gain_weights() * cov + channels.back_action();
}

/*
 * One explicit midpoint step of the covariance flow; the means are untouched.
 * Throws IntegrationError if the result violates det(cov) >= 1 by more than
 * kUncertaintyTolerance (relative), which signals a step that is too large.
 */
template <typename Scalar>
GaussianState<Scalar> covariance_step(const GaussianState<Scalar>& state,
                                      const MeasurementChannels<Scalar>& channels, Scalar dt) {
  const Matrix2<Scalar> half = state.cov + (dt / Scalar(2)) * covariance_rate(state.cov, channels);
  Matrix2<Scalar> next = state.cov + dt * covariance_rate(half, channels);
  // Keep the stored matrix exactly symmetric.
  next(1, 0) = next(0, 1);

  GaussianState<Scalar> out = state;
  out.cov = next;
  const Scalar det = out.uncertainty_product();
  const bool finite = next.allFinite();
  if (!finite || !(next(0, 0) > Scalar(0)) || !(next(1, 1) > Scalar(0)) ||
      !(det >= Scalar(1) - Scalar(kUncertaintyTolerance))) {
    std::ostringstream msg;
    msg << "covariance_step: uncertainty relation violated (q3=" << next(0, 0) << ", q4=" << next(0, 1)
        << ", q5=" << next(1, 1) << ", q3*q5-q4^2=" << det << ") with dt=" << dt;
    throw IntegrationError(msg.str());
  }
  return out;
}

// Kalman gain times innovation, S R (r - q): the measurement-driven velocity of the means.
template <typename Scalar>
Vector2<Scalar> innovation_velocity(const GaussianState<Scalar>& state,
                                    const MeasurementChannels<Scalar>& channels,
                                    const ReadoutSample<Scalar>& readout) {
  return state.cov * channels.gain_weights() * (readout.r - state.mean);
}

/*
 * Euler-Maruyama step of the means driven by the innovations (r_i - q_i).
 * The harmonic part of the drift is integrated exactly as a rotation by dt;
 * `control` is an extra deterministic velocity (a feedback Hamiltonian adds
 * (f2, -f1)). The covariance is untouched.
 */
template <typename Scalar>
GaussianState<Scalar> mean_step(const GaussianState<Scalar>& state,
                                const MeasurementChannels<Scalar>& channels,
                                const ReadoutSample<Scalar>& readout, Scalar dt,
                                const Vector2<Scalar>& control = Vector2<Scalar>::Zero()) {
  GaussianState<Scalar> out = state;
  out.mean = free_rotation<Scalar>(state.mean, dt) +
             dt * (innovation_velocity(state, channels, readout) + control);
  return out;
}

// Full conditional update for one step: means first (with the pre-step covariance), then the covariance.
template <typename Scalar>
GaussianState<Scalar> advance(const GaussianState<Scalar>& state,
                              const MeasurementChannels<Scalar>& channels,
                              const ReadoutSample<Scalar>& readout, Scalar dt,
                              const Vector2<Scalar>& control = Vector2<Scalar>::Zero()) {
  GaussianState<Scalar> next = mean_step(state, channels, readout, dt, control);
  next.cov = covariance_step(state, channels, dt).cov;
  return next;
}

} // namespace qme

#endif // QME_DYNAMICS_HPP_
