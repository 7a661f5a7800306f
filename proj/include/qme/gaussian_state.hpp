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

#ifndef QME_GAUSSIAN_STATE_HPP_
#define QME_GAUSSIAN_STATE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qme/errors.hpp"

namespace qme {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/*
 * Gaussian state of the oscillator in dimensionless units (x -> sqrt(m w / hbar) x,
 * p -> p / sqrt(hbar m w), t -> w t). Energies are in units of hbar w.
 *
 * `mean` holds (q1, q2) = (<x>, <p>). `cov` holds the doubled symmetrized
 * covariance
 *
 *     [ q3  q4 ]     q3 = 2 var(x)
 *     [ q4  q5 ]     q4 = <xp + px> - 2 <x><p>,   q5 = 2 var(p)
 *
 * so the vacuum is the identity and the uncertainty relation reads det(cov) >= 1.
 */
template <typename Scalar> struct GaussianState {
  Vector2<Scalar> mean = Vector2<Scalar>::Zero();
  Matrix2<Scalar> cov = Matrix2<Scalar>::Identity();

  static GaussianState from_q(Scalar q1, Scalar q2, Scalar q3, Scalar q4, Scalar q5) {
    GaussianState s;
    s.mean << q1, q2;
    s.cov << q3, q4, q4, q5;
    return s;
  }

  Scalar q1() const { return mean(0); }
  Scalar q2() const { return mean(1); }
  Scalar q3() const { return cov(0, 0); }
  Scalar q4() const { return cov(0, 1); }
  Scalar q5() const { return cov(1, 1); }

  // q3 q5 - q4^2; >= 1 for any physical state.
  Scalar uncertainty_product() const { return cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0); }

  // Symplectic eigenvalue in normal form, nu = q3 / 2 (vacuum: 1/2).
  Scalar nu() const { return cov(0, 0) / Scalar(2); }

  bool in_normal_form(Scalar tol) const {
    using std::abs;
    return abs(cov(0, 0) - cov(1, 1)) <= tol && abs(cov(0, 1)) <= tol;
  }

  // Energy above the zero point: (q1^2 + q2^2)/2 + (q3 + q5)/4 - 1/2.
  Scalar excess_energy() const { return mean.squaredNorm() / Scalar(2) + variance_energy(); }

  // Part of the excess energy stored in the variances; a trap shift cannot extract it.
  Scalar variance_energy() const { return (cov(0, 0) + cov(1, 1)) / Scalar(4) - Scalar(1) / Scalar(2); }
};

using GaussianStated = GaussianState<double>;

// Thermal state with nbar mean quanta: zero means, cov = 2 (nbar + 1/2) I.
template <typename Scalar = double> GaussianState<Scalar> thermal_state(Scalar nbar) {
  if (!(nbar >= Scalar(0)) || !std::isfinite(static_cast<double>(nbar))) {
    throw std::domain_error("thermal_state: nbar must be finite and >= 0, got " +
                            std::to_string(static_cast<double>(nbar)));
  }
  GaussianState<Scalar> s;
  s.cov = Matrix2<Scalar>::Identity() * (Scalar(2) * nbar + Scalar(1));
  return s;
}

/*
 * Characteristic measurement times of the position (tau1) and momentum (tau2)
 * channels. A channel with tau at or above kUnmeasured is switched off: its
 * 1/(2 tau) factors are exactly zero.
 */
template <typename Scalar> class MeasurementChannels {
public:
  static constexpr double kUnmeasured = 1e12;

  MeasurementChannels(Scalar tau1, Scalar tau2) : tau_(tau1, tau2) {
    if (!(tau1 > Scalar(0)) || !(tau2 > Scalar(0))) {
      throw std::domain_error("MeasurementChannels: tau1 and tau2 must be > 0");
    }
  }

  static MeasurementChannels symmetric(Scalar tau) { return MeasurementChannels(tau, tau); }

  Scalar tau1() const { return tau_(0); }
  Scalar tau2() const { return tau_(1); }
  Scalar tau(int channel) const { return tau_(channel); }

  bool measured(int channel) const { return static_cast<double>(tau_(channel)) < kUnmeasured; }
  bool symmetric() const { return tau_(0) == tau_(1); }

  // 1 / (2 tau_i), or 0 for a switched-off channel.
  Scalar half_rate(int channel) const {
    return measured(channel) ? Scalar(1) / (Scalar(2) * tau_(channel)) : Scalar(0);
  }

  // R = diag(1/(2 tau1), 1/(2 tau2)); the Kalman gain is cov * R.
  Matrix2<Scalar> gain_weights() const {
    Matrix2<Scalar> r = Matrix2<Scalar>::Zero();
    r(0, 0) = half_rate(0);
    r(1, 1) = half_rate(1);
    return r;
  }

  // Measurement back-action: each channel diffuses the conjugate quadrature.
  Matrix2<Scalar> back_action() const {
    Matrix2<Scalar> n = Matrix2<Scalar>::Zero();
    n(0, 0) = half_rate(1);
    n(1, 1) = half_rate(0);
    return n;
  }

  // Smallest finite measurement time, or 1 when both channels are off.
  Scalar shortest_time() const {
    Scalar t = std::numeric_limits<Scalar>::infinity();
    for (int i = 0; i < 2; ++i) {
      if (measured(i)) {
        t = std::min(t, tau_(i));
      }
    }
    return std::isfinite(static_cast<double>(t)) ? t : Scalar(1);
  }

private:
  Vector2<Scalar> tau_;
};

using MeasurementChannelsd = MeasurementChannels<double>;

} // namespace qme

#endif // QME_GAUSSIAN_STATE_HPP_
