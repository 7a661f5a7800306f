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

#ifndef QME_THERMO_HPP_
#define QME_THERMO_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qme/gaussian_state.hpp"
#include "qme/noise.hpp"

namespace qme {

// Brownian particle in a harmonic trap of stiffness k at temperature kbt.
struct ClassicalConfig {
  double k = 1.0;
  double kbt = 1.0;
  std::size_t n_samples = 100000;

  void validate() const;
};

// Error-free position measurement and trap shift: x ~ N(0, kbt / k), W = k x^2 / 2.
std::vector<double> classical_cycle(const ClassicalConfig& config, NoiseSource& noise);

// Probability that the binary protocol fires, P(r >= r0 / 2) = exp(-r0^2 / (4 (1 + nbar))).
double binary_p0(double nbar, double r0);

// Shannon entropy in nats, H(0) = H(1) = 0.
double binary_entropy(double p);

// Landauer cost of erasing the one-bit demon memory, kbtd * H(p0).
double binary_erasure_cost(double p0, double demon_kbtd);

// (<W'> - kbtd H(p0)) / (1 + nbar). Not clamped; negative when erasure outweighs the work.
double binary_thermo_efficiency(double nbar, double r0, double demon_kbtd);

// Differential entropy of N(0, variance), 0.5 log(2 pi e variance).
double gaussian_entropy(double variance);

/*
 * Shannon entropy of the readout pair binned into squares of side delta:
 * differential entropy of the independent Gaussian readouts minus log(delta^2).
 */
double continuous_memory_entropy(const Eigen::Vector2d& readout_variances, double delta);

// Per-step readout variances given the state, tau_i / dt.
Eigen::Vector2d readout_variances(const MeasurementChannelsd& channels, double dt);

// (<W> - kbtd H) / Q with a caller-supplied mean work and energy input.
double continuous_thermo_efficiency(double mean_work, double entropy, double demon_kbtd, double energy_input);

} // namespace qme

#endif // QME_THERMO_HPP_
