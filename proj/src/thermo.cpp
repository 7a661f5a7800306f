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

#include "qme/thermo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qme/single_shot.hpp"

namespace qme {

void ClassicalConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("classical: k must be finite and > 0");
  }
  if (!(kbt >= 0.0) || !std::isfinite(kbt)) {
    throw std::invalid_argument("classical: kbt must be finite and >= 0");
  }
}

std::vector<double> classical_cycle(const ClassicalConfig& config, NoiseSource& noise) {
  config.validate();
  const double sd = std::sqrt(config.kbt / config.k);
  std::vector<double> work(config.n_samples);
  for (auto& w : work) {
    const double x = sd * noise.normal();
    w = 0.5 * config.k * x * x;
  }
  return work;
}

double binary_p0(double nbar, double r0) {
  if (!(nbar >= 0.0) || !(r0 >= 0.0)) {
    throw std::domain_error("binary_p0: nbar and r0 must be >= 0");
  }
  return std::exp(-r0 * r0 / (4.0 * (1.0 + nbar)));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("binary_entropy: p must lie in [0, 1]");
  }
  if (p == 0.0 || p == 1.0) {
    return 0.0;
  }
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double binary_erasure_cost(double p0, double demon_kbtd) { return demon_kbtd * binary_entropy(p0); }

double binary_thermo_efficiency(double nbar, double r0, double demon_kbtd) {
  const double work = binary_average_work(nbar, r0);
  const double cost = binary_erasure_cost(binary_p0(nbar, r0), demon_kbtd);
  return (work - cost) / full_average_work(nbar);
}

double gaussian_entropy(double variance) {
  if (!(variance > 0.0)) {
    throw std::domain_error("gaussian_entropy: variance must be > 0");
  }
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
}

double continuous_memory_entropy(const Eigen::Vector2d& readout_variances, double delta) {
  if (!(delta > 0.0)) {
    throw std::domain_error("continuous_memory_entropy: delta must be > 0");
  }
  return gaussian_entropy(readout_variances(0)) + gaussian_entropy(readout_variances(1)) - std::log(delta * delta);
}

Eigen::Vector2d readout_variances(const MeasurementChannelsd& channels, double dt) {
  if (!(dt > 0.0)) {
    throw std::domain_error("readout_variances: dt must be > 0");
  }
  return {channels.tau1() / dt, channels.tau2() / dt};
}

double continuous_thermo_efficiency(double mean_work, double entropy, double demon_kbtd, double energy_input) {
  return (mean_work - demon_kbtd * entropy) / energy_input;
}

} // namespace qme
