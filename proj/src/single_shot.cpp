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

#include "qme/single_shot.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qme/estimators.hpp"

namespace qme {

namespace {

void check_nbar(double nbar) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
    throw std::domain_error("nbar must be finite and >= 0");
  }
}

void check_r0(double r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) {
    throw std::domain_error("r0 must be finite and > 0");
  }
}

} // namespace

CoherentOutcome sample_outcome(double nbar, NoiseSource& noise) {
  check_nbar(nbar);
  // 1 - U lies in (0, 1], so the logarithm is finite.
  const double r2 = -(1.0 + nbar) * std::log1p(-noise.uniform());
  const double theta = 2.0 * std::numbers::pi * noise.uniform();
  return {std::sqrt(r2), theta};
}

Rectified rectify(const CoherentOutcome& outcome) { return {outcome.r, outcome.theta}; }

double extract_work_full(double r) {
  if (!(r >= 0.0)) {
    throw std::domain_error("extract_work_full: r must be >= 0");
  }
  return r * r;
}

double extract_work_binary(double r, double r0) {
  check_r0(r0);
  if (!(r >= 0.0)) {
    throw std::domain_error("extract_work_binary: r must be >= 0");
  }
  if (r < r0 / 2.0) {
    return 0.0;
  }
  return 2.0 * r * r0 - r0 * r0;
}

CycleResult run_cycle(double nbar, NoiseSource& noise, FeedbackKind kind, double r0) {
  const CoherentOutcome outcome = sample_outcome(nbar, noise);
  const Rectified aligned = rectify(outcome);
  CycleResult out;
  out.outcome = outcome;
  out.wait_time = aligned.wait_time;
  out.work = kind == FeedbackKind::kFull ? extract_work_full(aligned.r) : extract_work_binary(aligned.r, r0);
  return out;
}

std::vector<CycleResult> run_cycles(double nbar, std::size_t n, std::uint64_t seed, FeedbackKind kind, double r0) {
  check_nbar(nbar);
  if (kind == FeedbackKind::kBinary) {
    check_r0(r0);
  }
  NoiseSource noise(seed, 0);
  std::vector<CycleResult> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(run_cycle(nbar, noise, kind, r0));
  }
  return out;
}

double binary_average_work(double nbar, double r0) {
  check_nbar(nbar);
  check_r0(r0);
  const double s = 1.0 + nbar;
  return r0 * std::sqrt(std::numbers::pi * s) * std::erfc(r0 / (2.0 * std::sqrt(s)));
}

double binary_efficiency(double nbar, double r0) { return binary_average_work(nbar, r0) / (1.0 + nbar); }

double binary_efficiency_reduced(double u) { return std::sqrt(std::numbers::pi) * u * std::erfc(u / 2.0); }

BinaryOptimum maximize_binary_efficiency(double u_max, double step) {
  if (!(step > 0.0) || !(u_max > 0.0)) {
    throw std::domain_error("maximize_binary_efficiency: u_max and step must be > 0");
  }
  BinaryOptimum best;
  const auto n = static_cast<std::size_t>(std::floor(u_max / step + 0.5));
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) * step;
    const double eta = binary_efficiency_reduced(u);
    if (eta > best.efficiency) {
      best = {u, eta};
    }
  }
  // Parabolic refinement through the grid maximum and its neighbours.
  if (best.u >= step && best.u + step <= u_max) {
    const double lo = binary_efficiency_reduced(best.u - step);
    const double hi = binary_efficiency_reduced(best.u + step);
    const double curvature = hi - 2.0 * best.efficiency + lo;
    if (curvature < 0.0) {
      const double u = best.u - 0.5 * step * (hi - lo) / curvature;
      const double eta = binary_efficiency_reduced(u);
      if (eta > best.efficiency) {
        best = {u, eta};
      }
    }
  }
  return best;
}

double full_average_work(double nbar) {
  check_nbar(nbar);
  return 1.0 + nbar;
}

MeanEstimate added_quantum_check(double nbar, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1000) {
    throw std::invalid_argument("added_quantum_check: needs at least 1000 samples");
  }
  NoiseSource noise(seed, 0);
  std::vector<double> r2(n_samples);
  for (auto& v : r2) {
    const CoherentOutcome o = sample_outcome(nbar, noise);
    v = o.r * o.r;
  }
  const SampleMoments m = sample_moments(r2);
  return {m.mean, m.std_error};
}

} // namespace qme
