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

#ifndef QME_SINGLE_SHOT_HPP_
#define QME_SINGLE_SHOT_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qme/noise.hpp"

namespace qme {

// Outcome alpha = r e^{i theta} of a coherent-state-basis measurement.
struct CoherentOutcome {
  double r = 0.0;
  double theta = 0.0; // [0, 2 pi)
};

struct Rectified {
  double r = 0.0;
  double wait_time = 0.0; // free evolution that rotates the outcome onto the +x axis, units 1/w
};

struct CycleResult {
  double work = 0.0; // units hbar w
  double wait_time = 0.0;
  CoherentOutcome outcome;
};

/*
 * Draws a measurement outcome on a thermal state with nbar quanta from the
 * Husimi Q distribution P_Q(r) = exp(-r^2 / (1 + nbar)) / (pi (1 + nbar)).
 * The radial marginal makes r^2 exponential with mean 1 + nbar; it is sampled
 * by inverting its CDF. theta is uniform.
 */
CoherentOutcome sample_outcome(double nbar, NoiseSource& noise);

Rectified rectify(const CoherentOutcome& outcome);

// Full feedback: shift the trap onto |r>, W = r^2.
double extract_work_full(double r);

// Binary feedback: shift by r0 if r >= r0/2, W = 2 r r0 - r0^2, else nothing.
double extract_work_binary(double r, double r0);

enum class FeedbackKind { kFull, kBinary };

// Thermalize, measure, rectify and extract once.
CycleResult run_cycle(double nbar, NoiseSource& noise, FeedbackKind kind = FeedbackKind::kFull, double r0 = 1.0);

std::vector<CycleResult> run_cycles(double nbar, std::size_t n, std::uint64_t seed,
                                    FeedbackKind kind = FeedbackKind::kFull, double r0 = 1.0);

// <W'> = r0 sqrt(pi (1 + nbar)) erfc(r0 / (2 sqrt(1 + nbar))).
double binary_average_work(double nbar, double r0);

// eta' = <W'> / (1 + nbar).
double binary_efficiency(double nbar, double r0);

// eta' as a function of u = r0 / sqrt(1 + nbar) alone: sqrt(pi) u erfc(u / 2).
double binary_efficiency_reduced(double u);

struct BinaryOptimum {
  double u = 0.0;
  double efficiency = 0.0;
};

// Dense grid search of binary_efficiency_reduced over [0, u_max].
BinaryOptimum maximize_binary_efficiency(double u_max = 5.0, double step = 1e-3);

// Average work of full feedback, 1 + nbar.
double full_average_work(double nbar);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of the mean quanta <r^2> after the measurement (n + 1 exactly).
MeanEstimate added_quantum_check(double nbar, std::size_t n_samples, std::uint64_t seed);

} // namespace qme

#endif // QME_SINGLE_SHOT_HPP_
