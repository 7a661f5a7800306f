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

#ifndef QME_TRAJECTORY_HPP_
#define QME_TRAJECTORY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qme/dynamics.hpp"
#include "qme/feedback.hpp"
#include "qme/gaussian_state.hpp"
#include "qme/noise.hpp"

namespace qme {

// When work is extracted along a continuously measured trajectory.
enum class Policy {
  kPerStep,  // reset to the origin after every measurement step
  kTerminal, // a single reset at t_final
  kNone,     // no reset; the work ledger is kept for diagnostics
};

std::string_view to_string(Policy policy);

struct EngineConfig {
  double nbar = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  std::optional<double> dt; // defaults to min(tau1, tau2) / 100
  double t_final = 1.0;
  std::size_t n_traj = 10000;
  Policy policy = Policy::kTerminal;
  Scheme scheme = Scheme::kStratonovich;
  double r0 = 1.0;
  double demon_kbtd = 0.0; // demon memory temperature, units of hbar w / k_B
  double delta = 0.01;     // detector resolution
  std::uint64_t seed = 0;
  std::string output_path = "qme-out";

  MeasurementChannelsd channels() const { return {tau1, tau2}; }
  double step() const;
  std::size_t steps() const;

  // Throws std::invalid_argument (or UnsupportedConfiguration) on out-of-domain values.
  void validate() const;
};

// Everything known about a trajectory right after the measurement of one step.
struct StepView {
  std::size_t index = 0; // 1-based
  double t = 0.0;
  const GaussianStated* state = nullptr; // before any reset of this step
  const ReadoutSample<double>* readout = nullptr;
  double increment = 0.0;       // work-ledger increment of this step
  double ledger_total = 0.0;    // running ledger sum
  double extracted = 0.0;       // work extracted by a reset at this step
  double extracted_total = 0.0; // work extracted by resets so far
};

/*
 * Integrates one trajectory from `initial` under `config` and calls
 * observe(const StepView&) after every step. Returns the final state, after
 * any reset mandated by the policy.
 */
template <typename Observer>
GaussianStated simulate(const EngineConfig& config, GaussianStated initial, NoiseSource& noise,
                        Observer&& observe) {
  const MeasurementChannelsd channels = config.channels();
  const double dt = config.step();
  const std::size_t n = config.steps();

  GaussianStated state = initial;
  double ledger = 0.0;
  double extracted_total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const ReadoutSample<double> readout = sample_readout(state, channels, dt, noise);
    const GaussianStated next = advance(state, channels, readout, dt);
    const double increment = config.scheme == Scheme::kIto
                                 ? work_increment_ito(state, readout, channels, dt)
                                 : work_increment_stratonovich(state, next, readout, channels, dt);
    ledger += increment;

    GaussianStated after = next;
    double extracted = 0.0;
    if (config.policy == Policy::kPerStep || (config.policy == Policy::kTerminal && k == n)) {
      const ResetResult<double> reset = apply_reset(next);
      after = reset.state;
      extracted = reset.extracted;
      extracted_total += extracted;
    }

    StepView view;
    view.index = k;
    view.t = static_cast<double>(k) * dt;
    view.state = &next;
    view.readout = &readout;
    view.increment = increment;
    view.ledger_total = ledger;
    view.extracted = extracted;
    view.extracted_total = extracted_total;
    observe(static_cast<const StepView&>(view));

    state = after;
  }
  return state;
}

// Time series of one trajectory. Index k holds the values after step k+1.
struct TrajectoryRecord {
  std::vector<double> t;
  std::vector<GaussianStated> states; // before the reset of that step
  std::vector<ReadoutSample<double>> readouts;
  WorkLedger ledger;
  std::vector<double> extracted; // per-step reset work
  double total_extracted = 0.0;
  GaussianStated final_state;

  std::size_t size() const { return t.size(); }
};

// Runs one trajectory from the thermal state of config.nbar.
TrajectoryRecord run_trajectory(const EngineConfig& config, NoiseSource& noise);

// Same, from an explicit initial state.
TrajectoryRecord run_trajectory(const EngineConfig& config, const GaussianStated& initial, NoiseSource& noise);

} // namespace qme

#endif // QME_TRAJECTORY_HPP_
