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

#include "qme/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "qme/dynamics.hpp"
#include "qme/parallel.hpp"

namespace qme {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_symmetric(const MeasurementChannelsd& channels, const char* who) {
  if (!channels.symmetric()) {
    throw UnsupportedConfiguration(std::string(who) + ": requires tau1 == tau2 (nu is defined only in normal form)");
  }
}

double interpolate(const std::vector<double>& ys, double dt, double time) {
  if (ys.empty()) {
    return kNaN;
  }
  const double pos = std::clamp(time / dt, 0.0, static_cast<double>(ys.size() - 1));
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, ys.size() - 1);
  return ys[lo] + (pos - static_cast<double>(lo)) * (ys[hi] - ys[lo]);
}

// Step indices for the grid times; t_final of the returned config is the last grid time.
std::vector<std::size_t> grid_steps(EngineConfig& config, const std::vector<double>& t_grid) {
  if (t_grid.empty()) {
    throw std::invalid_argument("time grid is empty");
  }
  const double dt = config.step();
  config.t_final = *std::max_element(t_grid.begin(), t_grid.end());
  std::vector<std::size_t> steps;
  steps.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto k = static_cast<std::size_t>(std::llround(t / dt));
    if (!(t > 0.0) || k == 0) {
      throw std::invalid_argument("time grid points must be >= dt");
    }
    steps.push_back(k);
  }
  return steps;
}

// Grid indices j grouped by their step number steps[j].
std::vector<std::vector<std::size_t>> index_by_step(const std::vector<std::size_t>& steps) {
  std::vector<std::vector<std::size_t>> at_step(*std::max_element(steps.begin(), steps.end()) + 1);
  for (std::size_t j = 0; j < steps.size(); ++j) {
    at_step[steps[j]].push_back(j);
  }
  return at_step;
}

// values[j][i]: observable at grid point j on trajectory i.
template <typename Observable>
std::vector<std::vector<double>> sample_on_grid(const EngineConfig& config, const std::vector<std::size_t>& steps,
                                                Observable&& observable, unsigned threads) {
  config.validate();
  const GaussianStated initial = thermal_state(config.nbar);
  const auto at_step = index_by_step(steps);
  std::vector<std::vector<double>> values(steps.size(), std::vector<double>(config.n_traj, 0.0));
  parallel_for(
      config.n_traj,
      [&](std::size_t i) {
        NoiseSource noise(config.seed, i);
        simulate(config, initial, noise, [&](const StepView& v) {
          if (v.index < at_step.size()) {
            for (std::size_t j : at_step[v.index]) {
              values[j][i] = observable(v);
            }
          }
        });
      },
      threads);
  return values;
}

Series summarize(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& values) {
  Series s;
  s.t = t_grid;
  for (const auto& column : values) {
    const SampleMoments m = sample_moments(column);
    s.mean.push_back(m.mean);
    s.std_error.push_back(m.std_error);
  }
  return s;
}

} // namespace

double SigmaSchedule::sigma_at(double time) const { return interpolate(sigma, dt, time); }

double SigmaSchedule::nu_at(double time) const { return interpolate(nu, dt, time); }

SigmaSchedule sigma_schedule(double nbar, const MeasurementChannelsd& channels, double dt, double t_final) {
  require_symmetric(channels, "sigma_schedule");
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw std::invalid_argument("sigma_schedule: dt must be > 0 and t_final >= 0");
  }
  SigmaSchedule s;
  s.dt = dt;
  s.tau = channels.tau1();
  const auto n = static_cast<std::size_t>(std::llround(t_final / dt));
  GaussianStated state = thermal_state(nbar);
  s.t.reserve(n + 1);
  s.nu.reserve(n + 1);
  s.sigma.reserve(n + 1);
  s.t.push_back(0.0);
  s.nu.push_back(state.nu());
  s.sigma.push_back(0.0);
  CompensatedSum acc;
  for (std::size_t k = 1; k <= n; ++k) {
    // Integrate sigma with the same midpoint stage as the covariance.
    const Eigen::Matrix2d half = state.cov + (dt / 2.0) * covariance_rate(state.cov, channels);
    const double nu_half = half(0, 0) / 2.0;
    acc.add(dt * nu_half * nu_half);
    state = covariance_step(state, channels, dt);
    const double nu = state.nu();
    s.t.push_back(static_cast<double>(k) * dt);
    s.nu.push_back(nu);
    s.sigma.push_back(acc.value());
  }
  return s;
}

double riccati_q3(double q3_initial, double tau, double t) {
  if (!(q3_initial >= 1.0)) {
    throw std::domain_error("riccati_q3: q3(0) must be >= 1");
  }
  if (q3_initial == 1.0) {
    return 1.0;
  }
  const double c = 2.0 * tau * std::atanh(1.0 / q3_initial);
  return 1.0 / std::tanh((t + c) / (2.0 * tau));
}

double riccati_sigma(double q3_initial, double tau, double t) {
  return t / 4.0 + (tau / 2.0) * (q3_initial - riccati_q3(q3_initial, tau, t));
}

double WorkDistribution::pdf(double w) const {
  if (degenerate()) {
    throw DegenerateDistribution("work distribution is a point mass at W = 0 (sigma = 0)");
  }
  if (w < 0.0) {
    return 0.0;
  }
  const double rate = tau / sigma;
  return rate * std::exp(-rate * w);
}

double WorkDistribution::cdf(double w) const {
  if (w < 0.0) {
    return 0.0;
  }
  if (degenerate()) {
    return 1.0;
  }
  return -std::expm1(-tau * w / sigma);
}

double exact_work_pdf(double w, double t, double tau, const SigmaSchedule& schedule) {
  return WorkDistribution{schedule.sigma_at(t), tau}.pdf(w);
}

WorkStatistics run_ensemble(const EngineConfig& config, unsigned threads) {
  config.validate();
  WorkStatistics out;
  out.n_traj = config.n_traj;
  out.t = static_cast<double>(config.steps()) * config.step();
  out.work.assign(config.n_traj, 0.0);
  out.ledger.assign(config.n_traj, 0.0);
  const GaussianStated initial = thermal_state(config.nbar);
  parallel_for(
      config.n_traj,
      [&](std::size_t i) {
        NoiseSource noise(config.seed, i);
        double extracted = 0.0;
        double ledger = 0.0;
        simulate(config, initial, noise, [&](const StepView& v) {
          extracted = v.extracted_total;
          ledger = v.ledger_total;
        });
        out.work[i] = config.policy == Policy::kNone ? ledger : extracted;
        out.ledger[i] = ledger;
      },
      threads);
  const SampleMoments m = sample_moments(out.work);
  out.mean = m.mean;
  out.variance = m.variance;
  out.std_error = m.std_error;
  const SampleMoments l = sample_moments(out.ledger);
  out.ledger_mean = l.mean;
  out.ledger_std_error = l.std_error;
  out.histogram = make_histogram(out.work);
  return out;
}

Series mean_work_curve(const EngineConfig& config, const std::vector<double>& t_grid, unsigned threads) {
  EngineConfig c = config;
  c.policy = Policy::kNone;
  const auto steps = grid_steps(c, t_grid);
  const auto values =
      sample_on_grid(c, steps, [](const StepView& v) { return 0.5 * v.state->mean.squaredNorm(); }, threads);
  Series s = summarize(t_grid, values);
  const MeasurementChannelsd channels = c.channels();
  if (channels.symmetric()) {
    const SigmaSchedule schedule = sigma_schedule(c.nbar, channels, c.step(), c.t_final);
    for (double t : t_grid) {
      s.analytic.push_back(schedule.sigma_at(t) / schedule.tau);
    }
  } else {
    s.analytic.assign(t_grid.size(), kNaN);
  }
  return s;
}

Series ledger_curve(const EngineConfig& config, const std::vector<double>& t_grid, unsigned threads) {
  EngineConfig c = config;
  c.policy = Policy::kNone;
  const auto steps = grid_steps(c, t_grid);
  const auto values = sample_on_grid(c, steps, [](const StepView& v) { return v.ledger_total; }, threads);
  Series s = summarize(t_grid, values);
  const MeasurementChannelsd channels = c.channels();
  if (channels.symmetric()) {
    const SigmaSchedule schedule = sigma_schedule(c.nbar, channels, c.step(), c.t_final);
    for (double t : t_grid) {
      s.analytic.push_back(schedule.sigma_at(t) / schedule.tau);
    }
  } else {
    s.analytic.assign(t_grid.size(), kNaN);
  }
  return s;
}

Series power_series(const EngineConfig& config, const std::vector<double>& t_grid, bool monte_carlo, double window,
                    unsigned threads) {
  EngineConfig c = config;
  c.policy = Policy::kPerStep;
  const MeasurementChannelsd channels = c.channels();
  require_symmetric(channels, "power_series");
  const double dt = c.step();
  const double horizon = *std::max_element(t_grid.begin(), t_grid.end());

  Series s;
  s.t = t_grid;
  const SigmaSchedule schedule = sigma_schedule(c.nbar, channels, dt, horizon + window);
  for (double t : t_grid) {
    const double nu = schedule.nu_at(t);
    s.analytic.push_back(nu * nu / schedule.tau);
  }
  if (!monte_carlo) {
    return s;
  }
  if (!(window >= dt)) {
    throw std::invalid_argument("power_series: window must be >= dt");
  }

  // Window edges as step indices; k = 0 is the start where the cumulative work is zero.
  std::vector<std::size_t> lo(t_grid.size());
  std::vector<std::size_t> hi(t_grid.size());
  std::size_t last = 1;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const double a = std::max(0.0, t_grid[j] - window / 2.0);
    const double b = std::max(a + dt, t_grid[j] + window / 2.0);
    lo[j] = static_cast<std::size_t>(std::llround(a / dt));
    hi[j] = std::max(lo[j] + 1, static_cast<std::size_t>(std::llround(b / dt)));
    last = std::max(last, hi[j]);
  }
  c.t_final = static_cast<double>(last) * dt;
  c.validate();
  const GaussianStated initial = thermal_state(c.nbar);
  const auto lo_at = index_by_step(lo);
  const auto hi_at = index_by_step(hi);
  std::vector<std::vector<double>> values(t_grid.size(), std::vector<double>(c.n_traj, 0.0));
  parallel_for(
      c.n_traj,
      [&](std::size_t i) {
        NoiseSource noise(c.seed, i);
        std::vector<double> at_lo(t_grid.size(), 0.0);
        simulate(c, initial, noise, [&](const StepView& v) {
          if (v.index < lo_at.size()) {
            for (std::size_t j : lo_at[v.index]) {
              at_lo[j] = v.extracted_total;
            }
          }
          if (v.index < hi_at.size()) {
            for (std::size_t j : hi_at[v.index]) {
              values[j][i] = (v.extracted_total - at_lo[j]) / (static_cast<double>(hi[j] - lo[j]) * dt);
            }
          }
        });
      },
      threads);
  const Series mc = summarize(t_grid, values);
  s.mean = mc.mean;
  s.std_error = mc.std_error;
  return s;
}

EfficiencySeries efficiency_series(const EngineConfig& config, const std::vector<double>& t_grid, unsigned threads) {
  EngineConfig c = config;
  c.policy = Policy::kPerStep;
  const auto steps = grid_steps(c, t_grid);
  const auto work = sample_on_grid(c, steps, [](const StepView& v) { return v.extracted_total; }, threads);

  // The covariance is noise-independent, so the variance energy is the same on every path.
  const MeasurementChannelsd channels = c.channels();
  std::vector<double> variance_energy(steps.size());
  {
    const std::size_t last = *std::max_element(steps.begin(), steps.end());
    std::vector<double> by_step(last + 1);
    GaussianStated state = thermal_state(c.nbar);
    by_step[0] = state.variance_energy();
    for (std::size_t k = 1; k <= last; ++k) {
      state = covariance_step(state, channels, c.step());
      by_step[k] = state.variance_energy();
    }
    for (std::size_t j = 0; j < steps.size(); ++j) {
      variance_energy[j] = by_step[steps[j]];
    }
  }

  EfficiencySeries out;
  out.tau_ratio = c.tau2 / c.tau1;
  out.t = t_grid;
  constexpr std::size_t kBatches = 100;
  for (std::size_t j = 0; j < steps.size(); ++j) {
    const std::vector<double>& w = work[j];
    const double mean_w = compensated_sum(w) / static_cast<double>(w.size());
    const double mean_q = mean_w + variance_energy[j];
    out.mean_work.push_back(mean_w);
    out.mean_energy.push_back(mean_q);
    out.eta.push_back(mean_w / mean_q);

    // Batch means of the ratio estimator.
    const std::size_t n = w.size();
    if (n / kBatches >= 10) {
      const std::size_t per = n / kBatches;
      std::vector<double> etas(kBatches);
      for (std::size_t b = 0; b < kBatches; ++b) {
        const std::size_t begin = b * per;
        const std::size_t end = b + 1 == kBatches ? n : begin + per;
        const double bw =
            compensated_sum(std::span<const double>(w).subspan(begin, end - begin)) / static_cast<double>(end - begin);
        etas[b] = bw / (bw + variance_energy[j]);
      }
      const SampleMoments m = sample_moments(etas, 0);
      out.std_error.push_back(std::sqrt(m.variance / static_cast<double>(kBatches)));
    } else {
      // Delta method with a deterministic denominator offset.
      const SampleMoments m = sample_moments(w, 0);
      const double d = variance_energy[j] / (mean_q * mean_q);
      out.std_error.push_back(std::abs(d) * m.std_error);
    }
  }
  return out;
}

std::vector<double> rescaled_step_work(const EngineConfig& config, double t_start, unsigned threads) {
  EngineConfig c = config;
  c.policy = Policy::kPerStep;
  c.validate();
  const MeasurementChannelsd channels = c.channels();
  require_symmetric(channels, "rescaled_step_work");
  const double dt = c.step();
  const double tau = channels.tau1();
  const std::size_t n = c.steps();
  const auto first = static_cast<std::size_t>(std::llround(t_start / dt)) + 1;
  if (first > n) {
    throw std::invalid_argument("rescaled_step_work: t_start beyond t_final");
  }
  const std::size_t per_traj = n - first + 1;
  std::vector<double> out(per_traj * c.n_traj);
  const GaussianStated initial = thermal_state(c.nbar);
  parallel_for(
      c.n_traj,
      [&](std::size_t i) {
        NoiseSource noise(c.seed, i);
        // The reset work of step k is set by the covariance at the start of that step.
        double nu_start = initial.nu();
        simulate(c, initial, noise, [&](const StepView& v) {
          if (v.index >= first) {
            out[i * per_traj + (v.index - first)] = v.extracted / (nu_start * nu_start * dt / tau);
          }
          nu_start = v.state->nu();
        });
      },
      threads);
  return out;
}

} // namespace qme
