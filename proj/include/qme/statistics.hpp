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

#ifndef QME_STATISTICS_HPP_
#define QME_STATISTICS_HPP_

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qme/estimators.hpp"
#include "qme/gaussian_state.hpp"
#include "qme/trajectory.hpp"

namespace qme {

/*
 * Deterministic covariance flow from a thermal start in normal form and the
 * accumulated sigma(t) = int_0^t nu^2(t') dt', integrated alongside the
 * covariance with the same midpoint stage. Index k corresponds to t = k dt,
 * k = 0..N.
 */
struct SigmaSchedule {
  double dt = 0.0;
  double tau = 1.0;
  std::vector<double> t;
  std::vector<double> nu;
  std::vector<double> sigma;

  // Linear interpolation on the grid.
  double sigma_at(double time) const;
  double nu_at(double time) const;
  // sigma for a reset after every step, nu(t_k)^2 dt.
  double per_step_sigma(std::size_t k) const { return nu[k] * nu[k] * dt; }
};

// Requires tau1 == tau2: nu is only defined in normal form.
SigmaSchedule sigma_schedule(double nbar, const MeasurementChannelsd& channels, double dt, double t_final);

// Closed form for tau1 = tau2 = tau: nu(t) = coth((t + c) / (2 tau)) / 2 with coth(c / (2 tau)) = q3(0).
double riccati_q3(double q3_initial, double tau, double t);
// Its integral, sigma(t) = t/4 + (tau/2)(q3(0) - q3(t)).
double riccati_sigma(double q3_initial, double tau, double t);

// sigma = 0: all the probability sits at W = 0.
class DegenerateDistribution : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// P(W, t) = (tau / sigma) exp(-tau W / sigma), the exponential law with mean sigma / tau.
struct WorkDistribution {
  double sigma = 0.0;
  double tau = 1.0;

  bool degenerate() const { return sigma == 0.0; }
  double mean() const { return sigma / tau; }
  double pdf(double w) const;
  double cdf(double w) const;
};

double exact_work_pdf(double w, double t, double tau, const SigmaSchedule& schedule);

struct WorkStatistics {
  double t = 0.0;
  std::size_t n_traj = 0;
  std::vector<double> work;   // extracted work (ledger total for policy none), per trajectory
  std::vector<double> ledger; // work-ledger total per trajectory
  Histogram histogram;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double ledger_mean = 0.0;
  double ledger_std_error = 0.0;
};

// Trajectory i uses NoiseSource(config.seed, i) and starts from thermal_state(config.nbar).
WorkStatistics run_ensemble(const EngineConfig& config, unsigned threads = 0);

struct Series {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<double> analytic; // NaN where no closed form applies
};

// Work of a single reset at each grid time, (q1^2 + q2^2)/2 of the undisturbed path,
// against sigma(t)/tau. t_final is taken from the grid.
Series mean_work_curve(const EngineConfig& config, const std::vector<double>& t_grid, unsigned threads = 0);

// Ensemble mean of the work ledger at each grid time, for the configured scheme.
Series ledger_curve(const EngineConfig& config, const std::vector<double>& t_grid, unsigned threads = 0);

/*
 * J(t) = nu^2(t)/tau from the covariance flow in `analytic`. When
 * `monte_carlo` is set, `mean` holds the finite-difference estimate
 * (<W(t + h/2)> - <W(t - h/2)>)/h of the per-step-policy cumulative work with
 * h = window (clipped to [0, t_final]); otherwise mean/std_error are empty.
 */
Series power_series(const EngineConfig& config, const std::vector<double>& t_grid, bool monte_carlo = false,
                    double window = 1.0, unsigned threads = 0);

struct EfficiencySeries {
  double tau_ratio = 1.0; // tau2 / tau1
  std::vector<double> t;
  std::vector<double> eta;
  std::vector<double> std_error;
  std::vector<double> mean_work;
  std::vector<double> mean_energy; // <Q> = <W> + (q3 + q5)/4 - 1/2
};

// Per-step policy; eta(t) = <W(t)> / <Q(t)> (ratio of ensemble means).
EfficiencySeries efficiency_series(const EngineConfig& config, const std::vector<double>& t_grid,
                                   unsigned threads = 0);

// Per-step-policy reset works for t >= t_start, each divided by its nu^2 dt / tau.
// Requires tau1 == tau2. Unit-mean exponential in the exact model.
std::vector<double> rescaled_step_work(const EngineConfig& config, double t_start, unsigned threads = 0);

} // namespace qme

#endif // QME_STATISTICS_HPP_
