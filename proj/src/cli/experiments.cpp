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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "qme/cli.hpp"
#include "qme/estimators.hpp"
#include "qme/single_shot.hpp"
#include "qme/statistics.hpp"
#include "qme/thermo.hpp"

namespace qme::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr char kUnits[] = "units: energy in hbar*w, time in 1/w, quadratures in zero-point units (vacuum q3 = q5 = 1)";

bool within(double value, double expected, double std_error, double k = 3.0) {
  return std::abs(value - expected) <= k * std_error;
}

std::string label(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

nlohmann::json moments_json(const SampleMoments& m) {
  return {{"n", m.n}, {"mean", m.mean}, {"variance", m.variance}, {"std_error", m.std_error}};
}

nlohmann::json ks_json(const KsResult& ks) {
  return {{"statistic", ks.statistic},
          {"p_value", ks.p_value},
          {"critical_value", ks.critical_value},
          {"level", ks.level},
          {"passed", ks.passed}};
}

std::string trajectory_csv(const EngineConfig& c, const TrajectoryRecord& rec) {
  CsvWriter csv;
  csv.comment("qme continuous trajectory: stream 0 of seed " + std::to_string(c.seed));
  csv.comment(kUnits);
  csv.comment("policy " + std::string(to_string(c.policy)) + ", work ledger " + std::string(to_string(c.scheme)) +
              ", tau1 " + format_double(c.tau1) + ", tau2 " + format_double(c.tau2) + ", dt " +
              format_double(c.step()));
  csv.comment("q1,q2: means after the step, before any reset; q3,q4,q5: doubled covariance entries");
  csv.comment("r1,r2: readouts; dW: work-ledger increment; W_cum: cumulative work ledger");
  csv.header({"t", "q1", "q2", "q3", "q4", "q5", "r1", "r2", "dW", "W_cum"});
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const GaussianStated& s = rec.states[k];
    csv.row({rec.t[k], s.q1(), s.q2(), s.q3(), s.q4(), s.q5(), rec.readouts[k].r1(), rec.readouts[k].r2(),
             rec.ledger.increments[k], rec.ledger.cumulative[k]});
  }
  return csv.str();
}

void continuous(const RunConfig& config, ExperimentResult& result) {
  const EngineConfig& c = config.engine;
  const MeasurementChannelsd channels = c.channels();
  const double dt = c.step();
  const std::size_t n_steps = c.steps();
  const double t_end = static_cast<double>(n_steps) * dt;

  const WorkStatistics stats = run_ensemble(c, config.threads);
  NoiseSource noise(c.seed, 0);
  const TrajectoryRecord rec = run_trajectory(c, noise);
  const std::string traj = trajectory_csv(c, rec);
  NoiseSource again(c.seed, 0);
  result.checks["deterministic"] = trajectory_csv(c, run_trajectory(c, again)) == traj &&
                                   (c.policy == Policy::kNone ? stats.ledger[0] == rec.ledger.total()
                                                              : stats.work[0] == rec.total_extracted);
  result.files.push_back({"trajectory.csv", traj});

  {
    CsvWriter csv;
    csv.comment("qme per-trajectory work; trajectory i uses stream i of seed " + std::to_string(c.seed));
    csv.comment(kUnits);
    csv.comment("W: work extracted by resets (work ledger when policy is none); ledger: work-ledger total");
    csv.header({"trajectory", "W", "ledger"});
    for (std::size_t i = 0; i < stats.work.size(); ++i) {
      csv.row({static_cast<double>(i), stats.work[i], stats.ledger[i]});
    }
    result.files.push_back({"work.csv", csv.str()});
  }

  const SampleMoments work = sample_moments(stats.work);
  const SampleMoments ledger = sample_moments(stats.ledger);
  result.summary["work"] = moments_json(work);
  result.summary["ledger"] = moments_json(ledger);
  result.summary["t"] = t_end;

  // Closed forms exist for symmetric channels, where the state stays in normal form.
  std::optional<WorkDistribution> law;
  if (channels.symmetric()) {
    const SigmaSchedule schedule = sigma_schedule(c.nbar, channels, dt, t_end);
    double per_step = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
      per_step += schedule.per_step_sigma(k);
    }
    nlohmann::json analytic = {{"sigma", schedule.sigma.back()},
                               {"sigma_closed_form", riccati_sigma(2.0 * c.nbar + 1.0, channels.tau1(), t_end)},
                               {"nu", schedule.nu.back()},
                               {"per_step_sigma_sum", per_step}};
    switch (c.policy) {
    case Policy::kTerminal: {
      law = WorkDistribution{schedule.sigma.back(), channels.tau1()};
      analytic["mean_work"] = law->mean();
      result.checks["work_mean_within_3se"] = within(work.mean, law->mean(), work.std_error);
      if (stats.work.size() >= 100) {
        const KsResult ks = ks_compare(stats.work, [&](double w) { return law->cdf(w); });
        result.summary["ks"] = ks_json(ks);
        result.checks["work_ks_exponential"] = ks.passed;
      }
      break;
    }
    case Policy::kPerStep:
      analytic["mean_work"] = per_step / channels.tau1();
      result.checks["work_mean_within_3se"] = within(work.mean, per_step / channels.tau1(), work.std_error);
      break;
    case Policy::kNone:
      analytic["mean_ledger"] = per_step / channels.tau1();
      result.checks["ledger_mean_within_3se"] = within(ledger.mean, per_step / channels.tau1(), ledger.std_error);
      break;
    }
    result.summary["analytic"] = analytic;
  }

  {
    const Histogram h = make_histogram(stats.work);
    CsvWriter csv;
    csv.comment("qme work histogram over " + std::to_string(stats.work.size()) + " trajectories at t = " +
                format_double(t_end));
    csv.comment(kUnits);
    csv.comment("density: normalized counts; exact_pdf: exponential law (tau/sigma) exp(-tau W/sigma) at the "
                "bin center, nan where it does not apply");
    csv.header({"bin_left", "bin_right", "center", "count", "density", "exact_pdf"});
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const double exact = law && !law->degenerate() ? law->pdf(h.center(i)) : kNaN;
      csv.row({h.edges[i], h.edges[i + 1], h.center(i), static_cast<double>(h.counts[i]), h.density(i), exact});
    }
    result.files.push_back({"histogram.csv", csv.str()});
  }

  // Invariants along trajectory 0.
  const GaussianStated initial = thermal_state(c.nbar);
  double min_det = initial.uncertainty_product();
  bool normal = true;
  for (const GaussianStated& s : rec.states) {
    min_det = std::min(min_det, s.uncertainty_product());
    normal = normal && s.in_normal_form(kNormalFormTolerance * std::max(1.0, s.q3()));
  }
  result.summary["min_uncertainty_product"] = min_det;
  result.checks["uncertainty_relation"] = min_det >= 1.0 - kUncertaintyTolerance;
  if (channels.symmetric()) {
    result.checks["normal_form_preserved"] = normal;
  }
  if (c.policy != Policy::kNone) {
    result.checks["reset_covariance_invariant"] =
        rec.final_state.cov == rec.states.back().cov && rec.final_state.mean.isZero(0.0);
  }

  // Energy bookkeeping and demon memory cost.
  if (c.policy != Policy::kNone) {
    const double variance_energy = rec.states.back().variance_energy();
    const double energy_input = work.mean + variance_energy;
    const double h_step = continuous_memory_entropy(readout_variances(channels, dt), c.delta);
    const double h_total = h_step * static_cast<double>(n_steps);
    result.summary["thermo"] = {
        {"energy_input", energy_input},
        {"variance_energy", variance_energy},
        {"efficiency", work.mean / energy_input},
        {"memory_entropy_per_step", h_step},
        {"memory_entropy_total", h_total},
        {"demon_kbtd", c.demon_kbtd},
        {"thermo_efficiency", continuous_thermo_efficiency(work.mean, h_total, c.demon_kbtd, energy_input)}};
  }
}

void single_shot(const RunConfig& config, ExperimentResult& result) {
  const EngineConfig& c = config.engine;
  const auto cycles = run_cycles(c.nbar, config.n_samples, c.seed, FeedbackKind::kFull);
  CsvWriter csv;
  csv.comment("qme single-shot cycles, nbar " + format_double(c.nbar) + ", seed " + std::to_string(c.seed));
  csv.comment(kUnits);
  csv.comment("r, theta: polar outcome of the joint measurement; wait_time: rotation onto the x axis");
  csv.header({"r", "theta", "wait_time", "work"});
  std::vector<double> work(cycles.size());
  std::vector<double> r2(cycles.size());
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const auto& cy = cycles[i];
    csv.row({cy.outcome.r, cy.outcome.theta, cy.wait_time, cy.work});
    work[i] = cy.work;
    r2[i] = cy.outcome.r * cy.outcome.r;
  }
  result.files.push_back({"cycles.csv", csv.str()});

  const SampleMoments w = sample_moments(work);
  const SampleMoments r = sample_moments(r2);
  const double expected = full_average_work(c.nbar);
  result.summary["work"] = moments_json(w);
  result.summary["r_squared"] = moments_json(r);
  result.summary["analytic"] = {{"mean_work", expected}, {"mean_r_squared", c.nbar + 1.0}};
  result.checks["mean_work_within_3se"] = within(w.mean, expected, w.std_error);
  result.checks["added_quantum_within_3se"] = within(r.mean, c.nbar + 1.0, r.std_error);
}

void binary(const RunConfig& config, ExperimentResult& result) {
  const EngineConfig& c = config.engine;
  const auto cycles = run_cycles(c.nbar, config.n_samples, c.seed, FeedbackKind::kBinary, c.r0);
  CsvWriter csv;
  csv.comment("qme binary-feedback cycles, nbar " + format_double(c.nbar) + ", r0 " + format_double(c.r0) +
              ", seed " + std::to_string(c.seed));
  csv.comment(kUnits);
  csv.comment("work: 2 r r0 - r0^2 when r >= r0/2, else 0");
  csv.header({"r", "theta", "work"});
  std::vector<double> work(cycles.size());
  std::size_t fired = 0;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const auto& cy = cycles[i];
    csv.row({cy.outcome.r, cy.outcome.theta, cy.work});
    work[i] = cy.work;
    fired += cy.outcome.r >= c.r0 / 2.0 ? 1 : 0;
  }
  result.files.push_back({"cycles.csv", csv.str()});

  const SampleMoments w = sample_moments(work);
  const double n = static_cast<double>(cycles.size());
  const double p0 = binary_p0(c.nbar, c.r0);
  const double p0_mc = static_cast<double>(fired) / n;
  const double expected = binary_average_work(c.nbar, c.r0);
  const BinaryOptimum best = maximize_binary_efficiency();
  result.summary["work"] = moments_json(w);
  result.summary["p0"] = {{"monte_carlo", p0_mc}, {"analytic", p0}};
  result.summary["analytic"] = {
      {"mean_work", expected},
      {"efficiency", binary_efficiency(c.nbar, c.r0)},
      {"entropy", binary_entropy(p0)},
      {"erasure_cost", binary_erasure_cost(p0, c.demon_kbtd)},
      {"thermo_efficiency", binary_thermo_efficiency(c.nbar, c.r0, c.demon_kbtd)},
      {"optimum", {{"u", best.u}, {"r0", best.u * std::sqrt(1.0 + c.nbar)}, {"efficiency", best.efficiency}}}};
  result.checks["mean_work_within_3se"] = within(w.mean, expected, w.std_error);
  result.checks["p0_within_3se"] = within(p0_mc, p0, std::sqrt(p0 * (1.0 - p0) / n));
  result.checks["max_efficiency_in_range"] = best.efficiency >= 0.84 && best.efficiency <= 0.86;
}

void classical(const RunConfig& config, ExperimentResult& result) {
  const ClassicalConfig& cc = config.classical;
  NoiseSource noise(config.engine.seed, 0);
  const auto work = classical_cycle(cc, noise);
  CsvWriter csv;
  csv.comment("qme classical Brownian engine, k " + format_double(cc.k) + ", kbt " + format_double(cc.kbt));
  csv.comment("W = k x^2 / 2 for x drawn from the equilibrium distribution");
  csv.header({"W"});
  for (double w : work) {
    csv.row({w});
  }
  result.files.push_back({"work.csv", csv.str()});

  const SampleMoments m = sample_moments(work);
  result.summary["work"] = moments_json(m);
  result.summary["analytic"] = {{"mean_work", cc.kbt / 2.0}};
  result.checks["mean_work_within_3se"] = within(m.mean, cc.kbt / 2.0, m.std_error);

  // Zero temperature: the classical engine is idle while the quantum one still delivers hbar w.
  ClassicalConfig frozen = cc;
  frozen.kbt = 0.0;
  NoiseSource frozen_noise(config.engine.seed, 1);
  const auto zero = classical_cycle(frozen, frozen_noise);
  const bool idle = std::all_of(zero.begin(), zero.end(), [](double w) { return w == 0.0; });
  std::vector<double> quantum;
  for (const auto& cy : run_cycles(0.0, config.n_samples, config.engine.seed ^ 0x9e3779b97f4a7c15ULL)) {
    quantum.push_back(cy.work);
  }
  const SampleMoments q = sample_moments(quantum);
  result.summary["zero_temperature"] = {{"classical_mean_work", 0.0}, {"quantum", moments_json(q)}};
  result.checks["zero_at_zero_temperature"] = idle;
  result.checks["quantum_advantage_at_zero_temperature"] = q.mean - 3.0 * q.std_error > 0.0;
}

std::vector<double> uniform_grid(double t_final, std::size_t n) {
  std::vector<double> grid;
  for (std::size_t k = 1; k <= n; ++k) {
    grid.push_back(t_final * static_cast<double>(k) / static_cast<double>(n));
  }
  return grid;
}

void figure_2c(const RunConfig& config, ExperimentResult& result) {
  const EngineConfig& c = config.engine;
  const std::vector<double> marked = {0.5, 1.0, 2.5, 5.0};
  std::set<double> points;
  for (double t : uniform_grid(c.t_final, 50)) {
    points.insert(t);
  }
  for (double t : marked) {
    if (t <= c.t_final) {
      points.insert(t);
    }
  }
  const std::vector<double> grid(points.begin(), points.end());
  const Series s = mean_work_curve(c, grid, config.threads);
  CsvWriter csv;
  csv.comment("qme mean work of a single reset at time t over " + std::to_string(c.n_traj) + " trajectories");
  csv.comment(kUnits);
  csv.comment("analytic: sigma(t)/tau, nan for asymmetric channels");
  csv.header({"t", "mean", "std_error", "analytic"});
  for (std::size_t j = 0; j < grid.size(); ++j) {
    csv.row({s.t[j], s.mean[j], s.std_error[j], s.analytic[j]});
    for (double t : marked) {
      if (t == grid[j] && !std::isnan(s.analytic[j])) {
        result.checks["mean_work_within_3se_t" + label(t)] = within(s.mean[j], s.analytic[j], s.std_error[j]);
      }
    }
  }
  result.files.push_back({"mean_work.csv", csv.str()});
}

void figure_2f(const RunConfig& config, ExperimentResult& result) {
  const EngineConfig& c = config.engine;
  const double tau = c.channels().shortest_time();
  std::vector<double> grid = {0.0};
  for (double t : uniform_grid(c.t_final, 80)) {
    grid.push_back(t);
  }
  const Series p = power_series(c, grid, true, tau, config.threads);
  const SigmaSchedule schedule = sigma_schedule(c.nbar, c.channels(), c.step(), c.t_final);
  CsvWriter csv;
  csv.comment("qme power per measurement rate J*tau, per-step resets, " + std::to_string(c.n_traj) +
              " trajectories");
  csv.comment(kUnits);
  csv.comment("analytic: nu(t)^2; monte_carlo: finite difference of the mean extracted work over a window tau");
  csv.header({"t", "nu", "analytic", "monte_carlo", "std_error"});
  for (std::size_t j = 0; j < grid.size(); ++j) {
    csv.row({grid[j], schedule.nu_at(grid[j]), p.analytic[j] * tau, p.mean[j] * tau, p.std_error[j] * tau});
  }
  result.files.push_back({"power.csv", csv.str()});
  const double nu_end = schedule.nu.back();
  const double j_an = p.analytic.back() * tau;
  const double j_mc = p.mean.back() * tau;
  const double j_se = p.std_error.back() * tau;
  result.summary["steady_state"] = {
      {"t", grid.back()}, {"nu", nu_end}, {"power_tau_analytic", j_an}, {"power_tau_monte_carlo", j_mc},
      {"std_error", j_se}};
  result.checks["nu_steady_state"] = std::abs(nu_end - 0.5) < 1e-3;
  result.checks["power_steady_state_analytic"] = std::abs(j_an - 0.25) < 1e-3;
  result.checks["power_steady_state_monte_carlo_within_3se"] = within(j_mc, 0.25, j_se);
}

void figure_s2(ExperimentResult& result) {
  CsvWriter csv;
  csv.comment("qme binary-feedback efficiency <W'>/(1 + nbar) on a grid");
  csv.comment("u = r0 / sqrt(1 + nbar); p0 = exp(-u^2/4) is the probability that the feedback fires");
  csv.header({"nbar", "r0", "u", "efficiency", "p0"});
  const BinaryOptimum best = maximize_binary_efficiency();
  double grid_max = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double nbar = 0.1 * i;
    for (int k = 1; k <= 100; ++k) {
      const double r0 = 0.05 * k;
      const double eta = binary_efficiency(nbar, r0);
      grid_max = std::max(grid_max, eta);
      csv.row({nbar, r0, r0 / std::sqrt(1.0 + nbar), eta, binary_p0(nbar, r0)});
    }
  }
  result.files.push_back({"binary_efficiency.csv", csv.str()});

  CsvWriter ridge;
  ridge.comment("qme threshold that maximizes the binary-feedback efficiency, r0 = u* sqrt(1 + nbar)");
  ridge.header({"nbar", "r0", "efficiency"});
  for (int i = 0; i <= 50; ++i) {
    const double nbar = 0.1 * i;
    ridge.row({nbar, best.u * std::sqrt(1.0 + nbar), best.efficiency});
  }
  result.files.push_back({"optimum.csv", ridge.str()});
  result.summary["optimum"] = {{"u", best.u}, {"efficiency", best.efficiency}, {"grid_max", grid_max}};
  result.checks["max_efficiency_in_range"] = best.efficiency >= 0.84 && best.efficiency <= 0.86;
  result.checks["grid_bounded_by_max"] = grid_max <= best.efficiency + 1e-12;
}

void figure_s3(const RunConfig& config, ExperimentResult& result) {
  const EngineConfig& base = config.engine;
  const std::vector<double> ratios = {1.0, 0.9, 1.2};
  const std::vector<double> grid = uniform_grid(base.t_final, 100);
  std::vector<EfficiencySeries> series;
  for (double ratio : ratios) {
    EngineConfig c = base;
    c.tau2 = ratio * base.tau1;
    c.dt = base.dt ? *base.dt : base.tau1 / 100.0; // one grid for all three cases
    series.push_back(efficiency_series(c, grid, config.threads));
  }
  CsvWriter csv;
  csv.comment("qme efficiency eta = <W>/<Q> under per-step resets, " + std::to_string(base.n_traj) +
              " trajectories per case");
  csv.comment(kUnits);
  csv.comment("columns suffixed by tau2/tau1");
  std::vector<std::string> header = {"t"};
  for (double ratio : ratios) {
    header.push_back("eta_" + label(ratio));
    header.push_back("std_error_" + label(ratio));
  }
  csv.header(header);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> row = {grid[j]};
    for (const auto& s : series) {
      row.push_back(s.eta[j]);
      row.push_back(s.std_error[j]);
    }
    csv.row(row);
  }
  result.files.push_back({"efficiency.csv", csv.str()});

  nlohmann::json final_values = nlohmann::json::object();
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const auto& s = series[i];
    const double eta = s.eta.back();
    const double se = s.std_error.back();
    final_values[label(ratios[i])] = {{"eta", eta},
                                      {"std_error", se},
                                      {"mean_work", s.mean_work.back()},
                                      {"mean_energy", s.mean_energy.back()}};
    if (ratios[i] == 1.0) {
      result.checks["eta_symmetric_within_3se_of_1"] = within(eta, 1.0, se);
    } else {
      result.checks["eta_below_1_by_3se_ratio_" + label(ratios[i])] = eta < 1.0 - 3.0 * se;
    }
  }
  result.summary["final"] = final_values;
}

} // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  ExperimentResult result;
  result.summary["command"] = std::string(to_string(config.command));
  switch (config.command) {
  case Command::kSingleShot:
    single_shot(config, result);
    break;
  case Command::kBinary:
    binary(config, result);
    break;
  case Command::kContinuous:
    continuous(config, result);
    break;
  case Command::kClassical:
    classical(config, result);
    break;
  case Command::kPreset:
    result.summary["preset"] = std::string(to_string(*config.preset));
    switch (*config.preset) {
    case Preset::kFigure2b:
      continuous(config, result);
      break;
    case Preset::kFigure2c:
      figure_2c(config, result);
      break;
    case Preset::kFigure2f:
      figure_2f(config, result);
      break;
    case Preset::kFigureS2:
      figure_s2(result);
      break;
    case Preset::kFigureS3:
      figure_s3(config, result);
      break;
    }
    break;
  }
  return result;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  std::optional<RunConfig> config;
  try {
    config = parse_config(args, out);
  } catch (const UsageError& e) {
    err << "qme: usage error: " << e.what() << '\n';
    return 1;
  }
  if (!config) {
    return 0;
  }
  try {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result = run_experiment(*config);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    write_outputs(*config, result, elapsed.count());
    for (const auto& [name, ok] : result.checks) {
      out << (ok ? "PASS " : "FAIL ") << name << '\n';
    }
    out << "wrote " << result.files.size() + 2 << " files to " << config->engine.output_path << '\n';
    return result.all_passed() ? 0 : 2;
  } catch (const std::exception& e) {
    err << "qme: error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace qme::cli
