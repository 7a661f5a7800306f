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

#include "qme/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qme {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
  case Scheme::kStratonovich:
    return "stratonovich";
  case Scheme::kIto:
    return "ito";
  }
  return "?";
}

std::string_view to_string(Policy policy) {
  switch (policy) {
  case Policy::kPerStep:
    return "per-step";
  case Policy::kTerminal:
    return "terminal";
  case Policy::kNone:
    return "none";
  }
  return "?";
}

double EngineConfig::step() const {
  if (dt) {
    return *dt;
  }
  return channels().shortest_time() / 100.0;
}

std::size_t EngineConfig::steps() const {
  const auto n = static_cast<std::size_t>(std::llround(t_final / step()));
  return std::max<std::size_t>(n, 1);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

} // namespace

void EngineConfig::validate() const {
  require(std::isfinite(nbar) && nbar >= 0.0, "nbar must be finite and >= 0");
  require(tau1 > 0.0 && tau2 > 0.0, "tau1 and tau2 must be > 0");
  require(std::isfinite(t_final) && t_final > 0.0, "t-final must be finite and > 0");
  require(n_traj >= 1, "n-traj must be >= 1");
  require(std::isfinite(r0) && r0 > 0.0, "r0 must be finite and > 0");
  require(std::isfinite(demon_kbtd) && demon_kbtd >= 0.0, "demon-kbtd must be finite and >= 0");
  require(std::isfinite(delta) && delta > 0.0, "delta must be finite and > 0");
  const double limit = std::min(1.0, channels().shortest_time()) / 10.0;
  const double h = step();
  require(std::isfinite(h) && h > 0.0 && h <= limit,
          "dt must be > 0 and <= min(1, tau1, tau2) / 10 (got " + std::to_string(h) + ")");
  require(h <= t_final, "dt must not exceed t-final");
  if (scheme == Scheme::kIto && tau1 != tau2) {
    throw UnsupportedConfiguration("the ito work ledger requires tau1 == tau2");
  }
}

TrajectoryRecord run_trajectory(const EngineConfig& config, NoiseSource& noise) {
  config.validate();
  return run_trajectory(config, thermal_state(config.nbar), noise);
}

TrajectoryRecord run_trajectory(const EngineConfig& config, const GaussianStated& initial, NoiseSource& noise) {
  config.validate();
  TrajectoryRecord rec;
  rec.ledger.scheme = config.scheme;
  const std::size_t n = config.steps();
  rec.t.reserve(n);
  rec.states.reserve(n);
  rec.readouts.reserve(n);
  rec.extracted.reserve(n);
  rec.final_state = simulate(config, initial, noise, [&](const StepView& v) {
    rec.t.push_back(v.t);
    rec.states.push_back(*v.state);
    rec.readouts.push_back(*v.readout);
    rec.ledger.push(v.increment);
    rec.extracted.push_back(v.extracted);
    rec.total_extracted = v.extracted_total;
  });
  return rec;
}

} // namespace qme
