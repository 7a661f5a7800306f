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

#ifndef QME_ESTIMATORS_HPP_
#define QME_ESTIMATORS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qme {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

struct SampleMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0; // batch means, see batch_means_std_error
};

/*
 * Standard error of the mean from non-overlapping batch means over contiguous
 * sub-ensembles. Falls back to sqrt(var / n) when there are fewer than
 * 10 samples per batch.
 */
double batch_means_std_error(std::span<const double> xs, std::size_t batches = 100);

SampleMoments sample_moments(std::span<const double> xs, std::size_t batches = 100);

struct Histogram {
  std::vector<double> edges; // size = counts.size() + 1
  std::vector<std::size_t> counts;

  std::size_t total() const;
  double bin_width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  // Normalized so that sum(density * width) = 1.
  double density(std::size_t i) const;
};

// Freedman-Diaconis width 2 IQR n^(-1/3), or `bins` equal bins when bins > 0.
Histogram make_histogram(std::span<const double> xs, std::size_t bins = 0);

struct KsResult {
  double statistic = 0.0; // sup |F_n - F|
  double p_value = 1.0;
  double critical_value = 0.0; // at `level`
  double level = 0.01;
  bool passed = true; // statistic <= critical_value
};

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

// Two-sided one-sample KS test of `samples` against the continuous CDF `cdf`,
// with Stephens' finite-n correction. Requires at least 100 samples.
KsResult ks_compare(std::span<const double> samples, const std::function<double(double)>& cdf, double level = 0.01);

} // namespace qme

#endif // QME_ESTIMATORS_HPP_
