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

#include "qme/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qme {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) {
    s.add(x);
  }
  return s.value();
}

namespace {

double plain_variance(std::span<const double> xs, double mean) {
  if (xs.size() < 2) {
    return 0.0;
  }
  CompensatedSum ss;
  for (double x : xs) {
    ss.add((x - mean) * (x - mean));
  }
  return ss.value() / static_cast<double>(xs.size() - 1);
}

} // namespace

double batch_means_std_error(std::span<const double> xs, std::size_t batches) {
  const std::size_t n = xs.size();
  if (n < 2) {
    return 0.0;
  }
  if (batches < 2 || n / batches < 10) {
    const double mean = compensated_sum(xs) / static_cast<double>(n);
    return std::sqrt(plain_variance(xs, mean) / static_cast<double>(n));
  }
  const std::size_t per = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    // The last batch absorbs the remainder.
    const std::size_t begin = b * per;
    const std::size_t end = b + 1 == batches ? n : begin + per;
    means[b] = compensated_sum(xs.subspan(begin, end - begin)) / static_cast<double>(end - begin);
  }
  const double grand = compensated_sum(means) / static_cast<double>(batches);
  return std::sqrt(plain_variance(means, grand) / static_cast<double>(batches));
}

SampleMoments sample_moments(std::span<const double> xs, std::size_t batches) {
  SampleMoments m;
  m.n = xs.size();
  if (m.n == 0) {
    return m;
  }
  m.mean = compensated_sum(xs) / static_cast<double>(m.n);
  m.variance = plain_variance(xs, m.mean);
  m.std_error = batch_means_std_error(xs, batches);
  return m;
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) {
    t += c;
  }
  return t;
}

double Histogram::density(std::size_t i) const {
  const auto n = static_cast<double>(total());
  return n > 0 ? static_cast<double>(counts[i]) / (n * bin_width(i)) : 0.0;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

Histogram make_histogram(std::span<const double> xs, std::size_t bins) {
  if (xs.empty()) {
    throw std::invalid_argument("make_histogram: empty sample");
  }
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  double hi = sorted.back();
  if (hi <= lo) {
    hi = lo + 1.0;
  }
  if (bins == 0) {
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 1;
    bins = std::clamp<std::size_t>(bins, 1, 10000);
  }
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + static_cast<double>(i) * width;
  }
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double x : sorted) {
    auto i = static_cast<std::size_t>((x - lo) / width);
    h.counts[std::min(i, bins - 1)] += 1;
  }
  return h;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) {
    return 1.0;
  }
  if (lambda < 0.2) {
    // The alternating series converges slowly here and the survival is 1 to double precision.
    return 1.0;
  }
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) {
      break;
    }
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double stephens_factor(std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return rn + 0.12 + 0.11 / rn;
}

// lambda with Q(lambda) = level, by bisection.
double kolmogorov_quantile(double level) {
  double lo = 0.2;
  double hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_survival(mid) > level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

KsResult ks_compare(std::span<const double> samples, const std::function<double(double)>& cdf, double level) {
  if (samples.empty()) {
    throw std::invalid_argument("ks_compare: empty sample");
  }
  if (samples.size() < 100) {
    throw std::invalid_argument("ks_compare: needs at least 100 samples");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("ks_compare: level must lie in (0, 1)");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  KsResult out;
  out.statistic = d;
  out.level = level;
  const double factor = stephens_factor(sorted.size());
  out.p_value = kolmogorov_survival(factor * d);
  out.critical_value = kolmogorov_quantile(level) / factor;
  out.passed = d <= out.critical_value;
  return out;
}

} // namespace qme
