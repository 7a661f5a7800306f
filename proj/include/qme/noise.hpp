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

#ifndef QME_NOISE_HPP_
#define QME_NOISE_HPP_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace qme {

/*
 * Deterministic source of standard normal and uniform deviates.
 *
 * Each (seed, stream) pair owns an independent Mersenne Twister whose state is
 * expanded from both words through std::seed_seq, so trajectory i of an
 * ensemble always sees the same deviates no matter how the ensemble is
 * scheduled across threads.
 */
class NoiseSource {
public:
  NoiseSource(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x51ed2705u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double normal() { return normal_(engine_); }

  Eigen::Vector2d normal2() {
    const double a = normal();
    const double b = normal();
    return {a, b};
  }

  // Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace qme

#endif // QME_NOISE_HPP_
