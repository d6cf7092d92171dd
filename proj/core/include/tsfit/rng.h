/*
 * Copyright 2026 The tsfit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TSFIT_RNG_H_
#define TSFIT_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tsfit {

// Splittable seeded generator. A (seed, stream) pair fully determines the
// sequence, so independent work items can each own a stream derived from
// their coordinates (sample, subset, timestep, ...) and produce the same
// numbers regardless of scheduling or worker count.
//
// Distributions come from Boost.Random rather than <random> because the
// standard leaves the normal/Poisson algorithms implementation-defined.
class SeededRng {
 public:
  SeededRng(uint64_t seed, uint64_t stream = 0);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // Child stream keyed by the given coordinates. Does not advance *this.
  SeededRng Derive(std::initializer_list<uint64_t> keys) const;

  double Uniform01();
  double Uniform(double lo, double hi);
  double Normal();
  int Poisson(double rate);
  bool Bernoulli(double p);
  // Uniform integer in [0, n).
  int64_t UniformInt(int64_t n);
  // Index drawn from a discrete distribution with the given weights.
  int Categorical(const double* weights, int n);

  std::mt19937_64& engine() { return engine_; }

 private:
  uint64_t seed_;
  uint64_t stream_;
  std::mt19937_64 engine_;
};

uint64_t SplitMix64(uint64_t x);

}  // namespace tsfit

#endif  // TSFIT_RNG_H_
