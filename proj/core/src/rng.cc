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

#include "tsfit/rng.h"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace tsfit {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeededRng::SeededRng(uint64_t seed, uint64_t stream)
    : seed_(seed),
      stream_(stream),
      engine_(SplitMix64(SplitMix64(seed) ^ SplitMix64(stream + 0x632be59bd9b4e019ULL))) {}

SeededRng SeededRng::Derive(std::initializer_list<uint64_t> keys) const {
  uint64_t s = stream_;
  for (uint64_t k : keys) s = SplitMix64(s ^ SplitMix64(k + 0x2545f4914f6cdd1dULL));
  return SeededRng(seed_, s);
}

double SeededRng::Uniform01() {
  // 53 random mantissa bits; avoids engine-specific generate_canonical.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

double SeededRng::Normal() {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

int SeededRng::Poisson(double rate) {
  boost::random::poisson_distribution<int, double> dist(rate);
  return dist(engine_);
}

bool SeededRng::Bernoulli(double p) { return Uniform01() < p; }

int64_t SeededRng::UniformInt(int64_t n) {
  boost::random::uniform_int_distribution<int64_t> dist(0, n - 1);
  return dist(engine_);
}

int SeededRng::Categorical(const double* weights, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += weights[i];
  double u = Uniform01() * total;
  for (int i = 0; i < n - 1; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return n - 1;
}

}  // namespace tsfit
