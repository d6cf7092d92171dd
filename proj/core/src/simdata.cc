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

#include "tsfit/simdata.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "tsfit/error.h"
#include "tsfit/gaussian.h"

namespace tsfit {
namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kInvalidConfig, what);
}

void ValidateChain(const std::vector<double>& initial, const Eigen::MatrixXd& trans,
                   const std::vector<Eigen::VectorXd>& means, const std::vector<int>& driver) {
  const auto k = static_cast<Eigen::Index>(initial.size());
  Require(k >= 1, "at least one hidden state is required");
  Require(trans.rows() == k && trans.cols() == k, "transition matrix must be n_states x n_states");
  Require(std::abs(std::accumulate(initial.begin(), initial.end(), 0.0) - 1.0) < 1e-9,
          "initial distribution must sum to 1");
  for (Eigen::Index i = 0; i < k; ++i) {
    Require(std::abs(trans.row(i).sum() - 1.0) < 1e-9,
            fmt::format("transition row {} must sum to 1", i));
    Require((trans.row(i).array() >= 0.0).all(), "transition probabilities must be >= 0");
  }
  Require(static_cast<Eigen::Index>(means.size()) == k, "one mean vector per state is required");
  Require(static_cast<Eigen::Index>(driver.size()) == k, "one driving feature per state is required");
  const auto d = means.front().size();
  for (const auto& m : means) Require(m.size() == d, "state means must share a dimension");
  for (int f : driver) Require(f >= 0 && f < d, "driving feature out of range");
}

double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Ground truth for state-driven data: the driving feature is marked at t = 0
// and at every timestep where the latent state differs from the previous one.
Eigen::MatrixXi StateChangeMask(const std::vector<int>& states, const std::vector<int>& driver,
                                int d) {
  const int t_max = static_cast<int>(states.size());
  Eigen::MatrixXi gt = Eigen::MatrixXi::Zero(d, t_max);
  for (int t = 0; t < t_max; ++t) {
    if (t == 0 || states[t] != states[t - 1]) gt(driver[states[t]], t) = 1;
  }
  return gt;
}

}  // namespace

void SpikeConfig::Validate() const {
  Require(n_samples >= 0, "n_samples must be >= 0");
  Require(t >= 2, "t must be >= 2");
  Require(d >= 1, "d must be >= 1");
  Require(narma_order >= 1, "narma_order must be >= 1");
  Require(noise_std >= 0.0, "noise_std must be >= 0");
  Require(static_cast<int>(trend.size()) == d, "trend must have one entry per feature");
  Require(spike_prob >= 0.0 && spike_prob <= 1.0, "spike_prob must be in [0, 1]");
  Require(spike_rate > 0.0, "spike_rate must be > 0");
  Require(spike_magnitude > 0.0, "spike_magnitude must be > 0");
}

std::vector<Eigen::MatrixXd> StateConfig::EmissionCovariances() const {
  std::vector<Eigen::MatrixXd> covs;
  for (int s = 0; s < n_states(); ++s) {
    Eigen::MatrixXd c = marginal_var * Eigen::MatrixXd::Identity(d(), d());
    if (s < static_cast<int>(cross_pairs.size())) {
      const auto [a, b] = cross_pairs[s];
      c(a, b) = c(b, a) = cross_cov;
    }
    covs.push_back(std::move(c));
  }
  return covs;
}

void StateConfig::Validate() const {
  Require(n_samples >= 0, "n_samples must be >= 0");
  Require(t >= 2, "t must be >= 2");
  ValidateChain(initial, trans, means, driver);
  Require(marginal_var > 0.0, "marginal_var must be > 0");
  for (const auto& [a, b] : cross_pairs) {
    Require(a >= 0 && b >= 0 && a < d() && b < d() && a != b, "invalid cross-covariance pair");
  }
  for (const auto& c : EmissionCovariances()) {
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    Require(llt.info() == Eigen::Success, "emission covariance is not positive-definite");
  }
}

void SwitchConfig::Validate() const {
  Require(n_samples >= 0, "n_samples must be >= 0");
  Require(t >= 2, "t must be >= 2");
  ValidateChain(initial, trans, means, driver);
  Require(marginal_var > 0.0, "marginal_var must be > 0");
  Require(rbf_gamma > 0.0, "rbf_gamma must be > 0");
}

std::vector<int> SampleMarkovChain(const std::vector<double>& initial,
                                   const Eigen::MatrixXd& trans, int t, SeededRng& rng) {
  const int k = static_cast<int>(initial.size());
  std::vector<int> states(t);
  std::vector<double> row(k);
  states[0] = rng.Categorical(initial.data(), k);
  for (int i = 1; i < t; ++i) {
    for (int j = 0; j < k; ++j) row[j] = trans(states[i - 1], j);
    states[i] = rng.Categorical(row.data(), k);
  }
  return states;
}

TimeSeriesDataset GenerateSpike(const SpikeConfig& cfg, const SeededRng& rng) {
  cfg.Validate();
  TimeSeriesDataset ds{"spike", cfg.d, cfg.t, {}};
  ds.samples.reserve(cfg.n_samples);
  const int l = cfg.narma_order;
  const auto& a = cfg.narma_coeffs;

  for (int n = 0; n < cfg.n_samples; ++n) {
    SeededRng srng = rng.Derive({static_cast<uint64_t>(n)});
    TimeSeriesSample s;
    s.id = n;
    s.x.resize(cfg.d, cfg.t);
    s.y = Eigen::VectorXi::Zero(cfg.t);
    s.gt = Eigen::MatrixXi::Zero(cfg.d, cfg.t);

    for (int f = 0; f < cfg.d; ++f) {
      // The recurrence starts from l zeros; those warm-up values are dropped.
      const int len = cfg.t + l;
      std::vector<double> x(len, 0.0), u(len, 0.0);
      for (int i = 0; i < len; ++i) u[i] = cfg.noise_std * srng.Normal();
      for (int i = l - 1; i + 1 < len; ++i) {
        double window = 0.0;
        for (int j = 0; j < l; ++j) window += x[i - j];
        x[i + 1] = a[0] * x[i] + a[1] * x[i] * window + a[2] * u[i - (l - 1)] * u[i] + a[3];
      }
      for (int t = 0; t < cfg.t; ++t) s.x(f, t) = x[t + l] + cfg.trend[f] * t;
    }

    for (int f = 0; f < cfg.d; ++f) {
      if (!srng.Bernoulli(cfg.spike_prob)) continue;
      const int count = std::min(srng.Poisson(cfg.spike_rate), cfg.t);
      if (count == 0) continue;
      // Distinct spike times, uniformly over [0, t).
      std::vector<int> times(cfg.t);
      std::iota(times.begin(), times.end(), 0);
      for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(srng.UniformInt(cfg.t - i));
        std::swap(times[i], times[j]);
      }
      times.resize(count);
      for (int t : times) s.x(f, t) += cfg.spike_magnitude;
      if (f == 0) {
        const int first = *std::min_element(times.begin(), times.end());
        s.y.tail(cfg.t - first).setOnes();
        (*s.gt)(0, first) = 1;
      }
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

TimeSeriesDataset GenerateState(const StateConfig& cfg, const SeededRng& rng,
                                std::vector<std::vector<int>>* hidden_states) {
  cfg.Validate();
  const int d = cfg.d();
  TimeSeriesDataset ds{"state", d, cfg.t, {}};
  std::vector<GaussianParams> emissions;
  const auto covs = cfg.EmissionCovariances();
  for (int k = 0; k < cfg.n_states(); ++k) emissions.push_back(MakeGaussian(cfg.means[k], covs[k]));
  if (hidden_states) hidden_states->clear();

  for (int n = 0; n < cfg.n_samples; ++n) {
    SeededRng srng = rng.Derive({static_cast<uint64_t>(n)});
    TimeSeriesSample s;
    s.id = n;
    s.x.resize(d, cfg.t);
    s.y.resize(cfg.t);
    const auto states = SampleMarkovChain(cfg.initial, cfg.trans, cfg.t, srng);
    for (int t = 0; t < cfg.t; ++t) {
      s.x.col(t) = SampleMvn(emissions[states[t]], srng, 1);
      const double p = Sigmoid(s.x(cfg.driver[states[t]], t));
      s.y(t) = srng.Bernoulli(p) ? 1 : 0;
    }
    s.gt = StateChangeMask(states, cfg.driver, d);
    if (hidden_states) hidden_states->push_back(states);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

TimeSeriesDataset GenerateSwitch(const SwitchConfig& cfg, const SeededRng& rng,
                                 std::vector<std::vector<int>>* hidden_states) {
  cfg.Validate();
  const int d = cfg.d();
  TimeSeriesDataset ds{"switch", d, cfg.t, {}};
  std::map<int, Eigen::MatrixXd> kernel_chol;  // by segment length
  auto chol_for = [&](int len) -> const Eigen::MatrixXd& {
    auto it = kernel_chol.find(len);
    if (it != kernel_chol.end()) return it->second;
    Eigen::MatrixXd k(len, len);
    for (int i = 0; i < len; ++i) {
      for (int j = 0; j < len; ++j) {
        const double lag = i - j;
        k(i, j) = cfg.marginal_var * std::exp(-cfg.rbf_gamma * lag * lag);
      }
    }
    return kernel_chol.emplace(len, CholeskyWithJitter(k)).first->second;
  };
  if (hidden_states) hidden_states->clear();

  for (int n = 0; n < cfg.n_samples; ++n) {
    SeededRng srng = rng.Derive({static_cast<uint64_t>(n)});
    TimeSeriesSample s;
    s.id = n;
    s.x.resize(d, cfg.t);
    s.y.resize(cfg.t);
    const auto states = SampleMarkovChain(cfg.initial, cfg.trans, cfg.t, srng);
    int start = 0;
    while (start < cfg.t) {
      int end = start + 1;
      while (end < cfg.t && states[end] == states[start]) ++end;
      const int len = end - start;
      const Eigen::MatrixXd& l = chol_for(len);
      for (int f = 0; f < d; ++f) {
        Eigen::VectorXd z(len);
        for (int i = 0; i < len; ++i) z(i) = srng.Normal();
        const Eigen::VectorXd path = l.triangularView<Eigen::Lower>() * z;
        s.x.row(f).segment(start, len) =
            (path.array() + cfg.means[states[start]](f)).transpose();
      }
      start = end;
    }
    for (int t = 0; t < cfg.t; ++t) {
      const double p = Sigmoid(s.x(cfg.driver[states[t]], t));
      s.y(t) = srng.Bernoulli(p) ? 1 : 0;
    }
    s.gt = StateChangeMask(states, cfg.driver, d);
    if (hidden_states) hidden_states->push_back(states);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace tsfit
