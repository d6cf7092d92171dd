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

#include "tsfit/gru.h"

#include <cmath>

#include "tsfit/error.h"

namespace tsfit {
namespace {

void FillUniform(double* data, Eigen::Index n, double bound, SeededRng& rng) {
  for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.Uniform(-bound, bound);
}

Eigen::MatrixXd SigmoidOf(const Eigen::MatrixXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

}  // namespace

GruCell::GruCell(int input, int hidden)
    : input_dim(input),
      hidden_dim(hidden),
      w_ih(Eigen::MatrixXd::Zero(3 * hidden, input)),
      w_hh(Eigen::MatrixXd::Zero(3 * hidden, hidden)),
      b_ih(Eigen::VectorXd::Zero(3 * hidden)),
      b_hh(Eigen::VectorXd::Zero(3 * hidden)) {}

void GruCell::InitUniform(SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (auto t : Tensors()) FillUniform(t.data(), static_cast<Eigen::Index>(t.size()), bound, rng);
}

void GruCell::ReinitCandidate(SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  const int h = hidden_dim;
  for (int i = 2 * h; i < 3 * h; ++i) {
    for (int j = 0; j < input_dim; ++j) w_ih(i, j) = rng.Uniform(-bound, bound);
    for (int j = 0; j < h; ++j) w_hh(i, j) = rng.Uniform(-bound, bound);
    b_ih(i) = rng.Uniform(-bound, bound);
    b_hh(i) = rng.Uniform(-bound, bound);
  }
}

void GruCell::ReinitGates(SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  const int h = hidden_dim;
  for (int i = 0; i < 2 * h; ++i) {
    for (int j = 0; j < input_dim; ++j) w_ih(i, j) = rng.Uniform(-bound, bound);
    for (int j = 0; j < h; ++j) w_hh(i, j) = rng.Uniform(-bound, bound);
    b_ih(i) = rng.Uniform(-bound, bound);
    b_hh(i) = rng.Uniform(-bound, bound);
  }
}

Eigen::MatrixXd GruCell::Step(const Eigen::MatrixXd& h, const Eigen::MatrixXd& x) const {
  const int hd = hidden_dim;
  Eigen::MatrixXd a = w_ih * x;
  a.colwise() += b_ih;
  Eigen::MatrixXd c = w_hh * h;
  c.colwise() += b_hh;
  const Eigen::MatrixXd r = SigmoidOf(a.topRows(hd) + c.topRows(hd));
  const Eigen::MatrixXd z = SigmoidOf(a.middleRows(hd, hd) + c.middleRows(hd, hd));
  const Eigen::MatrixXd n =
      (a.bottomRows(hd).array() + r.array() * c.bottomRows(hd).array()).tanh().matrix();
  return ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
}

Eigen::MatrixXd GruCell::StepShared(const Eigen::VectorXd& h, const Eigen::MatrixXd& x) const {
  const int hd = hidden_dim;
  Eigen::MatrixXd a = w_ih * x;
  a.colwise() += b_ih;
  const Eigen::VectorXd c = w_hh * h + b_hh;
  a.topRows(2 * hd).colwise() += c.head(2 * hd);
  const Eigen::MatrixXd r = SigmoidOf(a.topRows(hd));
  const Eigen::MatrixXd z = SigmoidOf(a.middleRows(hd, hd));
  const Eigen::ArrayXXd n =
      (a.bottomRows(hd).array() + r.array().colwise() * c.tail(hd).array()).tanh();
  return ((1.0 - z.array()) * n + z.array().colwise() * h.array()).matrix();
}

std::vector<std::span<double>> GruCell::Tensors() {
  return {{w_ih.data(), static_cast<size_t>(w_ih.size())},
          {w_hh.data(), static_cast<size_t>(w_hh.size())},
          {b_ih.data(), static_cast<size_t>(b_ih.size())},
          {b_hh.data(), static_cast<size_t>(b_hh.size())}};
}

std::vector<std::span<const double>> GruCell::Tensors() const {
  return {{w_ih.data(), static_cast<size_t>(w_ih.size())},
          {w_hh.data(), static_cast<size_t>(w_hh.size())},
          {b_ih.data(), static_cast<size_t>(b_ih.size())},
          {b_hh.data(), static_cast<size_t>(b_hh.size())}};
}

GruTrace GruForward(const GruCell& cell, const std::vector<Eigen::MatrixXd>& xs,
                    const Eigen::MatrixXd& h0) {
  const int hd = cell.hidden_dim;
  const auto steps = xs.size();
  GruTrace tr;
  tr.h.reserve(steps + 1);
  tr.r.reserve(steps);
  tr.z.reserve(steps);
  tr.n.reserve(steps);
  tr.hn.reserve(steps);
  tr.h.push_back(h0);
  for (size_t k = 0; k < steps; ++k) {
    const Eigen::MatrixXd& h = tr.h.back();
    Eigen::MatrixXd a = cell.w_ih * xs[k];
    a.colwise() += cell.b_ih;
    Eigen::MatrixXd c = cell.w_hh * h;
    c.colwise() += cell.b_hh;
    Eigen::MatrixXd r = SigmoidOf(a.topRows(hd) + c.topRows(hd));
    Eigen::MatrixXd z = SigmoidOf(a.middleRows(hd, hd) + c.middleRows(hd, hd));
    Eigen::MatrixXd hn = c.bottomRows(hd);
    Eigen::MatrixXd n = (a.bottomRows(hd).array() + r.array() * hn.array()).tanh().matrix();
    Eigen::MatrixXd next = ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
    tr.r.push_back(std::move(r));
    tr.z.push_back(std::move(z));
    tr.n.push_back(std::move(n));
    tr.hn.push_back(std::move(hn));
    tr.h.push_back(std::move(next));
  }
  return tr;
}

void GruBackward(const GruCell& cell, const std::vector<Eigen::MatrixXd>& xs,
                 const GruTrace& trace, const std::vector<Eigen::MatrixXd>& dh_out,
                 GruCell* grads, std::vector<Eigen::MatrixXd>* dxs) {
  const int hd = cell.hidden_dim;
  const int steps = trace.steps();
  const Eigen::Index batch = trace.h.front().cols();
  if (dxs) dxs->assign(steps, Eigen::MatrixXd());

  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(hd, batch);
  Eigen::MatrixXd da(3 * hd, batch), dc(3 * hd, batch);
  for (int k = steps - 1; k >= 0; --k) {
    if (k < static_cast<int>(dh_out.size()) && dh_out[k].size() > 0) dh += dh_out[k];
    const auto& r = trace.r[k].array();
    const auto& z = trace.z[k].array();
    const auto& n = trace.n[k].array();
    const auto& h_prev = trace.h[k].array();

    const Eigen::ArrayXXd dn_pre = dh.array() * (1.0 - z) * (1.0 - n * n);
    const Eigen::ArrayXXd dz_pre = dh.array() * (h_prev - n) * z * (1.0 - z);
    const Eigen::ArrayXXd dr_pre = dn_pre * trace.hn[k].array() * r * (1.0 - r);

    da.topRows(hd) = dr_pre.matrix();
    da.middleRows(hd, hd) = dz_pre.matrix();
    da.bottomRows(hd) = dn_pre.matrix();
    dc.topRows(hd) = dr_pre.matrix();
    dc.middleRows(hd, hd) = dz_pre.matrix();
    dc.bottomRows(hd) = (dn_pre * r).matrix();

    if (grads) {
      grads->w_ih.noalias() += da * xs[k].transpose();
      grads->w_hh.noalias() += dc * trace.h[k].transpose();
      grads->b_ih += da.rowwise().sum();
      grads->b_hh += dc.rowwise().sum();
    }
    if (dxs) (*dxs)[k].noalias() = cell.w_ih.transpose() * da;

    Eigen::MatrixXd dh_prev = (dh.array() * z).matrix();
    dh_prev.noalias() += cell.w_hh.transpose() * dc;
    dh = std::move(dh_prev);
  }
}

Adam::Adam(AdamOptions opts, const std::vector<std::span<double>>& params) : opts_(opts) {
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::Step(const std::vector<std::span<double>>& params,
                const std::vector<std::span<const double>>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw Error(ErrorKind::kDiverged, "non-finite gradient");
  const double scale = (opts_.clip_norm > 0 && norm > opts_.clip_norm) ? opts_.clip_norm / norm : 1.0;

  ++step_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < params[i].size(); ++j) {
      const double g = grads[i][j] * scale;
      m[j] = opts_.beta1 * m[j] + (1.0 - opts_.beta1) * g;
      v[j] = opts_.beta2 * v[j] + (1.0 - opts_.beta2) * g * g;
      params[i][j] -= opts_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + opts_.eps);
    }
  }
}

std::vector<double> Flatten(const std::vector<std::span<const double>>& tensors) {
  std::vector<double> flat;
  for (const auto& t : tensors) flat.insert(flat.end(), t.begin(), t.end());
  return flat;
}

void Unflatten(std::span<const double> flat, const std::vector<std::span<double>>& tensors) {
  size_t total = 0;
  for (const auto& t : tensors) total += t.size();
  if (total != flat.size()) {
    throw Error(ErrorKind::kFormat, "parameter count " + std::to_string(flat.size()) +
                                        " does not match expected " + std::to_string(total));
  }
  size_t off = 0;
  for (const auto& t : tensors) {
    std::copy(flat.begin() + off, flat.begin() + off + t.size(), t.begin());
    off += t.size();
  }
}

}  // namespace tsfit
