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

#include "tsfit/predictor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "checkpoint_io.h"
#include "tsfit/error.h"
#include "tsfit/metrics.h"

namespace tsfit {
namespace {

// Column t of every sample in `idx`, stacked as a D x B matrix per step.
std::vector<Eigen::MatrixXd> BatchInputs(const TimeSeriesDataset& ds,
                                         std::span<const size_t> idx) {
  std::vector<Eigen::MatrixXd> xs(ds.t_max, Eigen::MatrixXd(ds.d, idx.size()));
  for (size_t b = 0; b < idx.size(); ++b) {
    const auto& x = ds.samples[idx[b]].x;
    for (int t = 0; t < ds.t_max; ++t) xs[t].col(b) = x.col(t);
  }
  return xs;
}

double BceWithLogit(double logit, int y) {
  return Softplus(logit) - (y ? logit : 0.0);
}

// Mean per-timestep BCE over the given samples, forward only.
double EvalLoss(const RecurrentClassifier& model, const TimeSeriesDataset& ds,
                std::span<const size_t> idx) {
  if (idx.empty()) return 0.0;
  const auto xs = BatchInputs(ds, idx);
  const auto trace = GruForward(model.gru(), xs, model.InitialStates(static_cast<int>(idx.size())));
  double loss = 0.0;
  for (int t = 0; t < ds.t_max; ++t) {
    const Eigen::RowVectorXd logits = (model.head_w() * trace.h[t + 1]).array() + model.head_b();
    for (size_t b = 0; b < idx.size(); ++b) loss += BceWithLogit(logits(b), ds.samples[idx[b]].y(t));
  }
  return loss / static_cast<double>(idx.size() * ds.t_max);
}

}  // namespace

RecurrentClassifier::RecurrentClassifier(int input_dim, int hidden_dim)
    : gru_(input_dim, hidden_dim), head_w_(Eigen::RowVectorXd::Zero(hidden_dim)) {}

void RecurrentClassifier::InitRandom(SeededRng& rng) {
  gru_.InitUniform(rng);
  Reinitialize(PredictorParamGroup::kHead, rng);
}

void RecurrentClassifier::Reinitialize(PredictorParamGroup group, SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(gru_.hidden_dim));
  switch (group) {
    case PredictorParamGroup::kHead:
      for (Eigen::Index i = 0; i < head_w_.size(); ++i) head_w_(i) = rng.Uniform(-bound, bound);
      head_b_ = rng.Uniform(-bound, bound);
      break;
    case PredictorParamGroup::kCandidate:
      gru_.ReinitCandidate(rng);
      break;
    case PredictorParamGroup::kGates:
      gru_.ReinitGates(rng);
      break;
  }
}

Eigen::MatrixXd RecurrentClassifier::InitialStates(int batch) const {
  return Eigen::MatrixXd::Zero(gru_.hidden_dim, batch);
}

Eigen::MatrixXd RecurrentClassifier::Step(const Eigen::MatrixXd& states,
                                          const Eigen::MatrixXd& inputs) const {
  return gru_.Step(states, inputs);
}

Eigen::RowVectorXd RecurrentClassifier::Readout(const Eigen::MatrixXd& states) const {
  Eigen::RowVectorXd logits = head_w_ * states;
  return logits.unaryExpr([this](double v) { return Sigmoid(v + head_b_); });
}

void RecurrentClassifier::FinalOutputGradients(const std::vector<Eigen::MatrixXd>& xs,
                                               Eigen::VectorXd* probs,
                                               std::vector<Eigen::MatrixXd>* grads) const {
  const auto batch = static_cast<Eigen::Index>(xs.size());
  if (batch == 0) return;
  const Eigen::Index t_max = xs.front().cols();
  std::vector<Eigen::MatrixXd> steps(t_max, Eigen::MatrixXd(input_dim(), batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index t = 0; t < t_max; ++t) steps[t].col(b) = xs[b].col(t);
  }
  const auto trace = GruForward(gru_, steps, InitialStates(static_cast<int>(batch)));
  const Eigen::RowVectorXd p = Readout(trace.h.back());
  std::vector<Eigen::MatrixXd> dh_out(t_max);
  const Eigen::RowVectorXd dp = (p.array() * (1.0 - p.array())).matrix();
  dh_out[t_max - 1] = head_w_.transpose() * dp;
  std::vector<Eigen::MatrixXd> dxs;
  GruBackward(gru_, steps, trace, dh_out, nullptr, &dxs);
  if (probs) *probs = p.transpose();
  if (grads) {
    grads->assign(batch, Eigen::MatrixXd(input_dim(), t_max));
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (Eigen::Index t = 0; t < t_max; ++t) (*grads)[b].col(t) = dxs[t].col(b);
    }
  }
}

Eigen::MatrixXd RecurrentClassifier::InputGradients(const Eigen::MatrixXd& x,
                                                    int target_class) const {
  std::vector<Eigen::MatrixXd> grads;
  FinalOutputGradients({x}, nullptr, &grads);
  return target_class == 1 ? grads[0] : Eigen::MatrixXd(-grads[0]);
}

std::vector<std::span<double>> RecurrentClassifier::Tensors() {
  auto t = gru_.Tensors();
  t.emplace_back(head_w_.data(), static_cast<size_t>(head_w_.size()));
  t.emplace_back(&head_b_, 1);
  return t;
}

std::vector<std::span<const double>> RecurrentClassifier::Tensors() const {
  auto t = gru_.Tensors();
  t.emplace_back(head_w_.data(), static_cast<size_t>(head_w_.size()));
  t.emplace_back(&head_b_, 1);
  return t;
}

void RecurrentClassifier::Save(const std::filesystem::path& path) const {
  nlohmann::ordered_json header;
  header["kind"] = "predictor";
  header["version"] = 1;
  header["d"] = input_dim();
  header["h"] = state_dim();
  internal::WriteCheckpoint(path, header, Flatten(Tensors()));
}

RecurrentClassifier RecurrentClassifier::Load(const std::filesystem::path& path) {
  const auto ck = internal::ReadCheckpoint(path, "predictor");
  RecurrentClassifier model(ck.header.at("d").get<int>(), ck.header.at("h").get<int>());
  Unflatten(ck.params, model.Tensors());
  return model;
}

TrainedPredictor TrainPredictor(const TimeSeriesDataset& ds, const PredictorHyper& hyper,
                                const SeededRng& rng) {
  if (ds.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot train on an empty dataset");
  if (hyper.hidden < 1 || hyper.batch_size < 1 || hyper.epochs < 0) {
    throw Error(ErrorKind::kInvalidConfig, "predictor hidden/batch_size/epochs out of range");
  }
  const size_t n = ds.size();
  const auto n_val = static_cast<size_t>(std::floor(static_cast<double>(n) * hyper.val_fraction));
  const size_t n_train = n - n_val;
  if (n_train == 0) throw Error(ErrorKind::kInvalidConfig, "validation split leaves no training data");
  std::vector<size_t> train_idx(n_train), val_idx(n_val);
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::iota(val_idx.begin(), val_idx.end(), n_train);

  SeededRng init_rng = rng.Derive({0x1417});
  RecurrentClassifier model(ds.d, hyper.hidden);
  model.InitRandom(init_rng);

  TrainedPredictor out;
  AdamOptions opts{hyper.lr, hyper.beta1, hyper.beta2, 1e-8, hyper.clip_norm};
  Adam adam(opts, model.Tensors());
  RecurrentClassifier grads(ds.d, hyper.hidden);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    SeededRng erng = rng.Derive({0xe0c4, static_cast<uint64_t>(epoch)});
    std::vector<size_t> order = train_idx;
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<size_t>(erng.UniformInt(static_cast<int64_t>(i)))]);
    }
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const size_t end = std::min(order.size(), start + hyper.batch_size);
      std::span<const size_t> idx(order.data() + start, end - start);
      const auto batch = static_cast<Eigen::Index>(idx.size());
      const auto xs = BatchInputs(ds, idx);
      const auto trace = GruForward(model.gru(), xs, model.InitialStates(static_cast<int>(batch)));

      for (auto t : grads.Tensors()) std::fill(t.begin(), t.end(), 0.0);
      const double norm = 1.0 / static_cast<double>(batch * ds.t_max);
      std::vector<Eigen::MatrixXd> dh_out(ds.t_max);
      double batch_loss = 0.0;
      for (int t = 0; t < ds.t_max; ++t) {
        const Eigen::RowVectorXd logits = (model.head_w() * trace.h[t + 1]).array() + model.head_b();
        Eigen::RowVectorXd dlogit(batch);
        for (Eigen::Index b = 0; b < batch; ++b) {
          const int y = ds.samples[idx[b]].y(t);
          batch_loss += BceWithLogit(logits(b), y);
          dlogit(b) = (Sigmoid(logits(b)) - y) * norm;
        }
        grads.head_w().noalias() += dlogit * trace.h[t + 1].transpose();
        grads.head_b() += dlogit.sum();
        dh_out[t] = model.head_w().transpose() * dlogit;
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kDiverged,
                    fmt::format("training loss became non-finite at epoch {}", epoch));
      }
      GruBackward(model.gru(), xs, trace, dh_out, &grads.gru(), nullptr);
      adam.Step(model.Tensors(), std::as_const(grads).Tensors());
      epoch_loss += batch_loss;
    }
    out.report.train_loss.push_back(epoch_loss / static_cast<double>(n_train * ds.t_max));
    if (n_val > 0) {
      out.report.val_loss.push_back(EvalLoss(model, ds, val_idx));
      double auroc = std::numeric_limits<double>::quiet_NaN();
      try {
        auroc = ModelAuroc(model, ds.Slice(n_train, n));
      } catch (const Error&) {
        // Single-class validation labels: AUROC is undefined.
      }
      out.report.val_auroc.push_back(auroc);
    }
  }
  out.model = std::move(model);
  return out;
}

double ModelAuroc(const SequenceClassifier& model, const TimeSeriesDataset& ds) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(ds.size() * ds.t_max);
  labels.reserve(ds.size() * ds.t_max);
  const auto batch = static_cast<int>(ds.size());
  Eigen::MatrixXd h = model.InitialStates(batch);
  Eigen::MatrixXd x(ds.d, batch);
  for (int t = 0; t < ds.t_max; ++t) {
    for (int b = 0; b < batch; ++b) x.col(b) = ds.samples[b].x.col(t);
    h = model.Step(h, x);
    const Eigen::RowVectorXd p = model.Readout(h);
    for (int b = 0; b < batch; ++b) {
      scores.push_back(p(b));
      labels.push_back(ds.samples[b].y(t));
    }
  }
  return Auroc(scores, labels);
}

}  // namespace tsfit
