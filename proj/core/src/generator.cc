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

#include "tsfit/generator.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "checkpoint_io.h"
#include "tsfit/error.h"

namespace tsfit {
namespace {

constexpr double kCholFloor = 1e-4;
constexpr double kVarFloor = 1e-6;

void AppendStart(std::vector<double>& flat, const GaussianParams& start) {
  flat.insert(flat.end(), start.mean.data(), start.mean.data() + start.mean.size());
  flat.insert(flat.end(), start.chol.data(), start.chol.data() + start.chol.size());
}

GaussianParams ReadStart(std::span<const double> flat, int d) {
  if (flat.size() != static_cast<size_t>(d + d * d)) {
    throw Error(ErrorKind::kFormat, "start distribution block has the wrong size");
  }
  GaussianParams p;
  p.mean = Eigen::Map<const Eigen::VectorXd>(flat.data(), d);
  p.chol = Eigen::Map<const Eigen::MatrixXd>(flat.data() + d, d, d);
  return p;
}

nlohmann::ordered_json Header(GeneratorVariant v, int d, int h) {
  nlohmann::ordered_json header;
  header["kind"] = "generator";
  header["version"] = 1;
  header["variant"] = std::string(VariantName(v));
  header["d"] = d;
  header["h"] = h;
  return header;
}

GaussianParams DiagonalGaussian(Eigen::VectorXd mean, const Eigen::VectorXd& var) {
  GaussianParams p;
  p.mean = std::move(mean);
  p.chol = var.cwiseMax(kVarFloor).cwiseSqrt().asDiagonal();
  return p;
}

RecurrentGaussianGenerator TrainRecurrent(const TimeSeriesDataset& ds, const GeneratorHyper& hyper,
                                          const SeededRng& rng, std::vector<double>* train_curve,
                                          std::vector<double>* val_curve);

}  // namespace

std::string_view VariantName(GeneratorVariant v) {
  switch (v) {
    case GeneratorVariant::kRecurrentGaussian: return "recurrent_gaussian";
    case GeneratorVariant::kCarryForward: return "carry_forward";
    case GeneratorVariant::kMeanImpute: return "mean_impute";
  }
  return "unknown";
}

GeneratorVariant ParseVariant(std::string_view name) {
  if (name == "recurrent_gaussian" || name == "conditional") return GeneratorVariant::kRecurrentGaussian;
  if (name == "carry_forward") return GeneratorVariant::kCarryForward;
  if (name == "mean_impute") return GeneratorVariant::kMeanImpute;
  throw Error(ErrorKind::kInvalidConfig, fmt::format("unknown generator variant '{}'", name));
}

std::vector<GaussianParams> ConditionalGenerator::NextStepSequence(const Eigen::MatrixXd& x) const {
  std::vector<GaussianParams> out;
  out.reserve(x.cols());
  for (Eigen::Index t = 0; t < x.cols(); ++t) out.push_back(NextStepDistribution(x.leftCols(t)));
  return out;
}

// ---------------------------------------------------------------------------
// Recurrent Gaussian generator.

RecurrentGaussianGenerator::RecurrentGaussianGenerator(int dim, int hidden)
    : gru_(dim, hidden),
      head_w_(Eigen::MatrixXd::Zero(dim + dim * (dim + 1) / 2, hidden)),
      head_b_(Eigen::VectorXd::Zero(dim + dim * (dim + 1) / 2)) {}

int RecurrentGaussianGenerator::head_outputs() const {
  const int d = dim();
  return d + d * (d + 1) / 2;
}

GaussianParams RecurrentGaussianGenerator::HeadParams(const Eigen::VectorXd& h) const {
  const int d = dim();
  const Eigen::VectorXd o = head_w_ * h + head_b_;
  GaussianParams p;
  p.mean = o.head(d);
  p.chol = Eigen::MatrixXd::Zero(d, d);
  int k = d;
  // Lower triangle, row by row.
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j, ++k) {
      p.chol(i, j) = (i == j) ? Softplus(o(k)) + kCholFloor : o(k);
    }
  }
  return p;
}

GaussianParams RecurrentGaussianGenerator::NextStepDistribution(const Eigen::MatrixXd& history) const {
  if (history.cols() == 0) return start_;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(gru_.hidden_dim);
  for (Eigen::Index t = 0; t < history.cols(); ++t) h = gru_.Step(h, history.col(t));
  return HeadParams(h);
}

std::vector<GaussianParams> RecurrentGaussianGenerator::NextStepSequence(const Eigen::MatrixXd& x) const {
  std::vector<GaussianParams> out;
  out.reserve(x.cols());
  if (x.cols() == 0) return out;
  out.push_back(start_);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(gru_.hidden_dim);
  for (Eigen::Index t = 1; t < x.cols(); ++t) {
    h = gru_.Step(h, x.col(t - 1));
    out.push_back(HeadParams(h));
  }
  return out;
}

std::vector<std::span<double>> RecurrentGaussianGenerator::Tensors() {
  auto t = gru_.Tensors();
  t.emplace_back(head_w_.data(), static_cast<size_t>(head_w_.size()));
  t.emplace_back(head_b_.data(), static_cast<size_t>(head_b_.size()));
  return t;
}

std::vector<std::span<const double>> RecurrentGaussianGenerator::Tensors() const {
  auto t = gru_.Tensors();
  t.emplace_back(head_w_.data(), static_cast<size_t>(head_w_.size()));
  t.emplace_back(head_b_.data(), static_cast<size_t>(head_b_.size()));
  return t;
}

void RecurrentGaussianGenerator::Save(const std::filesystem::path& path) const {
  auto flat = Flatten(Tensors());
  AppendStart(flat, start_);
  internal::WriteCheckpoint(path, Header(variant(), dim(), gru_.hidden_dim), flat);
}

// ---------------------------------------------------------------------------
// Statistics-only generators.

GaussianParams CarryForwardGenerator::NextStepDistribution(const Eigen::MatrixXd& history) const {
  if (history.cols() == 0) return start_;
  return DiagonalGaussian(history.col(history.cols() - 1), sigma2_);
}

void CarryForwardGenerator::Save(const std::filesystem::path& path) const {
  std::vector<double> flat(sigma2_.data(), sigma2_.data() + sigma2_.size());
  AppendStart(flat, start_);
  internal::WriteCheckpoint(path, Header(variant(), dim(), 0), flat);
}

GaussianParams MeanImputeGenerator::NextStepDistribution(const Eigen::MatrixXd& history) const {
  if (history.cols() == 0) return start_;
  return DiagonalGaussian(mean_, var_);
}

void MeanImputeGenerator::Save(const std::filesystem::path& path) const {
  std::vector<double> flat(mean_.data(), mean_.data() + mean_.size());
  flat.insert(flat.end(), var_.data(), var_.data() + var_.size());
  AppendStart(flat, start_);
  internal::WriteCheckpoint(path, Header(variant(), dim(), 0), flat);
}

std::unique_ptr<ConditionalGenerator> LoadGenerator(const std::filesystem::path& path) {
  const auto ck = internal::ReadCheckpoint(path, "generator");
  const auto variant = ParseVariant(ck.header.at("variant").get<std::string>());
  const int d = ck.header.at("d").get<int>();
  const int h = ck.header.at("h").get<int>();
  std::span<const double> flat(ck.params);
  const size_t start_size = static_cast<size_t>(d + d * d);
  if (flat.size() < start_size) throw Error(ErrorKind::kFormat, "generator checkpoint too short");
  const auto body = flat.first(flat.size() - start_size);
  const auto start = ReadStart(flat.last(start_size), d);

  std::unique_ptr<ConditionalGenerator> gen;
  switch (variant) {
    case GeneratorVariant::kRecurrentGaussian: {
      auto g = std::make_unique<RecurrentGaussianGenerator>(d, h);
      Unflatten(body, g->Tensors());
      gen = std::move(g);
      break;
    }
    case GeneratorVariant::kCarryForward:
      if (body.size() != static_cast<size_t>(d)) throw Error(ErrorKind::kFormat, "bad carry_forward block");
      gen = std::make_unique<CarryForwardGenerator>(Eigen::Map<const Eigen::VectorXd>(body.data(), d));
      break;
    case GeneratorVariant::kMeanImpute:
      if (body.size() != static_cast<size_t>(2 * d)) throw Error(ErrorKind::kFormat, "bad mean_impute block");
      gen = std::make_unique<MeanImputeGenerator>(Eigen::Map<const Eigen::VectorXd>(body.data(), d),
                                                  Eigen::Map<const Eigen::VectorXd>(body.data() + d, d));
      break;
  }
  gen->set_start(start);
  return gen;
}

// ---------------------------------------------------------------------------
// Training.

GaussianParams FitStartDistribution(const TimeSeriesDataset& ds) {
  const int d = ds.d;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  const auto n = static_cast<double>(ds.size());
  if (ds.empty()) return GaussianParams{mean, Eigen::MatrixXd::Identity(d, d)};
  for (const auto& s : ds.samples) mean += s.x.col(0);
  mean /= n;
  for (const auto& s : ds.samples) {
    const Eigen::VectorXd r = s.x.col(0) - mean;
    cov += r * r.transpose();
  }
  cov /= n;
  for (int i = 0; i < d; ++i) cov(i, i) = std::max(cov(i, i), kCholFloor);
  return MakeGaussian(std::move(mean), cov);
}

namespace {

RecurrentGaussianGenerator TrainRecurrent(const TimeSeriesDataset& ds, const GeneratorHyper& hyper,
                                          const SeededRng& rng, std::vector<double>* train_curve,
                                          std::vector<double>* val_curve) {
  const int d = ds.d;
  const int t_max = ds.t_max;
  const size_t n = ds.size();
  const auto n_val = static_cast<size_t>(std::floor(static_cast<double>(n) * hyper.val_fraction));
  const size_t n_train = n - n_val;
  if (n_train == 0) throw Error(ErrorKind::kInvalidConfig, "validation split leaves no training data");

  SeededRng init_rng = rng.Derive({0x6e4});
  RecurrentGaussianGenerator gen(d, hyper.hidden);
  gen.gru().InitUniform(init_rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hyper.hidden));
  for (Eigen::Index i = 0; i < gen.head_w().size(); ++i) gen.head_w().data()[i] = init_rng.Uniform(-bound, bound);
  for (Eigen::Index i = 0; i < gen.head_b().size(); ++i) gen.head_b()(i) = init_rng.Uniform(-bound, bound);
  gen.set_start(FitStartDistribution(ds.Slice(0, n_train)));

  AdamOptions opts{hyper.lr, hyper.beta1, hyper.beta2, 1e-8, hyper.clip_norm};
  Adam adam(opts, gen.Tensors());
  RecurrentGaussianGenerator grads(d, hyper.hidden);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const int n_out = gen.head_outputs();

  std::vector<size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    SeededRng erng = rng.Derive({0xe0c4, static_cast<uint64_t>(epoch)});
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<size_t>(erng.UniformInt(static_cast<int64_t>(i)))]);
    }
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const size_t end = std::min(order.size(), start + hyper.batch_size);
      const auto batch = static_cast<Eigen::Index>(end - start);
      // Inputs x_0..x_{T-2}; state h[t] predicts x_t for t = 1..T-1.
      std::vector<Eigen::MatrixXd> xs(t_max - 1, Eigen::MatrixXd(d, batch));
      for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& x = ds.samples[order[start + b]].x;
        for (int t = 0; t + 1 < t_max; ++t) xs[t].col(b) = x.col(t);
      }
      const auto trace = GruForward(gen.gru(), xs, Eigen::MatrixXd::Zero(hyper.hidden, batch));
      for (auto tensor : grads.Tensors()) std::fill(tensor.begin(), tensor.end(), 0.0);
      const double norm = 1.0 / static_cast<double>(batch * (t_max - 1));
      std::vector<Eigen::MatrixXd> dh_out(t_max - 1);
      double batch_loss = 0.0;
      Eigen::MatrixXd d_out(n_out, batch);
      for (int t = 1; t < t_max; ++t) {
        const Eigen::MatrixXd& h = trace.h[t];
        Eigen::MatrixXd o = gen.head_w() * h;
        o.colwise() += gen.head_b();
        for (Eigen::Index b = 0; b < batch; ++b) {
          const auto& x = ds.samples[order[start + b]].x;
          Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
          int k = d;
          for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= i; ++j, ++k) l(i, j) = (i == j) ? Softplus(o(k, b)) + kCholFloor : o(k, b);
          }
          const Eigen::VectorXd r = x.col(t) - o.col(b).head(d);
          const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(r);
          const Eigen::VectorXd v = l.transpose().triangularView<Eigen::Upper>().solve(z);
          batch_loss += 0.5 * z.squaredNorm() + l.diagonal().array().log().sum() + 0.5 * d * log2pi;
          d_out.col(b).head(d) = -v * norm;
          k = d;
          for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= i; ++j, ++k) {
              double g = -v(i) * z(j);
              if (i == j) g = (g + 1.0 / l(i, i)) * Sigmoid(o(k, b));
              d_out(k, b) = g * norm;
            }
          }
        }
        grads.head_w().noalias() += d_out * h.transpose();
        grads.head_b() += d_out.rowwise().sum();
        dh_out[t - 1] = gen.head_w().transpose() * d_out;
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kDiverged,
                    fmt::format("generator NLL became non-finite at epoch {}", epoch));
      }
      GruBackward(gen.gru(), xs, trace, dh_out, &grads.gru(), nullptr);
      adam.Step(gen.Tensors(), std::as_const(grads).Tensors());
      epoch_loss += batch_loss;
    }
    train_curve->push_back(epoch_loss / static_cast<double>(n_train * (t_max - 1)));
    if (n_val > 0) val_curve->push_back(MeanNll(gen, ds.Slice(n_train, n)));
  }
  return gen;
}

}  // namespace

TrainedGenerator TrainGenerator(const TimeSeriesDataset& ds, GeneratorVariant variant,
                                const GeneratorHyper& hyper, const SeededRng& rng) {
  if (ds.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot fit a generator on an empty dataset");
  if (ds.t_max < 2) throw Error(ErrorKind::kInvalidArgument, "generator needs >= 2 timesteps");
  TrainedGenerator out;
  const int d = ds.d;
  switch (variant) {
    case GeneratorVariant::kRecurrentGaussian: {
      if (hyper.hidden < 1 || hyper.batch_size < 1 || hyper.epochs < 0) {
        throw Error(ErrorKind::kInvalidConfig, "generator hidden/batch_size/epochs out of range");
      }
      out.generator = std::make_unique<RecurrentGaussianGenerator>(
          TrainRecurrent(ds, hyper, rng, &out.train_loss, &out.val_loss));
      return out;
    }
    case GeneratorVariant::kCarryForward: {
      Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
      double count = 0.0;
      for (const auto& s : ds.samples) {
        const Eigen::MatrixXd diff = s.x.rightCols(ds.t_max - 1) - s.x.leftCols(ds.t_max - 1);
        ss += diff.array().square().rowwise().sum().matrix();
        count += ds.t_max - 1;
      }
      out.generator = std::make_unique<CarryForwardGenerator>((ss / count).cwiseMax(kVarFloor));
      break;
    }
    case GeneratorVariant::kMeanImpute: {
      const FeatureStats st = ComputeFeatureStats(ds);
      out.generator = std::make_unique<MeanImputeGenerator>(
          st.mean, st.stddev.array().square().matrix().cwiseMax(kVarFloor));
      break;
    }
  }
  out.generator->set_start(FitStartDistribution(ds));
  return out;
}

double MeanNll(const ConditionalGenerator& gen, const TimeSeriesDataset& ds) {
  double total = 0.0;
  double count = 0.0;
  for (const auto& s : ds.samples) {
    const auto seq = gen.NextStepSequence(s.x);
    for (Eigen::Index t = 1; t < s.x.cols(); ++t) {
      total -= seq[t].LogPdf(s.x.col(t));
      count += 1.0;
    }
  }
  return count > 0 ? total / count : 0.0;
}

Eigen::MatrixXd SampleCounterfactual(const GaussianParams& next, std::span<const int> subset,
                                     const Eigen::VectorXd& observed, int count, SeededRng& rng) {
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "sample count must be >= 1");
  return SampleMvn(GaussianCondition(next, subset, observed), rng, count);
}

Eigen::MatrixXd SampleCounterfactual(const ConditionalGenerator& gen,
                                     const Eigen::MatrixXd& history, std::span<const int> subset,
                                     const Eigen::VectorXd& observed, int count, SeededRng& rng) {
  return SampleCounterfactual(gen.NextStepDistribution(history), subset, observed, count, rng);
}

std::vector<double> MarginalBootstrapSample(const FeatureStats& stats, int feature,
                                            SeededRng& rng, int n) {
  if (feature < 0 || feature >= static_cast<int>(stats.reservoir.size()) ||
      stats.reservoir[feature].empty()) {
    throw Error(ErrorKind::kEmptyReservoir, fmt::format("no reservoir values for feature {}", feature));
  }
  const auto& pool = stats.reservoir[feature];
  std::vector<double> out(n);
  for (auto& v : out) v = pool[static_cast<size_t>(rng.UniformInt(static_cast<int64_t>(pool.size())))];
  return out;
}

}  // namespace tsfit
