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

#include "tsfit/classifier.h"

#include "tsfit/error.h"

namespace tsfit {

Eigen::MatrixXd SequenceClassifier::StateTrajectory(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd traj(state_dim(), x.cols() + 1);
  traj.col(0) = InitialStates(1);
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    traj.col(t + 1) = Step(traj.col(t), x.col(t));
  }
  return traj;
}

Eigen::VectorXd SequenceClassifier::PrefixProbabilities(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd traj = StateTrajectory(x);
  return Readout(traj.rightCols(x.cols())).transpose();
}

PredictiveDistribution SequenceClassifier::PredictPrefix(const Eigen::MatrixXd& x, int t) const {
  if (t < 1) throw Error(ErrorKind::kEmptyPrefix, "prefix length must be >= 1");
  if (t > x.cols()) throw Error(ErrorKind::kInvalidArgument, "prefix longer than the series");
  Eigen::MatrixXd h = InitialStates(1);
  for (int k = 0; k < t; ++k) h = Step(h, x.col(k));
  return PredictiveDistribution::Binary(Readout(h)(0));
}

}  // namespace tsfit
