// digitvec/gmm.h

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIGITVEC_GMM_H_
#define DIGITVEC_GMM_H_

#include <cstdint>

#include "digitvec/linalg.h"

namespace digitvec {

/// Diagonal-covariance Gaussian mixture.  Components are rows of `means` and
/// `variances`.  A component with weight 0 is inert (log weight -inf).
struct DiagGmm {
  Vector weights;
  Matrix means;
  Matrix variances;

  Eigen::Index NumComponents() const { return weights.size(); }
  Eigen::Index Dim() const { return means.cols(); }

  /// frames (L x F) -> L x C matrix of log(w_c N(o_t | mu_c, Sigma_c)).
  Matrix WeightedComponentLogLikes(const Matrix &frames) const;
  /// Mixture log-likelihood of each frame.
  Vector LogLikelihoods(const Matrix &frames) const;

  /// Throws ShapeError / NumericalError when the parameters are inconsistent.
  void Check() const;
};

/// Log density of a diagonal Gaussian at x, evaluated directly.
double DiagGaussianLogDensity(const RowVector &x, const RowVector &mean,
                              const RowVector &variance);

/// One EM iteration on `frames`, starting from `gmm`.  Variances are floored
/// elementwise at `var_floor`; a component with no posterior mass keeps its
/// mean and variance and gets weight 0.
void GmmEmStep(const Matrix &frames, const Vector &var_floor, DiagGmm *gmm);

/// k-means initialization of a `num_components` mixture on `frames`.
/// Deterministic given `seed`.  Clusters that end up with fewer than two
/// frames take the pooled variance.
DiagGmm InitGmmKmeans(const Matrix &frames, int num_components,
                      const Vector &var_floor, std::uint64_t seed);

}  // namespace digitvec

#endif  // DIGITVEC_GMM_H_
