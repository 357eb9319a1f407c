// digitvec/compensation.h

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

#ifndef DIGITVEC_COMPENSATION_H_
#define DIGITVEC_COMPENSATION_H_

#include <string>
#include <string_view>
#include <vector>

#include "digitvec/linalg.h"

namespace digitvec {

/// Class scatter of i-vectors of one digit, plus the average posterior
/// covariance (uncertainty) of those i-vectors.
struct ScatterSet {
  int digit = 0;
  Matrix between;
  Matrix within;
  Matrix total;
  Matrix uncertainty;
  int num_vectors = 0;
  std::vector<int> class_counts;
  Vector global_mean;
  /// One row per class.
  Matrix class_means;

  Eigen::Index Dim() const { return between.rows(); }
};

enum class TransformKind {
  kUncertainLda,
  kUncertainWccn,
  kUncertaintyNorm,
  kRegularizedLda,
  kLengthNorm,
};

std::string_view TransformKindName(TransformKind kind);
TransformKind ParseTransformKind(std::string_view name);

/// Linear map applied as y <- W^T y, or length normalization (no W).
struct Transform {
  TransformKind kind = TransformKind::kLengthNorm;
  Matrix projection;
  int digit = 0;
  /// Ridge actually added to S_b (regularized LDA only).
  double regularization = 0.0;

  Vector Apply(const Vector &y) const;
  Eigen::Index InputDim() const { return projection.rows(); }
  Eigen::Index OutputDim() const { return projection.cols(); }
};

struct TransformChain {
  int digit = 0;
  std::vector<Transform> steps;

  Vector Apply(const Vector &y) const;
};

/// S_b = (1/S) sum_s (m_s - m)(m_s - m)^T,
/// S_w = (1/S) sum_s (1/n_s) sum_i (y_i - m_s)(y_i - m_s)^T,
/// S_tot = (1/n) sum_i (y_i - m)(y_i - m)^T with m the global mean.
/// `uncertainty` is left zero.  Throws DegenerateScatter for fewer than two
/// classes and EmptyInput for an empty class.
ScatterSet ComputeScatter(const std::vector<std::vector<Vector>> &by_speaker,
                          int digit = 0);

/// Leading generalized eigenvectors of (S_b, S_w + S_u), scaled so that
/// W^T (S_w + S_u) W = I.
Transform FitUncertainLda(const ScatterSet &scatter, int out_dim);

/// W W^T = (S_w + S_u)^-1 with W the inverse transpose of the lower Cholesky
/// factor of S_w + S_u.
Transform FitUncertainWccn(const ScatterSet &scatter);

/// W W^T = S_u^-1 (Cholesky based, so S_u = I gives W = I).
Transform FitUncertaintyNorm(const Matrix &uncertainty, int digit = 0);

/// Generalized eigenvectors of (S_b + beta I, S_w), beta =
/// reg_coeff * tr(S_b) / R, keeping all R dimensions.
Transform FitRegularizedLda(const ScatterSet &scatter, double reg_coeff);

/// v / ||v||; throws ZeroVector for v = 0.
Vector LengthNormalize(const Vector &v);

enum class CompensationMethod { kNone, kUncertaintyNorm, kUncertainWccn, kUncertainLda };

std::string_view CompensationMethodName(CompensationMethod method);
/// Throws ConfigError for an unknown name.
CompensationMethod ParseCompensationMethod(std::string_view name);

enum class UncertaintySource {
  /// Uncertainty normalization whitens S_u.
  kAverage,
  /// Whitens S_tot + S_u instead.
  kTotalPlusAverage,
};

struct CompensationConfig {
  CompensationMethod method = CompensationMethod::kUncertaintyNorm;
  double reg_coeff = 1.0;
  /// Output dimension of uncertain LDA; 0 keeps the full rank.
  int lda_dim = 0;
  UncertaintySource uncertainty_source = UncertaintySource::kAverage;
};

/// Training i-vectors (posterior means) grouped by speaker, plus their
/// average posterior covariance.
struct CompensationData {
  std::vector<std::vector<Vector>> by_speaker;
  Matrix uncertainty;
};

/// Fits the chain for one digit.  Later steps are fitted on vectors already
/// passed through the earlier ones:
///   uncertainty_norm -> [uncertainty_norm, length_norm, regularized_lda]
///   uncertain_wccn   -> [uncertain_wccn, length_norm, regularized_lda]
///   uncertain_lda    -> [uncertain_lda]
///   none             -> []
TransformChain BuildChain(const CompensationConfig &cfg, const CompensationData &data,
                          int digit);

}  // namespace digitvec

#endif  // DIGITVEC_COMPENSATION_H_
