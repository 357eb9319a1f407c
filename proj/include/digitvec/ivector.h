// digitvec/ivector.h

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

#ifndef DIGITVEC_IVECTOR_H_
#define DIGITVEC_IVECTOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "digitvec/stats.h"

namespace digitvec {

/// Total-variability model of one digit: supervector M = mean + T y with
/// y ~ N(0, I) and block-diagonal (here fully diagonal) covariance.
///
/// Statistics are centralized around `ubm_means` (the flattened HMM means).
/// Minimum divergence may move `mean` away from them; extraction accounts
/// for the offset.
struct IVectorExtractor {
  int digit = 0;
  Eigen::Index feature_dim = 0;
  Vector ubm_means;
  Vector mean;
  /// Diagonal of Sigma_d, stacked like the supervector.
  Vector variances;
  /// T_d, (C_d * F) x R.
  Matrix subspace;
  std::uint64_t seed = 0;
  /// Total log evidence of the training statistics after each EM iteration
  /// (entry 0 is the initial model).
  std::vector<double> evidence_log;

  Eigen::Index NumComponents() const {
    return feature_dim == 0 ? 0 : subspace.rows() / feature_dim;
  }
  Eigen::Index FeatureDim() const { return feature_dim; }
  Eigen::Index SupervectorDim() const { return subspace.rows(); }
  Eigen::Index Rank() const { return subspace.cols(); }
};

/// Gaussian posterior of the i-vector of one digit occurrence.
struct IVectorPosterior {
  int digit = 0;
  Vector mean;
  Matrix covariance;
  std::string utterance_id;
  int occurrence = 0;
};

/// Caches T_c^T Sigma_c^-1 T_c for every component, so repeated extraction
/// with the same extractor costs O(C R^2 + C F R) per occurrence.
class PosteriorExtractor {
 public:
  explicit PosteriorExtractor(const IVectorExtractor &ext);

  IVectorPosterior Extract(const BaumWelchStats &stats) const;
  /// log p(F | N) under the linear-Gaussian model, components with N_c = 0
  /// contributing nothing.
  double Evidence(const BaumWelchStats &stats) const;

 private:
  struct Terms {
    Matrix precision;
    Vector linear;
    Vector centred;
  };
  Terms Compute(const BaumWelchStats &stats) const;

  const IVectorExtractor &ext_;
  std::vector<Matrix> component_terms_;
  Matrix weighted_subspace_;  // Sigma^-1 T
};

IVectorPosterior ExtractPosterior(const BaumWelchStats &stats,
                                  const IVectorExtractor &ext);
double Evidence(const BaumWelchStats &stats, const IVectorExtractor &ext);

/// Extractor with `mean` = flattened means and T drawn from N(0, 1) scaled
/// by 1e-2 * sqrt(variance) of its row.
IVectorExtractor InitExtractor(const FlatGmm &flat, int rank, std::uint64_t seed);

struct AggregatedPosterior {
  Vector mean;
  /// (1/n) sum (E[y] - ybar)(E[y] - ybar)^T + cov(y).
  Matrix covariance;
};

AggregatedPosterior AggregatePosteriors(std::span<const IVectorPosterior> posteriors);

/// S_u = (1/n) sum cov(y_i).  Throws EmptyInput for an empty set.
Matrix AverageUncertainty(std::span<const IVectorPosterior> posteriors);

/// One minimum-divergence update from the given posteriors: with
/// L L^T = S^u_tot, mean <- mean + T ybar and T <- T L.  Throws
/// NumericalError if S^u_tot is not positive definite.
IVectorExtractor MinimumDivergence(const IVectorExtractor &ext,
                                   std::span<const IVectorPosterior> posteriors);

struct ExtractorTrainConfig {
  int rank = 300;
  int num_iters = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool minimum_divergence = true;
  /// Minimum-divergence updates are repeated (with re-extraction) until the
  /// aggregated posterior is within this Frobenius distance of N(0, I).
  double md_tolerance = 1e-9;
  int md_max_steps = 2000;
};

struct ExtractorTrainLog {
  std::vector<double> evidence;
  /// Final ||S^u_tot - I||_F after each iteration's minimum-divergence loop.
  std::vector<double> md_residual;
  std::vector<int> md_steps;
};

/// EM training of T on per-occurrence statistics of one digit.
/// Throws ConfigError when rank < 1 or exceeds the supervector dimension.
IVectorExtractor TrainExtractor(const std::vector<BaumWelchStats> &stats,
                                const FlatGmm &flat,
                                const ExtractorTrainConfig &cfg,
                                ExtractorTrainLog *log = nullptr);

/// Posteriors of all statistics (parallel over `jobs`, order preserved).
std::vector<IVectorPosterior> ExtractAll(const std::vector<BaumWelchStats> &stats,
                                         const IVectorExtractor &ext, int jobs);

}  // namespace digitvec

#endif  // DIGITVEC_IVECTOR_H_
