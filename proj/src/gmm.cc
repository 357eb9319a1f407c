// digitvec/gmm.cc

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

#include "digitvec/gmm.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "digitvec/error.h"

namespace digitvec {

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
constexpr int kKmeansIters = 20;
}  // namespace

Matrix DiagGmm::WeightedComponentLogLikes(const Matrix &frames) const {
  if (frames.cols() != Dim())
    throw ShapeError("frame dimension " + std::to_string(frames.cols()) +
                     " does not match GMM dimension " + std::to_string(Dim()));
  const Eigen::Index num_comp = NumComponents();
  Matrix out(frames.rows(), num_comp);
  for (Eigen::Index c = 0; c < num_comp; ++c) {
    if (weights(c) <= 0.0) {
      out.col(c).setConstant(-std::numeric_limits<double>::infinity());
      continue;
    }
    const double gconst = std::log(weights(c)) -
                          0.5 * (Dim() * kLog2Pi +
                                 variances.row(c).array().log().sum());
    RowVector inv_var = variances.row(c).cwiseInverse();
    out.col(c) = ((frames.rowwise() - means.row(c)).array().square().rowwise() *
                  inv_var.array())
                     .rowwise()
                     .sum()
                     .matrix() *
                     -0.5 +
                 Vector::Constant(frames.rows(), gconst);
  }
  return out;
}

Vector DiagGmm::LogLikelihoods(const Matrix &frames) const {
  Matrix comp = WeightedComponentLogLikes(frames);
  Vector out(frames.rows());
  std::vector<double> row(comp.cols());
  for (Eigen::Index t = 0; t < comp.rows(); ++t) {
    for (Eigen::Index c = 0; c < comp.cols(); ++c) row[c] = comp(t, c);
    out(t) = LogSumExp(row);
  }
  return out;
}

void DiagGmm::Check() const {
  if (means.rows() != weights.size() || variances.rows() != weights.size() ||
      variances.cols() != means.cols())
    throw ShapeError("inconsistent GMM parameter shapes");
  if ((variances.array() <= 0.0).any() || !variances.allFinite() ||
      !means.allFinite())
    throw NumericalError("GMM has non-finite means or non-positive variances");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw NumericalError("GMM weights do not sum to 1");
}

double DiagGaussianLogDensity(const RowVector &x, const RowVector &mean,
                              const RowVector &variance) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x(i) - mean(i);
    acc += std::log(variance(i)) + kLog2Pi + d * d / variance(i);
  }
  return -0.5 * acc;
}

void GmmEmStep(const Matrix &frames, const Vector &var_floor, DiagGmm *gmm) {
  if (frames.rows() == 0) return;
  Matrix post = gmm->WeightedComponentLogLikes(frames);
  std::vector<double> row(post.cols());
  for (Eigen::Index t = 0; t < post.rows(); ++t) {
    for (Eigen::Index c = 0; c < post.cols(); ++c) row[c] = post(t, c);
    const double norm = LogSumExp(row);
    post.row(t) = (post.row(t).array() - norm).exp().matrix();
  }
  Vector occ = post.colwise().sum().transpose();
  const double total = occ.sum();
  for (Eigen::Index c = 0; c < gmm->NumComponents(); ++c) {
    gmm->weights(c) = occ(c) / total;
    if (occ(c) <= 0.0) continue;
    RowVector mean = (post.col(c).transpose() * frames) / occ(c);
    RowVector var = (post.col(c).transpose() *
                     (frames.rowwise() - mean).array().square().matrix()) /
                    occ(c);
    gmm->means.row(c) = mean;
    gmm->variances.row(c) = var.cwiseMax(var_floor.transpose());
  }
}

DiagGmm InitGmmKmeans(const Matrix &frames, int num_components,
                      const Vector &var_floor, std::uint64_t seed) {
  const Eigen::Index n = frames.rows(), dim = frames.cols();
  if (n == 0) throw EmptyInput("cannot initialize a GMM from zero frames");
  if (num_components < 1) throw ConfigError("num_components must be >= 1");
  RowVector pooled_mean = frames.colwise().mean();
  RowVector pooled_var =
      ((frames.rowwise() - pooled_mean).array().square().colwise().mean())
          .matrix()
          .cwiseMax(var_floor.transpose());
  Rng rng(seed);

  Matrix centroids(num_components, dim);
  // k-means++ seeding.
  centroids.row(0) = frames.row(rng.UniformInt(0, static_cast<int>(n) - 1));
  Vector best_dist = (frames.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < num_components; ++k) {
    const double total = best_dist.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.Uniform() * total, acc = 0.0;
      for (pick = 0; pick + 1 < n; ++pick) {
        acc += best_dist(pick);
        if (acc > target) break;
      }
      centroids.row(k) = frames.row(pick);
    } else {
      // Fewer distinct frames than components: jitter around the pool.
      for (Eigen::Index i = 0; i < dim; ++i)
        centroids(k, i) = pooled_mean(i) + 0.1 * std::sqrt(pooled_var(i)) * rng.Normal();
    }
    best_dist = best_dist.cwiseMin(
        (frames.rowwise() - centroids.row(k)).rowwise().squaredNorm());
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < kKmeansIters; ++iter) {
    bool changed = false;
    for (Eigen::Index t = 0; t < n; ++t) {
      Eigen::Index best;
      (centroids.rowwise() - frames.row(t)).rowwise().squaredNorm().minCoeff(&best);
      if (assign[t] != best) changed = true;
      assign[t] = static_cast<int>(best);
    }
    std::vector<int> counts(num_components, 0);
    Matrix sums = Matrix::Zero(num_components, dim);
    for (Eigen::Index t = 0; t < n; ++t) {
      counts[assign[t]]++;
      sums.row(assign[t]) += frames.row(t);
    }
    for (int k = 0; k < num_components; ++k)
      if (counts[k] > 0) centroids.row(k) = sums.row(k) / counts[k];
    if (!changed && iter > 0) break;
  }

  DiagGmm gmm;
  gmm.weights.resize(num_components);
  gmm.means = centroids;
  gmm.variances.resize(num_components, dim);
  for (int k = 0; k < num_components; ++k) {
    int count = 0;
    RowVector sq = RowVector::Zero(dim);
    for (Eigen::Index t = 0; t < n; ++t) {
      if (assign[t] != k) continue;
      ++count;
      sq += (frames.row(t) - centroids.row(k)).array().square().matrix();
    }
    gmm.weights(k) = std::max(count, 1);
    gmm.variances.row(k) =
        count >= 2 ? (sq / count).cwiseMax(var_floor.transpose()) : pooled_var;
  }
  gmm.weights /= gmm.weights.sum();
  return gmm;
}

}  // namespace digitvec
