// tests/unit/ivector-test.cc

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

#include <cmath>

#include "digitvec/error.h"
#include "digitvec/ivector.h"
#include "digitvec/linalg.h"
#include "doctest.h"

namespace digitvec {

namespace {

IVectorExtractor RandomExtractor(Rng *rng, int F, int C, int R) {
  IVectorExtractor ext;
  ext.feature_dim = F;
  ext.ubm_means = rng->NormalVector(C * F);
  ext.mean = ext.ubm_means + 0.3 * rng->NormalVector(C * F);
  ext.variances.resize(C * F);
  for (int i = 0; i < C * F; ++i) ext.variances[i] = 0.2 + 2.0 * rng->Uniform();
  ext.subspace.resize(C * F, R);
  for (int i = 0; i < C * F; ++i)
    for (int r = 0; r < R; ++r) ext.subspace(i, r) = rng->Normal();
  return ext;
}

BaumWelchStats RandomStats(Rng *rng, int F, int C) {
  BaumWelchStats st;
  st.zero_order.resize(C);
  st.first_order.resize(C * F);
  for (int c = 0; c < C; ++c) {
    st.zero_order[c] = rng->Uniform() < 0.25 ? 0.0 : 0.5 + 10.0 * rng->Uniform();
    for (int f = 0; f < F; ++f) st.first_order[c * F + f] = 2.0 * rng->Normal() * st.zero_order[c];
  }
  return st;
}

// Rows of components with N_c > 0.
std::vector<int> ObservedRows(const IVectorExtractor &ext, const BaumWelchStats &st) {
  std::vector<int> rows;
  const int F = static_cast<int>(ext.feature_dim);
  for (int c = 0; c < st.zero_order.size(); ++c)
    if (st.zero_order[c] > 0.0)
      for (int f = 0; f < F; ++f) rows.push_back(c * F + f);
  return rows;
}

// Dense joint Gaussian over [y; x] with x_i = f_i - N_c (m_i - u_i) for the
// observed rows: x = diag(N) T y + noise, noise ~ N(0, diag(N sigma)).
void DenseModel(const IVectorExtractor &ext, const BaumWelchStats &st, Matrix *A, Vector *x,
                Matrix *noise) {
  const int F = static_cast<int>(ext.feature_dim);
  std::vector<int> rows = ObservedRows(ext, st);
  const int n = static_cast<int>(rows.size());
  A->resize(n, ext.Rank());
  x->resize(n);
  *noise = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int r = rows[i];
    const double N = st.zero_order[r / F];
    A->row(i) = N * ext.subspace.row(r);
    (*x)[i] = st.first_order[r] - N * (ext.mean[r] - ext.ubm_means[r]);
    (*noise)(i, i) = N * ext.variances[r];
  }
}

}  // namespace

TEST_CASE("no statistics recover the prior") {
  Rng rng(1);
  IVectorExtractor ext = RandomExtractor(&rng, 3, 2, 2);
  BaumWelchStats st;
  st.zero_order = Vector::Zero(2);
  st.first_order = Vector::Zero(6);
  IVectorPosterior post = ExtractPosterior(st, ext);
  CHECK(post.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK((post.covariance - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(Evidence(st, ext) == doctest::Approx(0.0));
}

TEST_CASE("posterior and evidence match dense Gaussian algebra") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    IVectorExtractor ext = RandomExtractor(&rng, 3, 2, 2);
    BaumWelchStats st = RandomStats(&rng, 3, 2);
    Matrix A, noise;
    Vector x;
    DenseModel(ext, st, &A, &x, &noise);
    const int R = 2;
    IVectorPosterior post = ExtractPosterior(st, ext);
    if (x.size() == 0) {
      CHECK(post.mean.norm() == 0.0);
      continue;
    }
    const Matrix marginal = A * A.transpose() + noise;
    Eigen::FullPivLU<Matrix> lu(marginal);
    const Vector mean = A.transpose() * lu.solve(x);
    const Matrix cov = Matrix::Identity(R, R) - A.transpose() * lu.solve(A);
    CHECK((post.mean - mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((post.covariance - cov).cwiseAbs().maxCoeff() < 1e-8);

    const double log_density = -0.5 * (x.dot(lu.solve(x)) + std::log(lu.determinant()) +
                                       x.size() * std::log(2.0 * M_PI));
    CHECK(std::abs(Evidence(st, ext) - log_density) < 1e-8);
  }
}

TEST_CASE("extractor shapes and rank validation") {
  FlatGmm flat;
  flat.digit = 4;
  flat.gmm.weights = Vector::Constant(64, 1.0 / 64);
  flat.gmm.means = Matrix::Zero(64, 60);
  flat.gmm.variances = Matrix::Ones(64, 60);
  IVectorExtractor ext = InitExtractor(flat, 300, 9);
  CHECK(ext.subspace.rows() == 3840);
  CHECK(ext.subspace.cols() == 300);
  CHECK(ext.digit == 4);
  CHECK_THROWS_AS(InitExtractor(flat, 0, 9), ConfigError);
}

TEST_CASE("aggregation and average uncertainty") {
  std::vector<IVectorPosterior> two(2);
  two[0].mean = Vector::Zero(2);
  two[0].covariance = Matrix::Identity(2, 2);
  two[1].mean = Vector::Zero(2);
  two[1].covariance = 3.0 * Matrix::Identity(2, 2);
  CHECK((AverageUncertainty(two) - 2.0 * Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK((AverageUncertainty(std::span(two).first(1)) - two[0].covariance).norm() == 0.0);

  Rng rng(3);
  std::vector<IVectorPosterior> many(50);
  for (auto &p : many) {
    p.mean = rng.NormalVector(3);
    Matrix a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = rng.Normal();
    p.covariance = a * a.transpose();
  }
  Matrix sum_cov = Matrix::Zero(3, 3), second = Matrix::Zero(3, 3);
  Vector sum_mean = Vector::Zero(3);
  for (const auto &p : many) {
    sum_cov += p.covariance;
    sum_mean += p.mean;
  }
  const Vector ybar = sum_mean / 50.0;
  for (const auto &p : many) second += (p.mean - ybar) * (p.mean - ybar).transpose();
  CHECK((AverageUncertainty(many) - sum_cov / 50.0).cwiseAbs().maxCoeff() < 1e-12);
  AggregatedPosterior agg = AggregatePosteriors(many);
  CHECK((agg.mean - ybar).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((agg.covariance - (second + sum_cov) / 50.0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(AverageUncertainty({}), EmptyInput);
}

TEST_CASE("minimum divergence transforms") {
  Rng rng(4);
  IVectorExtractor ext = RandomExtractor(&rng, 2, 2, 2);

  // Posteriors with zero mean and covariance 4I: T doubles.
  std::vector<IVectorPosterior> wide(1);
  wide[0].mean = Vector::Zero(2);
  wide[0].covariance = 4.0 * Matrix::Identity(2, 2);
  IVectorExtractor scaled = MinimumDivergence(ext, wide);
  CHECK((scaled.subspace - 2.0 * ext.subspace).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((scaled.mean - ext.mean).cwiseAbs().maxCoeff() < 1e-12);

  // Already standard: unchanged.
  std::vector<IVectorPosterior> unit(2);
  unit[0].mean = Vector::Zero(2);
  unit[0].covariance = Matrix::Identity(2, 2);
  unit[1] = unit[0];
  IVectorExtractor same = MinimumDivergence(ext, unit);
  CHECK((same.subspace - ext.subspace).cwiseAbs().maxCoeff() < 1e-9);

  // A nonzero mean moves into the extractor mean.
  std::vector<IVectorPosterior> shifted = unit;
  shifted[0].mean = Vector::Constant(2, 0.5);
  shifted[1].mean = Vector::Constant(2, 0.5);
  IVectorExtractor moved = MinimumDivergence(ext, shifted);
  CHECK((moved.mean - (ext.mean + ext.subspace * Vector::Constant(2, 0.5))).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("training on data with a strong subspace") {
  const int F = 2, C = 2, R = 1;
  Rng rng(5);
  FlatGmm flat;
  flat.gmm.weights = Vector::Constant(C, 0.5);
  flat.gmm.means = Matrix::Zero(C, F);
  flat.gmm.variances = Matrix::Ones(C, F);
  flat.state_offsets = {0, C};
  Vector t_true(C * F);
  t_true << 3.0, -2.0, 1.0, 2.5;
  std::vector<BaumWelchStats> stats;
  for (int u = 0; u < 200; ++u) {
    const double y = rng.Normal();
    BaumWelchStats st;
    st.zero_order = Vector::Constant(C, 10.0);
    st.first_order.resize(C * F);
    for (int i = 0; i < C * F; ++i) st.first_order[i] = 10.0 * t_true[i] * y + std::sqrt(10.0) * rng.Normal();
    stats.push_back(st);
  }
  ExtractorTrainConfig cfg;
  cfg.rank = R;
  cfg.num_iters = 6;
  cfg.seed = 3;
  ExtractorTrainLog log;
  IVectorExtractor ext = TrainExtractor(stats, flat, cfg, &log);
  for (std::size_t i = 1; i < log.evidence.size(); ++i)
    CHECK(log.evidence[i] >= log.evidence[i - 1] - 1e-6);
  const double cosine = std::abs(ext.subspace.col(0).normalized().dot(t_true.normalized()));
  CHECK(cosine > 0.999);

  // Replacing T by zero lowers the evidence.
  IVectorExtractor flat_ext = ext;
  flat_ext.subspace.setZero();
  double with = 0.0, without = 0.0;
  for (const auto &st : stats) {
    with += Evidence(st, ext);
    without += Evidence(st, flat_ext);
  }
  CHECK(with > without);

  cfg.rank = 0;
  CHECK_THROWS_AS(TrainExtractor(stats, flat, cfg), ConfigError);
}

TEST_CASE("parallel extraction matches serial") {
  Rng rng(6);
  IVectorExtractor ext = RandomExtractor(&rng, 3, 2, 2);
  std::vector<BaumWelchStats> stats;
  for (int i = 0; i < 40; ++i) stats.push_back(RandomStats(&rng, 3, 2));
  auto serial = ExtractAll(stats, ext, 1);
  auto parallel = ExtractAll(stats, ext, 8);
  for (int i = 0; i < 40; ++i) {
    CHECK(serial[i].mean == parallel[i].mean);
    CHECK(serial[i].covariance == parallel[i].covariance);
  }
}

}  // namespace digitvec
