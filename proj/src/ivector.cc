// digitvec/ivector.cc

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

#include "digitvec/ivector.h"

#include <cmath>
#include <numbers>

#include "digitvec/error.h"
#include "digitvec/log.h"
#include "digitvec/parallel.h"

namespace digitvec {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void CheckCompatible(const BaumWelchStats &stats, const IVectorExtractor &ext) {
  if (stats.digit != ext.digit)
    throw ShapeError("statistics of digit " + std::to_string(stats.digit) +
                     " given to the extractor of digit " + std::to_string(ext.digit));
  if (stats.zero_order.size() != ext.NumComponents() ||
      stats.first_order.size() != ext.SupervectorDim())
    throw ShapeError("statistics dimensions (" + std::to_string(stats.zero_order.size()) +
                     " components, " + std::to_string(stats.first_order.size()) +
                     " first-order) do not match the extractor (" +
                     std::to_string(ext.NumComponents()) + ", " +
                     std::to_string(ext.SupervectorDim()) + ")");
}

}  // namespace

PosteriorExtractor::PosteriorExtractor(const IVectorExtractor &ext) : ext_(ext) {
  const Eigen::Index dim = ext.FeatureDim();
  weighted_subspace_ = ext.variances.cwiseInverse().asDiagonal() * ext.subspace;
  component_terms_.resize(ext.NumComponents());
  for (Eigen::Index c = 0; c < ext.NumComponents(); ++c)
    component_terms_[c] = ext.subspace.middleRows(c * dim, dim).transpose() *
                          weighted_subspace_.middleRows(c * dim, dim);
}

PosteriorExtractor::Terms PosteriorExtractor::Compute(const BaumWelchStats &stats) const {
  CheckCompatible(stats, ext_);
  const Eigen::Index dim = ext_.FeatureDim(), rank = ext_.Rank();
  Terms terms;
  terms.centred = stats.first_order;
  Vector offset = ext_.mean - ext_.ubm_means;
  terms.precision = Matrix::Identity(rank, rank);
  for (Eigen::Index c = 0; c < ext_.NumComponents(); ++c) {
    const double n = stats.zero_order(c);
    if (n == 0.0) continue;
    terms.centred.segment(c * dim, dim) -= n * offset.segment(c * dim, dim);
    terms.precision += n * component_terms_[c];
  }
  terms.linear = weighted_subspace_.transpose() * terms.centred;
  return terms;
}

IVectorPosterior PosteriorExtractor::Extract(const BaumWelchStats &stats) const {
  Terms terms = Compute(stats);
  Eigen::LLT<Matrix> llt(terms.precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("i-vector posterior precision is not positive definite");
  IVectorPosterior post;
  post.digit = stats.digit;
  post.utterance_id = stats.utterance_id;
  post.occurrence = stats.occurrence;
  post.covariance =
      Symmetrized(llt.solve(Matrix::Identity(ext_.Rank(), ext_.Rank())));
  post.mean = llt.solve(terms.linear);
  return post;
}

double PosteriorExtractor::Evidence(const BaumWelchStats &stats) const {
  Terms terms = Compute(stats);
  const Eigen::Index dim = ext_.FeatureDim();
  double total = 0.0;
  for (Eigen::Index c = 0; c < ext_.NumComponents(); ++c) {
    const double n = stats.zero_order(c);
    if (n <= 0.0) continue;
    for (Eigen::Index f = 0; f < dim; ++f) {
      const Eigen::Index i = c * dim + f;
      const double var = n * ext_.variances(i);
      total -= 0.5 * (terms.centred(i) * terms.centred(i) / var + std::log(var) + kLog2Pi);
    }
  }
  Eigen::LLT<Matrix> llt(terms.precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("i-vector posterior precision is not positive definite");
  const double log_det =
      2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  total += 0.5 * terms.linear.dot(llt.solve(terms.linear)) - 0.5 * log_det;
  return total;
}

IVectorPosterior ExtractPosterior(const BaumWelchStats &stats,
                                  const IVectorExtractor &ext) {
  return PosteriorExtractor(ext).Extract(stats);
}

double Evidence(const BaumWelchStats &stats, const IVectorExtractor &ext) {
  return PosteriorExtractor(ext).Evidence(stats);
}

IVectorExtractor InitExtractor(const FlatGmm &flat, int rank, std::uint64_t seed) {
  const Eigen::Index num_comp = flat.gmm.NumComponents(), dim = flat.gmm.Dim();
  const Eigen::Index sv_dim = num_comp * dim;
  if (rank < 1 || rank > sv_dim)
    throw ConfigError("i-vector rank " + std::to_string(rank) +
                      " must be in [1, " + std::to_string(sv_dim) + "]");
  IVectorExtractor ext;
  ext.digit = flat.digit;
  ext.feature_dim = dim;
  ext.seed = seed;
  ext.ubm_means.resize(sv_dim);
  ext.variances.resize(sv_dim);
  for (Eigen::Index c = 0; c < num_comp; ++c) {
    ext.ubm_means.segment(c * dim, dim) = flat.gmm.means.row(c).transpose();
    ext.variances.segment(c * dim, dim) = flat.gmm.variances.row(c).transpose();
  }
  ext.mean = ext.ubm_means;
  Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(flat.digit)));
  ext.subspace.resize(sv_dim, rank);
  for (Eigen::Index r = 0; r < sv_dim; ++r) {
    const double scale = 1e-2 * std::sqrt(ext.variances(r));
    for (Eigen::Index k = 0; k < rank; ++k) ext.subspace(r, k) = scale * rng.Normal();
  }
  return ext;
}

AggregatedPosterior AggregatePosteriors(std::span<const IVectorPosterior> posteriors) {
  if (posteriors.empty()) throw EmptyInput("no posteriors to aggregate");
  const Eigen::Index rank = posteriors.front().mean.size();
  const double n = static_cast<double>(posteriors.size());
  AggregatedPosterior agg;
  agg.mean = Vector::Zero(rank);
  for (const auto &p : posteriors) agg.mean += p.mean;
  agg.mean /= n;
  agg.covariance = Matrix::Zero(rank, rank);
  for (const auto &p : posteriors) {
    Vector d = p.mean - agg.mean;
    agg.covariance += d * d.transpose() + p.covariance;
  }
  agg.covariance = Symmetrized(agg.covariance / n);
  return agg;
}

Matrix AverageUncertainty(std::span<const IVectorPosterior> posteriors) {
  if (posteriors.empty()) throw EmptyInput("average uncertainty of an empty set");
  Matrix sum = Matrix::Zero(posteriors.front().covariance.rows(),
                            posteriors.front().covariance.cols());
  for (const auto &p : posteriors) sum += p.covariance;
  return Symmetrized(sum / static_cast<double>(posteriors.size()));
}

IVectorExtractor MinimumDivergence(const IVectorExtractor &ext,
                                   std::span<const IVectorPosterior> posteriors) {
  AggregatedPosterior agg = AggregatePosteriors(posteriors);
  Eigen::LLT<Matrix> llt(agg.covariance);
  if (llt.info() != Eigen::Success)
    throw NumericalError("aggregated posterior covariance is not positive definite");
  IVectorExtractor out = ext;
  out.mean = ext.mean + ext.subspace * agg.mean;
  out.subspace = ext.subspace * Matrix(llt.matrixL());
  return out;
}

std::vector<IVectorPosterior> ExtractAll(const std::vector<BaumWelchStats> &stats,
                                         const IVectorExtractor &ext, int jobs) {
  PosteriorExtractor extractor(ext);
  std::vector<IVectorPosterior> out(stats.size());
  ParallelFor(stats.size(), jobs,
              [&](std::size_t i) { out[i] = extractor.Extract(stats[i]); });
  return out;
}

namespace {

double TotalEvidence(const std::vector<BaumWelchStats> &stats,
                     const IVectorExtractor &ext, int jobs) {
  PosteriorExtractor extractor(ext);
  std::vector<double> parts(stats.size());
  ParallelFor(stats.size(), jobs,
              [&](std::size_t i) { parts[i] = extractor.Evidence(stats[i]); });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

double DivergenceResidual(const AggregatedPosterior &agg) {
  const Eigen::Index rank = agg.covariance.rows();
  return (agg.covariance - Matrix::Identity(rank, rank)).norm() + agg.mean.norm();
}

}  // namespace

IVectorExtractor TrainExtractor(const std::vector<BaumWelchStats> &stats,
                                const FlatGmm &flat,
                                const ExtractorTrainConfig &cfg,
                                ExtractorTrainLog *log) {
  IVectorExtractor ext = InitExtractor(flat, cfg.rank, cfg.seed);
  if (cfg.num_iters < 0) throw ConfigError("i-vector num_iters must be >= 0");
  if (stats.empty()) throw EmptyInput("no statistics for digit " + std::to_string(flat.digit));
  if (static_cast<int>(stats.size()) < cfg.rank)
    DV_WARN << "digit " << flat.digit << ": only " << stats.size()
            << " occurrences for rank " << cfg.rank;
  for (const auto &s : stats) CheckCompatible(s, ext);

  const Eigen::Index num_comp = ext.NumComponents(), dim = ext.FeatureDim();
  const Eigen::Index rank = ext.Rank();
  ExtractorTrainLog local_log;
  ExtractorTrainLog &out_log = log != nullptr ? *log : local_log;
  ext.evidence_log.push_back(TotalEvidence(stats, ext, cfg.jobs));
  out_log.evidence.push_back(ext.evidence_log.back());

  for (int iter = 0; iter < cfg.num_iters; ++iter) {
    std::vector<IVectorPosterior> posts = ExtractAll(stats, ext, cfg.jobs);

    // M-step: T_c = (sum_i f_ic E[y_i]^T) (sum_i N_ic E[y_i y_i^T])^-1.
    std::vector<Matrix> second(num_comp, Matrix::Zero(rank, rank));
    Matrix cross = Matrix::Zero(ext.SupervectorDim(), rank);
    Vector offset = ext.mean - ext.ubm_means;
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const Matrix moment = posts[i].covariance + posts[i].mean * posts[i].mean.transpose();
      for (Eigen::Index c = 0; c < num_comp; ++c) {
        const double n = stats[i].zero_order(c);
        if (n == 0.0) continue;
        second[c] += n * moment;
        Vector centred = stats[i].first_order.segment(c * dim, dim) -
                         n * offset.segment(c * dim, dim);
        cross.middleRows(c * dim, dim) += centred * posts[i].mean.transpose();
      }
    }
    for (Eigen::Index c = 0; c < num_comp; ++c) {
      Eigen::LLT<Matrix> llt(second[c]);
      if (llt.info() != Eigen::Success) {
        DV_WARN << "digit " << ext.digit << " component " << c
                << ": singular M-step system, adding ridge 1e-8";
        llt.compute(second[c] + 1e-8 * Matrix::Identity(rank, rank));
      }
      ext.subspace.middleRows(c * dim, dim) =
          llt.solve(cross.middleRows(c * dim, dim).transpose()).transpose();
    }

    if (cfg.minimum_divergence) {
      double residual = 0.0;
      int steps = 0;
      for (;; ++steps) {
        posts = ExtractAll(stats, ext, cfg.jobs);
        residual = DivergenceResidual(AggregatePosteriors(posts));
        if (residual < cfg.md_tolerance || steps >= cfg.md_max_steps) break;
        ext = MinimumDivergence(ext, posts);
      }
      if (residual >= cfg.md_tolerance)
        DV_WARN << "digit " << ext.digit << ": minimum divergence stopped after "
                << steps << " steps with residual " << residual;
      out_log.md_residual.push_back(residual);
      out_log.md_steps.push_back(steps);
    }
    ext.evidence_log.push_back(TotalEvidence(stats, ext, cfg.jobs));
    out_log.evidence.push_back(ext.evidence_log.back());
    DV_LOG << "digit " << ext.digit << " i-vector iteration " << iter
           << ": evidence " << ext.evidence_log.back();
  }
  return ext;
}

}  // namespace digitvec
