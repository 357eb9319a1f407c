// digitvec/stats.cc

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

#include "digitvec/stats.h"

#include <cmath>

#include "digitvec/error.h"

namespace digitvec {

BaumWelchStats &BaumWelchStats::operator+=(const BaumWelchStats &other) {
  if (digit != other.digit || zero_order.size() != other.zero_order.size() ||
      first_order.size() != other.first_order.size())
    throw ShapeError("cannot add statistics of different shapes or digits");
  zero_order += other.zero_order;
  first_order += other.first_order;
  return *this;
}

PosteriorMatrix FramePosteriors(const Matrix &frames, const std::vector<int> &states,
                                const DigitHmm &hmm) {
  if (static_cast<Eigen::Index>(states.size()) != frames.rows())
    throw ShapeError("state sequence length does not match frame count");
  std::vector<int> offsets{0};
  for (const DiagGmm &g : hmm.states)
    offsets.push_back(offsets.back() + static_cast<int>(g.NumComponents()));

  PosteriorMatrix post;
  post.digit = hmm.digit;
  post.gamma = Matrix::Zero(frames.rows(), offsets.back());
  for (int s = 0; s < hmm.NumStates(); ++s) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < frames.rows(); ++t)
      if (states[t] == s) rows.push_back(t);
    if (rows.empty()) continue;
    Matrix sub(static_cast<Eigen::Index>(rows.size()), frames.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(r) = frames.row(rows[r]);
    Matrix loglike = hmm.states[s].WeightedComponentLogLikes(sub);
    std::vector<double> buf(loglike.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (Eigen::Index c = 0; c < loglike.cols(); ++c) buf[c] = loglike(r, c);
      const double norm = LogSumExp(buf);
      for (Eigen::Index c = 0; c < loglike.cols(); ++c)
        post.gamma(rows[r], offsets[s] + c) = std::exp(loglike(r, c) - norm);
    }
  }
  for (int s : states)
    if (s < 0 || s >= hmm.NumStates())
      throw ShapeError("aligned state " + std::to_string(s) + " out of range");
  return post;
}

BaumWelchStats AccumulateStats(const Matrix &frames, const PosteriorMatrix &posteriors,
                               const FlatGmm &flat) {
  const Eigen::Index num_comp = flat.gmm.NumComponents();
  const Eigen::Index dim = flat.gmm.Dim();
  if (posteriors.gamma.rows() != frames.rows() || posteriors.gamma.cols() != num_comp ||
      frames.cols() != dim)
    throw ShapeError("posteriors, frames and flat GMM dimensions disagree");
  BaumWelchStats stats;
  stats.digit = flat.digit;
  stats.zero_order = posteriors.gamma.colwise().sum().transpose();
  // gamma^T * frames gives sum_t gamma_tc o_t; centralize with N_c mu_c.
  Matrix first = posteriors.gamma.transpose() * frames;
  first -= stats.zero_order.asDiagonal() * flat.gmm.means;
  stats.first_order.resize(num_comp * dim);
  for (Eigen::Index c = 0; c < num_comp; ++c)
    stats.first_order.segment(c * dim, dim) = first.row(c).transpose();
  return stats;
}

std::vector<BaumWelchStats> CollectOccurrenceStats(const FeatureMatrix &features,
                                                   const Alignment &alignment,
                                                   const HmmSet &hmms,
                                                   const std::vector<FlatGmm> &flats) {
  Matrix voiced = features.VoicedFrames();
  if (static_cast<Eigen::Index>(alignment.state.size()) != voiced.rows())
    throw ShapeError("alignment does not match voiced frames of " +
                     features.utterance_id);
  std::vector<BaumWelchStats> out;
  out.reserve(alignment.spans.size());
  for (std::size_t i = 0; i < alignment.spans.size(); ++i) {
    const DigitSpan &span = alignment.spans[i];
    const int len = span.end - span.begin;
    Matrix frames = voiced.middleRows(span.begin, len);
    std::vector<int> states(alignment.state.begin() + span.begin,
                            alignment.state.begin() + span.end);
    PosteriorMatrix post = FramePosteriors(frames, states, hmms[span.digit]);
    BaumWelchStats stats = AccumulateStats(frames, post, flats.at(span.digit));
    stats.utterance_id = features.utterance_id;
    stats.occurrence = static_cast<int>(i);
    out.push_back(std::move(stats));
  }
  return out;
}

}  // namespace digitvec
