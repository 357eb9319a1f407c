// digitvec/stats.h

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

#ifndef DIGITVEC_STATS_H_
#define DIGITVEC_STATS_H_

#include <string>
#include <vector>

#include "digitvec/hmm.h"

namespace digitvec {

/// Frame posteriors over the C_d flattened components of one digit.  Only the
/// components of the aligned state are nonzero in each row.
struct PosteriorMatrix {
  int digit = 0;
  Matrix gamma;
};

/// Zero-order and mean-centralized first-order statistics of one digit
/// occurrence.  `first_order` is stacked per component: entries
/// [c*F, (c+1)*F) belong to component c.
struct BaumWelchStats {
  int digit = 0;
  Vector zero_order;
  Vector first_order;
  std::string utterance_id;
  int occurrence = 0;

  Eigen::Index NumComponents() const { return zero_order.size(); }
  Eigen::Index FeatureDim() const {
    return zero_order.size() == 0 ? 0 : first_order.size() / zero_order.size();
  }
  /// Sums two statistics of the same digit over disjoint frame sets.
  BaumWelchStats &operator+=(const BaumWelchStats &other);
};

/// Posteriors for the frames of one digit occurrence.  `states[t]` is the
/// aligned state of frame t.  Normalization is within the aligned state.
PosteriorMatrix FramePosteriors(const Matrix &frames, const std::vector<int> &states,
                                const DigitHmm &hmm);

/// N_c = sum_t gamma_tc and f_c = sum_t gamma_tc (o_t - mu_c) with the
/// flattened means.  Throws ShapeError on mismatched dimensions.
BaumWelchStats AccumulateStats(const Matrix &frames, const PosteriorMatrix &posteriors,
                               const FlatGmm &flat);

/// Statistics of every digit occurrence of an aligned utterance, in digit
/// string order.
std::vector<BaumWelchStats> CollectOccurrenceStats(const FeatureMatrix &features,
                                                   const Alignment &alignment,
                                                   const HmmSet &hmms,
                                                   const std::vector<FlatGmm> &flats);

}  // namespace digitvec

#endif  // DIGITVEC_STATS_H_
