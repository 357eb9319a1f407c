// digitvec/hmm.h

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

#ifndef DIGITVEC_HMM_H_
#define DIGITVEC_HMM_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "digitvec/features.h"
#include "digitvec/gmm.h"

namespace digitvec {

constexpr int kNumDigits = 10;

/// Left-to-right, no-skip HMM for one digit.  State s emits from
/// states[s]; transitions(s, s) is the self-loop and transitions(s, s+1) the
/// advance.  The final state has self-loop 1 inside the digit: leaving a
/// digit for the next one in a concatenated model carries no cost.
struct DigitHmm {
  int digit = 0;
  std::vector<DiagGmm> states;
  Matrix transitions;
  /// Frames assigned to each state in the last training pass; used when
  /// flattening.
  Vector occupancy;

  int NumStates() const { return static_cast<int>(states.size()); }
  /// C_d, the total number of Gaussians across states.
  int NumComponents() const;
};

/// One HMM per digit (index == digit label) plus the variance floor used
/// during training.
struct HmmSet {
  std::vector<DigitHmm> hmms;
  Vector variance_floor;

  int NumDigits() const { return static_cast<int>(hmms.size()); }
  const DigitHmm &operator[](int digit) const { return hmms.at(digit); }
  DigitHmm &operator[](int digit) { return hmms.at(digit); }
};

struct DigitSpan {
  int digit = 0;
  /// Half-open range of voiced-frame indices.
  int begin = 0;
  int end = 0;
};

/// Hard assignment of the voiced frames of one utterance to HMM states.
struct Alignment {
  std::string utterance_id;
  /// Per voiced frame: position in the digit string and state in that digit.
  std::vector<int> occurrence;
  std::vector<int> state;
  /// Original (pre-VAD) frame index of each voiced frame.
  std::vector<int> frame;
  std::vector<DigitSpan> spans;
  double log_likelihood = 0.0;
};

/// GMM obtained by concatenating the state GMMs of a digit HMM; component
/// c = s * C_{d,s} + k for state s and component k.
struct FlatGmm {
  int digit = 0;
  DiagGmm gmm;
  /// Index of the first component of each state, plus a final end marker.
  std::vector<int> state_offsets;
};

struct HmmTrainConfig {
  int num_digits = kNumDigits;
  int num_states = 8;
  int num_components = 8;
  int num_iters = 5;
  /// EM passes over each state's frames per Viterbi iteration.
  int gmm_em_iters = 2;
  bool update_transitions = true;
  /// Variance floor as a fraction of the global per-dimension variance.
  double variance_floor_scale = 1e-4;
  std::uint64_t seed = 0;
  int jobs = 1;

  void Validate() const;
};

struct HmmTrainLog {
  /// Total Viterbi-path log-likelihood at each iteration's alignment step.
  std::vector<double> log_likelihood;
  int skipped_utterances = 0;
  int starved_states = 0;
};

/// Flat start: uniform segmentation of each utterance over its digits and
/// states, k-means GMMs per state, stay/advance transitions of 0.5.
/// Throws MissingDigit when a digit in [0, num_digits) never occurs.
HmmSet InitDigitHmms(const std::vector<FeatureMatrix> &corpus,
                     const HmmTrainConfig &cfg);

/// Forced alignment of `frames` (voiced frames only) to the concatenation of
/// the HMMs of `digits`.  Ties prefer staying in the current state.
/// Throws AlignmentInfeasible when there are fewer frames than states.
Alignment ViterbiAlignFrames(const Matrix &frames, const std::vector<int> &digits,
                             const HmmSet &hmms);
Alignment ViterbiAlign(const FeatureMatrix &features, const HmmSet &hmms);

/// Score of a given state path under the concatenated model (emissions plus
/// transitions); -inf when the path violates the topology.
double PathLogLikelihood(const Matrix &frames, const std::vector<int> &digits,
                         const HmmSet &hmms, const std::vector<int> &occurrence,
                         const std::vector<int> &state);

/// Re-estimates state GMMs, transitions and occupancies from alignments.
/// `frames[i]` are the voiced frames matching `alignments[i]`.  States with
/// no frames are recovered from a neighbour (with a warning) and counted in
/// `log`.
void ReestimateFromAlignments(const std::vector<Matrix> &frames,
                              const std::vector<const Alignment *> &alignments,
                              const std::vector<std::vector<int>> &digit_strings,
                              const HmmTrainConfig &cfg, HmmSet *hmms,
                              HmmTrainLog *log);

/// Viterbi training; `cfg.num_iters == 0` leaves the models untouched.
HmmTrainLog ViterbiTrain(const std::vector<FeatureMatrix> &corpus,
                         const HmmTrainConfig &cfg, HmmSet *hmms);

FlatGmm FlattenHmm(const DigitHmm &hmm);

/// Text dump, one line per voiced frame: `utt_id frame_idx digit state`.
void WriteAlignmentText(std::ostream &os, const Alignment &alignment,
                        const std::vector<int> &digits);

}  // namespace digitvec

#endif  // DIGITVEC_HMM_H_
