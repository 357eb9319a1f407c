// digitvec/scoring.h

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

#ifndef DIGITVEC_SCORING_H_
#define DIGITVEC_SCORING_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "digitvec/compensation.h"

namespace digitvec {

/// A (digit, i-vector) pair; utterances are sequences of these in digit
/// string order.
using DigitVector = std::pair<int, Vector>;

/// Speaker model: the mean transformed enrollment i-vector of each digit.
struct EnrollModel {
  std::string id;
  std::string gender;
  std::map<int, Vector> digits;
  std::map<int, int> counts;

  /// Digits in [0, num_digits) without an enrollment vector.
  std::vector<int> MissingDigits(int num_digits = 10) const;
};

/// Averages already-transformed enrollment vectors per digit.  Throws
/// EmptyInput when `vectors` is empty.
EnrollModel AverageEnrollment(const std::string &id,
                              const std::vector<DigitVector> &vectors);

/// a.b / (|a| |b|).  Throws ZeroVector / ShapeError.
double CosineScore(const Vector &a, const Vector &b);

/// Cosine score of every test occurrence whose digit the model has, in
/// order; occurrences of digits missing from the model are skipped.
std::vector<std::pair<int, double>> PerDigitScores(const EnrollModel &model,
                                                   const std::vector<DigitVector> &test);

/// Mean per-occurrence cosine score.  `test` holds raw i-vectors; each is
/// passed through the chain of its digit first.  Throws IncompatibleTrial
/// when no test digit is enrolled.
double ScoreTrial(const EnrollModel &model, const std::vector<DigitVector> &test,
                  const std::map<int, TransformChain> &chains);

/// Same as ScoreTrial for test vectors that are already transformed.
double ScoreTransformedTrial(const EnrollModel &model,
                             const std::vector<DigitVector> &test);

struct ScoreStats {
  double mean = 0.0;
  double stddev = 1.0;
  int count = 0;
};

constexpr double kScoreStdFloor = 1e-6;

/// Mean and population standard deviation, the latter floored at
/// kScoreStdFloor (with a warning).  `top_k` > 0 keeps only the k highest
/// scores.  Throws EmptyInput for no scores.
ScoreStats ComputeScoreStats(std::vector<double> scores, int top_k = 0);

/// Symmetric two-sided normalization: 0.5 * ((s - mu_e)/sigma_e +
/// (s - mu_t)/sigma_t).
double SNorm(double raw, const ScoreStats &enroll_side, const ScoreStats &test_side);

/// One pseudo-speaker of the normalization cohort.
struct CohortSpeaker {
  std::string speaker;
  std::string gender;
  /// Transformed, speaker-averaged i-vector per digit.
  std::map<int, Vector> digits;
};

struct CohortSet {
  std::vector<CohortSpeaker> speakers;
  int top_k = 0;

  /// Score statistics of `v` (digit `digit`) against the cohort speakers of
  /// the given gender; an empty gender, or one absent from the cohort, uses
  /// everyone.
  ScoreStats Stats(int digit, const Vector &v, const std::string &gender) const;
};

/// Speaker-averaged transformed training i-vectors become the cohort.
/// `by_speaker` maps speaker -> transformed (digit, vector) list.  Warns
/// when fewer than 10 speakers are available.
CohortSet BuildCohorts(const std::map<std::string, std::vector<DigitVector>> &by_speaker,
                       const std::map<std::string, std::string> &gender_of,
                       int top_k = 0);

/// Digit-dependent S-norm: each per-occurrence score is normalized with the
/// cohort statistics of its digit, then averaged.
double SNormTrial(const EnrollModel &model, const std::string &test_gender,
                  const std::vector<DigitVector> &test, const CohortSet &cohort);

/// One scored trial.
struct TrialScore {
  std::string enroll_id;
  std::string test_id;
  std::string digit_string;
  std::optional<bool> target;
  double raw = 0.0;
  double normalized = 0.0;
};

/// Weighted mean of aligned score lists (weights normalized to sum 1,
/// default equal).  Throws TrialMismatch when the lists disagree in length
/// or keys.
std::vector<TrialScore> FuseScores(const std::vector<std::vector<TrialScore>> &systems,
                                   std::vector<double> weights = {});

}  // namespace digitvec

#endif  // DIGITVEC_SCORING_H_
