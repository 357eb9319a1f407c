// digitvec/scoring.cc

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

#include "digitvec/scoring.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "digitvec/error.h"
#include "digitvec/log.h"

namespace digitvec {

std::vector<int> EnrollModel::MissingDigits(int num_digits) const {
  std::vector<int> missing;
  for (int d = 0; d < num_digits; ++d)
    if (!digits.count(d)) missing.push_back(d);
  return missing;
}

EnrollModel AverageEnrollment(const std::string &id,
                              const std::vector<DigitVector> &vectors) {
  if (vectors.empty()) throw EmptyInput("no enrollment vectors for model " + id);
  EnrollModel model;
  model.id = id;
  for (const auto &[digit, v] : vectors) {
    auto it = model.digits.find(digit);
    if (it == model.digits.end()) {
      model.digits.emplace(digit, v);
      model.counts[digit] = 1;
    } else {
      if (it->second.size() != v.size()) throw ShapeError("enrollment dimensions differ");
      it->second += v;
      model.counts[digit]++;
    }
  }
  for (auto &[digit, sum] : model.digits) sum /= model.counts[digit];
  return model;
}

double CosineScore(const Vector &a, const Vector &b) {
  if (a.size() != b.size()) throw ShapeError("cosine of vectors of different sizes");
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw ZeroVector("cosine score of a zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::vector<std::pair<int, double>> PerDigitScores(const EnrollModel &model,
                                                   const std::vector<DigitVector> &test) {
  std::vector<std::pair<int, double>> out;
  for (const auto &[digit, v] : test) {
    auto it = model.digits.find(digit);
    if (it == model.digits.end()) continue;
    out.emplace_back(digit, CosineScore(it->second, v));
  }
  return out;
}

double ScoreTransformedTrial(const EnrollModel &model,
                             const std::vector<DigitVector> &test) {
  auto scores = PerDigitScores(model, test);
  if (scores.empty())
    throw IncompatibleTrial("model " + model.id + " has none of the test digits");
  double sum = 0.0;
  for (const auto &s : scores) sum += s.second;
  return sum / static_cast<double>(scores.size());
}

double ScoreTrial(const EnrollModel &model, const std::vector<DigitVector> &test,
                  const std::map<int, TransformChain> &chains) {
  std::vector<DigitVector> transformed;
  transformed.reserve(test.size());
  for (const auto &[digit, v] : test) {
    auto it = chains.find(digit);
    transformed.emplace_back(digit, it == chains.end() ? v : it->second.Apply(v));
  }
  return ScoreTransformedTrial(model, transformed);
}

ScoreStats ComputeScoreStats(std::vector<double> scores, int top_k) {
  if (scores.empty()) throw EmptyInput("no cohort scores");
  if (top_k > 0 && static_cast<std::size_t>(top_k) < scores.size()) {
    std::partial_sort(scores.begin(), scores.begin() + top_k, scores.end(),
                      std::greater<>());
    scores.resize(top_k);
  }
  ScoreStats st;
  st.count = static_cast<int>(scores.size());
  double sum = 0.0;
  for (double s : scores) sum += s;
  st.mean = sum / st.count;
  double sq = 0.0;
  for (double s : scores) sq += (s - st.mean) * (s - st.mean);
  st.stddev = std::sqrt(sq / st.count);
  if (st.stddev < kScoreStdFloor) {
    DV_WARN << "cohort score deviation " << st.stddev << " floored to " << kScoreStdFloor;
    st.stddev = kScoreStdFloor;
  }
  return st;
}

double SNorm(double raw, const ScoreStats &enroll_side, const ScoreStats &test_side) {
  const double se = std::max(enroll_side.stddev, kScoreStdFloor);
  const double st = std::max(test_side.stddev, kScoreStdFloor);
  return 0.5 * ((raw - enroll_side.mean) / se + (raw - test_side.mean) / st);
}

ScoreStats CohortSet::Stats(int digit, const Vector &v, const std::string &gender) const {
  bool gender_known = false;
  if (!gender.empty())
    for (const auto &c : speakers)
      if (c.gender == gender && c.digits.count(digit)) gender_known = true;
  std::vector<double> scores;
  for (const auto &c : speakers) {
    if (gender_known && c.gender != gender) continue;
    auto it = c.digits.find(digit);
    if (it == c.digits.end()) continue;
    scores.push_back(CosineScore(v, it->second));
  }
  return ComputeScoreStats(std::move(scores), top_k);
}

CohortSet BuildCohorts(const std::map<std::string, std::vector<DigitVector>> &by_speaker,
                       const std::map<std::string, std::string> &gender_of, int top_k) {
  CohortSet cohort;
  cohort.top_k = top_k;
  for (const auto &[speaker, vectors] : by_speaker) {
    if (vectors.empty()) continue;
    EnrollModel avg = AverageEnrollment(speaker, vectors);
    CohortSpeaker c;
    c.speaker = speaker;
    auto g = gender_of.find(speaker);
    if (g != gender_of.end()) c.gender = g->second;
    c.digits = std::move(avg.digits);
    cohort.speakers.push_back(std::move(c));
  }
  if (cohort.speakers.size() < 10)
    DV_WARN << "cohort has only " << cohort.speakers.size() << " speakers";
  return cohort;
}

double SNormTrial(const EnrollModel &model, const std::string &test_gender,
                  const std::vector<DigitVector> &test, const CohortSet &cohort) {
  double sum = 0.0;
  int count = 0;
  for (const auto &[digit, v] : test) {
    auto it = model.digits.find(digit);
    if (it == model.digits.end()) continue;
    const double raw = CosineScore(it->second, v);
    ScoreStats enroll_side = cohort.Stats(digit, it->second, model.gender);
    ScoreStats test_side = cohort.Stats(digit, v, test_gender);
    sum += SNorm(raw, enroll_side, test_side);
    ++count;
  }
  if (count == 0)
    throw IncompatibleTrial("model " + model.id + " has none of the test digits");
  return sum / count;
}

std::vector<TrialScore> FuseScores(const std::vector<std::vector<TrialScore>> &systems,
                                   std::vector<double> weights) {
  if (systems.empty()) throw EmptyInput("no score lists to fuse");
  if (weights.empty()) weights.assign(systems.size(), 1.0);
  if (weights.size() != systems.size())
    throw TrialMismatch("fusion weights do not match the number of systems");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0.0)) throw ConfigError("fusion weights must have a positive sum");
  const std::size_t n = systems.front().size();
  for (const auto &sys : systems)
    if (sys.size() != n) throw TrialMismatch("score lists have different lengths");
  std::vector<TrialScore> fused = systems.front();
  for (std::size_t i = 0; i < n; ++i) {
    double raw = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < systems.size(); ++k) {
      const TrialScore &t = systems[k][i];
      if (t.enroll_id != fused[i].enroll_id || t.test_id != fused[i].test_id)
        throw TrialMismatch("trial " + std::to_string(i) + " differs between systems");
      raw += weights[k] * t.raw;
      norm += weights[k] * t.normalized;
    }
    fused[i].raw = raw / wsum;
    fused[i].normalized = norm / wsum;
  }
  return fused;
}

}  // namespace digitvec
