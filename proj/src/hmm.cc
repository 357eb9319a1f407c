// digitvec/hmm.cc

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

#include "digitvec/hmm.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>

#include "digitvec/error.h"
#include "digitvec/log.h"
#include "digitvec/parallel.h"

namespace digitvec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Transition probabilities are kept inside [floor, 1 - floor].
constexpr double kTransitionFloor = 1e-4;
constexpr double kAbsoluteVarianceFloor = 1e-8;

Matrix InitialTransitions(int num_states) {
  Matrix a = Matrix::Zero(num_states, num_states);
  for (int s = 0; s + 1 < num_states; ++s) {
    a(s, s) = 0.5;
    a(s, s + 1) = 0.5;
  }
  a(num_states - 1, num_states - 1) = 1.0;
  return a;
}

void CheckDigits(const std::vector<int> &digits, const HmmSet &hmms) {
  if (digits.empty()) throw EmptyUtterance("empty digit string");
  for (int d : digits)
    if (d < 0 || d >= hmms.NumDigits() || hmms[d].NumStates() == 0)
      throw ConfigError("no HMM for digit " + std::to_string(d));
}

// Per-global-state transition scores of the concatenated model.
struct ConcatTransitions {
  std::vector<double> stay, advance;
};

ConcatTransitions BuildTransitions(const std::vector<int> &digits,
                                   const HmmSet &hmms) {
  ConcatTransitions tr;
  for (int d : digits) {
    const DigitHmm &hmm = hmms[d];
    const int num_states = hmm.NumStates();
    for (int s = 0; s < num_states; ++s) {
      if (s + 1 < num_states) {
        tr.stay.push_back(std::log(hmm.transitions(s, s)));
        tr.advance.push_back(std::log(hmm.transitions(s, s + 1)));
      } else {
        tr.stay.push_back(std::log(hmm.transitions(s, s)));
        tr.advance.push_back(0.0);
      }
    }
  }
  return tr;
}

}  // namespace

int DigitHmm::NumComponents() const {
  int total = 0;
  for (const DiagGmm &g : states) total += static_cast<int>(g.NumComponents());
  return total;
}

void HmmTrainConfig::Validate() const {
  if (num_digits < 1 || num_digits > kNumDigits)
    throw ConfigError("num_digits must be in [1, 10]");
  if (num_states < 1) throw ConfigError("num_states must be >= 1");
  if (num_components < 1) throw ConfigError("num_components must be >= 1");
  if (num_iters < 0) throw ConfigError("num_iters must be >= 0");
  if (gmm_em_iters < 0) throw ConfigError("gmm_em_iters must be >= 0");
  if (variance_floor_scale <= 0.0)
    throw ConfigError("variance_floor_scale must be positive");
}

HmmSet InitDigitHmms(const std::vector<FeatureMatrix> &corpus,
                     const HmmTrainConfig &cfg) {
  cfg.Validate();
  const int num_states = cfg.num_states;

  std::vector<Matrix> voiced(corpus.size());
  Eigen::Index dim = -1, total_frames = 0;
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    voiced[u] = corpus[u].VoicedFrames();
    if (dim < 0) dim = voiced[u].cols();
    if (voiced[u].cols() != dim) throw ShapeError("feature dimension varies across corpus");
    total_frames += voiced[u].rows();
  }
  if (total_frames < 2) throw EmptyInput("training corpus has no voiced frames");

  // Global variance for the floor.
  RowVector sum = RowVector::Zero(dim), sumsq = RowVector::Zero(dim);
  for (const Matrix &m : voiced) {
    sum += m.colwise().sum();
    sumsq += m.array().square().matrix().colwise().sum();
  }
  RowVector mean = sum / static_cast<double>(total_frames);
  RowVector var = sumsq / static_cast<double>(total_frames) - mean.cwiseProduct(mean);
  HmmSet set;
  set.variance_floor =
      (cfg.variance_floor_scale * var.transpose()).cwiseMax(kAbsoluteVarianceFloor);

  // Uniform segmentation.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> members(
      cfg.num_digits, std::vector<std::vector<std::pair<int, int>>>(num_states));
  std::vector<bool> seen(cfg.num_digits, false);
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    const auto &digits = corpus[u].digits;
    for (int d : digits)
      if (d < 0 || d >= cfg.num_digits)
        throw ConfigError("utterance " + corpus[u].utterance_id +
                          " contains digit " + std::to_string(d) +
                          " outside the model set");
    const Eigen::Index num_frames = voiced[u].rows();
    const Eigen::Index total_states =
        static_cast<Eigen::Index>(digits.size()) * num_states;
    if (digits.empty() || num_frames < total_states) {
      DV_WARN << "skipping " << corpus[u].utterance_id << " in flat start: "
              << num_frames << " voiced frames for " << total_states << " states";
      continue;
    }
    for (Eigen::Index t = 0; t < num_frames; ++t) {
      const Eigen::Index k = t * total_states / num_frames;
      const int d = digits[k / num_states];
      members[d][k % num_states].emplace_back(static_cast<int>(u),
                                              static_cast<int>(t));
      seen[d] = true;
    }
  }
  for (int d = 0; d < cfg.num_digits; ++d)
    if (!seen[d]) throw MissingDigit(d);

  set.hmms.resize(cfg.num_digits);
  for (int d = 0; d < cfg.num_digits; ++d) {
    DigitHmm &hmm = set.hmms[d];
    hmm.digit = d;
    hmm.states.resize(num_states);
    hmm.occupancy.resize(num_states);
    hmm.transitions = InitialTransitions(num_states);
  }
  ParallelFor(static_cast<std::size_t>(cfg.num_digits) * num_states, cfg.jobs,
              [&](std::size_t i) {
                const int d = static_cast<int>(i) / num_states;
                const int s = static_cast<int>(i) % num_states;
                const auto &list = members[d][s];
                Matrix frames(list.size(), dim);
                for (std::size_t r = 0; r < list.size(); ++r)
                  frames.row(r) = voiced[list[r].first].row(list[r].second);
                set.hmms[d].states[s] =
                    InitGmmKmeans(frames, cfg.num_components, set.variance_floor,
                                  DeriveSeed(cfg.seed, i));
                set.hmms[d].occupancy(s) = static_cast<double>(list.size());
              });
  return set;
}

Alignment ViterbiAlignFrames(const Matrix &frames, const std::vector<int> &digits,
                             const HmmSet &hmms) {
  CheckDigits(digits, hmms);
  std::vector<int> offsets{0};
  for (int d : digits) offsets.push_back(offsets.back() + hmms[d].NumStates());
  const int total_states = offsets.back();
  const auto num_frames = static_cast<int>(frames.rows());
  if (num_frames < total_states)
    throw AlignmentInfeasible(std::to_string(num_frames) + " frames cannot cover " +
                              std::to_string(total_states) + " states");

  // Emission log-likelihoods, computed once per distinct digit.
  std::map<int, Matrix> emissions;
  for (int d : digits) {
    if (emissions.count(d)) continue;
    const DigitHmm &hmm = hmms[d];
    Matrix em(num_frames, hmm.NumStates());
    for (int s = 0; s < hmm.NumStates(); ++s) em.col(s) = hmm.states[s].LogLikelihoods(frames);
    emissions.emplace(d, std::move(em));
  }
  std::vector<const Matrix *> state_emission(total_states);
  std::vector<int> state_col(total_states);
  for (std::size_t i = 0; i < digits.size(); ++i)
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      state_emission[k] = &emissions.at(digits[i]);
      state_col[k] = k - offsets[i];
    }
  const ConcatTransitions tr = BuildTransitions(digits, hmms);

  std::vector<double> prev(total_states, kNegInf), cur(total_states, kNegInf);
  std::vector<std::uint8_t> advanced(static_cast<std::size_t>(num_frames) * total_states, 0);
  prev[0] = (*state_emission[0])(0, state_col[0]);
  for (int t = 1; t < num_frames; ++t) {
    // States reachable at t that can still reach the end.
    const int lo = std::max(0, total_states - (num_frames - t));
    const int hi = std::min(t, total_states - 1);
    std::fill(cur.begin(), cur.end(), kNegInf);
    for (int k = lo; k <= hi; ++k) {
      const double stay = prev[k] + tr.stay[k];
      const double adv = k > 0 ? prev[k - 1] + tr.advance[k - 1] : kNegInf;
      const bool take_adv = adv > stay;
      advanced[static_cast<std::size_t>(t) * total_states + k] = take_adv;
      cur[k] = (take_adv ? adv : stay) + (*state_emission[k])(t, state_col[k]);
    }
    std::swap(prev, cur);
  }
  const double best = prev[total_states - 1];
  if (!std::isfinite(best))
    throw AlignmentInfeasible("no finite-likelihood path through the model");

  Alignment ali;
  ali.log_likelihood = best;
  ali.occurrence.resize(num_frames);
  ali.state.resize(num_frames);
  ali.frame.resize(num_frames);
  int k = total_states - 1;
  for (int t = num_frames - 1; t >= 0; --t) {
    const int occ = static_cast<int>(
        std::upper_bound(offsets.begin(), offsets.end(), k) - offsets.begin() - 1);
    ali.occurrence[t] = occ;
    ali.state[t] = k - offsets[occ];
    ali.frame[t] = t;
    if (t > 0 && advanced[static_cast<std::size_t>(t) * total_states + k]) --k;
  }
  ali.spans.resize(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) ali.spans[i].digit = digits[i];
  for (int t = num_frames - 1; t >= 0; --t) ali.spans[ali.occurrence[t]].begin = t;
  for (int t = 0; t < num_frames; ++t) ali.spans[ali.occurrence[t]].end = t + 1;
  return ali;
}

Alignment ViterbiAlign(const FeatureMatrix &features, const HmmSet &hmms) {
  Alignment ali = ViterbiAlignFrames(features.VoicedFrames(), features.digits, hmms);
  ali.utterance_id = features.utterance_id;
  int v = 0;
  for (Eigen::Index t = 0; t < features.NumFrames(); ++t)
    if (features.voiced[t]) ali.frame[v++] = static_cast<int>(t);
  return ali;
}

double PathLogLikelihood(const Matrix &frames, const std::vector<int> &digits,
                         const HmmSet &hmms, const std::vector<int> &occurrence,
                         const std::vector<int> &state) {
  CheckDigits(digits, hmms);
  const auto num_frames = static_cast<int>(frames.rows());
  if (static_cast<int>(occurrence.size()) != num_frames ||
      static_cast<int>(state.size()) != num_frames || num_frames == 0)
    throw ShapeError("path length does not match frame count");
  const int last_occ = static_cast<int>(digits.size()) - 1;
  if (occurrence.front() != 0 || state.front() != 0 || occurrence.back() != last_occ ||
      state.back() != hmms[digits.back()].NumStates() - 1)
    return kNegInf;
  double total = 0.0;
  for (int t = 0; t < num_frames; ++t) {
    const DigitHmm &hmm = hmms[digits[occurrence[t]]];
    if (state[t] < 0 || state[t] >= hmm.NumStates()) return kNegInf;
    total += hmm.states[state[t]].LogLikelihoods(frames.row(t))(0);
    if (t == 0) continue;
    const int po = occurrence[t - 1], ps = state[t - 1];
    const DigitHmm &prev = hmms[digits[po]];
    if (po == occurrence[t] && ps == state[t]) {
      total += std::log(prev.transitions(ps, ps));
    } else if (po == occurrence[t] && ps + 1 == state[t]) {
      total += std::log(prev.transitions(ps, ps + 1));
    } else if (po + 1 == occurrence[t] && ps == prev.NumStates() - 1 && state[t] == 0) {
      // Free exit from the final state.
    } else {
      return kNegInf;
    }
  }
  return total;
}

void ReestimateFromAlignments(const std::vector<Matrix> &frames,
                              const std::vector<const Alignment *> &alignments,
                              const std::vector<std::vector<int>> &digit_strings,
                              const HmmTrainConfig &cfg, HmmSet *hmms,
                              HmmTrainLog *log) {
  const int num_digits = hmms->NumDigits();
  std::vector<std::vector<std::vector<std::pair<int, int>>>> members(num_digits);
  std::vector<Matrix> stay(num_digits), adv(num_digits);
  for (int d = 0; d < num_digits; ++d) {
    const int ns = (*hmms)[d].NumStates();
    members[d].resize(ns);
    stay[d] = Matrix::Zero(ns, 1);
    adv[d] = Matrix::Zero(ns, 1);
  }
  for (std::size_t u = 0; u < alignments.size(); ++u) {
    const Alignment *ali = alignments[u];
    if (ali == nullptr) continue;
    const auto &digits = digit_strings[u];
    const auto num_frames = static_cast<int>(ali->state.size());
    for (int t = 0; t < num_frames; ++t) {
      const int d = digits[ali->occurrence[t]], s = ali->state[t];
      members[d][s].emplace_back(static_cast<int>(u), t);
      if (t + 1 < num_frames && ali->occurrence[t + 1] == ali->occurrence[t]) {
        if (ali->state[t + 1] == s)
          stay[d](s) += 1.0;
        else
          adv[d](s) += 1.0;
      }
    }
  }

  std::vector<std::pair<int, int>> jobs_list;
  for (int d = 0; d < num_digits; ++d)
    for (int s = 0; s < (*hmms)[d].NumStates(); ++s) jobs_list.emplace_back(d, s);
  ParallelFor(jobs_list.size(), cfg.jobs, [&](std::size_t i) {
    const auto [d, s] = jobs_list[i];
    const auto &list = members[d][s];
    DigitHmm &hmm = (*hmms)[d];
    hmm.occupancy(s) = static_cast<double>(list.size());
    if (list.empty()) return;
    Matrix state_frames(list.size(), frames[list.front().first].cols());
    for (std::size_t r = 0; r < list.size(); ++r)
      state_frames.row(r) = frames[list[r].first].row(list[r].second);
    for (int it = 0; it < cfg.gmm_em_iters; ++it)
      GmmEmStep(state_frames, hmms->variance_floor, &hmm.states[s]);
  });

  for (int d = 0; d < num_digits; ++d) {
    DigitHmm &hmm = (*hmms)[d];
    const int ns = hmm.NumStates();
    for (int s = 0; s < ns; ++s) {
      if (hmm.occupancy(s) > 0.0) continue;
      const int neighbour = s > 0 ? s - 1 : s + 1;
      if (neighbour >= ns || hmm.occupancy(neighbour) <= 0.0) {
        DV_WARN << "digit " << d << " state " << s
                << " received no frames and has no trained neighbour";
        continue;
      }
      DV_WARN << "digit " << d << " state " << s
              << " received no frames; splitting the heaviest component of state "
              << neighbour;
      DiagGmm copy = hmm.states[neighbour];
      Eigen::Index heaviest;
      copy.weights.maxCoeff(&heaviest);
      copy.means.row(heaviest) += 0.2 * copy.variances.row(heaviest).cwiseSqrt();
      hmm.states[s] = std::move(copy);
      if (log != nullptr) ++log->starved_states;
    }
    if (!cfg.update_transitions) continue;
    for (int s = 0; s + 1 < ns; ++s) {
      const double n = stay[d](s) + adv[d](s);
      if (n <= 0.0) continue;
      const double p = std::clamp(stay[d](s) / n, kTransitionFloor, 1.0 - kTransitionFloor);
      hmm.transitions(s, s) = p;
      hmm.transitions(s, s + 1) = 1.0 - p;
    }
  }
}

HmmTrainLog ViterbiTrain(const std::vector<FeatureMatrix> &corpus,
                         const HmmTrainConfig &cfg, HmmSet *hmms) {
  cfg.Validate();
  HmmTrainLog log;
  if (cfg.num_iters == 0) return log;
  std::vector<Matrix> frames(corpus.size());
  std::vector<std::vector<int>> digit_strings(corpus.size());
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    frames[u] = corpus[u].VoicedFrames();
    digit_strings[u] = corpus[u].digits;
  }
  for (int iter = 0; iter < cfg.num_iters; ++iter) {
    std::vector<std::optional<Alignment>> alignments(corpus.size());
    ParallelFor(corpus.size(), cfg.jobs, [&](std::size_t u) {
      try {
        alignments[u] = ViterbiAlignFrames(frames[u], digit_strings[u], *hmms);
      } catch (const AlignmentInfeasible &) {
        alignments[u].reset();
      }
    });
    double total = 0.0;
    int skipped = 0;
    std::vector<const Alignment *> ptrs(corpus.size(), nullptr);
    for (std::size_t u = 0; u < corpus.size(); ++u) {
      if (!alignments[u]) {
        ++skipped;
        continue;
      }
      total += alignments[u]->log_likelihood;
      ptrs[u] = &*alignments[u];
    }
    if (skipped > 0 && iter == 0)
      DV_WARN << skipped << " utterances cannot be aligned and are skipped";
    log.skipped_utterances = skipped;
    log.log_likelihood.push_back(total);
    DV_LOG << "Viterbi iteration " << iter << ": log-likelihood " << total;
    ReestimateFromAlignments(frames, ptrs, digit_strings, cfg, hmms, &log);
  }
  return log;
}

FlatGmm FlattenHmm(const DigitHmm &hmm) {
  FlatGmm flat;
  flat.digit = hmm.digit;
  const int num_comp = hmm.NumComponents();
  const Eigen::Index dim = hmm.states.empty() ? 0 : hmm.states.front().Dim();
  flat.gmm.weights.resize(num_comp);
  flat.gmm.means.resize(num_comp, dim);
  flat.gmm.variances.resize(num_comp, dim);
  double occ_total = hmm.occupancy.size() == hmm.NumStates() ? hmm.occupancy.sum() : 0.0;
  int c = 0;
  for (int s = 0; s < hmm.NumStates(); ++s) {
    flat.state_offsets.push_back(c);
    const DiagGmm &g = hmm.states[s];
    const double share = occ_total > 0.0 ? hmm.occupancy(s) / occ_total
                                         : 1.0 / hmm.NumStates();
    const auto n = static_cast<int>(g.NumComponents());
    flat.gmm.weights.segment(c, n) = g.weights * share;
    flat.gmm.means.middleRows(c, n) = g.means;
    flat.gmm.variances.middleRows(c, n) = g.variances;
    c += n;
  }
  flat.state_offsets.push_back(c);
  return flat;
}

void WriteAlignmentText(std::ostream &os, const Alignment &alignment,
                        const std::vector<int> &digits) {
  for (std::size_t t = 0; t < alignment.state.size(); ++t)
    os << alignment.utterance_id << ' ' << alignment.frame[t] << ' '
       << digits[alignment.occurrence[t]] << ' ' << alignment.state[t] << '\n';
}

}  // namespace digitvec
