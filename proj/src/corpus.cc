// digitvec/corpus.cc

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

#include "digitvec/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "digitvec/container.h"
#include "digitvec/error.h"
#include "digitvec/log.h"
#include "digitvec/parallel.h"

namespace digitvec {
namespace {

enum Stream : std::uint64_t { kDigitStream = 1, kSpeakerStream = 2, kUttStream = 3 };

std::vector<std::string> Tokens(const std::string &line) {
  std::istringstream ls(line);
  std::vector<std::string> out;
  std::string tok;
  while (ls >> tok) out.push_back(tok);
  return out;
}

bool SkipLine(const std::string &line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::ifstream OpenInput(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

std::string SpeakerId(int s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%03d", s);
  return buf;
}

// Random permutation of 0..n-1 (Fisher-Yates).
std::vector<int> Permutation(int n, Rng *rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng->UniformInt(0, i)]);
  return p;
}

// Tone complex for one (digit, state): three partials.
double PartialHz(int digit, int state, int k) {
  return 200.0 + 97.0 * ((digit * 7 + state * 3 + k * 11) % 37);
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kBackground: return "background";
    case Split::kDevelopment: return "development";
    case Split::kEvaluation: return "evaluation";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  for (Split s : {Split::kBackground, Split::kDevelopment, Split::kEvaluation})
    if (SplitName(s) == name) return s;
  throw ParseError("unknown split '" + std::string(name) + "'");
}

std::vector<int> ParseDigitString(std::string_view text) {
  if (text.empty()) throw ParseError("empty digit string");
  std::vector<int> digits;
  for (char c : text) {
    if (c < '0' || c > '9') throw ParseError("bad digit string '" + std::string(text) + "'");
    digits.push_back(c - '0');
  }
  return digits;
}

std::string DigitString(const std::vector<int> &digits) {
  std::string s;
  for (int d : digits) s.push_back(static_cast<char>('0' + d));
  return s;
}

void Manifest::Validate() const {
  std::set<std::string> ids;
  std::map<std::string, Split> split_of;
  for (const auto &e : entries) {
    if (!ids.insert(e.utterance_id).second)
      throw ParseError("duplicate utterance id '" + e.utterance_id + "'");
    auto [it, inserted] = split_of.emplace(e.speaker, e.split);
    if (!inserted && it->second != e.split)
      throw ParseError("speaker '" + e.speaker + "' appears in splits " +
                       std::string(SplitName(it->second)) + " and " +
                       std::string(SplitName(e.split)));
  }
}

const ManifestEntry *Manifest::Find(const std::string &utterance_id) const {
  for (const auto &e : entries)
    if (e.utterance_id == utterance_id) return &e;
  return nullptr;
}

std::map<std::string, std::string> Manifest::GenderBySpeaker() const {
  std::map<std::string, std::string> out;
  for (const auto &e : entries) out.emplace(e.speaker, e.gender);
  return out;
}

void WriteManifest(const Manifest &manifest, std::ostream &os) {
  for (const auto &e : manifest.entries)
    os << e.utterance_id << ' ' << e.speaker << ' ' << e.gender << ' ' << SplitName(e.split)
       << ' ' << DigitString(e.digits) << ' ' << e.path << '\n';
}

Manifest ReadManifest(std::istream &is) {
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (SkipLine(line)) continue;
    auto tok = Tokens(line);
    if (tok.size() != 6)
      throw ParseError("manifest line " + std::to_string(lineno) + ": expected 6 fields, got " +
                       std::to_string(tok.size()));
    try {
      m.entries.push_back({tok[0], tok[1], tok[2], ParseSplit(tok[3]),
                           ParseDigitString(tok[4]), tok[5]});
    } catch (const ParseError &e) {
      throw ParseError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  m.Validate();
  return m;
}

Manifest LoadManifest(const std::string &path) {
  auto is = OpenInput(path);
  return ReadManifest(is);
}

void SaveManifest(const Manifest &manifest, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  WriteManifest(manifest, os);
}

std::vector<Trial> ParseTrialList(std::istream &is) {
  std::vector<Trial> trials;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (SkipLine(line)) continue;
    auto tok = Tokens(line);
    const std::string where = "trial list line " + std::to_string(lineno);
    if (tok.size() != 3 && tok.size() != 4)
      throw ParseError(where + ": expected 3 or 4 fields, got " + std::to_string(tok.size()));
    Trial t;
    t.enroll_id = tok[0];
    t.test_id = tok[1];
    try {
      t.digits = ParseDigitString(tok[2]);
    } catch (const ParseError &e) {
      throw ParseError(where + ": " + e.what());
    }
    if (tok.size() == 4) {
      if (tok[3] == "target") t.target = true;
      else if (tok[3] == "nontarget") t.target = false;
      else throw ParseError(where + ": bad label '" + tok[3] + "'");
    }
    trials.push_back(std::move(t));
  }
  if (trials.empty()) DV_WARN << "empty trial list";
  return trials;
}

std::vector<Trial> ParseTrialListText(const std::string &text) {
  std::istringstream is(text);
  return ParseTrialList(is);
}

std::vector<Trial> LoadTrialList(const std::string &path) {
  auto is = OpenInput(path);
  return ParseTrialList(is);
}

void WriteTrialList(const std::vector<Trial> &trials, std::ostream &os) {
  for (const auto &t : trials) {
    os << t.enroll_id << ' ' << t.test_id << ' ' << DigitString(t.digits);
    if (t.target) os << ' ' << (*t.target ? "target" : "nontarget");
    os << '\n';
  }
}

TrialCounts CountTrials(const std::vector<Trial> &trials) {
  TrialCounts c;
  for (const auto &t : trials) {
    ++c.total;
    if (!t.target) ++c.unlabeled;
    else if (*t.target) ++c.target;
    else ++c.nontarget;
  }
  return c;
}

std::vector<EnrollEntry> ParseEnrollList(std::istream &is) {
  std::vector<EnrollEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (SkipLine(line)) continue;
    auto tok = Tokens(line);
    if (tok.size() < 2)
      throw ParseError("enroll list line " + std::to_string(lineno) +
                       ": expected a model id and at least one utterance");
    out.push_back({tok[0], std::vector<std::string>(tok.begin() + 1, tok.end())});
  }
  return out;
}

std::vector<EnrollEntry> LoadEnrollList(const std::string &path) {
  auto is = OpenInput(path);
  return ParseEnrollList(is);
}

void WriteEnrollList(const std::vector<EnrollEntry> &entries, std::ostream &os) {
  for (const auto &e : entries) {
    os << e.model_id;
    for (const auto &u : e.utterances) os << ' ' << u;
    os << '\n';
  }
}

std::vector<Trial> GenerateTrials(const Manifest &manifest,
                                  const std::vector<EnrollEntry> &enrollments,
                                  const std::vector<std::string> &test_ids) {
  std::map<std::string, const ManifestEntry *> by_id;
  for (const auto &e : manifest.entries) by_id[e.utterance_id] = &e;
  auto lookup = [&](const std::string &id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ParseError("utterance '" + id + "' not in manifest");
    return it->second;
  };
  std::vector<Trial> trials;
  trials.reserve(enrollments.size() * test_ids.size());
  for (const auto &model : enrollments) {
    if (model.utterances.empty()) throw EmptyInput("model " + model.model_id + " has no utterances");
    const std::string &speaker = lookup(model.utterances.front())->speaker;
    for (const auto &tid : test_ids) {
      const ManifestEntry *t = lookup(tid);
      trials.push_back({model.model_id, tid, t->digits, t->speaker == speaker});
    }
  }
  return trials;
}

void SynthConfig::Validate() const {
  auto need = [](bool ok, const char *what) {
    if (!ok) throw ConfigError(std::string("synth: ") + what);
  };
  need(num_speakers >= 1, "num_speakers must be >= 1");
  need(utts_per_speaker >= 1, "utts_per_speaker must be >= 1");
  need(digits_per_utt >= 1, "digits_per_utt must be >= 1");
  need(enroll_utts >= 0, "enroll_utts must be >= 0");
  need(num_digits >= 1 && num_digits <= 10, "num_digits must be in [1, 10]");
  need(feature_dim >= 1, "feature_dim must be >= 1");
  need(states_per_digit >= 1, "states_per_digit must be >= 1");
  need(frames_per_state_mean >= 1.0, "frames_per_state_mean must be >= 1");
  need(frames_per_state_jitter >= 0, "frames_per_state_jitter must be >= 0");
  need(state_mean_scale >= 0.0 && speaker_offset_scale >= 0.0 &&
           channel_offset_scale >= 0.0 && noise_scale >= 0.0,
       "scales must be >= 0");
  need(channel_rank >= 0 && channel_rank <= feature_dim, "channel_rank must be in [0, F]");
  need(background_fraction >= 0.0 && development_fraction >= 0.0 &&
           background_fraction + development_fraction <= 1.0,
       "split fractions must be >= 0 and sum to at most 1");
  need(jobs >= 1, "jobs must be >= 1");
}

SyntheticCorpus GenerateSyntheticCorpus(const SynthConfig &cfg) {
  cfg.Validate();
  const int F = cfg.feature_dim;
  const int S = cfg.states_per_digit;
  SyntheticCorpus out;

  Rng digit_rng(DeriveSeed(cfg.seed, kDigitStream));
  for (int d = 0; d < cfg.num_digits; ++d) {
    Matrix means(S, F);
    for (int s = 0; s < S; ++s)
      means.row(s) = cfg.state_mean_scale * digit_rng.NormalVector(F).transpose();
    out.truth.state_means.push_back(std::move(means));
  }
  Matrix channel_basis;
  if (cfg.channel_rank > 0) {
    Matrix g(F, cfg.channel_rank);
    for (int j = 0; j < cfg.channel_rank; ++j) g.col(j) = digit_rng.NormalVector(F);
    Eigen::HouseholderQR<Matrix> qr(g);
    channel_basis = qr.householderQ() * Matrix::Identity(F, cfg.channel_rank);
  }

  const int num_bg = static_cast<int>(std::lround(cfg.background_fraction * cfg.num_speakers));
  const int num_dev =
      static_cast<int>(std::lround(cfg.development_fraction * cfg.num_speakers));
  std::vector<double> speaker_warp(cfg.num_speakers);
  std::vector<int> speaker_of;
  std::vector<bool> enroll_style;
  for (int sp = 0; sp < cfg.num_speakers; ++sp) {
    const std::string id = SpeakerId(sp);
    Rng rng(DeriveSeed(DeriveSeed(cfg.seed, kSpeakerStream), sp));
    Matrix offsets(cfg.num_digits, F);
    for (int d = 0; d < cfg.num_digits; ++d)
      offsets.row(d) = cfg.speaker_offset_scale * rng.NormalVector(F).transpose();
    out.truth.speaker_offsets[id] = std::move(offsets);
    speaker_warp[sp] = 0.05 * cfg.speaker_offset_scale * rng.Normal() /
                       std::max(1.0, cfg.speaker_offset_scale);

    const Split split = sp < num_bg             ? Split::kBackground
                        : sp < num_bg + num_dev ? Split::kDevelopment
                                                : Split::kEvaluation;
    const std::string gender = sp % 2 == 0 ? "m" : "f";
    EnrollEntry enroll{id, {}};
    const int total = cfg.enroll_utts + cfg.utts_per_speaker;
    for (int u = 0; u < total; ++u) {
      const bool is_enroll = u < cfg.enroll_utts;
      char buf[64];
      if (is_enroll) std::snprintf(buf, sizeof(buf), "%s-e%d", id.c_str(), u);
      else std::snprintf(buf, sizeof(buf), "%s-u%02d", id.c_str(), u - cfg.enroll_utts);
      ManifestEntry e;
      e.utterance_id = buf;
      e.speaker = id;
      e.gender = gender;
      e.split = split;
      e.path = cfg.audio ? std::string(buf) + ".wav" : std::string(kSyntheticPath);
      out.manifest.entries.push_back(std::move(e));
      speaker_of.push_back(sp);
      enroll_style.push_back(is_enroll);
      if (split != Split::kBackground) {
        if (is_enroll) enroll.utterances.push_back(buf);
        else if (split == Split::kEvaluation) out.test_ids.push_back(buf);
      }
    }
    if (split == Split::kEvaluation && !enroll.utterances.empty())
      out.enrollments.push_back(std::move(enroll));
  }

  const std::size_t n = out.manifest.entries.size();
  out.features.resize(n);
  out.truth.channel_offsets.resize(n);
  out.truth.alignments.resize(n);
  if (cfg.audio) out.audio.resize(n);
  FeatureConfig feat_cfg;
  ParallelFor(n, cfg.jobs, [&](std::size_t i) {
    ManifestEntry &e = out.manifest.entries[i];
    const int sp = speaker_of[i];
    const bool is_enroll = enroll_style[i];
    Rng rng(DeriveSeed(DeriveSeed(cfg.seed, kUttStream), i));
    if (is_enroll) {
      e.digits = Permutation(cfg.num_digits, &rng);
    } else {
      e.digits.resize(cfg.digits_per_utt);
      for (int &d : e.digits) d = rng.UniformInt(0, cfg.num_digits - 1);
    }
    Vector channel = cfg.channel_rank > 0
                         ? Vector(channel_basis * rng.NormalVector(cfg.channel_rank))
                         : rng.NormalVector(F);
    channel *= cfg.channel_offset_scale;

    Alignment truth;
    truth.utterance_id = e.utterance_id;
    std::vector<std::pair<int, int>> segments;  // (digit * S + state, frames)
    for (std::size_t k = 0; k < e.digits.size(); ++k) {
      DigitSpan span{e.digits[k], static_cast<int>(truth.state.size()), 0};
      for (int s = 0; s < S; ++s) {
        int len = static_cast<int>(std::lround(cfg.frames_per_state_mean)) +
                  (cfg.frames_per_state_jitter > 0
                       ? rng.UniformInt(-cfg.frames_per_state_jitter, cfg.frames_per_state_jitter)
                       : 0);
        len = std::max(len, 1);
        segments.emplace_back(e.digits[k] * S + s, len);
        for (int t = 0; t < len; ++t) {
          truth.frame.push_back(static_cast<int>(truth.state.size()));
          truth.occurrence.push_back(static_cast<int>(k));
          truth.state.push_back(s);
        }
      }
      span.end = static_cast<int>(truth.state.size());
      truth.spans.push_back(span);
    }
    const Matrix &offsets = out.truth.speaker_offsets.at(e.speaker);

    FeatureMatrix fm;
    fm.utterance_id = e.utterance_id;
    fm.digits = e.digits;
    if (!cfg.audio) {
      const auto T = static_cast<Eigen::Index>(truth.state.size());
      fm.frames.resize(T, F);
      for (Eigen::Index t = 0; t < T; ++t) {
        const int d = e.digits[truth.occurrence[t]];
        fm.frames.row(t) = out.truth.state_means[d].row(truth.state[t]) + offsets.row(d) +
                           channel.transpose() + cfg.noise_scale * rng.NormalVector(F).transpose();
      }
      fm.voiced.assign(static_cast<std::size_t>(T), true);
    } else {
      constexpr int kHop = 160;
      constexpr int kSilenceFrames = 30;
      AudioBuffer audio;
      const double fs = audio.sample_rate;
      const double warp = 1.0 + speaker_warp[sp];
      auto push_silence = [&]() {
        for (int k = 0; k < kSilenceFrames * kHop; ++k)
          audio.samples.push_back(3.0 * rng.Normal());
      };
      push_silence();
      double phase[3] = {0.0, 0.0, 0.0};
      for (const auto &[unit, len] : segments) {
        const int d = unit / S, s = unit % S;
        for (int k = 0; k < len * kHop; ++k) {
          double x = 0.0;
          for (int p = 0; p < 3; ++p) {
            phase[p] += 2.0 * std::numbers::pi * PartialHz(d, s, p) * warp / fs;
            x += 3000.0 / (1 + p) * std::sin(phase[p]);
          }
          audio.samples.push_back(x + 100.0 * cfg.noise_scale * rng.Normal());
        }
      }
      push_silence();
      fm = ExtractFeatures(audio, feat_cfg, e.utterance_id, e.digits);
      out.audio[i] = std::move(audio);
    }
    out.features[i] = std::move(fm);
    out.truth.channel_offsets[i] = std::move(channel);
    out.truth.alignments[i] = std::move(truth);
  });
  out.manifest.Validate();
  out.trials = GenerateTrials(out.manifest, out.enrollments, out.test_ids);
  return out;
}

void SaveFeatureArchive(const std::vector<FeatureMatrix> &features, const std::string &path) {
  Container c("features");
  std::string index;
  for (const auto &f : features) {
    index += f.utterance_id + '\n';
    const std::string base = "utt/" + f.utterance_id + "/";
    c.PutMatrix(base + "frames", f.frames);
    std::vector<std::int64_t> voiced(f.voiced.begin(), f.voiced.end());
    c.PutInts(base + "voiced", voiced);
    c.PutInts(base + "digits", std::vector<std::int64_t>(f.digits.begin(), f.digits.end()));
  }
  c.PutText("index", index);
  c.Save(path);
}

std::vector<FeatureMatrix> LoadFeatureArchive(const std::string &path) {
  Container c = Container::Load(path);
  if (c.kind() != "features") throw CorruptBundle("'" + path + "' is not a feature archive");
  std::vector<FeatureMatrix> out;
  std::istringstream index(c.GetText("index"));
  std::string id;
  while (std::getline(index, id)) {
    if (id.empty()) continue;
    FeatureMatrix f;
    f.utterance_id = id;
    const std::string base = "utt/" + id + "/";
    f.frames = c.GetMatrix(base + "frames");
    for (auto v : c.GetInts(base + "voiced")) f.voiced.push_back(v != 0);
    for (auto d : c.GetInts(base + "digits")) f.digits.push_back(static_cast<int>(d));
    if (static_cast<Eigen::Index>(f.voiced.size()) != f.frames.rows())
      throw CorruptBundle("voicing mask of '" + id + "' does not match its frames");
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace digitvec
