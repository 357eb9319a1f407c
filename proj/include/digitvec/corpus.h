// digitvec/corpus.h

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

#ifndef DIGITVEC_CORPUS_H_
#define DIGITVEC_CORPUS_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "digitvec/features.h"
#include "digitvec/hmm.h"

namespace digitvec {

enum class Split { kBackground, kDevelopment, kEvaluation };

std::string_view SplitName(Split split);
/// Throws ParseError for an unknown name.
Split ParseSplit(std::string_view name);

/// "0731" <-> {0, 7, 3, 1}.  Throws ParseError on a non-digit character.
std::vector<int> ParseDigitString(std::string_view text);
std::string DigitString(const std::vector<int> &digits);

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker;
  std::string gender;
  Split split = Split::kBackground;
  std::vector<int> digits;
  /// Audio path, or kSyntheticPath when features live in a feature archive.
  std::string path;
};

inline constexpr std::string_view kSyntheticPath = "synthetic";

struct Manifest {
  std::vector<ManifestEntry> entries;

  /// Throws ParseError on duplicate utterance ids or when a speaker appears
  /// in more than one split.
  void Validate() const;
  const ManifestEntry *Find(const std::string &utterance_id) const;
  std::map<std::string, std::string> GenderBySpeaker() const;
};

/// One utterance per line: `utt_id speaker_id gender split digit_string path`.
void WriteManifest(const Manifest &manifest, std::ostream &os);
/// Throws ParseError naming the line number.
Manifest ReadManifest(std::istream &is);
Manifest LoadManifest(const std::string &path);
void SaveManifest(const Manifest &manifest, const std::string &path);

struct Trial {
  std::string enroll_id;
  std::string test_id;
  std::vector<int> digits;
  std::optional<bool> target;
};

struct TrialCounts {
  int total = 0;
  int target = 0;
  int nontarget = 0;
  int unlabeled = 0;
};

/// `enroll_model_id test_utt_id digit_string [target|nontarget]` per line;
/// blank lines and lines starting with '#' are skipped.  Throws ParseError
/// with the line number; warns on an empty list.
std::vector<Trial> ParseTrialList(std::istream &is);
std::vector<Trial> ParseTrialListText(const std::string &text);
std::vector<Trial> LoadTrialList(const std::string &path);
void WriteTrialList(const std::vector<Trial> &trials, std::ostream &os);
TrialCounts CountTrials(const std::vector<Trial> &trials);

/// A speaker model and the utterances it is enrolled from.
struct EnrollEntry {
  std::string model_id;
  std::vector<std::string> utterances;
};

/// `model_id utt1 utt2 ...` per line.
std::vector<EnrollEntry> ParseEnrollList(std::istream &is);
std::vector<EnrollEntry> LoadEnrollList(const std::string &path);
void WriteEnrollList(const std::vector<EnrollEntry> &entries, std::ostream &os);

/// Every model against every test utterance.  The trial is a target when the
/// enrollment utterances and the test utterance share a speaker.
std::vector<Trial> GenerateTrials(const Manifest &manifest,
                                  const std::vector<EnrollEntry> &enrollments,
                                  const std::vector<std::string> &test_ids);

struct SynthConfig {
  int num_speakers = 40;
  /// Prompted utterances of `digits_per_utt` random digits per speaker.
  int utts_per_speaker = 50;
  int digits_per_utt = 5;
  /// Utterances per speaker containing every digit once (enrollment style).
  int enroll_utts = 3;
  int num_digits = kNumDigits;
  int feature_dim = 10;
  int states_per_digit = 4;
  double frames_per_state_mean = 8.0;
  int frames_per_state_jitter = 2;
  double state_mean_scale = 8.0;
  double speaker_offset_scale = 5.0;
  double channel_offset_scale = 2.5;
  /// Channel offsets live in a random subspace of this rank; 0 = isotropic.
  int channel_rank = 0;
  double noise_scale = 1.0;
  double background_fraction = 0.5;
  double development_fraction = 0.0;
  /// Render tone-complex audio and run the feature front end on it instead
  /// of emitting features directly.
  bool audio = false;
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Throws ConfigError.
  void Validate() const;
};

struct SynthTruth {
  /// Per digit: states_per_digit x F latent state means.
  std::vector<Matrix> state_means;
  /// Per speaker: num_digits x F offsets.
  std::map<std::string, Matrix> speaker_offsets;
  /// Per utterance, in manifest order.
  std::vector<Vector> channel_offsets;
  /// Per utterance frame-level state assignment.  In audio mode the frame
  /// indices refer to the synthesized segments, not feature frames.
  std::vector<Alignment> alignments;
};

struct SyntheticCorpus {
  Manifest manifest;
  std::vector<FeatureMatrix> features;
  /// Filled in audio mode only, parallel to `features`.
  std::vector<AudioBuffer> audio;
  SynthTruth truth;
  std::vector<EnrollEntry> enrollments;
  std::vector<std::string> test_ids;
  std::vector<Trial> trials;
};

/// Speakers are split background / development / evaluation in index order
/// and alternate in gender.  Development and evaluation speakers enroll
/// from their enrollment-style utterances; their prompted utterances are
/// test utterances and the trial list crosses evaluation models with
/// evaluation tests.  Output does not depend on `jobs`.
SyntheticCorpus GenerateSyntheticCorpus(const SynthConfig &cfg);

/// Feature archive: a container of kind "features".
void SaveFeatureArchive(const std::vector<FeatureMatrix> &features, const std::string &path);
std::vector<FeatureMatrix> LoadFeatureArchive(const std::string &path);

}  // namespace digitvec

#endif  // DIGITVEC_CORPUS_H_
