// digitvec/pipeline.h

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

#ifndef DIGITVEC_PIPELINE_H_
#define DIGITVEC_PIPELINE_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "digitvec/config.h"
#include "digitvec/corpus.h"
#include "digitvec/error.h"
#include "digitvec/metrics.h"
#include "digitvec/model-bundle.h"

namespace digitvec {

/// Failure inside a training or scoring stage; what() names the stage.
class StageError : public Error {
 public:
  StageError(const std::string &stage, const std::string &cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(stage) {}
  const std::string &stage() const { return stage_; }

 private:
  std::string stage_;
};

using FeatureIndex = std::map<std::string, const FeatureMatrix *>;
FeatureIndex IndexFeatures(const std::vector<FeatureMatrix> &features);

/// Features for every manifest entry.  Entries with the synthetic marker are
/// taken from the archive; others are WAV paths (relative to `base_dir`)
/// run through the front end.
std::vector<FeatureMatrix> LoadCorpusFeatures(const Manifest &manifest,
                                              const std::string &base_dir,
                                              const std::string &archive_path,
                                              const FeatureConfig &cfg, int jobs);

struct TrainReport {
  HmmTrainLog hmm;
  std::map<int, ExtractorTrainLog> ivector;
  int training_utterances = 0;
  int alignment_failures = 0;
};

/// hmm -> stats -> ivector -> compensation -> cohorts on the background
/// split.  Throws StageError.
ModelBundle TrainPipeline(const PipelineConfig &cfg, const Manifest &manifest,
                          const std::vector<FeatureMatrix> &features,
                          TrainReport *report = nullptr);

/// Raw i-vector of every digit occurrence, in string order.
std::vector<DigitVector> ExtractUtteranceVectors(const ModelBundle &bundle,
                                                 const FeatureMatrix &features);
std::vector<DigitVector> ApplyChains(const ModelBundle &bundle,
                                     const std::vector<DigitVector> &raw);

/// Enrollment models keyed by model id; the gender comes from the manifest.
/// Unalignable utterances are skipped, and models left without data are
/// omitted, both with a warning.
std::map<std::string, EnrollModel> BuildEnrollModels(const ModelBundle &bundle,
                                                     const std::vector<EnrollEntry> &enrollments,
                                                     const Manifest &manifest,
                                                     const FeatureIndex &features, int jobs);

struct RejectedTrial {
  Trial trial;
  std::string reason;
};

struct ScoreResult {
  std::vector<TrialScore> scores;
  std::vector<RejectedTrial> rejects;
};

/// Raw digit-averaged cosine scores and, with `snorm`, digit-dependent
/// S-norm scores (otherwise normalized == raw).  Independent of `jobs`.
ScoreResult ScoreTrials(const ModelBundle &bundle,
                        const std::map<std::string, EnrollModel> &models,
                        const std::vector<Trial> &trials, const Manifest &manifest,
                        const FeatureIndex &features, bool snorm, int jobs);

/// Tab separated: enroll, test, digits, label (target|nontarget|-), raw,
/// normalized.
void WriteScores(const std::vector<TrialScore> &scores, std::ostream &os);
std::vector<TrialScore> ReadScores(std::istream &is);
std::vector<TrialScore> LoadScores(const std::string &path);

/// Metrics of the normalized scores.  Throws ConfigError on unlabeled
/// trials.
MetricsReport EvaluateScores(const std::vector<TrialScore> &scores, const DcfParams &old_params,
                             const DcfParams &new_params, DetCurve *curve = nullptr);

// Command drivers used by the digitvec tool.

/// Writes manifest.txt, features.ark, enroll.txt, trials.txt (plus WAV files
/// in audio mode) under `out_dir`.
SyntheticCorpus RunSynth(const PipelineConfig &cfg, const std::string &out_dir);

struct TrainPaths {
  std::string manifest;
  std::string features;
  std::string bundle;
  std::string log;
};
ModelBundle RunTrain(const PipelineConfig &cfg, const TrainPaths &paths);

struct ScorePaths {
  std::string bundle;
  std::string manifest;
  std::string features;
  std::string enroll;
  std::string trials;
  std::string scores;
  std::string rejects;
};
ScoreResult RunScore(const PipelineConfig &cfg, const ScorePaths &paths);

struct EvalPaths {
  std::string scores;
  std::string report;
  std::string det_csv;
};
MetricsReport RunEval(const PipelineConfig &cfg, const EvalPaths &paths, std::ostream &out);

void InspectBundle(const std::string &path, std::ostream &os);

}  // namespace digitvec

#endif  // DIGITVEC_PIPELINE_H_
