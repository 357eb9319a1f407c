// digitvec/config.h

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

#ifndef DIGITVEC_CONFIG_H_
#define DIGITVEC_CONFIG_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "digitvec/compensation.h"
#include "digitvec/corpus.h"
#include "digitvec/features.h"
#include "digitvec/hmm.h"
#include "digitvec/ivector.h"
#include "digitvec/metrics.h"

namespace digitvec {

struct ScoringConfig {
  bool snorm = true;
  /// Adaptive S-norm: keep only the top_k cohort scores; 0 uses all.
  int top_k = 0;
};

/// All settings of a pipeline run.  Stored as an INI-style file:
///
///   [hmm]
///   num_states = 8
///   ; comment
///
/// Keys are addressed as "section.key".
struct PipelineConfig {
  FeatureConfig features;
  HmmTrainConfig hmm;
  ExtractorTrainConfig ivector;
  CompensationConfig compensation;
  ScoringConfig scoring;
  DcfParams dcf_old = DcfParams::Old();
  DcfParams dcf_new = DcfParams::New();
  SynthConfig synth;
  std::uint64_t seed = 0;
  int jobs = 1;

  PipelineConfig();
  PipelineConfig(const PipelineConfig &other);
  PipelineConfig &operator=(const PipelineConfig &other);

  /// Sets one option from text.  Throws ConfigError naming the key when it
  /// is unknown or the value does not parse.
  void Set(const std::string &key, const std::string &value);
  std::string Get(const std::string &key) const;
  std::vector<std::string> Keys() const;

  /// Reads INI text; every key must be known.
  void Merge(std::istream &is);
  void MergeFile(const std::string &path);
  /// Effective configuration in the same INI format.  Without
  /// `include_jobs` the run.jobs key is left out, so the text does not
  /// depend on the degree of parallelism.
  std::string ToText(bool include_jobs = true) const;

  /// Copies seed and jobs into the stage configs, then validates them.
  /// Throws ConfigError.
  void Finalize();

 private:
  struct Option {
    std::string key;
    std::function<void(const std::string &)> set;
    std::function<std::string()> get;
  };
  void Bind();
  std::vector<Option> options_;
};

}  // namespace digitvec

#endif  // DIGITVEC_CONFIG_H_
