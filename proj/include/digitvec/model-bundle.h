// digitvec/model-bundle.h

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

#ifndef DIGITVEC_MODEL_BUNDLE_H_
#define DIGITVEC_MODEL_BUNDLE_H_

#include <map>
#include <string>
#include <vector>

#include "digitvec/compensation.h"
#include "digitvec/container.h"
#include "digitvec/features.h"
#include "digitvec/hmm.h"
#include "digitvec/ivector.h"
#include "digitvec/scoring.h"

namespace digitvec {

/// Everything needed to score trials.
struct ModelBundle {
  FeatureConfig feature_config;
  HmmSet hmms;
  std::vector<FlatGmm> flats;
  std::map<int, IVectorExtractor> extractors;
  std::map<int, TransformChain> chains;
  CohortSet cohort;
  /// Free-form training log (per-iteration likelihood and evidence).
  std::string training_log;
  /// Effective pipeline configuration, as key=value text.
  std::string config_text;
};

Container BundleToContainer(const ModelBundle &bundle);
/// Throws CorruptBundle when sections are missing or inconsistent.
ModelBundle BundleFromContainer(const Container &container);

void SaveBundle(const ModelBundle &bundle, const std::string &path);
/// Throws VersionError / CorruptBundle / IoError.
ModelBundle LoadBundle(const std::string &path);

}  // namespace digitvec

#endif  // DIGITVEC_MODEL_BUNDLE_H_
