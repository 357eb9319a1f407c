// tests/unit/container-test.cc

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

#include <filesystem>
#include <sstream>

#include "digitvec/config.h"
#include "digitvec/container.h"
#include "digitvec/corpus.h"
#include "digitvec/error.h"
#include "digitvec/log.h"
#include "digitvec/model-bundle.h"
#include "digitvec/pipeline.h"
#include "doctest.h"

namespace digitvec {

namespace {

std::string Bytes(const Container &c) {
  std::ostringstream os;
  c.Write(os);
  return os.str();
}

Container FromBytes(const std::string &bytes) {
  std::istringstream is(bytes);
  return Container::Read(is);
}

PipelineConfig TinyConfig() {
  PipelineConfig cfg;
  cfg.seed = 5;
  cfg.synth.num_speakers = 12;
  cfg.synth.utts_per_speaker = 8;
  cfg.synth.feature_dim = 4;
  cfg.synth.states_per_digit = 2;
  cfg.hmm.num_states = 2;
  cfg.hmm.num_components = 1;
  cfg.hmm.num_iters = 2;
  cfg.ivector.rank = 3;
  cfg.ivector.num_iters = 2;
  cfg.Finalize();
  return cfg;
}

}  // namespace

TEST_CASE("container round trip is bit exact") {
  Container c("test");
  Matrix m(2, 3);
  m << 1.0 / 3.0, -0.0, 1e-300, std::numeric_limits<double>::max(), 2.5, -7.0;
  c.PutMatrix("a/matrix", m);
  c.PutVector("b", Vector::LinSpaced(5, -1.0, 1.0));
  c.PutInts("ints", {-3, 0, 1LL << 40});
  c.PutText("text", "line one\nline two with spaces\n");
  Container back = FromBytes(Bytes(c));
  CHECK(back.kind() == "test");
  CHECK(back.GetMatrix("a/matrix") == m);
  CHECK(back.GetVector("b") == Vector::LinSpaced(5, -1.0, 1.0));
  CHECK(back.GetInts("ints") == std::vector<std::int64_t>{-3, 0, 1LL << 40});
  CHECK(back.GetText("text") == "line one\nline two with spaces\n");
  CHECK(Bytes(back) == Bytes(c));
  CHECK_THROWS_AS(back.GetMatrix("missing"), CorruptBundle);
  CHECK_THROWS_AS(back.GetInts("b"), CorruptBundle);
}

TEST_CASE("damaged containers are rejected") {
  Container c("test");
  c.PutVector("v", Vector::Ones(16));
  const std::string bytes = Bytes(c);
  CHECK_THROWS_AS(FromBytes(bytes.substr(0, bytes.size() - 5)), CorruptBundle);
  CHECK_THROWS_AS(FromBytes(bytes.substr(0, 10)), CorruptBundle);
  CHECK_THROWS_AS(FromBytes(""), CorruptBundle);
  std::string flipped = bytes;
  flipped[flipped.size() - 3] ^= 0x40;
  CHECK_THROWS_AS(FromBytes(flipped), CorruptBundle);
  std::string future = bytes;
  future.replace(future.find(" 1\n"), 3, " 2\n");
  CHECK_THROWS_AS(FromBytes(future), VersionError);
  CHECK_THROWS_AS(FromBytes("not a container\n"), CorruptBundle);
}

TEST_CASE("model bundle round trip") {
  SetLogHandler([](LogLevel, const std::string &) {});
  PipelineConfig cfg = TinyConfig();
  SyntheticCorpus corpus = GenerateSyntheticCorpus(cfg.synth);
  ModelBundle bundle = TrainPipeline(cfg, corpus.manifest, corpus.features);
  const std::string bytes = Bytes(BundleToContainer(bundle));
  ModelBundle back = BundleFromContainer(FromBytes(bytes));
  CHECK(Bytes(BundleToContainer(back)) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "digitvec-bundle-test.dvb";
  SaveBundle(bundle, path.string());
  ModelBundle loaded = LoadBundle(path.string());
  std::filesystem::remove(path);

  FeatureIndex index = IndexFeatures(corpus.features);
  auto score = [&](const ModelBundle &b) {
    auto models = BuildEnrollModels(b, corpus.enrollments, corpus.manifest, index, 1);
    std::ostringstream os;
    WriteScores(ScoreTrials(b, models, corpus.trials, corpus.manifest, index, true, 1).scores, os);
    return os.str();
  };
  CHECK(score(bundle) == score(loaded));

  Container wrong("features");
  CHECK_THROWS_AS(BundleFromContainer(wrong), CorruptBundle);
  SetLogHandler(nullptr);
}

}  // namespace digitvec
