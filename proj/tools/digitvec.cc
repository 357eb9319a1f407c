// tools/digitvec.cc

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

// Command-line driver: synth, train, score, eval, inspect-bundle.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "digitvec/config.h"
#include "digitvec/error.h"
#include "digitvec/log.h"
#include "digitvec/pipeline.h"

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string seed;
  int jobs = 0;
  bool verbose = false;
};

void AddCommon(CLI::App *cmd, CommonOptions *opt) {
  cmd->add_option("--config", opt->config_file, "INI configuration file");
  cmd->add_option("--set", opt->overrides, "Override one option, section.key=value");
  cmd->add_option("--seed", opt->seed, "Random seed (falls back to DIGITVEC_SEED)");
  cmd->add_option("--jobs", opt->jobs, "Worker threads");
  cmd->add_flag("-v,--verbose", opt->verbose, "Progress messages");
}

// Defaults, then DIGITVEC_SEED, then the config file, then --set, then the
// dedicated flags.
digitvec::PipelineConfig BuildConfig(const CommonOptions &opt) {
  digitvec::PipelineConfig cfg;
  if (const char *env = std::getenv("DIGITVEC_SEED")) cfg.Set("run.seed", env);
  if (!opt.config_file.empty()) cfg.MergeFile(opt.config_file);
  for (const auto &kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw digitvec::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opt.seed.empty()) cfg.Set("run.seed", opt.seed);
  if (opt.jobs > 0) cfg.jobs = opt.jobs;
  return cfg;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"digitvec: text-prompted speaker verification with digit i-vectors"};
  app.require_subcommand(1);

  CommonOptions common;

  auto *synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  AddCommon(synth, &common);
  std::string synth_out = "data";
  int speakers = 0;
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--speakers", speakers, "Number of speakers");

  auto *train = app.add_subcommand("train", "Train a model bundle");
  AddCommon(train, &common);
  digitvec::TrainPaths train_paths;
  int states = 0, components = 0, rank = 0;
  train->add_option("--manifest", train_paths.manifest, "Manifest file")->required();
  train->add_option("--features", train_paths.features, "Feature archive");
  train->add_option("--bundle", train_paths.bundle, "Output bundle")->required();
  train->add_option("--log", train_paths.log, "Training log output");
  train->add_option("--states", states, "HMM states per digit");
  train->add_option("--components", components, "Gaussians per state");
  train->add_option("--rank", rank, "i-vector dimension");

  auto *score = app.add_subcommand("score", "Score a trial list");
  AddCommon(score, &common);
  digitvec::ScorePaths score_paths;
  bool no_snorm = false;
  score->add_option("--bundle", score_paths.bundle, "Model bundle")->required();
  score->add_option("--manifest", score_paths.manifest, "Manifest file")->required();
  score->add_option("--features", score_paths.features, "Feature archive");
  score->add_option("--enroll", score_paths.enroll, "Enrollment list")->required();
  score->add_option("--trials", score_paths.trials, "Trial list")->required();
  score->add_option("--out", score_paths.scores, "Score file")->required();
  score->add_option("--rejects", score_paths.rejects, "Rejected trials output");
  score->add_flag("--no-snorm", no_snorm, "Skip score normalization");

  auto *eval = app.add_subcommand("eval", "Compute EER and minDCF");
  AddCommon(eval, &common);
  digitvec::EvalPaths eval_paths;
  eval->add_option("--scores", eval_paths.scores, "Score file")->required();
  eval->add_option("--report", eval_paths.report, "key=value report output");
  eval->add_option("--det-csv", eval_paths.det_csv, "DET points output");

  auto *inspect = app.add_subcommand("inspect-bundle", "Describe a model bundle");
  std::string inspect_path;
  inspect->add_option("bundle", inspect_path, "Bundle path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    digitvec::SetVerbose(common.verbose);
    if (*inspect) {
      digitvec::InspectBundle(inspect_path, std::cout);
      return 0;
    }
    digitvec::PipelineConfig cfg = BuildConfig(common);
    if (*synth) {
      if (speakers > 0) cfg.synth.num_speakers = speakers;
      auto corpus = digitvec::RunSynth(cfg, synth_out);
      std::cout << "wrote " << corpus.manifest.entries.size() << " utterances, "
                << corpus.trials.size() << " trials to " << synth_out << '\n';
    } else if (*train) {
      if (states > 0) cfg.hmm.num_states = states;
      if (components > 0) cfg.hmm.num_components = components;
      if (rank > 0) cfg.ivector.rank = rank;
      cfg.Finalize();
      digitvec::RunTrain(cfg, train_paths);
      std::cout << "wrote " << train_paths.bundle << '\n';
    } else if (*score) {
      if (no_snorm) cfg.scoring.snorm = false;
      auto result = digitvec::RunScore(cfg, score_paths);
      std::cout << "scored " << result.scores.size() << " trials, rejected "
                << result.rejects.size() << ", warnings " << digitvec::WarningCount() << '\n';
    } else if (*eval) {
      cfg.Finalize();
      digitvec::RunEval(cfg, eval_paths, std::cout);
    }
  } catch (const digitvec::ConfigError &e) {
    std::cerr << "digitvec: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "digitvec: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
