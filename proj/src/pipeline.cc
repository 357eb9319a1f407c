// digitvec/pipeline.cc

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

#include "digitvec/pipeline.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include "digitvec/log.h"
#include "digitvec/parallel.h"
#include "digitvec/stats.h"
#include "digitvec/wav.h"

namespace digitvec {
namespace {

namespace fs = std::filesystem;

template <typename Fn>
auto RunStage(const std::string &stage, Fn &&fn) -> decltype(fn()) {
  try {
    DV_LOG << "stage " << stage;
    return fn();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(stage, e.what());
  }
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream OpenOutput(const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  return os;
}

// Posterior extractors for every digit of a bundle.
class ExtractorSet {
 public:
  explicit ExtractorSet(const ModelBundle &bundle) {
    for (const auto &[d, ext] : bundle.extractors)
      extractors_.emplace(d, std::make_unique<PosteriorExtractor>(ext));
  }
  const PosteriorExtractor &operator[](int digit) const {
    auto it = extractors_.find(digit);
    if (it == extractors_.end()) throw MissingDigit(digit);
    return *it->second;
  }

 private:
  std::map<int, std::unique_ptr<PosteriorExtractor>> extractors_;
};

std::vector<DigitVector> ExtractWith(const ModelBundle &bundle, const ExtractorSet &extractors,
                                     const FeatureMatrix &features) {
  Alignment ali = ViterbiAlign(features, bundle.hmms);
  std::vector<DigitVector> out;
  for (const BaumWelchStats &st : CollectOccurrenceStats(features, ali, bundle.hmms, bundle.flats))
    out.emplace_back(st.digit, extractors[st.digit].Extract(st).mean);
  return out;
}

std::string GenderOf(const Manifest &manifest, const std::string &utt) {
  const ManifestEntry *e = manifest.Find(utt);
  return e ? e->gender : std::string();
}

}  // namespace

FeatureIndex IndexFeatures(const std::vector<FeatureMatrix> &features) {
  FeatureIndex index;
  for (const auto &f : features) index[f.utterance_id] = &f;
  return index;
}

std::vector<FeatureMatrix> LoadCorpusFeatures(const Manifest &manifest,
                                              const std::string &base_dir,
                                              const std::string &archive_path,
                                              const FeatureConfig &cfg, int jobs) {
  std::vector<FeatureMatrix> archive;
  if (!archive_path.empty() && fs::exists(archive_path)) archive = LoadFeatureArchive(archive_path);
  FeatureIndex index = IndexFeatures(archive);
  std::vector<FeatureMatrix> out(manifest.entries.size());
  ParallelFor(manifest.entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry &e = manifest.entries[i];
    auto it = index.find(e.utterance_id);
    if (it != index.end()) {
      out[i] = *it->second;
      return;
    }
    if (e.path == kSyntheticPath)
      throw IoError("features of '" + e.utterance_id + "' are not in the archive");
    fs::path p(e.path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    out[i] = ExtractFeatures(ReadWav(p.string()), cfg, e.utterance_id, e.digits);
  });
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].digits != manifest.entries[i].digits)
      throw ParseError("digit string of '" + manifest.entries[i].utterance_id +
                       "' differs between manifest and features");
  return out;
}

ModelBundle TrainPipeline(const PipelineConfig &cfg_in, const Manifest &manifest,
                          const std::vector<FeatureMatrix> &features, TrainReport *report) {
  PipelineConfig cfg = cfg_in;
  cfg.Finalize();
  TrainReport local;
  TrainReport &rep = report ? *report : local;
  ModelBundle bundle;
  bundle.feature_config = cfg.features;
  bundle.config_text = cfg.ToText(false);

  FeatureIndex index = IndexFeatures(features);
  std::vector<FeatureMatrix> train;
  std::map<std::string, std::string> speaker_of;
  for (const auto &e : manifest.entries) {
    if (e.split != Split::kBackground) continue;
    auto it = index.find(e.utterance_id);
    if (it == index.end()) throw StageError("data", "no features for '" + e.utterance_id + "'");
    train.push_back(*it->second);
    speaker_of[e.utterance_id] = e.speaker;
  }
  if (train.empty()) throw StageError("data", "manifest has no background utterances");
  rep.training_utterances = static_cast<int>(train.size());

  RunStage("hmm", [&] {
    bundle.hmms = InitDigitHmms(train, cfg.hmm);
    rep.hmm = ViterbiTrain(train, cfg.hmm, &bundle.hmms);
    for (const DigitHmm &h : bundle.hmms.hmms) bundle.flats.push_back(FlattenHmm(h));
  });

  const int num_digits = bundle.hmms.NumDigits();
  std::vector<std::vector<BaumWelchStats>> stats(num_digits);
  RunStage("stats", [&] {
    std::vector<std::vector<BaumWelchStats>> per_utt(train.size());
    std::vector<char> failed(train.size(), 0);
    ParallelFor(train.size(), cfg.jobs, [&](std::size_t i) {
      try {
        Alignment ali = ViterbiAlign(train[i], bundle.hmms);
        per_utt[i] = CollectOccurrenceStats(train[i], ali, bundle.hmms, bundle.flats);
      } catch (const AlignmentInfeasible &) {
        failed[i] = 1;
      }
    });
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (failed[i]) {
        DV_WARN << "skipping '" << train[i].utterance_id << "': alignment infeasible";
        ++rep.alignment_failures;
      }
      for (auto &st : per_utt[i]) stats[st.digit].push_back(std::move(st));
    }
    for (int d = 0; d < num_digits; ++d)
      if (stats[d].empty()) throw MissingDigit(d);
  });

  std::map<int, std::vector<IVectorPosterior>> posteriors;
  RunStage("ivector", [&] {
    for (int d = 0; d < num_digits; ++d) {
      ExtractorTrainLog log;
      bundle.extractors.emplace(d, TrainExtractor(stats[d], bundle.flats[d], cfg.ivector, &log));
      rep.ivector[d] = std::move(log);
      posteriors[d] = ExtractAll(stats[d], bundle.extractors.at(d), cfg.jobs);
    }
  });

  RunStage("compensation", [&] {
    for (int d = 0; d < num_digits; ++d) {
      std::map<std::string, std::vector<Vector>> grouped;
      for (const auto &p : posteriors[d]) grouped[speaker_of.at(p.utterance_id)].push_back(p.mean);
      CompensationData data;
      for (auto &kv : grouped) data.by_speaker.push_back(std::move(kv.second));
      data.uncertainty = AverageUncertainty(posteriors[d]);
      bundle.chains.emplace(d, BuildChain(cfg.compensation, data, d));
    }
  });

  RunStage("cohorts", [&] {
    std::map<std::string, std::vector<DigitVector>> by_speaker;
    for (int d = 0; d < num_digits; ++d)
      for (const auto &p : posteriors[d])
        by_speaker[speaker_of.at(p.utterance_id)].emplace_back(
            d, bundle.chains.at(d).Apply(p.mean));
    bundle.cohort = BuildCohorts(by_speaker, manifest.GenderBySpeaker(), cfg.scoring.top_k);
  });

  std::ostringstream log;
  log << "training_utterances " << rep.training_utterances << '\n'
      << "alignment_failures " << rep.alignment_failures << '\n'
      << "hmm_skipped_utterances " << rep.hmm.skipped_utterances << '\n'
      << "hmm_starved_states " << rep.hmm.starved_states << '\n';
  for (std::size_t i = 0; i < rep.hmm.log_likelihood.size(); ++i)
    log << "hmm_iter " << i << " log_likelihood " << FormatDouble(rep.hmm.log_likelihood[i]) << '\n';
  for (const auto &[d, l] : rep.ivector) {
    for (std::size_t i = 0; i < l.evidence.size(); ++i) {
      log << "ivector_digit " << d << " iter " << i << " evidence " << FormatDouble(l.evidence[i]);
      if (i > 0 && i - 1 < l.md_residual.size())
        log << " md_residual " << FormatDouble(l.md_residual[i - 1]) << " md_steps "
            << l.md_steps[i - 1];
      log << '\n';
    }
  }
  bundle.training_log = log.str();
  return bundle;
}

std::vector<DigitVector> ExtractUtteranceVectors(const ModelBundle &bundle,
                                                 const FeatureMatrix &features) {
  ExtractorSet extractors(bundle);
  return ExtractWith(bundle, extractors, features);
}

std::vector<DigitVector> ApplyChains(const ModelBundle &bundle,
                                     const std::vector<DigitVector> &raw) {
  std::vector<DigitVector> out;
  out.reserve(raw.size());
  for (const auto &[d, v] : raw) {
    auto it = bundle.chains.find(d);
    out.emplace_back(d, it == bundle.chains.end() ? v : it->second.Apply(v));
  }
  return out;
}

std::map<std::string, EnrollModel> BuildEnrollModels(const ModelBundle &bundle,
                                                     const std::vector<EnrollEntry> &enrollments,
                                                     const Manifest &manifest,
                                                     const FeatureIndex &features, int jobs) {
  ExtractorSet extractors(bundle);
  std::vector<EnrollModel> models(enrollments.size());
  std::vector<std::vector<std::string>> failed(enrollments.size());
  ParallelFor(enrollments.size(), jobs, [&](std::size_t i) {
    const EnrollEntry &e = enrollments[i];
    std::vector<DigitVector> vectors;
    for (const auto &utt : e.utterances) {
      auto it = features.find(utt);
      if (it == features.end()) throw IoError("no features for enrollment utterance '" + utt + "'");
      try {
        for (auto &dv : ApplyChains(bundle, ExtractWith(bundle, extractors, *it->second)))
          vectors.push_back(std::move(dv));
      } catch (const AlignmentInfeasible &) {
        failed[i].push_back(utt);
      }
    }
    if (vectors.empty()) return;
    models[i] = AverageEnrollment(e.model_id, vectors);
    models[i].gender = e.utterances.empty() ? "" : GenderOf(manifest, e.utterances.front());
  });
  std::map<std::string, EnrollModel> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (const auto &utt : failed[i])
      DV_WARN << "model " << enrollments[i].model_id << ": skipping enrollment utterance '"
              << utt << "', alignment infeasible";
    EnrollModel &m = models[i];
    if (m.digits.empty()) {
      DV_WARN << "model " << enrollments[i].model_id << " has no usable enrollment data";
      continue;
    }
    auto missing = m.MissingDigits(bundle.hmms.NumDigits());
    if (!missing.empty())
      DV_WARN << "model " << m.id << " lacks " << missing.size() << " digit(s)";
    out.emplace(m.id, std::move(m));
  }
  return out;
}

ScoreResult ScoreTrials(const ModelBundle &bundle,
                        const std::map<std::string, EnrollModel> &models,
                        const std::vector<Trial> &trials, const Manifest &manifest,
                        const FeatureIndex &features, bool snorm, int jobs) {
  ExtractorSet extractors(bundle);

  // Unique test utterances, in first-use order.
  std::vector<std::string> test_ids;
  std::map<std::string, std::size_t> test_slot;
  for (const auto &t : trials)
    if (features.count(t.test_id) && test_slot.emplace(t.test_id, test_ids.size()).second)
      test_ids.push_back(t.test_id);

  struct TestSide {
    std::vector<DigitVector> vectors;
    std::vector<ScoreStats> stats;
    std::string error;
  };
  std::vector<TestSide> tests(test_ids.size());
  ParallelFor(test_ids.size(), jobs, [&](std::size_t i) {
    TestSide &side = tests[i];
    try {
      side.vectors = ApplyChains(bundle, ExtractWith(bundle, extractors, *features.at(test_ids[i])));
    } catch (const AlignmentInfeasible &e) {
      side.error = e.what();
      return;
    }
    if (snorm) {
      const std::string gender = GenderOf(manifest, test_ids[i]);
      for (const auto &[d, v] : side.vectors) side.stats.push_back(bundle.cohort.Stats(d, v, gender));
    }
  });

  // Enroll-side cohort statistics per model and digit.
  std::vector<const EnrollModel *> model_list;
  for (const auto &kv : models) model_list.push_back(&kv.second);
  std::vector<std::map<int, ScoreStats>> enroll_stats(model_list.size());
  if (snorm)
    ParallelFor(model_list.size(), jobs, [&](std::size_t i) {
      for (const auto &[d, v] : model_list[i]->digits)
        enroll_stats[i][d] = bundle.cohort.Stats(d, v, model_list[i]->gender);
    });
  std::map<std::string, std::size_t> model_slot;
  for (std::size_t i = 0; i < model_list.size(); ++i) model_slot[model_list[i]->id] = i;

  std::vector<TrialScore> scored(trials.size());
  std::vector<std::string> reason(trials.size());
  ParallelFor(trials.size(), jobs, [&](std::size_t i) {
    const Trial &t = trials[i];
    auto m = model_slot.find(t.enroll_id);
    if (m == model_slot.end()) {
      reason[i] = "unknown enroll model";
      return;
    }
    auto ts = test_slot.find(t.test_id);
    if (ts == test_slot.end()) {
      reason[i] = "unknown test utterance";
      return;
    }
    const TestSide &side = tests[ts->second];
    if (!side.error.empty()) {
      reason[i] = "test alignment failed";
      return;
    }
    const EnrollModel &model = *model_list[m->second];
    double raw = 0.0, norm = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < side.vectors.size(); ++k) {
      const auto &[d, v] = side.vectors[k];
      auto md = model.digits.find(d);
      if (md == model.digits.end()) continue;
      const double s = CosineScore(md->second, v);
      raw += s;
      if (snorm) norm += SNorm(s, enroll_stats[m->second].at(d), side.stats[k]);
      ++count;
    }
    if (count == 0) {
      reason[i] = "no enrolled digit in test";
      return;
    }
    TrialScore &out = scored[i];
    out.enroll_id = t.enroll_id;
    out.test_id = t.test_id;
    out.digit_string = DigitString(t.digits);
    out.target = t.target;
    out.raw = raw / count;
    out.normalized = snorm ? norm / count : out.raw;
  });

  ScoreResult result;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (reason[i].empty()) result.scores.push_back(std::move(scored[i]));
    else result.rejects.push_back({trials[i], reason[i]});
  }
  if (!result.rejects.empty())
    DV_WARN << result.rejects.size() << " trial(s) rejected";
  return result;
}

void WriteScores(const std::vector<TrialScore> &scores, std::ostream &os) {
  for (const auto &s : scores) {
    os << s.enroll_id << '\t' << s.test_id << '\t' << s.digit_string << '\t'
       << (s.target ? (*s.target ? "target" : "nontarget") : "-") << '\t' << FormatDouble(s.raw)
       << '\t' << FormatDouble(s.normalized) << '\n';
  }
}

std::vector<TrialScore> ReadScores(std::istream &is) {
  std::vector<TrialScore> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TrialScore s;
    std::string label, raw, norm;
    if (!(ls >> s.enroll_id >> s.test_id >> s.digit_string >> label >> raw >> norm))
      throw ParseError("score file line " + std::to_string(lineno) + ": expected 6 fields");
    if (label == "target") s.target = true;
    else if (label == "nontarget") s.target = false;
    else if (label != "-")
      throw ParseError("score file line " + std::to_string(lineno) + ": bad label '" + label + "'");
    try {
      s.raw = std::stod(raw);
      s.normalized = std::stod(norm);
    } catch (const std::exception &) {
      throw ParseError("score file line " + std::to_string(lineno) + ": bad score");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TrialScore> LoadScores(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return ReadScores(is);
}

MetricsReport EvaluateScores(const std::vector<TrialScore> &scores, const DcfParams &old_params,
                             const DcfParams &new_params, DetCurve *curve) {
  std::vector<double> tgt, non;
  for (const auto &s : scores) {
    if (!s.target) throw ConfigError("trial " + s.enroll_id + "/" + s.test_id + " is unlabeled");
    (*s.target ? tgt : non).push_back(s.normalized);
  }
  MetricsReport r = Evaluate(tgt, non, old_params, new_params);
  if (curve) *curve = ComputeDet(tgt, non);
  return r;
}

SyntheticCorpus RunSynth(const PipelineConfig &cfg_in, const std::string &out_dir) {
  PipelineConfig cfg = cfg_in;
  cfg.Finalize();
  SyntheticCorpus corpus = GenerateSyntheticCorpus(cfg.synth);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  SaveManifest(corpus.manifest, (dir / "manifest.txt").string());
  SaveFeatureArchive(corpus.features, (dir / "features.ark").string());
  {
    auto os = OpenOutput((dir / "enroll.txt").string());
    WriteEnrollList(corpus.enrollments, os);
  }
  {
    auto os = OpenOutput((dir / "trials.txt").string());
    WriteTrialList(corpus.trials, os);
  }
  {
    auto os = OpenOutput((dir / "config.ini").string());
    os << cfg.ToText();
  }
  if (cfg.synth.audio)
    for (std::size_t i = 0; i < corpus.audio.size(); ++i)
      WriteWav((dir / corpus.manifest.entries[i].path).string(), corpus.audio[i]);
  return corpus;
}

ModelBundle RunTrain(const PipelineConfig &cfg, const TrainPaths &paths) {
  if (!fs::exists(paths.manifest)) throw ConfigError("manifest '" + paths.manifest + "' not found");
  Manifest manifest = LoadManifest(paths.manifest);
  std::vector<FeatureMatrix> features = RunStage("features", [&] {
    return LoadCorpusFeatures(manifest, fs::path(paths.manifest).parent_path().string(),
                              paths.features, cfg.features, std::max(cfg.jobs, 1));
  });
  TrainReport report;
  ModelBundle bundle = TrainPipeline(cfg, manifest, features, &report);
  SaveBundle(bundle, paths.bundle);
  if (!paths.log.empty()) {
    auto os = OpenOutput(paths.log);
    os << bundle.training_log;
  }
  return bundle;
}

ScoreResult RunScore(const PipelineConfig &cfg_in, const ScorePaths &paths) {
  PipelineConfig cfg = cfg_in;
  cfg.Finalize();
  for (const std::string *p : {&paths.bundle, &paths.manifest, &paths.enroll, &paths.trials})
    if (!fs::exists(*p)) throw ConfigError("input '" + *p + "' not found");
  ModelBundle bundle = LoadBundle(paths.bundle);
  Manifest manifest = LoadManifest(paths.manifest);
  std::vector<FeatureMatrix> features = RunStage("features", [&] {
    return LoadCorpusFeatures(manifest, fs::path(paths.manifest).parent_path().string(),
                              paths.features, bundle.feature_config, cfg.jobs);
  });
  FeatureIndex index = IndexFeatures(features);
  std::vector<EnrollEntry> enroll = LoadEnrollList(paths.enroll);
  std::vector<Trial> trials = LoadTrialList(paths.trials);
  auto models = RunStage("enroll", [&] {
    return BuildEnrollModels(bundle, enroll, manifest, index, cfg.jobs);
  });
  ScoreResult result = RunStage("score", [&] {
    return ScoreTrials(bundle, models, trials, manifest, index, cfg.scoring.snorm, cfg.jobs);
  });
  {
    auto os = OpenOutput(paths.scores);
    WriteScores(result.scores, os);
  }
  if (!paths.rejects.empty()) {
    auto os = OpenOutput(paths.rejects);
    for (const auto &r : result.rejects)
      os << r.trial.enroll_id << ' ' << r.trial.test_id << ' ' << DigitString(r.trial.digits)
         << '\t' << r.reason << '\n';
  }
  return result;
}

MetricsReport RunEval(const PipelineConfig &cfg, const EvalPaths &paths, std::ostream &out) {
  if (!fs::exists(paths.scores)) throw ConfigError("score file '" + paths.scores + "' not found");
  std::vector<TrialScore> scores = LoadScores(paths.scores);
  DetCurve curve;
  MetricsReport report = EvaluateScores(scores, cfg.dcf_old, cfg.dcf_new, &curve);
  WriteReportTable(report, out);
  if (!paths.report.empty()) {
    auto os = OpenOutput(paths.report);
    WriteReportKeyValue(report, os);
  }
  if (!paths.det_csv.empty()) {
    auto os = OpenOutput(paths.det_csv);
    WriteDetCsv(curve, os);
  }
  return report;
}

void InspectBundle(const std::string &path, std::ostream &os) {
  Container c = Container::Load(path);
  os << "kind " << c.kind() << "\nversion " << Container::kVersion << '\n';
  ModelBundle b = BundleFromContainer(c);
  os << "digits " << b.hmms.NumDigits() << '\n';
  for (const DigitHmm &h : b.hmms.hmms) {
    os << "digit " << h.digit << " states " << h.NumStates() << " components "
       << h.NumComponents();
    auto e = b.extractors.find(h.digit);
    if (e != b.extractors.end())
      os << " feature_dim " << e->second.FeatureDim() << " rank " << e->second.Rank();
    auto ch = b.chains.find(h.digit);
    if (ch != b.chains.end()) {
      os << " chain";
      if (ch->second.steps.empty()) os << " (empty)";
      for (const Transform &t : ch->second.steps) os << ' ' << TransformKindName(t.kind);
    }
    os << '\n';
  }
  os << "cohort_speakers " << b.cohort.speakers.size() << " top_k " << b.cohort.top_k << '\n';
  os << "sections " << c.Names().size() << '\n';
  for (const auto &name : c.Names()) {
    const auto &s = c.Get(name);
    os << "  " << name << ' ' << ContainerTypeName(s.type) << ' ' << s.rows << 'x' << s.cols
       << '\n';
  }
}

}  // namespace digitvec
