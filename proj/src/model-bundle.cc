// digitvec/model-bundle.cc

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

#include "digitvec/model-bundle.h"

#include <bit>
#include <sstream>

#include "digitvec/error.h"

namespace digitvec {
namespace {

std::string Key(const std::string &prefix, long a) { return prefix + "/" + std::to_string(a); }

Vector FeatureConfigVector(const FeatureConfig &c) {
  Vector v(10);
  v << c.frame_len_ms, c.frame_shift_ms, c.num_mel_filters, c.num_cepstra,
      c.include_c0 ? 1.0 : 0.0, c.delta_window, c.pre_emphasis, c.low_freq_hz, c.high_freq_hz,
      c.vad_energy_scale;
  return v;
}

FeatureConfig FeatureConfigFromVector(const Vector &v) {
  if (v.size() != 10) throw CorruptBundle("feature_config section has wrong size");
  FeatureConfig c;
  c.frame_len_ms = v[0];
  c.frame_shift_ms = v[1];
  c.num_mel_filters = static_cast<int>(v[2]);
  c.num_cepstra = static_cast<int>(v[3]);
  c.include_c0 = v[4] != 0.0;
  c.delta_window = static_cast<int>(v[5]);
  c.pre_emphasis = v[6];
  c.low_freq_hz = v[7];
  c.high_freq_hz = v[8];
  c.vad_energy_scale = v[9];
  return c;
}

void PutGmm(Container *c, const std::string &base, const DiagGmm &g) {
  c->PutVector(base + "/weights", g.weights);
  c->PutMatrix(base + "/means", g.means);
  c->PutMatrix(base + "/variances", g.variances);
}

DiagGmm GetGmm(const Container &c, const std::string &base) {
  DiagGmm g;
  g.weights = c.GetVector(base + "/weights");
  g.means = c.GetMatrix(base + "/means");
  g.variances = c.GetMatrix(base + "/variances");
  if (g.means.rows() != g.weights.size() || g.variances.rows() != g.means.rows() ||
      g.variances.cols() != g.means.cols())
    throw CorruptBundle("inconsistent GMM shapes under '" + base + "'");
  return g;
}

std::vector<std::int64_t> ToInts(const std::vector<int> &v) {
  return std::vector<std::int64_t>(v.begin(), v.end());
}

std::vector<int> FromInts(const std::vector<std::int64_t> &v) {
  return std::vector<int>(v.begin(), v.end());
}

}  // namespace

Container BundleToContainer(const ModelBundle &b) {
  Container c("model-bundle");
  c.PutVector("feature_config", FeatureConfigVector(b.feature_config));
  c.PutText("training_log", b.training_log);
  c.PutText("config", b.config_text);

  c.PutInts("hmm/num_digits", {b.hmms.NumDigits()});
  c.PutVector("hmm/variance_floor", b.hmms.variance_floor);
  for (const DigitHmm &h : b.hmms.hmms) {
    const std::string base = Key("hmm", h.digit);
    c.PutInts(base + "/info", {h.digit, h.NumStates()});
    c.PutMatrix(base + "/transitions", h.transitions);
    c.PutVector(base + "/occupancy", h.occupancy);
    for (int s = 0; s < h.NumStates(); ++s) PutGmm(&c, Key(base + "/state", s), h.states[s]);
  }

  std::vector<std::int64_t> flat_digits;
  for (const FlatGmm &f : b.flats) {
    flat_digits.push_back(f.digit);
    const std::string base = Key("flat", f.digit);
    PutGmm(&c, base, f.gmm);
    c.PutInts(base + "/state_offsets", ToInts(f.state_offsets));
  }
  c.PutInts("flat/digits", flat_digits);

  std::vector<std::int64_t> ext_digits;
  for (const auto &[d, e] : b.extractors) {
    ext_digits.push_back(d);
    const std::string base = Key("ivector", d);
    c.PutInts(base + "/info", {e.digit, static_cast<std::int64_t>(e.feature_dim),
                               std::bit_cast<std::int64_t>(e.seed)});
    c.PutVector(base + "/ubm_means", e.ubm_means);
    c.PutVector(base + "/mean", e.mean);
    c.PutVector(base + "/variances", e.variances);
    c.PutMatrix(base + "/subspace", e.subspace);
    c.PutVector(base + "/evidence_log",
                Eigen::Map<const Vector>(e.evidence_log.data(),
                                         static_cast<Eigen::Index>(e.evidence_log.size())));
  }
  c.PutInts("ivector/digits", ext_digits);

  std::vector<std::int64_t> chain_digits;
  for (const auto &[d, chain] : b.chains) {
    chain_digits.push_back(d);
    const std::string base = Key("chain", d);
    std::ostringstream kinds;
    std::vector<double> regs;
    for (const Transform &t : chain.steps) {
      kinds << TransformKindName(t.kind) << '\n';
      regs.push_back(t.regularization);
    }
    c.PutText(base + "/kinds", kinds.str());
    c.PutVector(base + "/regularization",
                Eigen::Map<const Vector>(regs.data(), static_cast<Eigen::Index>(regs.size())));
    for (std::size_t k = 0; k < chain.steps.size(); ++k)
      c.PutMatrix(Key(base + "/step", static_cast<long>(k)), chain.steps[k].projection);
  }
  c.PutInts("chain/digits", chain_digits);

  c.PutInts("cohort/top_k", {b.cohort.top_k});
  std::ostringstream speakers;
  for (std::size_t i = 0; i < b.cohort.speakers.size(); ++i) {
    const CohortSpeaker &sp = b.cohort.speakers[i];
    speakers << sp.speaker << ' ' << (sp.gender.empty() ? "-" : sp.gender) << '\n';
    const std::string base = Key("cohort", static_cast<long>(i));
    std::vector<std::int64_t> digits;
    for (const auto &kv : sp.digits) digits.push_back(kv.first);
    c.PutInts(base + "/digits", digits);
    for (const auto &[d, v] : sp.digits) c.PutVector(Key(base, d), v);
  }
  c.PutText("cohort/speakers", speakers.str());
  return c;
}

ModelBundle BundleFromContainer(const Container &c) {
  if (c.kind() != "model-bundle") throw CorruptBundle("container is not a model bundle");
  ModelBundle b;
  b.feature_config = FeatureConfigFromVector(c.GetVector("feature_config"));
  b.training_log = c.GetText("training_log");
  b.config_text = c.GetText("config");

  auto num_digits = c.GetInts("hmm/num_digits");
  if (num_digits.size() != 1 || num_digits[0] < 0)
    throw CorruptBundle("bad hmm/num_digits");
  b.hmms.variance_floor = c.GetVector("hmm/variance_floor");
  for (std::int64_t d = 0; d < num_digits[0]; ++d) {
    const std::string base = Key("hmm", static_cast<long>(d));
    auto info = c.GetInts(base + "/info");
    if (info.size() != 2 || info[0] != d) throw CorruptBundle("bad " + base + "/info");
    DigitHmm h;
    h.digit = static_cast<int>(d);
    h.transitions = c.GetMatrix(base + "/transitions");
    h.occupancy = c.GetVector(base + "/occupancy");
    for (std::int64_t s = 0; s < info[1]; ++s)
      h.states.push_back(GetGmm(c, Key(base + "/state", static_cast<long>(s))));
    if (h.transitions.rows() != info[1] || h.transitions.cols() != info[1])
      throw CorruptBundle("transition matrix of digit " + std::to_string(d) +
                          " does not match its state count");
    b.hmms.hmms.push_back(std::move(h));
  }

  for (std::int64_t d : c.GetInts("flat/digits")) {
    const std::string base = Key("flat", static_cast<long>(d));
    FlatGmm f;
    f.digit = static_cast<int>(d);
    f.gmm = GetGmm(c, base);
    f.state_offsets = FromInts(c.GetInts(base + "/state_offsets"));
    b.flats.push_back(std::move(f));
  }

  for (std::int64_t d : c.GetInts("ivector/digits")) {
    const std::string base = Key("ivector", static_cast<long>(d));
    auto info = c.GetInts(base + "/info");
    if (info.size() != 3) throw CorruptBundle("bad " + base + "/info");
    IVectorExtractor e;
    e.digit = static_cast<int>(info[0]);
    e.feature_dim = info[1];
    e.seed = std::bit_cast<std::uint64_t>(info[2]);
    e.ubm_means = c.GetVector(base + "/ubm_means");
    e.mean = c.GetVector(base + "/mean");
    e.variances = c.GetVector(base + "/variances");
    e.subspace = c.GetMatrix(base + "/subspace");
    Vector ev = c.GetVector(base + "/evidence_log");
    e.evidence_log.assign(ev.data(), ev.data() + ev.size());
    const auto sv = e.subspace.rows();
    if (e.feature_dim <= 0 || sv % e.feature_dim != 0 || e.mean.size() != sv ||
        e.ubm_means.size() != sv || e.variances.size() != sv)
      throw CorruptBundle("inconsistent extractor shapes for digit " + std::to_string(d));
    b.extractors.emplace(static_cast<int>(d), std::move(e));
  }

  for (std::int64_t d : c.GetInts("chain/digits")) {
    const std::string base = Key("chain", static_cast<long>(d));
    TransformChain chain;
    chain.digit = static_cast<int>(d);
    std::istringstream kinds(c.GetText(base + "/kinds"));
    Vector regs = c.GetVector(base + "/regularization");
    std::string name;
    long k = 0;
    while (std::getline(kinds, name)) {
      if (name.empty()) continue;
      if (k >= regs.size()) throw CorruptBundle("chain of digit " + std::to_string(d) + " is inconsistent");
      Transform t;
      try {
        t.kind = ParseTransformKind(name);
      } catch (const ConfigError &) {
        throw CorruptBundle("unknown transform '" + name + "' in bundle");
      }
      t.digit = chain.digit;
      t.regularization = regs[k];
      t.projection = c.GetMatrix(Key(base + "/step", k));
      chain.steps.push_back(std::move(t));
      ++k;
    }
    b.chains.emplace(chain.digit, std::move(chain));
  }

  auto top_k = c.GetInts("cohort/top_k");
  if (top_k.size() != 1) throw CorruptBundle("bad cohort/top_k");
  b.cohort.top_k = static_cast<int>(top_k[0]);
  std::istringstream speakers(c.GetText("cohort/speakers"));
  std::string line;
  long i = 0;
  while (std::getline(speakers, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    CohortSpeaker sp;
    ls >> sp.speaker >> sp.gender;
    if (sp.gender == "-") sp.gender.clear();
    const std::string base = Key("cohort", i);
    for (std::int64_t d : c.GetInts(base + "/digits"))
      sp.digits.emplace(static_cast<int>(d), c.GetVector(Key(base, static_cast<long>(d))));
    b.cohort.speakers.push_back(std::move(sp));
    ++i;
  }
  return b;
}

void SaveBundle(const ModelBundle &bundle, const std::string &path) {
  BundleToContainer(bundle).Save(path);
}

ModelBundle LoadBundle(const std::string &path) {
  return BundleFromContainer(Container::Load(path));
}

}  // namespace digitvec
