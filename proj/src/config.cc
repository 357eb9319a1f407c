// digitvec/config.cc

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

#include "digitvec/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "digitvec/error.h"

namespace digitvec {
namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string &key, const std::string &text) {
  const std::string v = Trim(text);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("bad value '" + text + "' for config key '" + key + "'");
  return out;
}

bool ParseBool(const std::string &key, const std::string &text) {
  const std::string v = Trim(text);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean '" + text + "' for config key '" + key + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PipelineConfig::PipelineConfig() { Bind(); }

PipelineConfig::PipelineConfig(const PipelineConfig &other)
    : features(other.features),
      hmm(other.hmm),
      ivector(other.ivector),
      compensation(other.compensation),
      scoring(other.scoring),
      dcf_old(other.dcf_old),
      dcf_new(other.dcf_new),
      synth(other.synth),
      seed(other.seed),
      jobs(other.jobs) {
  Bind();
}

PipelineConfig &PipelineConfig::operator=(const PipelineConfig &other) {
  if (this != &other) {
    features = other.features;
    hmm = other.hmm;
    ivector = other.ivector;
    compensation = other.compensation;
    scoring = other.scoring;
    dcf_old = other.dcf_old;
    dcf_new = other.dcf_new;
    synth = other.synth;
    seed = other.seed;
    jobs = other.jobs;
  }
  return *this;
}

void PipelineConfig::Bind() {
  options_.clear();
  auto add_int = [this](std::string key, int *field) {
    options_.push_back({key, [key, field](const std::string &v) { *field = ParseNumber<int>(key, v); },
                        [field] { return std::to_string(*field); }});
  };
  auto add_double = [this](std::string key, double *field) {
    options_.push_back(
        {key, [key, field](const std::string &v) { *field = ParseNumber<double>(key, v); },
         [field] { return FormatDouble(*field); }});
  };
  auto add_bool = [this](std::string key, bool *field) {
    options_.push_back({key, [key, field](const std::string &v) { *field = ParseBool(key, v); },
                        [field] { return std::string(*field ? "true" : "false"); }});
  };
  auto add_u64 = [this](std::string key, std::uint64_t *field) {
    options_.push_back(
        {key, [key, field](const std::string &v) { *field = ParseNumber<std::uint64_t>(key, v); },
         [field] { return std::to_string(*field); }});
  };

  add_u64("run.seed", &seed);
  add_int("run.jobs", &jobs);

  add_double("features.frame_len_ms", &features.frame_len_ms);
  add_double("features.frame_shift_ms", &features.frame_shift_ms);
  add_int("features.num_mel_filters", &features.num_mel_filters);
  add_int("features.num_cepstra", &features.num_cepstra);
  add_bool("features.include_c0", &features.include_c0);
  add_int("features.delta_window", &features.delta_window);
  add_double("features.pre_emphasis", &features.pre_emphasis);
  add_double("features.low_freq_hz", &features.low_freq_hz);
  add_double("features.high_freq_hz", &features.high_freq_hz);
  add_double("features.vad_energy_scale", &features.vad_energy_scale);

  add_int("hmm.num_digits", &hmm.num_digits);
  add_int("hmm.num_states", &hmm.num_states);
  add_int("hmm.num_components", &hmm.num_components);
  add_int("hmm.num_iters", &hmm.num_iters);
  add_int("hmm.gmm_em_iters", &hmm.gmm_em_iters);
  add_bool("hmm.update_transitions", &hmm.update_transitions);
  add_double("hmm.variance_floor_scale", &hmm.variance_floor_scale);

  add_int("ivector.rank", &ivector.rank);
  add_int("ivector.num_iters", &ivector.num_iters);
  add_bool("ivector.minimum_divergence", &ivector.minimum_divergence);
  add_double("ivector.md_tolerance", &ivector.md_tolerance);
  add_int("ivector.md_max_steps", &ivector.md_max_steps);

  options_.push_back(
      {"compensation.method",
       [this](const std::string &v) { compensation.method = ParseCompensationMethod(Trim(v)); },
       [this] { return std::string(CompensationMethodName(compensation.method)); }});
  add_double("compensation.reg_coeff", &compensation.reg_coeff);
  add_int("compensation.lda_dim", &compensation.lda_dim);
  options_.push_back(
      {"compensation.uncertainty_source",
       [this](const std::string &v) {
         const std::string t = Trim(v);
         if (t == "average") compensation.uncertainty_source = UncertaintySource::kAverage;
         else if (t == "total_plus_average")
           compensation.uncertainty_source = UncertaintySource::kTotalPlusAverage;
         else throw ConfigError("bad value '" + v + "' for config key 'compensation.uncertainty_source'");
       },
       [this] {
         return std::string(compensation.uncertainty_source == UncertaintySource::kAverage
                                ? "average"
                                : "total_plus_average");
       }});

  add_bool("scoring.snorm", &scoring.snorm);
  add_int("scoring.top_k", &scoring.top_k);

  add_double("metrics.old_c_miss", &dcf_old.c_miss);
  add_double("metrics.old_c_fa", &dcf_old.c_fa);
  add_double("metrics.old_p_target", &dcf_old.p_target);
  add_double("metrics.new_c_miss", &dcf_new.c_miss);
  add_double("metrics.new_c_fa", &dcf_new.c_fa);
  add_double("metrics.new_p_target", &dcf_new.p_target);

  add_int("synth.num_speakers", &synth.num_speakers);
  add_int("synth.utts_per_speaker", &synth.utts_per_speaker);
  add_int("synth.digits_per_utt", &synth.digits_per_utt);
  add_int("synth.enroll_utts", &synth.enroll_utts);
  add_int("synth.num_digits", &synth.num_digits);
  add_int("synth.feature_dim", &synth.feature_dim);
  add_int("synth.states_per_digit", &synth.states_per_digit);
  add_double("synth.frames_per_state_mean", &synth.frames_per_state_mean);
  add_int("synth.frames_per_state_jitter", &synth.frames_per_state_jitter);
  add_double("synth.state_mean_scale", &synth.state_mean_scale);
  add_double("synth.speaker_offset_scale", &synth.speaker_offset_scale);
  add_double("synth.channel_offset_scale", &synth.channel_offset_scale);
  add_int("synth.channel_rank", &synth.channel_rank);
  add_double("synth.noise_scale", &synth.noise_scale);
  add_double("synth.background_fraction", &synth.background_fraction);
  add_double("synth.development_fraction", &synth.development_fraction);
  add_bool("synth.audio", &synth.audio);
}

void PipelineConfig::Set(const std::string &key, const std::string &value) {
  for (Option &o : options_)
    if (o.key == key) {
      o.set(value);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string PipelineConfig::Get(const std::string &key) const {
  for (const Option &o : options_)
    if (o.key == key) return o.get();
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> PipelineConfig::Keys() const {
  std::vector<std::string> keys;
  for (const Option &o : options_) keys.push_back(o.key);
  return keys;
}

void PipelineConfig::Merge(std::istream &is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto &[section, body] : tree) {
    if (body.empty()) {
      if (!body.data().empty())
        throw ConfigError("config key '" + section + "' is outside any section");
      continue;
    }
    for (const auto &[key, value] : body) Set(section + "." + key, value.data());
  }
}

void PipelineConfig::MergeFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  Merge(is);
}

std::string PipelineConfig::ToText(bool include_jobs) const {
  std::ostringstream os;
  std::string current;
  for (const Option &o : options_) {
    if (!include_jobs && o.key == "run.jobs") continue;
    const auto dot = o.key.find('.');
    const std::string section = o.key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << o.key.substr(dot + 1) << " = " << o.get() << '\n';
  }
  return os.str();
}

void PipelineConfig::Finalize() {
  if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
  hmm.seed = seed;
  hmm.jobs = jobs;
  ivector.seed = seed;
  ivector.jobs = jobs;
  synth.seed = seed;
  synth.jobs = jobs;
  features.Validate();
  hmm.Validate();
  if (ivector.rank < 1) throw ConfigError("ivector.rank must be >= 1");
  if (ivector.num_iters < 0) throw ConfigError("ivector.num_iters must be >= 0");
  if (ivector.md_max_steps < 1) throw ConfigError("ivector.md_max_steps must be >= 1");
  if (compensation.reg_coeff < 0.0) throw ConfigError("compensation.reg_coeff must be >= 0");
  if (compensation.lda_dim < 0) throw ConfigError("compensation.lda_dim must be >= 0");
  if (scoring.top_k < 0) throw ConfigError("scoring.top_k must be >= 0");
  dcf_old.Validate();
  dcf_new.Validate();
  synth.Validate();
}

}  // namespace digitvec
