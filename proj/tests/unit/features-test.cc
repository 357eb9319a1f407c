// tests/unit/features-test.cc

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

#include <cmath>
#include <numbers>

#include "digitvec/error.h"
#include "digitvec/features.h"
#include "digitvec/linalg.h"
#include "doctest.h"

namespace digitvec {

namespace {

AudioBuffer Noise(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  AudioBuffer a;
  for (std::size_t i = 0; i < n; ++i) a.samples.push_back(scale * rng.Normal());
  return a;
}

AudioBuffer Tone(std::size_t n, double hz, double amp = 1.0) {
  AudioBuffer a;
  for (std::size_t i = 0; i < n; ++i)
    a.samples.push_back(amp * std::sin(2.0 * std::numbers::pi * hz * i / a.sample_rate));
  return a;
}

}  // namespace

TEST_CASE("FrameSignal frame count") {
  FeatureConfig cfg;
  Matrix frames = FrameSignal(Noise(16000, 1), cfg);
  CHECK(frames.rows() == (16000 - 400) / 160 + 1);
  CHECK(frames.rows() == 98);
  CHECK(frames.cols() == 400);
  CHECK(FrameSignal(Noise(400, 2), cfg).rows() == 1);
  CHECK_THROWS_AS(FrameSignal(Noise(399, 3), cfg), EmptyUtterance);
}

TEST_CASE("FrameSignal zero signal") {
  AudioBuffer a;
  a.samples.assign(2000, 0.0);
  CHECK(FrameSignal(a, FeatureConfig()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mel energies of a 1 kHz tone peak at the filter covering 1 kHz") {
  FeatureConfig cfg;
  Matrix frames = FrameSignal(Tone(400, 1000.0), cfg);
  Matrix mel = ComputeMelEnergies(frames, 16000.0, cfg);
  REQUIRE(mel.cols() == cfg.num_mel_filters);
  Eigen::Index best;
  mel.row(0).maxCoeff(&best);
  MelFilterbank bank(cfg.num_mel_filters, 512, 16000.0, cfg.low_freq_hz, 8000.0);
  // The peak filter's triangle spans 1 kHz.
  const double lo = best > 0 ? bank.CenterHz(static_cast<int>(best) - 1) : 0.0;
  const double hi = best + 1 < cfg.num_mel_filters ? bank.CenterHz(static_cast<int>(best) + 1) : 8000.0;
  CHECK(lo < 1000.0);
  CHECK(hi > 1000.0);
  // Filters far from 1 kHz carry orders of magnitude less energy.
  CHECK(mel(0, 0) < 1e-3 * mel(0, best));
  CHECK(mel(0, cfg.num_mel_filters - 1) < 1e-3 * mel(0, best));
}

TEST_CASE("mel scale round trip") {
  for (double hz : {0.0, 100.0, 1000.0, 7999.0})
    CHECK(MelFilterbank::MelToHz(MelFilterbank::HzToMel(hz)) == doctest::Approx(hz));
}

TEST_CASE("scaling a frame by 2 shifts only c0 by log 4") {
  FeatureConfig cfg;
  Matrix frames = FrameSignal(Noise(400, 4), cfg);
  Matrix a = ComputeCepstra(frames, 16000.0, cfg);
  Matrix b = ComputeCepstra(2.0 * frames, 16000.0, cfg);
  REQUIRE(a.cols() == 20);
  CHECK(b(0, 0) - a(0, 0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  for (int k = 1; k < 20; ++k) CHECK(std::abs(b(0, k) - a(0, k)) < 1e-9);
}

TEST_CASE("deltas") {
  Matrix flat = Matrix::Constant(10, 20, 3.0);
  Matrix out = AppendDeltas(flat, 2);
  CHECK(out.cols() == 60);
  CHECK(out.rightCols(40).cwiseAbs().maxCoeff() == 0.0);

  // Ramp x_t = 2t: interior delta is 2 (regression slope); the delta of the
  // constant interior delta is 0.
  Matrix ramp(12, 1);
  for (int t = 0; t < 12; ++t) ramp(t, 0) = 2.0 * t;
  Matrix r = AppendDeltas(ramp, 2);
  for (int t = 2; t < 10; ++t) CHECK(r(t, 1) == doctest::Approx(2.0));
  for (int t = 4; t < 8; ++t) CHECK(std::abs(r(t, 2)) < 1e-12);
  CHECK_THROWS_AS(AppendDeltas(Matrix::Zero(4, 2), 2), EmptyUtterance);
}

TEST_CASE("CMVN") {
  Rng rng(5);
  FeatureMatrix f;
  f.frames.resize(50, 4);
  for (int t = 0; t < 50; ++t)
    for (int j = 0; j < 4; ++j) f.frames(t, j) = 3.0 + 2.0 * rng.Normal();
  f.frames.col(3).setConstant(7.0);
  f.voiced.assign(50, true);
  FeatureMatrix once = ApplyCmvn(f);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(once.frames.col(j).mean()) < 1e-12);
    CHECK(once.frames.col(j).array().square().mean() == doctest::Approx(1.0));
  }
  CHECK(once.frames.col(3).cwiseAbs().maxCoeff() == 0.0);
  FeatureMatrix twice = ApplyCmvn(once);
  CHECK((twice.frames - once.frames).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy VAD") {
  // 10 loud frames then 10 silent frames, repeated.
  AudioBuffer a = Noise(16000, 6);
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    if ((i / 1600) % 2 == 1) a.samples[i] = 0.0;
  FeatureConfig cfg;
  Vector energy = FrameLogEnergy(a, cfg);
  std::vector<bool> mask = DetectVoiced(energy, cfg.vad_energy_scale);
  const int len = 400, shift = 160;
  for (int t = 0; t < energy.size(); ++t) {
    const int first = t * shift, last = first + len - 1;
    if (first / 1600 != last / 1600) continue;  // frame straddles a boundary
    CHECK(mask[t] == ((first / 1600) % 2 == 0));
  }

  std::vector<bool> loud = DetectVoiced(FrameLogEnergy(Tone(8000, 440.0, 10.0), cfg), 0.5);
  for (bool v : loud) CHECK(v);

  AudioBuffer silence;
  silence.samples.assign(8000, 0.0);
  CHECK_THROWS_AS(DetectVoiced(FrameLogEnergy(silence, cfg), 0.5), EmptyUtterance);
}

TEST_CASE("ExtractFeatures output shape") {
  AudioBuffer a = Noise(16000, 7);
  FeatureMatrix f = ExtractFeatures(a, FeatureConfig(), "u1", {1, 2});
  CHECK(f.frames.rows() == 98);
  CHECK(f.frames.cols() == 60);
  CHECK(f.voiced.size() == 98u);
  CHECK(f.utterance_id == "u1");
}

TEST_CASE("FeatureConfig validation") {
  FeatureConfig cfg;
  cfg.num_cepstra = 30;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
}

}  // namespace digitvec
