// digitvec/features.cc

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

#include "digitvec/features.h"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

#include "digitvec/error.h"

namespace digitvec {
namespace {

constexpr double kEnergyFloor = 1e-10;
constexpr double kVarianceFloor = 1e-10;

int RoundUpToPowerOfTwo(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void FeatureConfig::Validate() const {
  if (frame_len_ms <= 0.0 || frame_shift_ms <= 0.0)
    throw ConfigError("frame length and shift must be positive");
  if (frame_shift_ms >= frame_len_ms)
    throw ConfigError("frame_shift_ms must be smaller than frame_len_ms");
  if (num_mel_filters < 1) throw ConfigError("num_mel_filters must be >= 1");
  if (num_cepstra < 1) throw ConfigError("num_cepstra must be >= 1");
  int needed = num_cepstra + (include_c0 ? 0 : 1);
  if (needed > num_mel_filters)
    throw ConfigError("num_cepstra (" + std::to_string(num_cepstra) +
                      ") exceeds num_mel_filters (" +
                      std::to_string(num_mel_filters) + ")");
  if (delta_window < 1) throw ConfigError("delta_window must be >= 1");
  if (pre_emphasis < 0.0 || pre_emphasis >= 1.0)
    throw ConfigError("pre_emphasis must be in [0, 1)");
}

int FeatureConfig::FrameLength(double sample_rate) const {
  return static_cast<int>(std::lround(sample_rate * frame_len_ms / 1000.0));
}

int FeatureConfig::FrameShift(double sample_rate) const {
  return static_cast<int>(std::lround(sample_rate * frame_shift_ms / 1000.0));
}

Eigen::Index FeatureMatrix::NumVoiced() const {
  Eigen::Index n = 0;
  for (bool v : voiced) n += v;
  return n;
}

Matrix FeatureMatrix::VoicedFrames() const {
  if (static_cast<Eigen::Index>(voiced.size()) != frames.rows())
    throw ShapeError("voiced mask length does not match frame count for " +
                     utterance_id);
  Matrix out(NumVoiced(), frames.cols());
  Eigen::Index r = 0;
  for (Eigen::Index t = 0; t < frames.rows(); ++t)
    if (voiced[t]) out.row(r++) = frames.row(t);
  return out;
}

namespace {

// Raw frames without any processing; shared by FrameSignal and the energy
// track.
Matrix RawFrames(const AudioBuffer &audio, const FeatureConfig &cfg) {
  if (audio.sample_rate <= 0.0) throw ConfigError("sample_rate must be > 0");
  const int len = cfg.FrameLength(audio.sample_rate);
  const int shift = cfg.FrameShift(audio.sample_rate);
  const auto total = static_cast<Eigen::Index>(audio.samples.size());
  if (total < len)
    throw EmptyUtterance("audio has " + std::to_string(total) +
                         " samples, fewer than one frame (" +
                         std::to_string(len) + ")");
  const Eigen::Index num_frames = (total - len) / shift + 1;
  Matrix frames(num_frames, len);
  for (Eigen::Index t = 0; t < num_frames; ++t)
    for (int i = 0; i < len; ++i) frames(t, i) = audio.samples[t * shift + i];
  return frames;
}

}  // namespace

Matrix FrameSignal(const AudioBuffer &audio, const FeatureConfig &cfg) {
  Matrix frames = RawFrames(audio, cfg);
  const Eigen::Index len = frames.cols();
  RowVector window(len);
  for (Eigen::Index i = 0; i < len; ++i)
    window(i) = len == 1 ? 1.0
                         : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i /
                                                  static_cast<double>(len - 1));
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    auto row = frames.row(t);
    for (Eigen::Index i = len - 1; i > 0; --i)
      row(i) -= cfg.pre_emphasis * row(i - 1);
    row(0) -= cfg.pre_emphasis * row(0);
    row.array() *= window.array();
  }
  return frames;
}

Vector FrameLogEnergy(const AudioBuffer &audio, const FeatureConfig &cfg) {
  Matrix frames = RawFrames(audio, cfg);
  Vector energy = frames.rowwise().squaredNorm();
  return energy.array().max(kEnergyFloor).log().matrix();
}

double MelFilterbank::HzToMel(double hz) {
  return 1127.0 * std::log(1.0 + hz / 700.0);
}

double MelFilterbank::MelToHz(double mel) {
  return 700.0 * (std::exp(mel / 1127.0) - 1.0);
}

MelFilterbank::MelFilterbank(int num_filters, int fft_size, double sample_rate,
                             double low_hz, double high_hz)
    : fft_size_(fft_size) {
  const double nyquist = sample_rate / 2.0;
  if (high_hz <= 0.0 || high_hz > nyquist) high_hz = nyquist;
  if (low_hz < 0.0 || low_hz >= high_hz)
    throw ConfigError("invalid filterbank frequency range");
  const double mel_low = HzToMel(low_hz), mel_high = HzToMel(high_hz);
  const double mel_step = (mel_high - mel_low) / (num_filters + 1);
  const int num_bins = fft_size / 2 + 1;
  weights_ = Matrix::Zero(num_filters, num_bins);
  centers_hz_.resize(num_filters);
  for (int m = 0; m < num_filters; ++m) {
    const double left = mel_low + m * mel_step;
    const double center = left + mel_step;
    const double right = center + mel_step;
    centers_hz_[m] = MelToHz(center);
    for (int k = 0; k < num_bins; ++k) {
      const double mel = HzToMel(k * sample_rate / fft_size);
      if (mel > left && mel < right)
        weights_(m, k) = mel <= center ? (mel - left) / (center - left)
                                       : (right - mel) / (right - center);
    }
  }
}

Matrix ComputeMelEnergies(const Matrix &frames, double sample_rate,
                          const FeatureConfig &cfg) {
  const int fft_size = RoundUpToPowerOfTwo(static_cast<int>(frames.cols()));
  MelFilterbank bank(cfg.num_mel_filters, fft_size, sample_rate,
                     cfg.low_freq_hz, cfg.high_freq_hz);
  const int num_bins = fft_size / 2 + 1;
  Eigen::FFT<double> fft;
  std::vector<double> padded(fft_size);
  std::vector<std::complex<double>> spectrum;
  Matrix power(frames.rows(), num_bins);
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    std::fill(padded.begin(), padded.end(), 0.0);
    for (Eigen::Index i = 0; i < frames.cols(); ++i) padded[i] = frames(t, i);
    fft.fwd(spectrum, padded);
    for (int k = 0; k < num_bins; ++k) power(t, k) = std::norm(spectrum[k]);
  }
  return power * bank.Weights().transpose();
}

Matrix ComputeCepstra(const Matrix &frames, double sample_rate,
                      const FeatureConfig &cfg) {
  cfg.Validate();
  const int num_filters = cfg.num_mel_filters;
  Matrix log_mel = ComputeMelEnergies(frames, sample_rate, cfg)
                       .array()
                       .max(kEnergyFloor)
                       .log()
                       .matrix();
  const int first = cfg.include_c0 ? 0 : 1;
  Matrix dct(num_filters, cfg.num_cepstra);
  for (int j = 0; j < cfg.num_cepstra; ++j) {
    const int k = first + j;
    const double scale =
        k == 0 ? 1.0 / num_filters : std::sqrt(2.0 / num_filters);
    for (int m = 0; m < num_filters; ++m)
      dct(m, j) = scale * std::cos(std::numbers::pi * k * (m + 0.5) / num_filters);
  }
  return log_mel * dct;
}

Matrix AppendDeltas(const Matrix &static_feats, int delta_window) {
  const Eigen::Index num_frames = static_feats.rows();
  const Eigen::Index dim = static_feats.cols();
  if (delta_window < 1) throw ConfigError("delta_window must be >= 1");
  if (num_frames < 2 * delta_window + 1)
    throw EmptyUtterance("need at least " + std::to_string(2 * delta_window + 1) +
                         " frames for deltas, got " + std::to_string(num_frames));
  double denom = 0.0;
  for (int n = 1; n <= delta_window; ++n) denom += 2.0 * n * n;
  auto regress = [&](const Matrix &in) {
    Matrix out(num_frames, dim);
    for (Eigen::Index t = 0; t < num_frames; ++t) {
      RowVector acc = RowVector::Zero(dim);
      for (int n = 1; n <= delta_window; ++n) {
        Eigen::Index ahead = std::min<Eigen::Index>(t + n, num_frames - 1);
        Eigen::Index behind = std::max<Eigen::Index>(t - n, 0);
        acc += n * (in.row(ahead) - in.row(behind));
      }
      out.row(t) = acc / denom;
    }
    return out;
  };
  Matrix delta = regress(static_feats);
  Matrix delta2 = regress(delta);
  Matrix out(num_frames, 3 * dim);
  out << static_feats, delta, delta2;
  return out;
}

FeatureMatrix ApplyCmvn(const FeatureMatrix &features) {
  const Eigen::Index num_frames = features.NumFrames();
  if (num_frames < 2)
    throw EmptyUtterance("CMVN needs at least 2 frames in " +
                         features.utterance_id);
  std::vector<bool> mask = features.voiced;
  if (mask.empty()) mask.assign(num_frames, true);
  if (static_cast<Eigen::Index>(mask.size()) != num_frames)
    throw ShapeError("voiced mask length does not match frame count");
  Matrix voiced_rows = FeatureMatrix{features.frames, mask, {}, {}}.VoicedFrames();
  if (voiced_rows.rows() < 2)
    throw EmptyUtterance("CMVN needs at least 2 voiced frames in " +
                         features.utterance_id);
  RowVector mean = voiced_rows.colwise().mean();
  RowVector var =
      (voiced_rows.rowwise() - mean).array().square().colwise().mean();
  RowVector inv_std = var.array().max(kVarianceFloor).rsqrt();
  FeatureMatrix out = features;
  out.voiced = mask;
  out.frames = ((features.frames.rowwise() - mean).array().rowwise() *
                inv_std.array())
                   .matrix();
  return out;
}

std::vector<bool> DetectVoiced(const Vector &log_energy, double energy_scale) {
  if (log_energy.size() == 0) throw EmptyUtterance("empty energy track");
  const double threshold = energy_scale * log_energy.mean();
  std::vector<bool> mask(log_energy.size());
  bool any = false;
  for (Eigen::Index t = 0; t < log_energy.size(); ++t) {
    mask[t] = log_energy(t) > threshold;
    any = any || mask[t];
  }
  if (!any) throw EmptyUtterance("no frame exceeds the energy threshold");
  return mask;
}

FeatureMatrix ExtractFeatures(const AudioBuffer &audio, const FeatureConfig &cfg,
                              const std::string &utterance_id,
                              const std::vector<int> &digits) {
  cfg.Validate();
  Matrix frames = FrameSignal(audio, cfg);
  Matrix cepstra = ComputeCepstra(frames, audio.sample_rate, cfg);
  FeatureMatrix feats;
  feats.utterance_id = utterance_id;
  feats.digits = digits;
  feats.frames = AppendDeltas(cepstra, cfg.delta_window);
  feats.voiced = DetectVoiced(FrameLogEnergy(audio, cfg), cfg.vad_energy_scale);
  return ApplyCmvn(feats);
}

}  // namespace digitvec
