// digitvec/features.h

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

#ifndef DIGITVEC_FEATURES_H_
#define DIGITVEC_FEATURES_H_

#include <string>
#include <vector>

#include "digitvec/linalg.h"

namespace digitvec {

/// Mono audio.  Samples are on the PCM16 amplitude scale (|x| <= 32768).
struct AudioBuffer {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

struct FeatureConfig {
  double frame_len_ms = 25.0;
  double frame_shift_ms = 10.0;
  int num_mel_filters = 24;
  /// Static coefficients kept per frame, c0 included when include_c0.
  int num_cepstra = 20;
  bool include_c0 = true;
  int delta_window = 2;
  double pre_emphasis = 0.97;
  double low_freq_hz = 20.0;
  /// Upper filterbank edge; <= 0 means Nyquist.
  double high_freq_hz = 0.0;
  /// Voiced iff log-energy > vad_energy_scale * mean log-energy.
  double vad_energy_scale = 0.5;

  /// Throws ConfigError on inconsistent settings.
  void Validate() const;
  int FrameLength(double sample_rate) const;
  int FrameShift(double sample_rate) const;
  /// Dimension after deltas and double deltas.
  int OutputDim() const { return 3 * num_cepstra; }
};

/// Feature frames of one utterance (rows are frames).
struct FeatureMatrix {
  Matrix frames;
  std::vector<bool> voiced;
  std::string utterance_id;
  std::vector<int> digits;

  Eigen::Index NumFrames() const { return frames.rows(); }
  Eigen::Index Dim() const { return frames.cols(); }
  Eigen::Index NumVoiced() const;
  /// Rows whose voiced flag is set, in order.
  Matrix VoicedFrames() const;
};

/// Splits audio into pre-emphasized, Hamming-windowed frames (one per row).
/// Throws EmptyUtterance if the audio is shorter than one frame.
Matrix FrameSignal(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Log energy of each raw (un-emphasized, un-windowed) frame, floored at
/// log(1e-10).
Vector FrameLogEnergy(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Triangular filters equally spaced on the mel scale, applied to the power
/// spectrum of an FFT of size `fft_size`.
class MelFilterbank {
 public:
  MelFilterbank(int num_filters, int fft_size, double sample_rate,
                double low_hz, double high_hz);

  int NumFilters() const { return static_cast<int>(weights_.rows()); }
  int FftSize() const { return fft_size_; }
  double CenterHz(int filter) const { return centers_hz_[filter]; }
  /// num_filters x (fft_size/2 + 1).
  const Matrix &Weights() const { return weights_; }

  static double HzToMel(double hz);
  static double MelToHz(double mel);

 private:
  int fft_size_;
  Matrix weights_;
  std::vector<double> centers_hz_;
};

/// Mel filterbank energies (before the log) of windowed frames.
Matrix ComputeMelEnergies(const Matrix &frames, double sample_rate,
                          const FeatureConfig &cfg);

/// Static MFCCs: power spectrum -> mel filterbank -> log -> DCT-II.  The
/// DCT basis is scaled so that c0 is the mean log filterbank energy and the
/// remaining coefficients use the orthonormal sqrt(2/M) factor.
Matrix ComputeCepstra(const Matrix &frames, double sample_rate,
                      const FeatureConfig &cfg);

/// Appends regression deltas and double deltas with edge replication.
Matrix AppendDeltas(const Matrix &static_feats, int delta_window);

/// Per-dimension mean and variance normalization using statistics of the
/// voiced frames; variances are floored at 1e-10.
FeatureMatrix ApplyCmvn(const FeatureMatrix &features);

/// Energy-threshold voice activity detection.
std::vector<bool> DetectVoiced(const Vector &log_energy, double energy_scale);

/// Full front end: framing, MFCC, deltas, VAD and CMVN.
FeatureMatrix ExtractFeatures(const AudioBuffer &audio, const FeatureConfig &cfg,
                              const std::string &utterance_id,
                              const std::vector<int> &digits);

}  // namespace digitvec

#endif  // DIGITVEC_FEATURES_H_
