// Copyright 2026 The cdur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "cdur/tensor.hpp"
#include "cdur/wav.hpp"

namespace cdur {

struct MelConfig {
  int sample_rate = 44100;
  double hop_ms = 20.0;
  double window_ms = 40.0;
  int fft_size = 2048;
  int mel_bins = 64;
  double fmin_hz = 0.0;      // fmax defaults to Nyquist
  double fmax_hz = -1.0;
  double log_floor = 1e-10;  // epsilon inside log(power + eps)

  double frame_rate() const { return 1000.0 / hop_ms; }

  int hop_samples() const { return static_cast<int>(sample_rate * hop_ms / 1000.0); }
  int window_samples() const { return static_cast<int>(sample_rate * window_ms / 1000.0); }
};

/// T x D log-Mel power spectrogram with frame-rate metadata.
struct LogMelSpectrogram {
  Tensor frames;         // [T, D]
  double frame_rate = 50.0;
  int mel_bins = 64;

  std::size_t num_frames() const { return frames.dim(0); }
};

/// Mel scale: mel(f) = 2595 * log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank, rows = filters, cols = fft_size/2 + 1 power
/// bins; filters span [fmin, fmax] with peak weight 1.
Tensor mel_filterbank(const MelConfig& cfg);

/// Hann-windowed power spectrogram -> mel filterbank -> log(power + eps).
/// Frames are centered: the waveform is reflect-padded by half a window so
/// T == ceil(num_samples / hop).
LogMelSpectrogram log_mel(const Waveform& wave, const MelConfig& cfg);

/// In-place radix-2 FFT used by the front end; n must be a power of two.
void fft_radix2(std::vector<double>& re, std::vector<double>& im);

}  // namespace cdur
