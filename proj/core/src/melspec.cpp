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

#include "cdur/melspec.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cdur {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
  const std::size_t n = re.size();
  if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
    throw std::invalid_argument("fft_radix2: size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (std::size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::size_t a = i + k, b = i + k + len / 2;
        const double tr = re[b] * cr - im[b] * ci;
        const double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
}

Tensor mel_filterbank(const MelConfig& cfg) {
  const int bins = cfg.fft_size / 2 + 1;
  const double fmax = cfg.fmax_hz > 0 ? cfg.fmax_hz : cfg.sample_rate / 2.0;
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(fmax);

  // mel_bins + 2 equally spaced mel points -> triangle edges.
  std::vector<double> edges(cfg.mel_bins + 2);
  for (int i = 0; i < cfg.mel_bins + 2; ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.mel_bins + 1));

  Tensor fb({static_cast<std::size_t>(cfg.mel_bins), static_cast<std::size_t>(bins)});
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  for (int m = 0; m < cfg.mel_bins; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int b = 0; b < bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > left && f < right)
        w = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      fb.at(m, b) = w;
    }
  }
  return fb;
}

LogMelSpectrogram log_mel(const Waveform& wave, const MelConfig& cfg) {
  if (wave.samples.empty()) throw std::invalid_argument("log_mel: empty waveform");
  const int hop = cfg.hop_samples();
  const int win = cfg.window_samples();
  const int nfft = cfg.fft_size;
  if (win > nfft) throw std::invalid_argument("log_mel: window longer than FFT size");
  if (hop <= 0 || win <= 0) throw std::invalid_argument("log_mel: bad hop/window");

  const auto n = static_cast<std::int64_t>(wave.samples.size());
  const auto num_frames = static_cast<std::size_t>((n + hop - 1) / hop);

  // Centered frames: index into the waveform with reflection at both ends.
  auto sample_at = [&](std::int64_t i) -> double {
    if (n == 1) return wave.samples[0];
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return wave.samples[static_cast<std::size_t>(i)];
  };

  std::vector<double> hann(win);
  for (int i = 0; i < win; ++i)
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (win - 1));

  const Tensor fb = mel_filterbank(cfg);
  const int bins = nfft / 2 + 1;

  LogMelSpectrogram out;
  out.mel_bins = cfg.mel_bins;
  out.frame_rate = 1000.0 / cfg.hop_ms;
  out.frames = Tensor({num_frames, static_cast<std::size_t>(cfg.mel_bins)});

  std::vector<double> re(nfft), im(nfft);
  std::vector<double> power(bins);
  for (std::size_t t = 0; t < num_frames; ++t) {
    const std::int64_t start = static_cast<std::int64_t>(t) * hop - win / 2;
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (int i = 0; i < win; ++i) re[i] = sample_at(start + i) * hann[i];
    fft_radix2(re, im);
    for (int b = 0; b < bins; ++b) power[b] = re[b] * re[b] + im[b] * im[b];
    for (int m = 0; m < cfg.mel_bins; ++m) {
      double acc = 0.0;
      const double* w = fb.data() + static_cast<std::size_t>(m) * bins;
      for (int b = 0; b < bins; ++b) acc += w[b] * power[b];
      out.frames.at(t, m) = std::log(acc + cfg.log_floor);
    }
  }
  return out;
}

}  // namespace cdur
