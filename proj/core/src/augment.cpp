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

#include "cdur/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace cdur {

LogMelSpectrogram spec_augment(const LogMelSpectrogram& spec, const SpecAugParams& p, Rng& rng) {
  const auto T = static_cast<std::int64_t>(spec.frames.dim(0));
  const auto D = static_cast<std::int64_t>(spec.frames.dim(1));
  if (T == 0 || D == 0) throw std::invalid_argument("spec_augment: empty spectrogram");
  if (p.gamma_t < 0 || p.gamma_f < 0 || p.eta_t0 < 0 || p.eta_f0 < 0)
    throw std::invalid_argument("spec_augment: negative parameter");
  if ((p.gamma_t > 0 && p.eta_t0 >= T) || (p.gamma_f > 0 && p.eta_f0 >= D))
    throw std::invalid_argument("spec_augment: mask width bound >= dimension");

  LogMelSpectrogram out = spec;
  for (int m = 0; m < p.gamma_t; ++m) {
    const std::int64_t width = rng.uniform_int(0, p.eta_t0 + 1);
    if (width == 0) continue;
    const std::int64_t t0 = rng.uniform_int(0, T - width);
    for (std::int64_t t = t0; t < t0 + width; ++t)
      for (std::int64_t d = 0; d < D; ++d) out.frames.at(t, d) = p.mask_value;
  }
  for (int m = 0; m < p.gamma_f; ++m) {
    const std::int64_t width = rng.uniform_int(0, p.eta_f0 + 1);
    if (width == 0) continue;
    const std::int64_t f0 = rng.uniform_int(0, D - width);
    for (std::int64_t t = 0; t < T; ++t)
      for (std::int64_t d = f0; d < f0 + width; ++d) out.frames.at(t, d) = p.mask_value;
  }
  return out;
}

Tensor roll_rows(const Tensor& x, std::int64_t shift) {
  const auto T = static_cast<std::int64_t>(x.dim(0));
  const std::size_t D = x.dim(1);
  Tensor out(x.shape());
  for (std::int64_t t = 0; t < T; ++t) {
    std::int64_t src = (t - shift) % T;
    if (src < 0) src += T;
    for (std::size_t d = 0; d < D; ++d) out.at(t, d) = x.at(src, d);
  }
  return out;
}

LogMelSpectrogram time_shift(const LogMelSpectrogram& spec, const TimeShiftParams& p, Rng& rng) {
  if (spec.frames.size() == 0) throw std::invalid_argument("time_shift: empty spectrogram");
  if (p.std_frames < 0) throw std::invalid_argument("time_shift: negative std");
  const auto shift = static_cast<std::int64_t>(std::lrint(rng.normal(0.0, p.std_frames)));
  LogMelSpectrogram out = spec;
  out.frames = roll_rows(spec.frames, shift);
  return out;
}

Tensor smooth_labels(const Tensor& labels, double epsilon) {
  const std::size_t E = labels.size();
  if (E == 0) throw std::invalid_argument("smooth_labels: empty label vector");
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("smooth_labels: epsilon outside [0, 1]");
  Tensor out = labels;
  for (std::size_t i = 0; i < E; ++i)
    out[i] = (1.0 - epsilon) * labels[i] + epsilon / static_cast<double>(E);
  return out;
}

}  // namespace cdur
