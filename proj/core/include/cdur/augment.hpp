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

#include "cdur/melspec.hpp"
#include "cdur/rng.hpp"
#include "cdur/tensor.hpp"

namespace cdur {

struct SpecAugParams {
  int gamma_t = 2;   // number of time masks
  int eta_t0 = 60;   // max time-mask width, frames
  int gamma_f = 2;   // number of frequency masks
  int eta_f0 = 12;   // max frequency-mask width, bins
  // Fill for masked cells. 0 matches features standardized to zero mean;
  // for raw log-mel pass the per-clip mean instead.
  double mask_value = 0.0;
};

struct TimeShiftParams {
  double std_frames = 10.0;  // stddev of the normal shift draw
};

/// Masks gamma_t random time stripes and gamma_f random frequency stripes.
/// Mask width ~ U[0, eta0]; start ~ U[0, dim - width). Input not mutated.
LogMelSpectrogram spec_augment(const LogMelSpectrogram& spec, const SpecAugParams& p, Rng& rng);

/// Circularly rotates frames by round(N(0, std_frames)); positive = forward.
LogMelSpectrogram time_shift(const LogMelSpectrogram& spec, const TimeShiftParams& p, Rng& rng);

/// Rotate rows of a [T, D] tensor by `shift` (any sign), wrapping around.
Tensor roll_rows(const Tensor& x, std::int64_t shift);

/// Label smoothing: y -> (1 - eps) * y + eps / E, elementwise over E events.
Tensor smooth_labels(const Tensor& labels, double epsilon);

}  // namespace cdur
