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

#include <stdexcept>
#include <string>
#include <vector>

namespace cdur {

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 0;
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a RIFF/WAVE file: PCM 16-bit or IEEE float 32-bit, any channel
/// count (averaged to mono). 16-bit sample s maps to s/32768.
Waveform read_wav(const std::string& path);

/// Writes mono 16-bit PCM. Samples clipped to [-1, 1]; 1.0 maps to 32767.
void write_wav(const std::string& path, const Waveform& w);

/// Windowed-sinc resampler (Hann-windowed, 32 taps per side). Identity
/// pass-through when rates already match.
Waveform resample(const Waveform& w, int target_rate);

/// read_wav followed by resampling to `target_rate` (0 = keep native rate).
Waveform load_wav(const std::string& path, int target_rate = 0);

}  // namespace cdur
