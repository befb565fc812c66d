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

#include "cdur/dataset.hpp"
#include "cdur/wav.hpp"

namespace cdur {

/// Event prototype: a synthesizer for one label. Kinds:
///   tone       - sine burst at center_hz
///   chirp      - linear sweep center_hz -> center_hz + bandwidth_hz
///   band_noise - white noise bandpassed around center_hz (+- bandwidth/2)
struct EventPrototype {
  std::string label;
  std::string kind;       // tone | chirp | band_noise
  double center_hz = 440.0;
  double bandwidth_hz = 0.0;
};

struct SynthConfig {
  std::vector<EventPrototype> events;
  int sample_rate = 22050;
  double clip_seconds = 10.0;
  double min_event_seconds = 0.5;
  double max_event_seconds = 4.0;
  int min_events_per_clip = 1;
  int max_events_per_clip = 3;
  double snr_db_min = 10.0;
  double snr_db_max = 25.0;
  double background_level = 0.02;  // white-noise RMS

  /// Three spectrally disjoint prototypes (distinct octave bands), the
  /// default corpus for quick end-to-end runs.
  static SynthConfig disjoint_preset();
  /// Overlapping-band variant for stress testing.
  static SynthConfig hard_preset();
};

struct SynthResult {
  std::vector<ClipRecord> clips;
  std::map<std::string, std::set<std::string>> weak;
  EventList strong;
  std::map<std::string, double> durations;
};

/// Generates n_clips WAV files under out_dir plus weak.tsv, strong.tsv and
/// durations.tsv. Deterministic for a fixed rng seed: each clip uses a
/// keyed fork so generation order cannot perturb the draws.
SynthResult synth_dataset(const SynthConfig& cfg, std::size_t n_clips, const std::string& out_dir,
                          Rng& rng, const std::string& clip_prefix = "clip");

}  // namespace cdur
