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

#include "cdur/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

namespace cdur {

namespace fs = std::filesystem;

namespace {

// Short raised-cosine fade at both ends keeps onsets click-free without
// blurring the labeled boundaries.
double envelope(double t, double duration) {
  const double fade = std::min(0.01, duration / 4.0);
  if (t < fade) return 0.5 - 0.5 * std::cos(std::numbers::pi * t / fade);
  if (t > duration - fade)
    return 0.5 - 0.5 * std::cos(std::numbers::pi * (duration - t) / fade);
  return 1.0;
}

std::vector<double> render_event(const EventPrototype& proto, double duration, int rate,
                                 Rng& rng) {
  const auto n = static_cast<std::size_t>(duration * rate);
  std::vector<double> out(n);
  if (proto.kind == "tone") {
    const double phase = rng.next_double() * 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      out[i] = std::sin(2.0 * std::numbers::pi * proto.center_hz * t + phase) *
               envelope(t, duration);
    }
  } else if (proto.kind == "chirp") {
    const double f0 = proto.center_hz;
    const double f1 = proto.center_hz + proto.bandwidth_hz;
    const double phase = rng.next_double() * 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double f = f0 + (f1 - f0) * t / (2.0 * duration);  // instantaneous sweep
      out[i] = std::sin(2.0 * std::numbers::pi * f * t + phase) * envelope(t, duration);
    }
  } else if (proto.kind == "band_noise") {
    // Band-limited noise as a sum of random-phase sinusoids in the band.
    constexpr int kComponents = 48;
    const double lo = proto.center_hz - proto.bandwidth_hz / 2.0;
    const double hi = proto.center_hz + proto.bandwidth_hz / 2.0;
    std::vector<double> freqs(kComponents), phases(kComponents);
    for (int k = 0; k < kComponents; ++k) {
      freqs[k] = lo + (hi - lo) * rng.next_double();
      phases[k] = rng.next_double() * 2.0 * std::numbers::pi;
    }
    const double norm = std::sqrt(2.0 / kComponents);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      double acc = 0.0;
      for (int k = 0; k < kComponents; ++k)
        acc += std::sin(2.0 * std::numbers::pi * freqs[k] * t + phases[k]);
      out[i] = acc * norm * envelope(t, duration);
    }
  } else {
    throw DataError("synth: unknown prototype kind '" + proto.kind + "'");
  }
  return out;
}

double rms(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

SynthConfig SynthConfig::disjoint_preset() {
  SynthConfig cfg;
  cfg.events = {
      {"low_tone", "tone", 400.0, 0.0},
      {"mid_noise", "band_noise", 2500.0, 1200.0},
      {"high_chirp", "chirp", 7000.0, 2000.0},
  };
  return cfg;
}

SynthConfig SynthConfig::hard_preset() {
  SynthConfig cfg;
  cfg.events = {
      {"low_tone", "tone", 1000.0, 0.0},
      {"mid_noise", "band_noise", 1300.0, 1000.0},
      {"high_chirp", "chirp", 900.0, 1000.0},
  };
  return cfg;
}

SynthResult synth_dataset(const SynthConfig& cfg, std::size_t n_clips, const std::string& out_dir,
                          Rng& rng, const std::string& clip_prefix) {
  if (cfg.events.empty()) throw DataError("synth: no event prototypes configured");
  if (cfg.max_event_seconds >= cfg.clip_seconds)
    throw DataError("synth: event duration must be shorter than the clip");
  fs::create_directories(out_dir);

  SynthResult result;
  const auto clip_len = static_cast<std::size_t>(cfg.clip_seconds * cfg.sample_rate);

  for (std::size_t ci = 0; ci < n_clips; ++ci) {
    Rng clip_rng = rng.fork(ci);
    const std::string clip_id = clip_prefix + "_" + std::to_string(ci) + ".wav";

    std::vector<double> mix(clip_len);
    for (auto& s : mix) s = clip_rng.normal(0.0, cfg.background_level);

    const auto k = static_cast<int>(
        clip_rng.uniform_int(cfg.min_events_per_clip, cfg.max_events_per_clip + 1));
    std::set<std::string> weak;
    for (int e = 0; e < k; ++e) {
      const auto& proto = cfg.events[static_cast<std::size_t>(
          clip_rng.uniform_int(0, static_cast<std::int64_t>(cfg.events.size())))];
      const double duration = cfg.min_event_seconds +
                              (cfg.max_event_seconds - cfg.min_event_seconds) *
                                  clip_rng.next_double();
      const double onset = (cfg.clip_seconds - duration) * clip_rng.next_double();
      const double snr_db =
          cfg.snr_db_min + (cfg.snr_db_max - cfg.snr_db_min) * clip_rng.next_double();

      std::vector<double> ev = render_event(proto, duration, cfg.sample_rate, clip_rng);
      const double ev_rms = rms(ev);
      if (ev_rms > 0) {
        const double target = cfg.background_level * std::pow(10.0, snr_db / 20.0);
        const double gain = target / ev_rms;
        const auto start = static_cast<std::size_t>(onset * cfg.sample_rate);
        for (std::size_t i = 0; i < ev.size() && start + i < clip_len; ++i)
          mix[start + i] += gain * ev[i];
      }
      result.strong.push_back({clip_id, onset, onset + duration, proto.label});
      weak.insert(proto.label);
    }

    Waveform w;
    w.sample_rate = cfg.sample_rate;
    w.samples = std::move(mix);
    for (auto& s : w.samples) s = std::clamp(s, -1.0, 1.0);
    const std::string audio_path = (fs::path(out_dir) / clip_id).string();
    write_wav(audio_path, w);

    ClipRecord rec;
    rec.clip_id = clip_id;
    rec.audio_path = audio_path;
    rec.duration_s = cfg.clip_seconds;
    rec.weak_labels = weak;
    result.weak[clip_id] = weak;
    result.durations[clip_id] = cfg.clip_seconds;
    result.clips.push_back(std::move(rec));
  }

  // Strong labels stay the exact placements; weak is their projection.
  for (auto& clip : result.clips) {
    EventList ev;
    for (const auto& e : result.strong)
      if (e.clip_id == clip.clip_id) ev.push_back(e);
    clip.strong_labels = std::move(ev);
  }

  write_weak_tsv((fs::path(out_dir) / "weak.tsv").string(), result.weak);
  write_strong_tsv((fs::path(out_dir) / "strong.tsv").string(), result.strong);
  write_durations_tsv((fs::path(out_dir) / "durations.tsv").string(), result.durations);
  return result;
}

}  // namespace cdur
