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

#include "cdur/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

namespace cdur {

namespace {

template <typename T>
T read_le(std::ifstream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw WavError(std::string("truncated wav file while reading ") + what);
  return v;
}

template <typename T>
void write_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path);

  char tag[4];
  if (!in.read(tag, 4) || std::memcmp(tag, "RIFF", 4) != 0)
    throw WavError(path + ": missing RIFF chunk");
  read_le<std::uint32_t>(in, "RIFF size");
  if (!in.read(tag, 4) || std::memcmp(tag, "WAVE", 4) != 0)
    throw WavError(path + ": missing WAVE id");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<char> payload;

  while (in.read(tag, 4)) {
    std::uint32_t chunk_size = read_le<std::uint32_t>(in, "chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(in, "fmt.format");
      channels = read_le<std::uint16_t>(in, "fmt.channels");
      rate = read_le<std::uint32_t>(in, "fmt.rate");
      read_le<std::uint32_t>(in, "fmt.byte_rate");
      read_le<std::uint16_t>(in, "fmt.block_align");
      bits = read_le<std::uint16_t>(in, "fmt.bits");
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      payload.resize(chunk_size);
      if (!in.read(payload.data(), chunk_size))
        throw WavError(path + ": truncated data chunk");
      break;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  if (!have_fmt) throw WavError(path + ": missing fmt chunk");
  if (payload.empty()) throw WavError(path + ": missing data chunk");
  if (channels == 0 || rate == 0) throw WavError(path + ": degenerate fmt chunk");

  const bool pcm16 = (format == 1 && bits == 16);
  const bool float32 = (format == 3 && bits == 32);
  if (!pcm16 && !float32)
    throw WavError(path + ": unsupported codec (format " + std::to_string(format) + ", " +
                   std::to_string(bits) + " bit); expected PCM16 or float32");

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t total = payload.size() / (bytes_per_sample * channels);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const char* p = payload.data() + (i * channels + c) * bytes_per_sample;
      if (pcm16) {
        std::int16_t s;
        std::memcpy(&s, p, 2);
        acc += static_cast<double>(s) / 32768.0;
      } else {
        float s;
        std::memcpy(&s, p, 4);
        acc += static_cast<double>(s);
      }
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WavError("cannot write " + path);

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, 1);  // PCM
  write_le<std::uint16_t>(out, 1);  // mono
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  write_le<std::uint16_t>(out, 2);
  write_le<std::uint16_t>(out, 16);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_bytes);
  for (double s : w.samples) {
    double clipped = std::clamp(s, -1.0, 1.0);
    auto q = static_cast<std::int16_t>(std::lrint(clipped * 32767.0));
    write_le<std::int16_t>(out, q);
  }
  if (!out) throw WavError("write failed for " + path);
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw WavError("resample: target rate must be positive");
  if (w.sample_rate == target_rate) return w;

  const double ratio = static_cast<double>(w.sample_rate) / target_rate;
  const std::size_t out_len =
      static_cast<std::size_t>(std::ceil(w.samples.size() / ratio));
  constexpr int kTaps = 32;
  // When downsampling, widen the kernel and lower the cutoff to the new
  // Nyquist; otherwise interpolate at the original bandwidth.
  const double cutoff = std::min(1.0, 1.0 / ratio);
  const double half_width = kTaps / cutoff;

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const auto n = static_cast<std::int64_t>(w.samples.size());
  for (std::size_t i = 0; i < out_len; ++i) {
    const double center = i * ratio;
    const auto lo = static_cast<std::int64_t>(std::ceil(center - half_width));
    const auto hi = static_cast<std::int64_t>(std::floor(center + half_width));
    double acc = 0.0;
    for (std::int64_t j = std::max<std::int64_t>(0, lo); j <= std::min(n - 1, hi); ++j) {
      const double x = (j - center) * cutoff;
      const double hann = 0.5 + 0.5 * std::cos(std::numbers::pi * x / kTaps);
      acc += w.samples[j] * cutoff * sinc(x) * hann;
    }
    out.samples[i] = std::clamp(acc, -1.0, 1.0);
  }
  return out;
}

Waveform load_wav(const std::string& path, int target_rate) {
  Waveform w = read_wav(path);
  if (target_rate > 0 && target_rate != w.sample_rate) w = resample(w, target_rate);
  return w;
}

}  // namespace cdur
