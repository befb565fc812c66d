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

#include "cdur/postprocess.hpp"

#include <algorithm>
#include <stdexcept>

namespace cdur {

PostMethod post_method_from_string(const std::string& name) {
  if (name == "none") return PostMethod::None;
  if (name == "median") return PostMethod::Median;
  if (name == "double") return PostMethod::Double;
  if (name == "triple") return PostMethod::Triple;
  throw std::invalid_argument("unknown post-processing method: " + name);
}

BinarySequence binarize(const Tensor& frame_probs, double phi_bin, double frame_rate) {
  if (frame_probs.rank() != 2) throw std::invalid_argument("binarize: expected [T, E]");
  BinarySequence out;
  out.frame_rate = frame_rate;
  out.values = Tensor(frame_probs.shape());
  for (std::size_t i = 0; i < frame_probs.size(); ++i)
    out.values[i] = frame_probs[i] > phi_bin ? 1.0 : 0.0;
  return out;
}

BinarySequence median_filter(const BinarySequence& b, int omega) {
  if (omega <= 0 || omega % 2 == 0)
    throw std::invalid_argument("median_filter: window must be odd and positive");
  const auto T = static_cast<std::int64_t>(b.values.dim(0));
  const std::size_t E = b.values.dim(1);
  const int half = omega / 2;

  BinarySequence out = b;
  for (std::size_t e = 0; e < E; ++e) {
    for (std::int64_t t = 0; t < T; ++t) {
      int ones = 0;
      for (std::int64_t k = t - half; k <= t + half; ++k)
        if (k >= 0 && k < T && b.values.at(k, e) > 0.5) ++ones;
      // Zero-padded borders: out-of-range frames count as 0.
      out.values.at(t, e) = ones > half ? 1.0 : 0.0;
    }
  }
  return out;
}

BinarySequence double_threshold(const Tensor& frame_probs, double phi_hi, double phi_low,
                                double frame_rate) {
  if (frame_probs.rank() != 2) throw std::invalid_argument("double_threshold: expected [T, E]");
  if (phi_low > phi_hi) throw std::invalid_argument("double_threshold: phi_low > phi_hi");
  const std::size_t T = frame_probs.dim(0), E = frame_probs.dim(1);

  BinarySequence out;
  out.frame_rate = frame_rate;
  out.values = Tensor(frame_probs.shape());
  for (std::size_t e = 0; e < E; ++e) {
    std::size_t t = 0;
    while (t < T) {
      if (frame_probs.at(t, e) <= phi_low) {
        ++t;
        continue;
      }
      // Contiguous run above phi_low; keep it iff it contains a seed.
      std::size_t start = t;
      bool has_seed = false;
      while (t < T && frame_probs.at(t, e) > phi_low) {
        if (frame_probs.at(t, e) > phi_hi) has_seed = true;
        ++t;
      }
      if (has_seed)
        for (std::size_t k = start; k < t; ++k) out.values.at(k, e) = 1.0;
    }
  }
  return out;
}

BinarySequence triple_threshold(const Tensor& frame_probs, const Tensor& clip_probs,
                                const Thresholds& th, double frame_rate) {
  if (clip_probs.size() != frame_probs.dim(1))
    throw std::invalid_argument("triple_threshold: clip prob length mismatch");
  BinarySequence out = double_threshold(frame_probs, th.phi_hi, th.phi_low, frame_rate);
  const std::size_t T = frame_probs.dim(0), E = frame_probs.dim(1);
  for (std::size_t e = 0; e < E; ++e)
    if (!(clip_probs[e] > th.phi_clip))
      for (std::size_t t = 0; t < T; ++t) out.values.at(t, e) = 0.0;
  return out;
}

EventList decode_events(const BinarySequence& b, const std::vector<std::string>& labels,
                        const std::string& clip_id) {
  const std::size_t T = b.values.dim(0), E = b.values.dim(1);
  if (labels.size() != E) throw std::invalid_argument("decode_events: label count mismatch");
  EventList events;
  for (std::size_t e = 0; e < E; ++e) {
    std::size_t t = 0;
    while (t < T) {
      if (b.values.at(t, e) < 0.5) {
        ++t;
        continue;
      }
      const std::size_t start = t;
      while (t < T && b.values.at(t, e) > 0.5) ++t;
      events.push_back({clip_id, static_cast<double>(start) / b.frame_rate,
                        static_cast<double>(t) / b.frame_rate, labels[e]});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b2) { return a.onset < b2.onset; });
  return events;
}

}  // namespace cdur
