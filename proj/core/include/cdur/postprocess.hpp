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

#include <string>
#include <vector>

#include "cdur/tensor.hpp"

namespace cdur {

struct Thresholds {
  double phi_hi = 0.75;
  double phi_low = 0.2;
  double phi_clip = 0.5;
  double phi_bin = 0.5;
  double phi_tag = 0.5;
};

/// Per-frame, per-event 0/1 decisions. values is [T, E] with entries 0 or 1.
struct BinarySequence {
  Tensor values;
  double frame_rate = 50.0;
};

struct Event {
  std::string clip_id;
  double onset = 0.0;
  double offset = 0.0;
  std::string label;
};
using EventList = std::vector<Event>;

enum class PostMethod { None, Median, Double, Triple };
PostMethod post_method_from_string(const std::string& name);

/// 1 iff y_t(e) > phi_bin, strict.
BinarySequence binarize(const Tensor& frame_probs, double phi_bin, double frame_rate);

/// Sliding median per event column, zero-padded borders; omega must be odd.
BinarySequence median_filter(const BinarySequence& b, int omega);

/// Hysteresis: frames above phi_hi seed clusters which expand through
/// contiguous frames above phi_low. All comparisons strict.
BinarySequence double_threshold(const Tensor& frame_probs, double phi_hi, double phi_low,
                                double frame_rate);

/// double_threshold gated per event by clip_probs[e] > phi_clip.
BinarySequence triple_threshold(const Tensor& frame_probs, const Tensor& clip_probs,
                                const Thresholds& th, double frame_rate);

/// Maximal runs of 1s become (onset, offset) events, sorted by onset.
/// `labels` names the event columns.
EventList decode_events(const BinarySequence& b, const std::vector<std::string>& labels,
                        const std::string& clip_id = "");

}  // namespace cdur
