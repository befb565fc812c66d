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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdur/postprocess.hpp"

namespace cdur {

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

struct PRF {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Per-event and averaged precision/recall/F1. Micro pools counts across
/// events before computing P/R/F1; macro averages per-event F1 scores.
/// All 0/0 ratios resolve to 0.
struct ScoreReport {
  std::vector<std::string> labels;
  std::map<std::string, Counts> per_event;
  PRF prf(const std::string& label) const;
  PRF micro() const;
  PRF macro() const;

  /// event<TAB>tp<TAB>fp<TAB>fn<TAB>precision<TAB>recall<TAB>f1 rows plus
  /// __micro__ and __macro__ aggregate rows.
  std::string to_tsv() const;
  void write_tsv(const std::string& path) const;
  /// Flat key-value form (label.tp = ..., micro.f1 = ...).
  void write_kv(const std::string& path) const;
};

PRF prf_from_counts(const Counts& c);

/// Clip-level tagging: predicted tag set = events with prob > phi_tag.
/// `clip_probs` maps clip id -> per-event probabilities ordered by `labels`;
/// `gt_tags` maps clip id -> ground-truth tag set.
ScoreReport tagging_f1(const std::map<std::string, Tensor>& clip_probs,
                       const std::map<std::string, std::set<std::string>>& gt_tags,
                       const std::vector<std::string>& labels, double phi_tag);

/// Segment-based F1: clips cut into fixed segments (default 1 s); an event
/// is active in a segment iff its span overlaps it with positive measure.
ScoreReport segment_f1(const EventList& pred, const EventList& gt,
                       const std::map<std::string, double>& clip_durations,
                       const std::vector<std::string>& labels, double segment_s = 1.0);

/// Event-based F1 with onset collar and offset collar
/// max(t_collar, offset_pct * gt duration). Greedy one-to-one matching in
/// onset order, first feasible ground truth wins.
ScoreReport event_f1(const EventList& pred, const EventList& gt,
                     const std::vector<std::string>& labels, double t_collar = 0.2,
                     double offset_pct = 0.2);

}  // namespace cdur
