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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdur/postprocess.hpp"
#include "cdur/rng.hpp"

namespace cdur {

struct ClipRecord {
  std::string clip_id;
  std::string audio_path;    // may be empty when features are precomputed
  std::string feature_path;  // may be empty before extraction
  double duration_s = 0.0;
  std::set<std::string> weak_labels;
  std::optional<EventList> strong_labels;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weak TSV: header `filename<TAB>event_labels`, labels comma-separated.
std::map<std::string, std::set<std::string>> read_weak_tsv(const std::string& path);
void write_weak_tsv(const std::string& path,
                    const std::map<std::string, std::set<std::string>>& weak);

// Strong TSV: header `filename<TAB>onset<TAB>offset<TAB>event_label`,
// onset/offset in decimal seconds; onset < offset enforced.
EventList read_strong_tsv(const std::string& path);
void write_strong_tsv(const std::string& path, const EventList& events);

// Feature manifest: `clip_id<TAB>feature_path<TAB>num_frames` (no header).
struct ManifestRow {
  std::string clip_id;
  std::string feature_path;
  std::size_t num_frames = 0;
};
std::vector<ManifestRow> read_feature_manifest(const std::string& path);
void write_feature_manifest(const std::string& path, const std::vector<ManifestRow>& rows);

// Clip durations: `clip_id<TAB>duration_s` (no header).
std::map<std::string, double> read_durations_tsv(const std::string& path);
void write_durations_tsv(const std::string& path, const std::map<std::string, double>& durations);

/// Sorted union of all weak labels in the records.
std::vector<std::string> vocabulary(const std::vector<ClipRecord>& records);

/// Iterative stratification, rarest label first: keeps each label's train
/// share within one clip of `train_fraction` where feasible. Labels with a
/// single occurrence go to train (with a warning on stderr).
std::pair<std::vector<ClipRecord>, std::vector<ClipRecord>> stratified_split(
    const std::vector<ClipRecord>& records, double train_fraction, Rng& rng);

/// Batches of indices into `records`: every batch carries at least one clip
/// per vocabulary label (reusing label carriers once the unseen pool is
/// exhausted); every clip appears at least once per epoch; ceil(n/batch)
/// batches total.
std::vector<std::vector<std::size_t>> balanced_batches(const std::vector<ClipRecord>& records,
                                                       std::size_t batch_size, Rng& rng);

}  // namespace cdur
