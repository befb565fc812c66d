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

#include <functional>
#include <optional>

#include "cdur/augment.hpp"
#include "cdur/dataset.hpp"
#include "cdur/model.hpp"
#include "cdur/optim.hpp"
#include "cdur/postprocess.hpp"

namespace cdur {

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  double lr = 1e-4;
  double weight_decay = 0.01;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 3;
  std::size_t early_stop_patience = 7;
  double label_smoothing = 0.1;
  bool augment = true;
  SpecAugParams spec_aug;
  TimeShiftParams time_shift;
  std::uint64_t seed = 42;
  std::string checkpoint_dir;  // empty: no checkpoints written
};

/// One row per epoch. Everything that goes into the canonical TSV is a
/// pure function of the seed and the data; wall-clock time is deliberately
/// kept out so reruns produce byte-identical logs.
struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool diverged = false;

  std::string to_tsv() const;
  void write(const std::string& path) const;
};

/// A clip ready for training: standardized log-mel frames plus its weak
/// target vector over the model vocabulary.
struct PreparedClip {
  std::string clip_id;
  Tensor frames;   // [T, D]
  Tensor targets;  // [E]
};

/// Per-dimension mean/std fit on training data only, applied everywhere.
struct Standardizer {
  Tensor mean;  // [D]
  Tensor std;   // [D]

  static Standardizer fit(const std::vector<Tensor>& frames);
  Tensor apply(const Tensor& frames) const;
  void save(const std::string& path) const;
  static Standardizer load(const std::string& path);
};

class Trainer {
 public:
  Trainer(CdurModel& model, const TrainConfig& cfg, const std::vector<std::string>& labels);

  /// Trains with balanced batches, SpecAugment + time shift, smoothed BCE,
  /// AdamW, LR-on-plateau and early stopping. Validation loss uses the raw
  /// (unsmoothed) targets. On NaN divergence the loop stops, flags the log
  /// and restores the last finite parameters.
  TrainLog fit(const std::vector<PreparedClip>& train, const std::vector<PreparedClip>& val,
               Rng& rng);

 private:
  double run_epoch(const std::vector<PreparedClip>& clips, Rng& rng, bool training);

  CdurModel& model_;
  TrainConfig cfg_;
  std::vector<std::string> labels_;
  AdamW optim_;
};

Tensor weak_target(const std::set<std::string>& labels, const std::vector<std::string>& vocab);

struct InferenceResult {
  Tensor clip_probs;       // [E]
  Tensor frame_probs;      // [T, E], upsampled to input frame rate
  EventList events;        // after post-processing + decoding
};

/// Full inference pipeline: eval-mode forward, temporal upsampling, the
/// selected post-processing method and run-length decoding. Clip
/// probabilities are untouched by post-processing.
InferenceResult run_inference(CdurModel& model, const Tensor& frames, const std::string& clip_id,
                              const std::vector<std::string>& labels, PostMethod method,
                              const Thresholds& th, double frame_rate,
                              std::size_t median_window = 5);

struct PseudoLabelReport {
  EventList events;
  std::size_t clips_total = 0;
  std::size_t clips_kept = 0;  // clips with at least one tagged event
};

/// Tag-then-segment pseudo labeling: only events whose clip probability
/// clears phi_tag are kept.
PseudoLabelReport pseudo_label(CdurModel& model, const std::vector<PreparedClip>& clips,
                               const std::vector<std::string>& labels, const Thresholds& th,
                               double frame_rate, double phi_tag = 0.75);

}  // namespace cdur
