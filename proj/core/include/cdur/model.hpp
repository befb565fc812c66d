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
#include <memory>
#include <optional>

#include "cdur/layers.hpp"
#include "cdur/temporal.hpp"

namespace cdur {

/// The CRNN: five BN->Conv->LeakyReLU blocks with power-mean subsampling
/// after blocks 1, 3 and 5, dropout, a bidirectional GRU, a per-frame
/// linear + logistic head and clip-level temporal pooling.
struct CdurConfig {
  std::size_t mel_bins = 64;
  std::size_t num_events = 0;
  std::vector<std::size_t> channels = {32, 128, 128, 128, 128};
  double leaky_slope = 0.1;
  // (time, freq) factors applied after blocks 1, 3 and 5.
  std::vector<std::pair<std::size_t, std::size_t>> stages = {{2, 4}, {2, 4}, {1, 4}};
  double subsample_p = 4.0;
  double dropout = 0.3;
  std::size_t gru_hidden = 128;
  PoolKind pooling = PoolKind::LinSoft;

  /// Total time factor v (product of stage time factors).
  std::size_t time_factor() const;
  /// Throws on an inconsistent config (e.g. freq factors not collapsing
  /// the mel axis, zero events).
  void validate() const;
};

/// Per-clip model output: frame probabilities at the subsampled rate plus
/// the pooled clip probabilities.
struct ProbabilitySet {
  Tensor frame_probs;  // [T', E], T' = ceil(T / v)
  Tensor clip_probs;   // [E]
  /// Frame probabilities linearly upsampled back to ceil(T/v) * v rows.
  Tensor upsampled;    // eval mode only, empty otherwise
};

struct BatchForward {
  ad::Ptr clip_probs;   // [B, E]
  ad::Ptr frame_probs;  // [B*T', E], batch-major
  std::size_t frames = 0;             // T'
  std::vector<std::size_t> valid;     // valid subsampled frames per clip
};

class CdurModel {
 public:
  CdurModel(CdurConfig cfg, Rng& rng);

  /// Builds the graph for a batch of [T_i, D] feature matrices, zero-padded
  /// to the longest clip; padded frames are masked out of the pooling sums.
  BatchForward forward(const std::vector<const Tensor*>& clips, bool train, Rng& rng);

  /// Eval-mode convenience for one clip; no graph retained.
  ProbabilitySet infer(const Tensor& features);

  const CdurConfig& config() const { return cfg_; }
  std::vector<Param>& params() { return params_; }
  std::vector<Buffer>& buffers() { return buffers_; }

 private:
  CdurConfig cfg_;
  std::vector<BatchNorm2d> bns_;
  std::vector<Conv2d3x3> convs_;
  std::unique_ptr<GruDirection> gru_fwd_, gru_bwd_;
  std::unique_ptr<Linear> head_;
  std::unique_ptr<Linear> attention_head_;  // Attention pooling only
  ad::Ptr auto_alpha_;                      // Auto pooling only
  std::vector<Param> params_;
  std::vector<Buffer> buffers_;
};

/// Trainable parameter total for a config, with a per-layer breakdown.
std::size_t count_parameters(const CdurConfig& cfg,
                             std::map<std::string, std::size_t>* breakdown = nullptr);

}  // namespace cdur
