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

#include <cstdint>
#include <optional>

#include "cdur/tensor.hpp"

namespace cdur {

enum class PoolKind { LinSoft, Max, Soft, Auto, Attention };

PoolKind pool_kind_from_string(const std::string& name);
std::string to_string(PoolKind kind);

// ---------------------------------------------------------------------------
// L-p (power mean) subsampling over non-overlapping (kt, kf) kernels on a
// [T, D] grid; edge windows truncate. Power mean: ((1/|K|) sum x^p)^(1/p),
// so p=1 is the arithmetic mean and p -> inf approaches the max. Windows
// containing negative values (LeakyReLU admits small negatives) are shifted
// by their minimum before the fractional power and shifted back afterwards.
// ---------------------------------------------------------------------------

Tensor lp_subsample(const Tensor& x, std::size_t kt, std::size_t kf, double p);

/// Backward pass: given upstream grad over the pooled grid, accumulates into
/// a tensor shaped like the input. `x` must be the forward input.
Tensor lp_subsample_backward(const Tensor& x, std::size_t kt, std::size_t kf, double p,
                             const Tensor& grad_out);

/// Linear interpolation along the time axis: [T', E] -> [T'*v, E]. Output
/// row i reads input coordinate i/v, clamped (repeat-last at the tail).
Tensor linear_upsample(const Tensor& seq, std::size_t factor);

// ---------------------------------------------------------------------------
// Clip-level temporal pooling: [T, E] frame probabilities -> [E].
//   LinSoft:   y = sum(y_t^2) / sum(y_t), 0/0 -> 0
//   Max:       y = max_t y_t
//   Soft:      y = sum_t y_t * exp(y_t) / sum_j exp(y_j)
//   Auto:      Soft with a learned per-event temperature alpha(e)
//   Attention: y = sum_t w_t y_t / sum_t w_t with learned weights w in [0,1]
// `valid_frames` restricts the sums to the first n frames (padding mask).
// ---------------------------------------------------------------------------

struct PoolParams {
  const Tensor* alpha = nullptr;      // [E], Auto only
  const Tensor* attention = nullptr;  // [T, E], Attention only
};

Tensor temporal_pool(const Tensor& frame_probs, PoolKind kind, const PoolParams& params = {},
                     std::optional<std::size_t> valid_frames = std::nullopt);

struct PoolGradients {
  Tensor d_frames;               // [T, E]
  Tensor d_alpha;                // [E] (Auto) else empty
  Tensor d_attention;            // [T, E] (Attention) else empty
};

PoolGradients temporal_pool_backward(const Tensor& frame_probs, PoolKind kind,
                                     const PoolParams& params, const Tensor& grad_out,
                                     std::optional<std::size_t> valid_frames = std::nullopt);

}  // namespace cdur
