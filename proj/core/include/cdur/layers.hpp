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

#include "cdur/autodiff.hpp"
#include "cdur/rng.hpp"

namespace cdur {

/// Named trainable tensor; the node is reused across training steps.
struct Param {
  std::string name;
  ad::Ptr node;
};

/// Named non-trainable buffer (batch-norm running statistics).
struct Buffer {
  std::string name;
  Tensor* tensor;
};

/// Fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor fan_in_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng);

/// Random matrix with orthonormal columns (modified Gram-Schmidt on a
/// Gaussian draw); rows >= cols required.
Tensor orthogonal(std::size_t rows, std::size_t cols, Rng& rng);

class Conv2d3x3 {
 public:
  Conv2d3x3(std::string name, std::size_t in_ch, std::size_t out_ch, Rng& rng);
  ad::Ptr forward(const ad::Ptr& x) const { return ad::conv2d_3x3(x, weight_, bias_); }
  void collect(std::vector<Param>& out) const;

 private:
  ad::Ptr weight_, bias_;
};

class BatchNorm2d {
 public:
  BatchNorm2d(std::string name, std::size_t channels);
  ad::Ptr forward(const ad::Ptr& x, bool train) {
    return ad::batch_norm(x, gamma_, beta_, running_mean_, running_var_, train);
  }
  void collect(std::vector<Param>& out) const;
  void collect_buffers(std::vector<Buffer>& out);

 private:
  std::string name_;
  ad::Ptr gamma_, beta_;
  Tensor running_mean_, running_var_;
};

class Linear {
 public:
  Linear(std::string name, std::size_t in, std::size_t out, Rng& rng);
  /// x: [m, in] -> [m, out]
  ad::Ptr forward(const ad::Ptr& x) const {
    return ad::add_rowvec(ad::matmul(x, weight_), bias_);
  }
  void collect(std::vector<Param>& out) const;

 private:
  ad::Ptr weight_;  // [in, out], input-major
  ad::Ptr bias_;
};

/// One direction of a GRU. Gate layout follows the common reset/update/new
/// ordering with separate input and recurrent biases:
///   r = sigmoid(x Wr + br + h Ur + cr)
///   z = sigmoid(x Wz + bz + h Uz + cz)
///   n = tanh(x Wn + bn + r * (h Un + cn))
///   h' = (1 - z) * n + z * h
/// i.e. the reset gate multiplies the already-transformed recurrent term
/// ("reset after"), which keeps the two bias vectors distinguishable.
class GruDirection {
 public:
  GruDirection(std::string name, std::size_t input, std::size_t hidden, Rng& rng);
  /// steps: per-timestep [B, input] nodes. Returns per-timestep hidden
  /// states aligned with `steps` (reversed direction handled internally).
  std::vector<ad::Ptr> forward(const std::vector<ad::Ptr>& steps, bool reverse) const;
  void collect(std::vector<Param>& out) const;
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t input_, hidden_;
  ad::Ptr w_ih_;  // [input, 3*hidden], gate order r|z|n
  ad::Ptr w_hh_;  // [hidden, 3*hidden]
  ad::Ptr b_ih_, b_hh_;  // [3*hidden]
};

}  // namespace cdur
