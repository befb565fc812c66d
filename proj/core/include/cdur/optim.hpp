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

#include "cdur/layers.hpp"

namespace cdur {

/// AdamW: bias-corrected Adam moments plus decoupled weight decay.
/// Update order per parameter: moments from the gradient, then
///   theta -= lr * m_hat / (sqrt(v_hat) + eps) + lr * weight_decay * theta.
class AdamW {
 public:
  struct Options {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW() = default;
  explicit AdamW(const Options& opts) : opts_(opts) {}

  /// One update over all params; reads node->grad, writes node->value,
  /// then zeroes the grads.
  void step(std::vector<Param>& params);

  double lr() const { return opts_.lr; }
  void set_lr(double lr) { opts_.lr = lr; }
  std::int64_t step_count() const { return step_count_; }

 private:
  Options opts_;
  std::int64_t step_count_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

}  // namespace cdur
