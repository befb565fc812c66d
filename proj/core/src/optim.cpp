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

#include "cdur/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace cdur {

void AdamW::step(std::vector<Param>& params) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_count_));
  for (auto& p : params) {
    auto& node = *p.node;
    if (node.grad.size() != node.value.size())
      node.grad = Tensor(node.value.shape());  // never visited by backward
    auto& m = m_.try_emplace(p.name, Tensor(node.value.shape())).first->second;
    auto& v = v_.try_emplace(p.name, Tensor(node.value.shape())).first->second;
    if (!m.same_shape(node.value)) throw std::runtime_error("AdamW: param shape changed");
    for (std::size_t i = 0; i < node.value.size(); ++i) {
      const double g = node.grad[i];
      m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g;
      v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      node.value[i] -= opts_.lr * m_hat / (std::sqrt(v_hat) + opts_.eps);
      node.value[i] -= opts_.lr * opts_.weight_decay * node.value[i];
    }
    node.grad.fill(0.0);
  }
}

}  // namespace cdur
