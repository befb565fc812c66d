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

#include "cdur/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace cdur {

Tensor fan_in_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return rng.uniform_tensor(std::move(shape), -bound, bound);
}

Tensor orthogonal(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows < cols) throw std::invalid_argument("orthogonal: rows < cols");
  Tensor m = rng.normal_tensor({rows, cols}, 0.0, 1.0);
  // Modified Gram-Schmidt over columns.
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0.0;
      for (std::size_t r = 0; r < rows; ++r) dot += m.at(r, c) * m.at(r, prev);
      for (std::size_t r = 0; r < rows; ++r) m.at(r, c) -= dot * m.at(r, prev);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm += m.at(r, c) * m.at(r, c);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw std::runtime_error("orthogonal: degenerate draw");
    for (std::size_t r = 0; r < rows; ++r) m.at(r, c) /= norm;
  }
  return m;
}

Conv2d3x3::Conv2d3x3(std::string name, std::size_t in_ch, std::size_t out_ch, Rng& rng) {
  const std::size_t fan_in = in_ch * 9;
  weight_ = ad::variable(fan_in_uniform({out_ch, in_ch, 3, 3}, fan_in, rng), name + ".weight");
  bias_ = ad::variable(fan_in_uniform({out_ch}, fan_in, rng), name + ".bias");
}

void Conv2d3x3::collect(std::vector<Param>& out) const {
  out.push_back({weight_->name, weight_});
  out.push_back({bias_->name, bias_});
}

BatchNorm2d::BatchNorm2d(std::string name, std::size_t channels) : name_(std::move(name)) {
  gamma_ = ad::variable(Tensor::full({channels}, 1.0), name_ + ".weight");
  beta_ = ad::variable(Tensor::zeros({channels}), name_ + ".bias");
  running_mean_ = Tensor::zeros({channels});
  running_var_ = Tensor::full({channels}, 1.0);
}

void BatchNorm2d::collect(std::vector<Param>& out) const {
  out.push_back({gamma_->name, gamma_});
  out.push_back({beta_->name, beta_});
}

void BatchNorm2d::collect_buffers(std::vector<Buffer>& out) {
  out.push_back({name_ + ".running_mean", &running_mean_});
  out.push_back({name_ + ".running_var", &running_var_});
}

Linear::Linear(std::string name, std::size_t in, std::size_t out, Rng& rng) {
  weight_ = ad::variable(fan_in_uniform({in, out}, in, rng), name + ".weight");
  bias_ = ad::variable(fan_in_uniform({out}, in, rng), name + ".bias");
}

void Linear::collect(std::vector<Param>& out) const {
  out.push_back({weight_->name, weight_});
  out.push_back({bias_->name, bias_});
}

GruDirection::GruDirection(std::string name, std::size_t input, std::size_t hidden, Rng& rng)
    : input_(input), hidden_(hidden) {
  w_ih_ = ad::variable(fan_in_uniform({input, 3 * hidden}, input, rng), name + ".w_ih");
  // Recurrent matrix: three orthogonal [hidden, hidden] gate blocks.
  Tensor whh({hidden, 3 * hidden});
  for (int gate = 0; gate < 3; ++gate) {
    Tensor block = orthogonal(hidden, hidden, rng);
    for (std::size_t r = 0; r < hidden; ++r)
      for (std::size_t c = 0; c < hidden; ++c)
        whh.at(r, gate * hidden + c) = block.at(r, c);
  }
  w_hh_ = ad::variable(std::move(whh), name + ".w_hh");
  b_ih_ = ad::variable(Tensor::zeros({3 * hidden}), name + ".b_ih");
  b_hh_ = ad::variable(Tensor::zeros({3 * hidden}), name + ".b_hh");
}

std::vector<ad::Ptr> GruDirection::forward(const std::vector<ad::Ptr>& steps,
                                           bool reverse) const {
  if (steps.empty()) throw std::invalid_argument("GruDirection: empty input sequence");
  const std::size_t B = steps[0]->value.dim(0);
  const std::size_t T = steps.size();
  const std::size_t H = hidden_;

  std::vector<ad::Ptr> out(T);
  ad::Ptr h = ad::constant(Tensor::zeros({B, H}));
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t t = reverse ? T - 1 - i : i;
    const ad::Ptr& x = steps[t];
    ad::Ptr gi = ad::add_rowvec(ad::matmul(x, w_ih_), b_ih_);  // [B, 3H]
    ad::Ptr gh = ad::add_rowvec(ad::matmul(h, w_hh_), b_hh_);
    ad::Ptr r = ad::sigmoid(ad::add(ad::col_slice(gi, 0, H), ad::col_slice(gh, 0, H)));
    ad::Ptr z = ad::sigmoid(ad::add(ad::col_slice(gi, H, 2 * H), ad::col_slice(gh, H, 2 * H)));
    ad::Ptr n = ad::tanh_op(
        ad::add(ad::col_slice(gi, 2 * H, 3 * H), ad::mul(r, ad::col_slice(gh, 2 * H, 3 * H))));
    // h' = n + z * (h - n)
    h = ad::add(n, ad::mul(z, ad::sub(h, n)));
    out[t] = h;
  }
  return out;
}

void GruDirection::collect(std::vector<Param>& out) const {
  out.push_back({w_ih_->name, w_ih_});
  out.push_back({w_hh_->name, w_hh_});
  out.push_back({b_ih_->name, b_ih_});
  out.push_back({b_hh_->name, b_hh_});
}

}  // namespace cdur
