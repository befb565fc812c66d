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

#include <doctest.h>

#include <cmath>

#include "cdur/optim.hpp"

using namespace cdur;

namespace {
Param make_param(const std::string& name, std::vector<double> values, std::vector<double> grads) {
  Param p;
  p.name = name;
  p.node = ad::variable(Tensor({values.size()}, values), name);
  p.node->grad = Tensor({grads.size()}, grads);
  return p;
}
}  // namespace

TEST_SUITE_BEGIN("optim");

TEST_CASE("zero gradient leaves only the decoupled decay: theta *= (1 - lr*wd)") {
  AdamW::Options opts;
  opts.lr = 0.1;
  opts.weight_decay = 0.5;
  AdamW opt(opts);
  std::vector<Param> params = {make_param("w", {2.0}, {0.0})};
  opt.step(params);
  CHECK(params[0].node->value[0] == doctest::Approx(2.0 * (1.0 - 0.1 * 0.5)));
}

TEST_CASE("first step without decay matches the hand-computed Adam update") {
  AdamW::Options opts;
  opts.lr = 0.01;
  opts.weight_decay = 0.0;
  AdamW opt(opts);
  const double g = 3.0;
  std::vector<Param> params = {make_param("w", {1.0}, {g})};
  opt.step(params);
  // m_hat = g, v_hat = g^2 after bias correction on step 1.
  const double expect = 1.0 - 0.01 * g / (std::abs(g) + 1e-8);
  CHECK(params[0].node->value[0] == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("decay applies after the moment update, not inside the gradient") {
  AdamW::Options opts;
  opts.lr = 0.01;
  opts.weight_decay = 0.1;
  AdamW opt(opts);
  const double g = 3.0, theta = 1.0;
  std::vector<Param> params = {make_param("w", {theta}, {g})};
  opt.step(params);
  const double adam_part = theta - 0.01 * g / (std::abs(g) + 1e-8);
  CHECK(params[0].node->value[0] == doctest::Approx(adam_part - 0.01 * 0.1 * theta));
}

TEST_CASE("grads are zeroed after the step") {
  AdamW opt;
  std::vector<Param> params = {make_param("w", {1.0}, {5.0})};
  opt.step(params);
  CHECK(params[0].node->grad[0] == 0.0);
}

TEST_CASE("state is keyed by name: descent continues across calls") {
  AdamW::Options opts;
  opts.lr = 0.1;
  opts.weight_decay = 0.0;
  AdamW opt(opts);
  // Minimize f(w) = w^2 by feeding grad = 2w; must approach zero.
  std::vector<Param> params = {make_param("w", {5.0}, {10.0})};
  for (int i = 0; i < 200; ++i) {
    params[0].node->grad[0] = 2.0 * params[0].node->value[0];
    opt.step(params);
  }
  CHECK(std::abs(params[0].node->value[0]) < 0.5);
}

TEST_SUITE_END();
