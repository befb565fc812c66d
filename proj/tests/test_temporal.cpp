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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdur/rng.hpp"
#include "cdur/temporal.hpp"

using namespace cdur;

TEST_SUITE_BEGIN("temporal");

TEST_CASE("p=1 power mean is the arithmetic mean") {
  Tensor x({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  const Tensor y = lp_subsample(x, 2, 1, 1.0);
  REQUIRE(y.shape() == std::vector<std::size_t>{2, 2});
  CHECK(y.at(0, 0) == doctest::Approx(2.0));  // mean(1, 3)
  CHECK(y.at(0, 1) == doctest::Approx(3.0));
  CHECK(y.at(1, 0) == doctest::Approx(6.0));
  CHECK(y.at(1, 1) == doctest::Approx(7.0));
}

TEST_CASE("power mean value for p=4") {
  Tensor x({2, 1}, {1.0, 2.0});
  const Tensor y = lp_subsample(x, 2, 1, 4.0);
  CHECK(y[0] == doctest::Approx(std::pow((1.0 + 16.0) / 2.0, 0.25)));
}

TEST_CASE("power mean is bounded by min and max, approaches max as p grows") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Tensor x({4, 4});
    for (auto& v : x.vec()) v = rng.next_double() * 10.0;
    const double mn = *std::min_element(x.vec().begin(), x.vec().end());
    const double mx = *std::max_element(x.vec().begin(), x.vec().end());
    const Tensor y4 = lp_subsample(x, 4, 4, 4.0);
    CHECK(y4[0] >= mn - 1e-12);
    CHECK(y4[0] <= mx + 1e-12);
    const Tensor y1 = lp_subsample(x, 4, 4, 1.0);
    const Tensor y16 = lp_subsample(x, 4, 4, 16.0);
    CHECK(y1[0] <= y4[0] + 1e-12);   // monotone in p
    CHECK(y4[0] <= y16[0] + 1e-12);
    CHECK(std::abs(y16[0] - mx) < std::abs(y1[0] - mx) + 1e-12);
  }
}

TEST_CASE("negative inputs survive via the min shift") {
  Tensor x({2, 1}, {-3.0, 1.0});
  const Tensor y = lp_subsample(x, 2, 1, 4.0);
  CHECK(std::isfinite(y[0]));
  // Shift by +3: mean^4 of {0, 4} -> (128)^(1/4), then shift back.
  CHECK(y[0] == doctest::Approx(std::pow(128.0, 0.25) - 3.0));
}

TEST_CASE("edge windows truncate: output is ceil(T/kt) x ceil(D/kf)") {
  Tensor x({5, 3});
  x.fill(2.0);
  const Tensor y = lp_subsample(x, 2, 2, 4.0);
  REQUIRE(y.shape() == std::vector<std::size_t>{3, 2});
  for (double v : y.vec()) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("upsample repeats each value factor times under nearest coordinates") {
  Tensor x({3, 1}, {0.0, 3.0, 6.0});
  const Tensor y = linear_upsample(x, 2);
  REQUIRE(y.shape() == std::vector<std::size_t>{6, 1});
  // Row i reads coordinate i/2: 0, .5, 1, 1.5, 2, 2.5(clamped)
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(1.5));
  CHECK(y[2] == doctest::Approx(3.0));
  CHECK(y[3] == doctest::Approx(4.5));
  CHECK(y[4] == doctest::Approx(6.0));
  CHECK(y[5] == doctest::Approx(6.0));  // clamped tail
}

TEST_CASE("upsample by 1 is identity") {
  Rng rng(2);
  Tensor x({7, 3});
  for (auto& v : x.vec()) v = rng.normal();
  CHECK(linear_upsample(x, 1) == x);
}

TEST_CASE("linsoft pooling formula and 0/0 convention") {
  Tensor x({3, 2}, {0.2, 0.0, 0.4, 0.0, 0.6, 0.0});
  const Tensor y = temporal_pool(x, PoolKind::LinSoft);
  const double num = 0.2 * 0.2 + 0.4 * 0.4 + 0.6 * 0.6;
  CHECK(y[0] == doctest::Approx(num / 1.2));
  CHECK(y[1] == 0.0);  // all-zero column: 0/0 -> 0
}

TEST_CASE("linsoft lies between mean and max and is permutation invariant") {
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    Tensor x({8, 1});
    for (auto& v : x.vec()) v = rng.next_double();
    const double mean = std::accumulate(x.vec().begin(), x.vec().end(), 0.0) / 8.0;
    const double mx = *std::max_element(x.vec().begin(), x.vec().end());
    const double y = temporal_pool(x, PoolKind::LinSoft)[0];
    CHECK(y >= mean - 1e-12);
    CHECK(y <= mx + 1e-12);
    Tensor shuffled = x;
    for (std::size_t j = 7; j > 0; --j)
      std::swap(shuffled.vec()[j],
                shuffled.vec()[static_cast<std::size_t>(rng.uniform_int(0, j + 1))]);
    CHECK(temporal_pool(shuffled, PoolKind::LinSoft)[0] == doctest::Approx(y));
  }
}

TEST_CASE("max pooling picks the maximum") {
  Tensor x({3, 2}, {0.1, 0.9, 0.8, 0.2, 0.3, 0.4});
  const Tensor y = temporal_pool(x, PoolKind::Max);
  CHECK(y[0] == 0.8);
  CHECK(y[1] == 0.9);
}

TEST_CASE("soft pooling is the exp-weighted mean") {
  Tensor x({2, 1}, {0.0, 1.0});
  const double e = std::exp(1.0);
  CHECK(temporal_pool(x, PoolKind::Soft)[0] == doctest::Approx(e / (1.0 + e)));
}

TEST_CASE("auto pooling at alpha=0 is the plain mean, large alpha nears max") {
  Tensor x({4, 1}, {0.1, 0.2, 0.3, 0.8});
  Tensor alpha_zero({1}, {0.0});
  PoolParams p;
  p.alpha = &alpha_zero;
  CHECK(temporal_pool(x, PoolKind::Auto, p)[0] == doctest::Approx(0.35));
  Tensor alpha_big({1}, {200.0});
  p.alpha = &alpha_big;
  CHECK(temporal_pool(x, PoolKind::Auto, p)[0] == doctest::Approx(0.8));
}

TEST_CASE("attention pooling is the weighted mean of the frames") {
  Tensor x({3, 1}, {0.2, 0.5, 0.8});
  Tensor w({3, 1}, {0.0, 1.0, 1.0});
  PoolParams p;
  p.attention = &w;
  CHECK(temporal_pool(x, PoolKind::Attention, p)[0] == doctest::Approx(0.65));
}

TEST_CASE("valid_frames masks out padded rows") {
  Tensor x({4, 1}, {0.5, 0.7, 0.0, 0.0});
  const Tensor full = temporal_pool(x, PoolKind::LinSoft);
  const Tensor masked = temporal_pool(x, PoolKind::LinSoft, {}, 2);
  const double expect = (0.25 + 0.49) / 1.2;
  CHECK(masked[0] == doctest::Approx(expect));
  // Zero rows contribute nothing to either sum, so this pooling is blind to
  // zero padding even without a mask.
  CHECK(full[0] == doctest::Approx(masked[0]));
  // Softmax-weighted pooling is not: exp(0) terms dilute the average.
  const Tensor soft_full = temporal_pool(x, PoolKind::Soft);
  const Tensor soft_masked = temporal_pool(x, PoolKind::Soft, {}, 2);
  CHECK(soft_full[0] < soft_masked[0]);
}

TEST_CASE("pool kind strings round trip") {
  for (PoolKind k : {PoolKind::LinSoft, PoolKind::Max, PoolKind::Soft, PoolKind::Auto,
                     PoolKind::Attention})
    CHECK(pool_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(pool_kind_from_string("nope"));
}

TEST_SUITE_END();
