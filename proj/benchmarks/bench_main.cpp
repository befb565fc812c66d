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

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "cdur/autodiff.hpp"
#include "cdur/melspec.hpp"
#include "cdur/postprocess.hpp"
#include "cdur/temporal.hpp"

using namespace cdur;

namespace {

Tensor randn(std::vector<std::size_t> shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.vec()) v = rng.normal();
  return t;
}

void BM_Conv3x3Forward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  auto x = ad::constant(randn({1, c, 128, 16}, 1));
  auto w = ad::constant(randn({c, c, 3, 3}, 2));
  auto b = ad::constant(randn({c}, 3));
  for (auto _ : state) {
    auto y = ad::conv2d_3x3(x, w, b);
    benchmark::DoNotOptimize(y->value.data());
  }
}
BENCHMARK(BM_Conv3x3Forward)->Arg(32)->Arg(128);

void BM_LpSubsample(benchmark::State& state) {
  const Tensor x = randn({static_cast<std::size_t>(state.range(0)), 64}, 4);
  for (auto _ : state) {
    Tensor y = lp_subsample(x, 2, 4, 4.0);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_LpSubsample)->Arg(500)->Arg(2000);

void BM_LogMel(benchmark::State& state) {
  MelConfig cfg;
  cfg.sample_rate = 22050;
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.resize(static_cast<std::size_t>(cfg.sample_rate) *
                   static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = 0.3 * std::sin(2.0 * std::numbers::pi * 440.0 * i / cfg.sample_rate);
  for (auto _ : state) {
    LogMelSpectrogram spec = log_mel(w, cfg);
    benchmark::DoNotOptimize(spec.frames.data());
  }
}
BENCHMARK(BM_LogMel)->Arg(1)->Arg(10);

void BM_DoubleThreshold(benchmark::State& state) {
  Rng rng(5);
  Tensor probs({static_cast<std::size_t>(state.range(0)), 10});
  for (auto& v : probs.vec()) v = rng.next_double();
  for (auto _ : state) {
    BinarySequence b = double_threshold(probs, 0.75, 0.2, 50.0);
    benchmark::DoNotOptimize(b.values.data());
  }
}
BENCHMARK(BM_DoubleThreshold)->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
