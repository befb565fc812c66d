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

#include "cdur/tensor.hpp"

namespace cdur {

/// Deterministic generator: xoshiro256** seeded through splitmix64.
/// The stream depends only on (seed, fork path), never on the platform or
/// standard library, so every draw in the pipeline is reproducible.
/// Not shareable across threads; fork() child generators instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Child generator for an independent substream (e.g. one per clip).
  /// Successive forks of the same parent yield distinct streams.
  Rng fork();
  /// Keyed fork: same parent seed + same key => same child stream,
  /// regardless of how many anonymous forks happened in between.
  Rng fork(std::uint64_t key) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double next_double();
  /// Uniform integer in [lo, hi); requires lo < hi. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi_exclusive);
  /// Box-Muller transform of two uniform draws.
  double normal(double mean = 0.0, double std = 1.0);

  Tensor normal_tensor(std::vector<std::size_t> shape, double mean, double std);
  Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
  std::uint64_t fork_count_ = 0;
};

}  // namespace cdur
