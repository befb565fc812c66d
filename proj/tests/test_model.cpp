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
#include <filesystem>

#include "cdur/checkpoint.hpp"
#include "cdur/model.hpp"
#include "cdur/temporal.hpp"

using namespace cdur;

namespace {
CdurConfig tiny_config(std::size_t events = 3) {
  CdurConfig cfg;
  cfg.num_events = events;
  cfg.channels = {4, 8, 8, 8, 8};
  cfg.gru_hidden = 8;
  return cfg;
}
}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("reference configuration parameter count") {
  CdurConfig cfg;
  cfg.num_events = 10;
  std::map<std::string, std::size_t> breakdown;
  const std::size_t total = count_parameters(cfg, &breakdown);
  // Published reference total is 681,068; this implementation's GRU carries
  // separate input and recurrent biases, which adds 6*hidden per direction.
  CHECK(std::abs(static_cast<double>(total) - 681068.0) / 681068.0 < 0.05);
  std::size_t sum = 0;
  for (const auto& [name, n] : breakdown) sum += n;
  CHECK(sum == total);
  CHECK(breakdown.count("head.weight"));
  CHECK(breakdown.at("block1.conv.weight") == 32 * 1 * 3 * 3);
  CHECK(breakdown.at("block1.conv.bias") == 32);
}

TEST_CASE("time factor is the product of stage time factors") {
  CdurConfig cfg = tiny_config();
  CHECK(cfg.time_factor() == 4);
  cfg.stages = {{1, 4}, {1, 4}, {1, 4}};
  CHECK(cfg.time_factor() == 1);
}

TEST_CASE("validate rejects inconsistent configs") {
  CdurConfig cfg = tiny_config();
  cfg.validate();
  CdurConfig bad = cfg;
  bad.num_events = 0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.stages = {{2, 2}, {2, 2}, {1, 2}};  // collapses 64 mels to 8, not 1
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.channels = {4, 8};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("infer output shapes and ranges") {
  Rng rng(1);
  CdurModel model(tiny_config(), rng);
  Rng data_rng(2);
  for (std::size_t t : {37u, 64u, 100u}) {
    Tensor frames({t, 64});
    for (auto& v : frames.vec()) v = data_rng.normal();
    const ProbabilitySet out = model.infer(frames);
    const std::size_t tsub = (t + 3) / 4;  // ceil(T/v), v = 4
    CHECK(out.frame_probs.dim(0) == tsub);
    CHECK(out.frame_probs.dim(1) == 3);
    CHECK(out.clip_probs.dim(0) == 3);
    CHECK(out.upsampled.dim(0) == tsub * 4);
    for (double v : out.frame_probs.vec()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : out.clip_probs.vec()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("upsampled length bookkeeping for every subsampling factor") {
  Rng data_rng(3);
  Tensor frames({50, 64});
  for (auto& v : frames.vec()) v = data_rng.normal();
  const std::vector<std::vector<std::pair<std::size_t, std::size_t>>> stage_sets = {
      {{1, 4}, {1, 4}, {1, 4}},  // v = 1
      {{2, 4}, {1, 4}, {1, 4}},  // v = 2
      {{2, 4}, {2, 4}, {1, 4}},  // v = 4
      {{2, 4}, {2, 4}, {2, 4}},  // v = 8
  };
  for (const auto& stages : stage_sets) {
    CdurConfig cfg = tiny_config();
    cfg.stages = stages;
    Rng rng(1);
    CdurModel model(cfg, rng);
    const std::size_t v = cfg.time_factor();
    const ProbabilitySet out = model.infer(frames);
    CHECK(out.frame_probs.dim(0) == (50 + v - 1) / v);
    CHECK(out.upsampled.dim(0) == ((50 + v - 1) / v) * v);
  }
}

TEST_CASE("equal-length batching reproduces solo inference exactly") {
  Rng rng(4);
  CdurConfig cfg = tiny_config();
  cfg.dropout = 0.0;
  CdurModel model(cfg, rng);
  Rng data_rng(5);
  Tensor a({40, 64}), b({40, 64});
  for (auto& v : a.vec()) v = data_rng.normal();
  for (auto& v : b.vec()) v = data_rng.normal();

  Rng fwd_rng(6);
  const ProbabilitySet alone = model.infer(a);
  BatchForward batch = model.forward({&a, &b}, false, fwd_rng);
  for (std::size_t e = 0; e < 3; ++e)
    CHECK(batch.clip_probs->value.at(0, e) == doctest::Approx(alone.clip_probs[e]).epsilon(1e-9));
}

TEST_CASE("unequal-length batching pools only over valid frames") {
  Rng rng(4);
  CdurConfig cfg = tiny_config();
  cfg.dropout = 0.0;
  CdurModel model(cfg, rng);
  Rng data_rng(5);
  Tensor a({40, 64}), b({80, 64});
  for (auto& v : a.vec()) v = data_rng.normal();
  for (auto& v : b.vec()) v = data_rng.normal();

  Rng fwd_rng(6);
  BatchForward batch = model.forward({&a, &b}, false, fwd_rng);
  const std::size_t t_sub = batch.frames;
  CHECK(batch.valid[0] < batch.valid[1]);
  CHECK(batch.valid[1] == t_sub);
  // Clip probabilities for the short clip must be the pooled value of its
  // valid frame probabilities alone; the padded tail is excluded.
  for (std::size_t e = 0; e < 3; ++e) {
    Tensor col({batch.valid[0], 1});
    for (std::size_t t = 0; t < batch.valid[0]; ++t)
      col.at(t, 0) = batch.frame_probs->value.at(t, e);
    const Tensor pooled = temporal_pool(col, cfg.pooling);
    CHECK(batch.clip_probs->value.at(0, e) == doctest::Approx(pooled[0]).epsilon(1e-9));
  }
}

TEST_CASE("train/eval mode differ through batch norm statistics") {
  Rng rng(7);
  CdurConfig cfg = tiny_config();
  cfg.dropout = 0.0;
  CdurModel model(cfg, rng);
  Rng data_rng(8);
  Tensor a({32, 64});
  for (auto& v : a.vec()) v = data_rng.normal();
  Rng r1(9), r2(9);
  BatchForward train_out = model.forward({&a}, true, r1);
  BatchForward eval_out = model.forward({&a}, false, r2);
  double diff = 0;
  for (std::size_t e = 0; e < 3; ++e)
    diff += std::abs(train_out.clip_probs->value[e] - eval_out.clip_probs->value[e]);
  CHECK(diff > 0.0);
}

TEST_CASE("checkpoint round trip reproduces inference bit for bit") {
  const auto dir = (std::filesystem::temp_directory_path() / "cdur_ckpt_test").string();
  std::filesystem::remove_all(dir);
  Rng rng(10);
  CdurModel model(tiny_config(), rng);
  Rng data_rng(11);
  Tensor frames({48, 64});
  for (auto& v : frames.vec()) v = data_rng.normal();
  const ProbabilitySet before = model.infer(frames);

  save_checkpoint(dir, model, {"a", "b", "c"}, 123, 7);
  LoadedCheckpoint back = load_checkpoint(dir);
  CHECK(back.labels == std::vector<std::string>{"a", "b", "c"});
  CHECK(back.seed == 123);
  CHECK(back.epoch == 7);
  const ProbabilitySet after = back.model->infer(frames);
  CHECK(after.frame_probs == before.frame_probs);
  CHECK(after.clip_probs == before.clip_probs);
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
