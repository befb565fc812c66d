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

#include "cdur/model.hpp"

namespace cdur {

/// Checkpoint = directory of tensor files (one per parameter or buffer)
/// plus a flat key-value manifest.txt: model config echo, event labels,
/// rng seed, epoch, and name -> file mappings.
void save_checkpoint(const std::string& dir, CdurModel& model,
                     const std::vector<std::string>& labels, std::uint64_t seed, int epoch);

struct LoadedCheckpoint {
  CdurConfig config;
  std::vector<std::string> labels;
  std::uint64_t seed = 0;
  int epoch = 0;
  std::unique_ptr<CdurModel> model;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

}  // namespace cdur
