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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cdur/rng.hpp"
#include "cdur/tensor.hpp"

using namespace cdur;

namespace {
std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_SUITE_BEGIN("tensor");

TEST_CASE("shape and accessors") {
  Tensor t({2, 3});
  CHECK(t.rank() == 2);
  CHECK(t.size() == 6);
  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  CHECK(Tensor::scalar(3.5)[0] == 3.5);
  CHECK(Tensor::full({2, 2}, 7.0)[3] == 7.0);
}

TEST_CASE("empty tensor file is exactly 20 bytes") {
  const std::string path = tmp_path("cdur_empty.tnsr");
  tensor_save(Tensor({0}), path);
  CHECK(std::filesystem::file_size(path) == 20);
  const Tensor back = tensor_load(path);
  CHECK(back.rank() == 1);
  CHECK(back.dim(0) == 0);
  std::remove(path.c_str());
}

TEST_CASE("save/load round trip preserves bytes (1000 random tensors)") {
  Rng rng(11);
  const std::string path = tmp_path("cdur_roundtrip.tnsr");
  for (int i = 0; i < 1000; ++i) {
    const std::size_t rank = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(rng.uniform_int(0, 6));
    Tensor t(shape);
    for (auto& v : t.vec()) v = rng.normal(0.0, 100.0);
    tensor_save(t, path);
    const Tensor back = tensor_load(path);
    CHECK(back == t);  // bit-exact: shape and every f64 payload value
  }
  std::remove(path.c_str());
}

TEST_CASE("bad magic reports offset 0") {
  const std::string path = tmp_path("cdur_badmagic.tnsr");
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOTMAGIC" << std::string(12, '\0');
  }
  CHECK_THROWS_AS(tensor_load(path), TensorFormatError);
  try {
    tensor_load(path);
  } catch (const TensorFormatError& e) {
    CHECK(e.byte_offset() == 0);
  }
  std::remove(path.c_str());
}

TEST_CASE("truncated payload reports the truncation offset") {
  const std::string path = tmp_path("cdur_trunc.tnsr");
  Tensor t({4});
  tensor_save(t, path);
  std::filesystem::resize_file(path, 30);  // header is 20 bytes, payload cut short
  try {
    tensor_load(path);
    FAIL("expected TensorFormatError");
  } catch (const TensorFormatError& e) {
    CHECK(e.byte_offset() >= 20);
  }
  std::remove(path.c_str());
}

TEST_CASE("reshape checks element count") {
  Tensor t({2, 3});
  CHECK(t.reshaped({3, 2}).dim(0) == 3);
  CHECK_THROWS(t.reshaped({4, 2}));
}

TEST_CASE("check_finite throws NumericError") {
  Tensor t({2});
  t[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(t.check_finite("test"), NumericError);
}

TEST_SUITE_END();
