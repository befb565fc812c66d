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

#include "cdur/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace cdur {

namespace {

constexpr char kMagic[8] = {'C', 'D', 'U', 'R', 'T', 'N', 'S', 'R'};
constexpr std::size_t kMaxRank = 32;

static_assert(std::endian::native == std::endian::little,
              "tensor file i/o assumes a little-endian host");

}  // namespace

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size())
    throw std::invalid_argument("Tensor: shape does not match data length");
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_numel(shape) != data_.size())
    throw std::invalid_argument("Tensor::reshaped: element count mismatch");
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::check_finite(const std::string& what) const {
  if (!all_finite()) throw NumericError("non-finite value produced by " + what);
}

TensorFormatError::TensorFormatError(const std::string& msg, std::uint64_t byte_offset)
    : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
      offset_(byte_offset) {}

void tensor_save(const Tensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("tensor_save: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  std::uint32_t rank = static_cast<std::uint32_t>(t.rank());
  out.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
  for (std::size_t d : t.shape()) {
    std::uint64_t dim = d;
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  }
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw std::runtime_error("tensor_save: write failed for " + path);
}

Tensor tensor_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("tensor_load: cannot open " + path);

  char magic[8];
  if (!in.read(magic, sizeof(magic)))
    throw TensorFormatError("truncated header", static_cast<std::uint64_t>(in.gcount()));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw TensorFormatError("bad magic", 0);

  std::uint32_t rank = 0;
  if (!in.read(reinterpret_cast<char*>(&rank), sizeof(rank)))
    throw TensorFormatError("truncated rank field", 8);
  if (rank > kMaxRank) throw TensorFormatError("implausible rank " + std::to_string(rank), 8);

  std::vector<std::size_t> shape(rank);
  std::size_t numel = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint64_t dim = 0;
    std::uint64_t off = 12 + static_cast<std::uint64_t>(i) * 8;
    if (!in.read(reinterpret_cast<char*>(&dim), sizeof(dim)))
      throw TensorFormatError("truncated dims", off);
    // Reject dims that would overflow the element count.
    if (dim != 0 && numel > std::numeric_limits<std::size_t>::max() / dim)
      throw TensorFormatError("dim overflow", off);
    shape[i] = static_cast<std::size_t>(dim);
    numel *= shape[i] == 0 ? 1 : shape[i];
  }
  numel = shape_numel(shape);

  std::vector<double> data(numel);
  std::uint64_t payload_off = 12 + static_cast<std::uint64_t>(rank) * 8;
  if (numel > 0 &&
      !in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(numel * sizeof(double))))
    throw TensorFormatError("truncated payload",
                            payload_off + static_cast<std::uint64_t>(in.gcount()));
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace cdur
