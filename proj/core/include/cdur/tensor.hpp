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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdur {

/// Dense row-major tensor of 64-bit floats. The one numeric container used
/// throughout: features, activations, gradients, optimizer state.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);
  Tensor(std::initializer_list<std::size_t> shape) : Tensor(std::vector<std::size_t>(shape)) {}

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // 2-D accessors (row-major).
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  Tensor reshaped(std::vector<std::size_t> shape) const;

  void fill(double v);
  /// Throws if any element is NaN or infinite; `what` names the producer.
  void check_finite(const std::string& what) const;
  bool all_finite() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// NaN/Inf escaped a computation; callers map this to a distinct exit code.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error for a malformed tensor file; `byte_offset` points at the fault.
class TensorFormatError : public std::runtime_error {
 public:
  TensorFormatError(const std::string& msg, std::uint64_t byte_offset);
  std::uint64_t byte_offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// On-disk format, little-endian throughout:
//   8-byte magic "CDURTNSR", u32 rank, rank x u64 dims, f64 payload row-major.
void tensor_save(const Tensor& t, const std::string& path);
Tensor tensor_load(const std::string& path);

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace cdur
