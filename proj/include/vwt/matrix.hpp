// Copyright 2026 The VWT Authors
// SPDX-License-Identifier: Apache-2.0
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

#ifndef VWT_MATRIX_HPP_
#define VWT_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vwt/error.hpp"

namespace vwt {

// Dense row-major matrix. Rows are the unit of work everywhere in this
// library (one patch, one token, one centroid per row).
template <typename T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    Require(data_.size() == rows_ * cols_, ErrorCode::kDimensionMismatch,
            "matrix data size " + std::to_string(data_.size()) + " != " + std::to_string(rows_) +
                "x" + std::to_string(cols_));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void AppendRow(std::span<const T> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    Require(values.size() == cols_, ErrorCode::kDimensionMismatch,
            "row width " + std::to_string(values.size()) + " != " + std::to_string(cols_));
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<float>;

}  // namespace vwt

#endif  // VWT_MATRIX_HPP_
