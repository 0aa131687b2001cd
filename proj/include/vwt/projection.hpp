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

#ifndef VWT_PROJECTION_HPP_
#define VWT_PROJECTION_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "vwt/error.hpp"
#include "vwt/image.hpp"
#include "vwt/matrix.hpp"

namespace vwt {

// Affine patch embedding: out = x * weights + bias, weights is in x out.
struct Projection {
  Matrix weights;
  std::vector<float> bias;

  std::size_t input_dim() const { return weights.rows(); }
  std::size_t output_dim() const { return weights.cols(); }

  static Projection Identity(std::size_t dim) {
    Projection p{Matrix(dim, dim), std::vector<float>(dim, 0.0f)};
    for (std::size_t i = 0; i < dim; ++i) p.weights(i, i) = 1.0f;
    return p;
  }

  Matrix Apply(const Matrix& rows) const {
    Require(rows.cols() == input_dim(), ErrorCode::kDimensionMismatch,
            "projection expects rows of " + std::to_string(input_dim()) + " values, got " +
                std::to_string(rows.cols()));
    Require(bias.size() == output_dim(), ErrorCode::kDimensionMismatch,
            "projection bias size mismatch");
    Matrix out(rows.rows(), output_dim());
    std::vector<double> acc(output_dim());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      for (std::size_t j = 0; j < output_dim(); ++j) acc[j] = bias[j];
      auto x = rows.row(r);
      for (std::size_t i = 0; i < input_dim(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        auto w = weights.row(i);
        for (std::size_t j = 0; j < output_dim(); ++j) acc[j] += xi * w[j];
      }
      auto dst = out.row(r);
      for (std::size_t j = 0; j < output_dim(); ++j) dst[j] = static_cast<float>(acc[j]);
    }
    return out;
  }

  // Projects every patch; lattice geometry carries over, patch_dim becomes
  // the embedding width.
  PatchMatrix Apply(const PatchMatrix& patches) const {
    PatchMatrix out = patches;
    out.values = Apply(patches.values);
    return out;
  }
};

}  // namespace vwt

#endif  // VWT_PROJECTION_HPP_
