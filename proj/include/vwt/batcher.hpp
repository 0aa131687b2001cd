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

#ifndef VWT_BATCHER_HPP_
#define VWT_BATCHER_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vwt/error.hpp"
#include "vwt/matrix.hpp"
#include "vwt/token_sequence.hpp"

namespace vwt {

// Masked attention logits get this instead of -inf so that a fully masked
// row cannot turn into NaN.
inline constexpr double kMaskedLogit = -1e9;

// Variable-length sequences padded at the tail to the longest one. Pad
// positions hold zero vectors and never receive positional embeddings.
struct PaddedBatch {
  std::size_t batch = 0;
  std::size_t max_len = 0;
  std::size_t dim = 0;
  std::vector<float> embeddings;     // batch x max_len x dim
  std::vector<std::uint8_t> valid;   // batch x max_len
  std::vector<std::size_t> lengths;  // true length per sample

  std::span<const float> token(std::size_t b, std::size_t t) const {
    return {embeddings.data() + (b * max_len + t) * dim, dim};
  }
  bool is_valid(std::size_t b, std::size_t t) const { return valid[b * max_len + t] != 0; }

  // Additive attention bias for key position t of sample b.
  double additive_mask(std::size_t b, std::size_t t) const {
    return is_valid(b, t) ? 0.0 : kMaskedLogit;
  }

  // Valid rows of sample b.
  Matrix sample(std::size_t b) const {
    std::vector<float> rows(embeddings.begin() + b * max_len * dim,
                            embeddings.begin() + (b * max_len + lengths[b]) * dim);
    return Matrix(lengths[b], dim, std::move(rows));
  }
};

inline PaddedBatch Collate(std::span<const TokenSequence> seqs) {
  Require(!seqs.empty(), ErrorCode::kInvalidArgument, "cannot collate an empty batch");
  PaddedBatch out;
  out.batch = seqs.size();
  out.dim = seqs.front().dim();
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    Require(seqs[b].dim() == out.dim, ErrorCode::kDimensionMismatch,
            "sequence " + std::to_string(b) + " has dim " + std::to_string(seqs[b].dim()) +
                ", expected " + std::to_string(out.dim));
    out.lengths.push_back(seqs[b].size());
    out.max_len = std::max(out.max_len, seqs[b].size());
  }
  out.embeddings.assign(out.batch * out.max_len * out.dim, 0.0f);
  out.valid.assign(out.batch * out.max_len, 0);
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const auto& src = seqs[b].embeddings.data();
    std::copy(src.begin(), src.end(), out.embeddings.begin() + b * out.max_len * out.dim);
    std::fill_n(out.valid.begin() + b * out.max_len, out.lengths[b], 1);
  }
  return out;
}

// Strips padding; the inverse of Collate on embeddings.
inline std::vector<Matrix> Split(const PaddedBatch& batch) {
  std::vector<Matrix> out;
  out.reserve(batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b) out.push_back(batch.sample(b));
  return out;
}

}  // namespace vwt

#endif  // VWT_BATCHER_HPP_
