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

#ifndef VWT_TOKEN_SEQUENCE_HPP_
#define VWT_TOKEN_SEQUENCE_HPP_

#include <cstdint>
#include <vector>

#include "vwt/matrix.hpp"

namespace vwt {

// Embedded tokens, [CLS] first. members[t] lists the source patch indices
// folded into token t: one for an intact patch, several for a merged word,
// none for [CLS].
struct TokenSequence {
  Matrix embeddings;  // M x D
  std::vector<std::vector<std::uint32_t>> members;

  std::size_t size() const { return embeddings.rows(); }
  std::size_t dim() const { return embeddings.cols(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

}  // namespace vwt

#endif  // VWT_TOKEN_SEQUENCE_HPP_
