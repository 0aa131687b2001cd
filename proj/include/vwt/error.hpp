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

#ifndef VWT_ERROR_HPP_
#define VWT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vwt {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kUnsupportedFormat,
  kCorruptFile,
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kIo,
  kInsufficientData,
  kSpaceMismatch,
  kModeMismatch,
  kNonFinite,
  kMissingLabel,
};

constexpr std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kCorruptFile: return "corrupt_file";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kSpaceMismatch: return "space_mismatch";
    case ErrorCode::kModeMismatch: return "mode_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kMissingLabel: return "missing_label";
  }
  return "unknown";
}

// All library failures surface as this exception; `code()` is stable and
// machine-readable, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace vwt

#endif  // VWT_ERROR_HPP_
