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

// Images on the unit interval and their patch decomposition.

#ifndef VWT_IMAGE_HPP_
#define VWT_IMAGE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vwt/error.hpp"
#include "vwt/matrix.hpp"

namespace vwt {

// Row-major, channel-interleaved pixels in [0, 1].
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f)
      : Image(height, width, channels, std::vector<float>(height * width * channels, fill)) {}
  Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    Require(channels_ == 1 || channels_ == 3, ErrorCode::kInvalidArgument,
            "image channels must be 1 or 3, got " + std::to_string(channels_));
    Require(data_.size() == height_ * width_ * channels_, ErrorCode::kDimensionMismatch,
            "image data size does not match " + std::to_string(height_) + "x" +
                std::to_string(width_) + "x" + std::to_string(channels_));
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> data_;
};

// N flattened P x P x C patches, one per row, in lattice reading order.
struct PatchMatrix {
  Matrix values;
  std::size_t patch_size = 0;
  std::size_t channels = 0;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;

  std::size_t patch_count() const { return values.rows(); }
  std::size_t patch_dim() const { return values.cols(); }
  std::span<const float> patch(std::size_t i) const { return values.row(i); }
};

enum class ResizeMode { kNearest, kBilinear };

namespace detail {

// Maps an output coordinate to source space with half-pixel centers.
inline double SourceCoord(std::size_t out, std::size_t in_size, std::size_t out_size) {
  return (static_cast<double>(out) + 0.5) * static_cast<double>(in_size) /
             static_cast<double>(out_size) -
         0.5;
}

}  // namespace detail

inline Image Resize(const Image& img, std::size_t target_height, std::size_t target_width,
                    ResizeMode mode) {
  Require(target_height > 0 && target_width > 0, ErrorCode::kInvalidArgument,
          "resize target must be positive");
  Require(img.height() > 0 && img.width() > 0, ErrorCode::kInvalidArgument,
          "cannot resize an empty image");
  const std::size_t c = img.channels();
  Image out(target_height, target_width, c);
  if (mode == ResizeMode::kNearest) {
    for (std::size_t y = 0; y < target_height; ++y) {
      const std::size_t sy = std::min(
          img.height() - 1, static_cast<std::size_t>((y + 0.5) * img.height() / target_height));
      for (std::size_t x = 0; x < target_width; ++x) {
        const std::size_t sx = std::min(
            img.width() - 1, static_cast<std::size_t>((x + 0.5) * img.width() / target_width));
        for (std::size_t k = 0; k < c; ++k) out.at(y, x, k) = img.at(sy, sx, k);
      }
    }
    return out;
  }
  const double max_y = static_cast<double>(img.height() - 1);
  const double max_x = static_cast<double>(img.width() - 1);
  for (std::size_t y = 0; y < target_height; ++y) {
    const double fy = std::clamp(detail::SourceCoord(y, img.height(), target_height), 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < target_width; ++x) {
      const double fx = std::clamp(detail::SourceCoord(x, img.width(), target_width), 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t k = 0; k < c; ++k) {
        const double top = (1.0 - wx) * img.at(y0, x0, k) + wx * img.at(y0, x1, k);
        const double bottom = (1.0 - wx) * img.at(y1, x0, k) + wx * img.at(y1, x1, k);
        out.at(y, x, k) = static_cast<float>(std::clamp((1.0 - wy) * top + wy * bottom, 0.0, 1.0));
      }
    }
  }
  return out;
}

// Splits the image into non-overlapping P x P blocks. Each row is the block
// flattened row-major with channels innermost.
inline PatchMatrix Patchify(const Image& img, std::size_t patch_size) {
  Require(patch_size > 0, ErrorCode::kInvalidArgument, "patch size must be positive");
  Require(img.height() % patch_size == 0 && img.width() % patch_size == 0,
          ErrorCode::kDimensionMismatch,
          "image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
              " is not divisible by patch size " + std::to_string(patch_size));
  const std::size_t c = img.channels();
  PatchMatrix pm;
  pm.patch_size = patch_size;
  pm.channels = c;
  pm.grid_rows = img.height() / patch_size;
  pm.grid_cols = img.width() / patch_size;
  const std::size_t dim = patch_size * patch_size * c;
  pm.values = Matrix(pm.grid_rows * pm.grid_cols, dim);
  const std::size_t row_span = patch_size * c;
  for (std::size_t gr = 0; gr < pm.grid_rows; ++gr) {
    for (std::size_t gc = 0; gc < pm.grid_cols; ++gc) {
      auto dst = pm.values.row(gr * pm.grid_cols + gc);
      for (std::size_t py = 0; py < patch_size; ++py) {
        const float* src = &img.data()[((gr * patch_size + py) * img.width() + gc * patch_size) * c];
        std::copy(src, src + row_span, dst.begin() + py * row_span);
      }
    }
  }
  return pm;
}

// Inverse of Patchify.
inline Image Unpatchify(const PatchMatrix& pm) {
  const std::size_t p = pm.patch_size;
  const std::size_t c = pm.channels;
  Require(pm.patch_dim() == p * p * c && pm.patch_count() == pm.grid_rows * pm.grid_cols,
          ErrorCode::kDimensionMismatch, "patch matrix geometry is inconsistent");
  Image img(pm.grid_rows * p, pm.grid_cols * p, c);
  const std::size_t row_span = p * c;
  for (std::size_t gr = 0; gr < pm.grid_rows; ++gr) {
    for (std::size_t gc = 0; gc < pm.grid_cols; ++gc) {
      auto src = pm.values.row(gr * pm.grid_cols + gc);
      for (std::size_t py = 0; py < p; ++py) {
        std::copy(src.begin() + py * row_span, src.begin() + (py + 1) * row_span,
                  &img.data()[((gr * p + py) * img.width() + gc * p) * c]);
      }
    }
  }
  return img;
}

// Converts grayscale to RGB by channel replication; RGB passes through.
inline Image ToRgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.height(), img.width(), 3);
  for (std::size_t i = 0; i < img.height() * img.width(); ++i) {
    out.data()[3 * i] = out.data()[3 * i + 1] = out.data()[3 * i + 2] = img.data()[i];
  }
  return out;
}

}  // namespace vwt

#endif  // VWT_IMAGE_HPP_
