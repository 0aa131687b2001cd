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

// Qualitative views of a grouping: colored match overlays, blacked-out drop
// overlays, and a per-word atlas of the vocabulary.

#ifndef VWT_RENDER_HPP_
#define VWT_RENDER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "vwt/error.hpp"
#include "vwt/image.hpp"
#include "vwt/random.hpp"
#include "vwt/tokenizer.hpp"
#include "vwt/vocab.hpp"

namespace vwt {

using Rgb = std::array<float, 3>;

struct OverlaySpec {
  Image source;
  GroupAssignment assignment;
  std::size_t patch_size = 16;
  std::uint64_t palette_seed = 0;
  double alpha = 0.5;
};

// Fully saturated hue in [0, 1).
inline Rgb HueToRgb(double hue) {
  const double h = 6.0 * (hue - std::floor(hue));
  const int sector = static_cast<int>(h) % 6;
  const auto f = static_cast<float>(h - std::floor(h));
  switch (sector) {
    case 0: return {1.0f, f, 0.0f};
    case 1: return {1.0f - f, 1.0f, 0.0f};
    case 2: return {0.0f, 1.0f, f};
    case 3: return {0.0f, 1.0f - f, 1.0f};
    case 4: return {f, 0.0f, 1.0f};
    default: return {1.0f, 0.0f, 1.0f - f};
  }
}

// One color per distinct word: K evenly spaced hues, dealt to the words (in
// ascending order) after a seeded shuffle.
inline std::map<std::uint32_t, Rgb> MakePalette(const std::set<std::uint32_t>& words,
                                                std::uint64_t seed) {
  const std::size_t k = words.size();
  std::vector<std::size_t> slots(k);
  std::iota(slots.begin(), slots.end(), 0);
  Rng rng(seed);
  for (std::size_t i = k; i > 1; --i) std::swap(slots[i - 1], slots[rng.Below(i)]);
  std::map<std::uint32_t, Rgb> palette;
  std::size_t i = 0;
  for (std::uint32_t w : words) {
    palette[w] = HueToRgb(static_cast<double>(slots[i++]) / static_cast<double>(k));
  }
  return palette;
}

namespace detail {

inline void CheckGeometry(const OverlaySpec& spec) {
  const std::size_t p = spec.patch_size;
  Require(p > 0 && spec.source.height() % p == 0 && spec.source.width() % p == 0,
          ErrorCode::kDimensionMismatch, "image is not divisible by the patch size");
  const std::size_t n = (spec.source.height() / p) * (spec.source.width() / p);
  Require(n == spec.assignment.patch_count(), ErrorCode::kDimensionMismatch,
          "image has " + std::to_string(n) + " patches but the assignment has " +
              std::to_string(spec.assignment.patch_count()));
  Require(spec.alpha >= 0.0 && spec.alpha <= 1.0, ErrorCode::kInvalidArgument,
          "alpha must lie in [0,1]");
}

template <typename Fn>
void ForEachPatchPixel(const Image& img, std::size_t patch_size, std::size_t patch, Fn&& fn) {
  const std::size_t cols = img.width() / patch_size;
  const std::size_t y0 = (patch / cols) * patch_size;
  const std::size_t x0 = (patch % cols) * patch_size;
  for (std::size_t y = y0; y < y0 + patch_size; ++y) {
    for (std::size_t x = x0; x < x0 + patch_size; ++x) fn(y, x);
  }
}

}  // namespace detail

// Matched patches are alpha-blended toward their word's color; everything
// else is copied. Output is always RGB.
inline Image RenderMatchOverlay(const OverlaySpec& spec) {
  Require(IsInterFamily(spec.assignment.mode), ErrorCode::kModeMismatch,
          "match overlay needs an inter-family assignment");
  detail::CheckGeometry(spec);
  std::set<std::uint32_t> words;
  for (Verdict v : spec.assignment.verdicts) {
    if (v.matched()) words.insert(v.word());
  }
  const auto palette = MakePalette(words, spec.palette_seed);
  Image out = ToRgb(spec.source);
  const auto a = static_cast<float>(spec.alpha);
  for (std::size_t i = 0; i < spec.assignment.patch_count(); ++i) {
    const Verdict v = spec.assignment.verdicts[i];
    if (!v.matched()) continue;
    const Rgb& color = palette.at(v.word());
    detail::ForEachPatchPixel(out, spec.patch_size, i, [&](std::size_t y, std::size_t x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out.at(y, x, c) = (1.0f - a) * out.at(y, x, c) + a * color[c];
      }
    });
  }
  return out;
}

// Dropped patches become black; the rest is untouched.
inline Image RenderDropOverlay(const OverlaySpec& spec) {
  Require(!IsInterFamily(spec.assignment.mode), ErrorCode::kModeMismatch,
          "drop overlay needs an intra-family assignment");
  detail::CheckGeometry(spec);
  Image out = spec.source;
  for (std::size_t i = 0; i < spec.assignment.patch_count(); ++i) {
    if (!spec.assignment.verdicts[i].dropped()) continue;
    detail::ForEachPatchPixel(out, spec.patch_size, i, [&](std::size_t y, std::size_t x) {
      for (std::size_t c = 0; c < out.channels(); ++c) out.at(y, x, c) = 0.0f;
    });
  }
  return out;
}

// One row per word: the centroid (clamped to [0,1]) followed by up to
// `per_word` corpus patches assigned to that word, nearest first. Unused
// cells stay black.
inline Image RenderVocabAtlas(const Vocabulary& vocab, const Matrix& corpus, std::size_t per_word) {
  Require(vocab.space == FeatureSpace::kPixel, ErrorCode::kSpaceMismatch,
          "embedding-space vocabularies cannot be rendered as pixels");
  const std::size_t p = vocab.patch_size;
  Require(p > 0 && vocab.patch_dim() % (p * p) == 0, ErrorCode::kDimensionMismatch,
          "vocabulary patch_dim is not a whole number of P x P planes");
  const std::size_t c = vocab.patch_dim() / (p * p);
  Require(c == 1 || c == 3, ErrorCode::kDimensionMismatch, "atlas needs 1 or 3 channels");

  const auto assign = corpus.rows() > 0 ? AssignNearest(corpus, vocab)
                                        : std::vector<std::uint32_t>{};
  std::vector<std::vector<std::pair<double, std::size_t>>> members(vocab.size());
  for (std::size_t i = 0; i < assign.size(); ++i) {
    members[assign[i]].push_back(
        {detail::SquaredDistance(corpus.row(i), vocab.centroids.row(assign[i])), i});
  }

  Image atlas(vocab.size() * p, (1 + per_word) * p, c);
  auto blit = [&](std::span<const float> patch, std::size_t row, std::size_t col) {
    for (std::size_t y = 0; y < p; ++y) {
      for (std::size_t x = 0; x < p; ++x) {
        for (std::size_t k = 0; k < c; ++k) {
          atlas.at(row * p + y, col * p + x, k) =
              std::clamp(patch[(y * p + x) * c + k], 0.0f, 1.0f);
        }
      }
    }
  };
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    blit(vocab.centroids.row(w), w, 0);
    auto& list = members[w];
    std::sort(list.begin(), list.end());
    for (std::size_t j = 0; j < per_word && j < list.size(); ++j) {
      blit(corpus.row(list[j].second), w, j + 1);
    }
  }
  return atlas;
}

}  // namespace vwt

#endif  // VWT_RENDER_HPP_
