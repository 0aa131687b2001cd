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

// Generators and independent reference implementations for tests. Nothing
// here calls into the code paths it is used to check.

#ifndef VWT_TESTS_SUPPORT_HPP_
#define VWT_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vwt/image.hpp"
#include "vwt/matrix.hpp"
#include "vwt/vocab.hpp"

namespace vwt::testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("vwt_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using Engine = std::mt19937_64;

inline float Unit(Engine& eng) { return std::uniform_real_distribution<float>(0.0f, 1.0f)(eng); }

inline Image RandomImage(Engine& eng, std::size_t h, std::size_t w, std::size_t c) {
  Image img(h, w, c);
  for (float& v : img.data()) v = Unit(eng);
  return img;
}

inline Matrix RandomMatrix(Engine& eng, std::size_t rows, std::size_t cols, float lo = -1.0f,
                           float hi = 1.0f) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<float> dist(lo, hi);
  for (float& v : m.data()) v = dist(eng);
  return m;
}

inline PatchMatrix AsPatches(Matrix values, std::size_t patch_size = 1) {
  PatchMatrix pm;
  pm.channels = 1;
  pm.patch_size = patch_size;
  pm.grid_rows = 1;
  pm.grid_cols = values.rows();
  pm.values = std::move(values);
  return pm;
}

inline Vocabulary AsVocab(Matrix centroids, FeatureSpace space = FeatureSpace::kPixel) {
  Vocabulary v;
  v.centroids = std::move(centroids);
  v.patch_size = 1;
  v.space = space;
  return v;
}

// Two-pass population variance.
inline double OracleVariance(std::span<const float> xs) {
  double mean = 0.0;
  for (float x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (float x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

// Cosine distance via explicit unit vectors. nullopt when either is zero.
inline std::optional<double> OracleCosine(std::span<const float> a, std::span<const float> b) {
  double na = 0.0, nb = 0.0;
  for (float x : a) na += static_cast<double>(x) * x;
  for (float x : b) nb += static_cast<double>(x) * x;
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += (a[i] / na) * (b[i] / nb);
  return std::min(2.0, std::max(0.0, 1.0 - dot));
}

// Verdict per patch: -2 intact, else matched word index.
inline std::vector<long> OracleInter(const Matrix& patches, const Matrix& words, double threshold) {
  std::vector<long> out(patches.rows(), -2);
  for (std::size_t i = 0; i < patches.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    long arg = -1;
    for (std::size_t k = 0; k < words.rows(); ++k) {
      auto d = OracleCosine(patches.row(i), words.row(k));
      if (d && *d < best) {
        best = *d;
        arg = static_cast<long>(k);
      }
    }
    if (arg >= 0 && best <= threshold) out[i] = arg;
  }
  return out;
}

inline std::size_t OracleLength(const std::vector<long>& verdicts) {
  std::map<long, int> words;
  std::size_t intact = 0;
  for (long v : verdicts) {
    if (v == -2) {
      ++intact;
    } else {
      words[v] = 1;
    }
  }
  return words.size() + intact + 1;
}

inline std::uint32_t OracleNearestEuclid(std::span<const float> x, const Matrix& words) {
  std::vector<double> table(words.rows());
  for (std::size_t k = 0; k < words.rows(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      s += (static_cast<double>(x[j]) - words(k, j)) * (static_cast<double>(x[j]) - words(k, j));
    }
    table[k] = s;
  }
  std::uint32_t best = 0;
  for (std::uint32_t k = 1; k < table.size(); ++k) {
    if (table[k] < table[best]) best = k;
  }
  return best;
}

// Patches drawn around `centers` with uniform noise of half-width `spread`.
inline std::vector<PatchMatrix> BlobCorpus(Engine& eng, const std::vector<std::vector<float>>& centers,
                                           std::size_t per_blob, float spread) {
  std::uniform_real_distribution<float> noise(-spread, spread);
  std::vector<PatchMatrix> corpus;
  for (const auto& c : centers) {
    Matrix m(per_blob, c.size());
    for (std::size_t i = 0; i < per_blob; ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) m(i, j) = c[j] + noise(eng);
    }
    corpus.push_back(AsPatches(std::move(m)));
  }
  return corpus;
}

}  // namespace vwt::testing

#endif  // VWT_TESTS_SUPPORT_HPP_
