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

// Patch grouping. Every tokenizer maps N patches to one verdict each:
//
//   Matched(w)  the patch joins visual word w and is averaged with the
//               other patches of that word,
//   Intact      the patch stays its own token,
//   Dropped     the patch is removed.
//
// The [CLS] token is never part of a grouping and always adds one token.

#ifndef VWT_TOKENIZER_HPP_
#define VWT_TOKENIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vwt/error.hpp"
#include "vwt/image.hpp"
#include "vwt/matrix.hpp"
#include "vwt/projection.hpp"
#include "vwt/random.hpp"
#include "vwt/vocab.hpp"

namespace vwt {

enum class TokenizerMode { kIntra, kInter, kRandomInter, kRandomIntra, kInterEmbed };

inline constexpr std::string_view ToString(TokenizerMode mode) {
  switch (mode) {
    case TokenizerMode::kIntra: return "intra";
    case TokenizerMode::kInter: return "inter";
    case TokenizerMode::kRandomInter: return "random_inter";
    case TokenizerMode::kRandomIntra: return "random_intra";
    case TokenizerMode::kInterEmbed: return "inter_embed";
  }
  return "unknown";
}

inline TokenizerMode ParseTokenizerMode(std::string_view s) {
  for (auto m : {TokenizerMode::kIntra, TokenizerMode::kInter, TokenizerMode::kRandomInter,
                 TokenizerMode::kRandomIntra, TokenizerMode::kInterEmbed}) {
    if (s == ToString(m)) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown tokenizer mode '" + std::string(s) + "'");
}

// Intra-family modes drop; inter-family modes match.
inline constexpr bool IsInterFamily(TokenizerMode mode) {
  return mode == TokenizerMode::kInter || mode == TokenizerMode::kRandomInter ||
         mode == TokenizerMode::kInterEmbed;
}

class Verdict {
 public:
  enum class Kind : std::uint8_t { kIntact, kMatched, kDropped };

  static constexpr Verdict Intact() { return Verdict(Kind::kIntact, 0); }
  static constexpr Verdict Dropped() { return Verdict(Kind::kDropped, 0); }
  static constexpr Verdict Matched(std::uint32_t word) { return Verdict(Kind::kMatched, word); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool intact() const { return kind_ == Kind::kIntact; }
  constexpr bool matched() const { return kind_ == Kind::kMatched; }
  constexpr bool dropped() const { return kind_ == Kind::kDropped; }
  // Only meaningful when matched().
  constexpr std::uint32_t word() const { return word_; }

  friend constexpr bool operator==(const Verdict&, const Verdict&) = default;

 private:
  constexpr Verdict(Kind kind, std::uint32_t word) : kind_(kind), word_(word) {}
  Kind kind_;
  std::uint32_t word_;
};

struct GroupAssignment {
  TokenizerMode mode = TokenizerMode::kIntra;
  // Set for inter-family modes.
  std::optional<double> threshold;
  // Set for intra-family modes.
  std::optional<double> drop_ratio;
  std::vector<Verdict> verdicts;

  std::size_t patch_count() const { return verdicts.size(); }

  std::size_t intact_count() const {
    return static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [](Verdict v) { return v.intact(); }));
  }
  std::size_t dropped_count() const {
    return static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [](Verdict v) { return v.dropped(); }));
  }
  std::size_t distinct_word_count() const {
    std::set<std::uint32_t> words;
    for (Verdict v : verdicts) {
      if (v.matched()) words.insert(v.word());
    }
    return words.size();
  }

  // Distinct matched words + intact patches + [CLS].
  std::size_t compressed_length() const { return distinct_word_count() + intact_count() + 1; }

  // Dropped only in intra-family modes, Matched only in inter-family modes.
  void Validate() const {
    const bool inter = IsInterFamily(mode);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      const Verdict v = verdicts[i];
      Require(!(inter && v.dropped()) && !(!inter && v.matched()), ErrorCode::kModeMismatch,
              "verdict " + std::to_string(i) + " is not allowed in mode " +
                  std::string(ToString(mode)));
    }
  }

  friend bool operator==(const GroupAssignment&, const GroupAssignment&) = default;
};

struct IntraConfig {
  double drop_ratio = 0.5;

  void Validate() const {
    Require(drop_ratio >= 0.0 && drop_ratio <= 1.0, ErrorCode::kInvalidArgument,
            "drop ratio must lie in [0,1], got " + std::to_string(drop_ratio));
  }
};

struct InterConfig {
  double threshold = 0.1;

  void Validate() const {
    Require(threshold >= 0.0 && threshold <= 2.0, ErrorCode::kInvalidArgument,
            "threshold must lie in [0,2], got " + std::to_string(threshold));
  }
};

// ceil(ratio * n). A product that lands within rounding noise of an integer
// counts as that integer, so 0.7 * 10 drops 7 and not 8.
inline std::size_t DropCount(double ratio, std::size_t n) {
  const double x = ratio * static_cast<double>(n);
  const double nearest = std::round(x);
  const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

// Population variance of each row (Welford).
inline std::vector<double> PatchVariance(const Matrix& patches) {
  std::vector<double> out(patches.rows());
  for (std::size_t r = 0; r < patches.rows(); ++r) {
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (float v : patches.row(r)) {
      ++n;
      const double delta = v - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (v - mean);
    }
    out[r] = n == 0 ? 0.0 : std::max(0.0, m2 / static_cast<double>(n));
  }
  return out;
}

inline std::vector<double> PatchVariance(const PatchMatrix& patches) {
  return PatchVariance(patches.values);
}

// Drops the ceil(ratio*N) lowest-variance patches; equal variances drop the
// lower index first.
inline GroupAssignment TokenizeIntra(const PatchMatrix& patches, const IntraConfig& cfg) {
  cfg.Validate();
  const auto variance = PatchVariance(patches);
  const std::size_t n = variance.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return variance[a] < variance[b]; });
  GroupAssignment out;
  out.mode = TokenizerMode::kIntra;
  out.drop_ratio = cfg.drop_ratio;
  out.verdicts.assign(n, Verdict::Intact());
  const std::size_t k = DropCount(cfg.drop_ratio, n);
  for (std::size_t i = 0; i < k; ++i) out.verdicts[order[i]] = Verdict::Dropped();
  return out;
}

inline GroupAssignment TokenizeRandomIntra(std::size_t n, double drop_ratio, std::uint64_t seed) {
  IntraConfig{drop_ratio}.Validate();
  const std::size_t k = DropCount(drop_ratio, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.Below(n - i);
    std::swap(idx[i], idx[j]);
  }
  GroupAssignment out;
  out.mode = TokenizerMode::kRandomIntra;
  out.drop_ratio = drop_ratio;
  out.verdicts.assign(n, Verdict::Intact());
  for (std::size_t i = 0; i < k; ++i) out.verdicts[idx[i]] = Verdict::Dropped();
  return out;
}

// N x V cosine distances 1 - a.b / (|a||b|), clamped to [0,2]. Entries whose
// patch or centroid has zero norm are NaN (undefined).
inline BasicMatrix<double> CosineDistanceTable(const Matrix& rows, const Matrix& centroids) {
  Require(rows.cols() == centroids.cols(), ErrorCode::kDimensionMismatch,
          "patch_dim " + std::to_string(rows.cols()) + " does not match vocabulary patch_dim " +
              std::to_string(centroids.cols()));
  auto norms = [](const Matrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double s = 0.0;
      for (float v : m.row(r)) s += static_cast<double>(v) * v;
      out[r] = std::sqrt(s);
    }
    return out;
  };
  const auto row_norm = norms(rows);
  const auto word_norm = norms(centroids);
  BasicMatrix<double> table(rows.rows(), centroids.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto a = rows.row(i);
    for (std::size_t k = 0; k < centroids.rows(); ++k) {
      if (row_norm[i] == 0.0 || word_norm[k] == 0.0) {
        table(i, k) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      auto b = centroids.row(k);
      double dot = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) dot += static_cast<double>(a[j]) * b[j];
      table(i, k) = std::clamp(1.0 - dot / (row_norm[i] * word_norm[k]), 0.0, 2.0);
    }
  }
  return table;
}

inline BasicMatrix<double> CosineDistanceTable(const PatchMatrix& patches,
                                               const Vocabulary& vocab) {
  return CosineDistanceTable(patches.values, vocab.centroids);
}

namespace detail {

// Per row: argmin over defined entries (ties to the lower word), matched iff
// the minimum is <= threshold. Rows with no defined entry stay intact.
inline std::vector<Verdict> MatchRows(const BasicMatrix<double>& table, double threshold) {
  std::vector<Verdict> out(table.rows(), Verdict::Intact());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t word = 0;
    for (std::size_t k = 0; k < table.cols(); ++k) {
      const double d = table(i, k);
      if (d < best) {
        best = d;
        word = static_cast<std::uint32_t>(k);
      }
    }
    if (best <= threshold) out[i] = Verdict::Matched(word);
  }
  return out;
}

inline void RequireSpace(const Vocabulary& vocab, FeatureSpace expected) {
  Require(vocab.space == expected, ErrorCode::kSpaceMismatch,
          "vocabulary is in " + std::string(ToString(vocab.space)) + " space but " +
              std::string(ToString(expected)) + " space was requested");
}

}  // namespace detail

inline GroupAssignment TokenizeInter(const PatchMatrix& patches, const Vocabulary& vocab,
                                     const InterConfig& cfg) {
  cfg.Validate();
  detail::RequireSpace(vocab, FeatureSpace::kPixel);
  GroupAssignment out;
  out.mode = TokenizerMode::kInter;
  out.threshold = cfg.threshold;
  out.verdicts = detail::MatchRows(CosineDistanceTable(patches, vocab), cfg.threshold);
  return out;
}

// Matching against a vocabulary built on projected patches.
inline GroupAssignment TokenizeInterEmbed(const PatchMatrix& patches, const Projection& projection,
                                          const Vocabulary& vocab, const InterConfig& cfg) {
  cfg.Validate();
  detail::RequireSpace(vocab, FeatureSpace::kEmbedding);
  GroupAssignment out;
  out.mode = TokenizerMode::kInterEmbed;
  out.threshold = cfg.threshold;
  out.verdicts = detail::MatchRows(
      CosineDistanceTable(projection.Apply(patches.values), vocab.centroids), cfg.threshold);
  return out;
}

// Replaces the distance table with i.i.d. U[0,2] draws, generated
// patch-major from a single seeded stream.
inline GroupAssignment TokenizeRandomInter(std::size_t n, std::size_t vocab_size, double threshold,
                                           std::uint64_t seed) {
  InterConfig{threshold}.Validate();
  Require(vocab_size >= 1, ErrorCode::kInvalidArgument, "vocab_size must be >= 1");
  Rng rng(seed);
  BasicMatrix<double> table(n, vocab_size);
  for (double& d : table.data()) d = rng.Uniform(0.0, 2.0);
  GroupAssignment out;
  out.mode = TokenizerMode::kRandomInter;
  out.threshold = threshold;
  out.verdicts = detail::MatchRows(table, threshold);
  return out;
}

namespace detail {

template <PatchSource Inner>
class ProjectedSource {
 public:
  ProjectedSource(Inner& inner, const Projection& projection)
      : inner_(inner), projection_(projection) {}
  std::optional<PatchMatrix> Next() {
    auto pm = inner_.Next();
    if (!pm) return std::nullopt;
    return projection_.Apply(*pm);
  }
  void Rewind() { inner_.Rewind(); }

 private:
  Inner& inner_;
  const Projection& projection_;
};

}  // namespace detail

// k-means over projected patches; the result is tagged as an embedding-space
// vocabulary and is only usable with TokenizeInterEmbed.
template <PatchSource Source>
KMeansReport BuildVocabEmbedding(Source& source, const Projection& projection,
                                 const KMeansConfig& cfg, std::string corpus_name = {}) {
  detail::ProjectedSource<Source> projected(source, projection);
  KMeansReport report = BuildVocab(projected, cfg, std::move(corpus_name));
  report.vocab.space = FeatureSpace::kEmbedding;
  report.vocab.metadata.pixel_range = "embedding";
  return report;
}

inline KMeansReport BuildVocabEmbedding(std::span<const PatchMatrix> corpus,
                                        const Projection& projection, const KMeansConfig& cfg,
                                        std::string corpus_name = {}) {
  SpanPatchSource source(corpus);
  return BuildVocabEmbedding(source, projection, cfg, std::move(corpus_name));
}

// {mode, threshold, n_patches, verdicts:[{"m":w} | "i" | "d"], compressed_length}
inline nlohmann::json ToJson(const GroupAssignment& a) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (Verdict v : a.verdicts) {
    if (v.matched()) {
      verdicts.push_back({{"m", v.word()}});
    } else {
      verdicts.push_back(v.intact() ? "i" : "d");
    }
  }
  nlohmann::json j;
  j["mode"] = ToString(a.mode);
  j["threshold"] = a.threshold ? nlohmann::json(*a.threshold) : nlohmann::json(nullptr);
  if (a.drop_ratio) j["ratio"] = *a.drop_ratio;
  j["n_patches"] = a.patch_count();
  j["verdicts"] = std::move(verdicts);
  j["compressed_length"] = a.compressed_length();
  return j;
}

inline GroupAssignment AssignmentFromJson(const nlohmann::json& j) {
  try {
    GroupAssignment a;
    a.mode = ParseTokenizerMode(j.at("mode").get<std::string>());
    if (j.contains("threshold") && !j.at("threshold").is_null()) {
      a.threshold = j.at("threshold").get<double>();
    }
    if (j.contains("ratio")) a.drop_ratio = j.at("ratio").get<double>();
    for (const auto& v : j.at("verdicts")) {
      if (v.is_object()) {
        a.verdicts.push_back(Verdict::Matched(v.at("m").get<std::uint32_t>()));
      } else if (v == "i") {
        a.verdicts.push_back(Verdict::Intact());
      } else if (v == "d") {
        a.verdicts.push_back(Verdict::Dropped());
      } else {
        throw Error(ErrorCode::kCorruptFile, "unknown verdict " + v.dump());
      }
    }
    Require(j.at("n_patches").get<std::size_t>() == a.patch_count(), ErrorCode::kCorruptFile,
            "n_patches disagrees with verdict count");
    Require(j.at("compressed_length").get<std::size_t>() == a.compressed_length(),
            ErrorCode::kCorruptFile, "compressed_length disagrees with verdicts");
    a.Validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("assignment JSON: ") + e.what());
  }
}

}  // namespace vwt

#endif  // VWT_TOKENIZER_HPP_
