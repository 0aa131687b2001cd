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

// Visual-word vocabularies: k-means centroids over patch rows.
//
// On-disk layout ("VWTV", little-endian):
//
//   "VWTV" | u32 version=1 | u8 space | u32 patch_size | u32 patch_dim |
//   u32 vocab_size | vocab_size*patch_dim f32 | u32 n | n bytes metadata
//
// The metadata string is compact JSON with the corpus name, seed, and
// iteration count.

#ifndef VWT_VOCAB_HPP_
#define VWT_VOCAB_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vwt/detail/binary_io.hpp"
#include "vwt/error.hpp"
#include "vwt/image.hpp"
#include "vwt/matrix.hpp"
#include "vwt/random.hpp"

namespace vwt {

inline constexpr std::uint32_t kVocabFormatVersion = 1;

enum class FeatureSpace : std::uint8_t { kPixel = 0, kEmbedding = 1 };

inline std::string_view ToString(FeatureSpace space) {
  return space == FeatureSpace::kPixel ? "pixel" : "embedding";
}

struct VocabMetadata {
  std::string corpus;
  std::uint64_t seed = 0;
  std::uint32_t iterations = 0;
  // Value range the centroids were built on.
  std::string pixel_range = "[0,1]";

  friend bool operator==(const VocabMetadata&, const VocabMetadata&) = default;
};

struct Vocabulary {
  Matrix centroids;  // vocab_size x patch_dim
  std::size_t patch_size = 0;
  FeatureSpace space = FeatureSpace::kPixel;
  VocabMetadata metadata;

  std::size_t size() const { return centroids.rows(); }
  std::size_t patch_dim() const { return centroids.cols(); }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

enum class KMeansMode { kLloyd, kMiniBatch };

struct KMeansConfig {
  std::size_t vocab_size = 100;
  std::size_t batch_size = 1024;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  KMeansMode mode = KMeansMode::kLloyd;
  double tol = 1e-4;

  void Validate() const {
    Require(vocab_size >= 1, ErrorCode::kInvalidArgument, "vocab_size must be >= 1");
    Require(max_iters >= 1, ErrorCode::kInvalidArgument, "max_iters must be >= 1");
    Require(tol >= 0.0, ErrorCode::kInvalidArgument, "tol must be >= 0");
    Require(mode == KMeansMode::kLloyd || batch_size >= vocab_size, ErrorCode::kInvalidArgument,
            "minibatch mode needs batch_size (" + std::to_string(batch_size) +
                ") >= vocab_size (" + std::to_string(vocab_size) + ")");
  }
};

// Outcome of a clustering run. `objective` holds the total within-cluster
// squared distance after each Lloyd assignment step (empty in minibatch
// mode); `shift` holds the relative centroid shift of every iteration.
struct KMeansReport {
  Vocabulary vocab;
  std::vector<double> objective;
  std::vector<double> shift;
  std::size_t iterations = 0;
  bool converged = false;
};

// A rewindable stream of patch matrices.
template <typename S>
concept PatchSource = requires(S s) {
  { s.Next() } -> std::same_as<std::optional<PatchMatrix>>;
  s.Rewind();
};

class SpanPatchSource {
 public:
  explicit SpanPatchSource(std::span<const PatchMatrix> items) : items_(items) {}
  std::optional<PatchMatrix> Next() {
    if (pos_ == items_.size()) return std::nullopt;
    return items_[pos_++];
  }
  void Rewind() { pos_ = 0; }

 private:
  std::span<const PatchMatrix> items_;
  std::size_t pos_ = 0;
};

namespace detail {

inline std::uint64_t HashRow(std::span<const float> row) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  const auto* bytes = reinterpret_cast<const unsigned char*>(row.data());
  for (std::size_t i = 0; i < row.size_bytes(); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline double SquaredDistance(std::span<const float> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return s;
}

inline double SquaredDistance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

struct Nearest {
  std::uint32_t index = 0;
  double distance = 0.0;
};

inline Nearest NearestCentroid(std::span<const float> x, const BasicMatrix<double>& centroids) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < centroids.rows(); ++k) {
    const double d = SquaredDistance(x, centroids.row(k));
    if (d < best.distance) best = {static_cast<std::uint32_t>(k), d};
  }
  return best;
}

// k-means++ seeding: first center uniform, the rest proportional to squared
// distance from the nearest chosen center.
inline BasicMatrix<double> KMeansPlusPlus(const Matrix& block, std::size_t k, Rng& rng) {
  const std::size_t n = block.rows();
  BasicMatrix<double> centers(k, block.cols());
  auto set_center = [&](std::size_t c, std::size_t row) {
    auto src = block.row(row);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
  };
  set_center(0, rng.Below(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = SquaredDistance(block.row(i), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.Uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave `pick` on a zero-weight row; walk back to the last
      // row that still carries weight.
      while (d2[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = rng.Below(n);
    }
    set_center(c, pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(block.row(i), centers.row(c)));
    }
  }
  return centers;
}

inline double RelativeShift(const BasicMatrix<double>& before, const BasicMatrix<double>& after) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < before.data().size(); ++i) {
    const double d = after.data()[i] - before.data()[i];
    num += d * d;
    den += before.data()[i] * before.data()[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

inline Matrix ToFloat(const BasicMatrix<double>& m) {
  Matrix out(m.rows(), m.cols());
  std::transform(m.data().begin(), m.data().end(), out.data().begin(),
                 [](double v) { return static_cast<float>(v); });
  return out;
}

// Indices of the `count` rows farthest from their nearest centroid,
// descending by distance, ties toward the lower row.
inline std::vector<std::size_t> FarthestRows(std::span<const double> distances,
                                             std::size_t count) {
  std::vector<std::size_t> order(distances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] > distances[b]; });
  order.resize(std::min(count, order.size()));
  return order;
}

struct CorpusSummary {
  std::size_t total = 0;
  std::size_t distinct = 0;
  std::size_t dim = 0;
  std::size_t patch_size = 0;
};

template <PatchSource Source>
CorpusSummary Summarize(Source& source) {
  CorpusSummary s;
  std::unordered_set<std::uint64_t> seen;
  source.Rewind();
  bool first = true;
  while (auto pm = source.Next()) {
    if (pm->patch_count() == 0) continue;
    if (first) {
      s.dim = pm->patch_dim();
      s.patch_size = pm->patch_size;
      first = false;
    }
    Require(pm->patch_dim() == s.dim, ErrorCode::kDimensionMismatch,
            "corpus patch_dim mismatch: " + std::to_string(pm->patch_dim()) + " vs " +
                std::to_string(s.dim));
    for (std::size_t i = 0; i < pm->patch_count(); ++i) seen.insert(HashRow(pm->patch(i)));
    s.total += pm->patch_count();
  }
  s.distinct = seen.size();
  source.Rewind();
  return s;
}

inline void CheckCorpus(const CorpusSummary& s, std::size_t k) {
  Require(s.total >= k, ErrorCode::kInsufficientData,
          "corpus has " + std::to_string(s.total) + " patches but vocab_size is " +
              std::to_string(k));
  Require(s.distinct >= k, ErrorCode::kInsufficientData,
          "corpus has only " + std::to_string(s.distinct) + " distinct patches for vocab_size " +
              std::to_string(k) + " (effective cluster count " + std::to_string(s.distinct) + ")");
}

template <PatchSource Source>
KMeansReport Lloyd(Source& source, const KMeansConfig& cfg, const CorpusSummary& summary) {
  Matrix data;
  while (auto pm = source.Next()) {
    for (std::size_t i = 0; i < pm->patch_count(); ++i) data.AppendRow(pm->patch(i));
  }
  const std::size_t n = data.rows();
  const std::size_t k = cfg.vocab_size;
  Rng rng(cfg.seed);
  BasicMatrix<double> centers = KMeansPlusPlus(data, k, rng);

  KMeansReport report;
  std::vector<std::uint32_t> assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Nearest nn = NearestCentroid(data.row(i), centers);
      changed |= nn.index != assign[i];
      assign[i] = nn.index;
      dist[i] = nn.distance;
      objective += nn.distance;
    }
    report.objective.push_back(objective);
    report.iterations = iter + 1;
    if (!changed) {
      report.shift.push_back(0.0);
      report.converged = true;
      break;
    }

    BasicMatrix<double> next(k, data.cols());
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = next.row(assign[i]);
      auto src = data.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      ++counts[assign[i]];
    }
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        empty.push_back(c);
        continue;
      }
      for (double& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    if (!empty.empty()) {
      const auto far = FarthestRows(dist, empty.size());
      for (std::size_t e = 0; e < empty.size() && e < far.size(); ++e) {
        auto src = data.row(far[e]);
        std::copy(src.begin(), src.end(), next.row(empty[e]).begin());
      }
    }
    const double shift = RelativeShift(centers, next);
    report.shift.push_back(shift);
    centers = std::move(next);
    if (shift < cfg.tol) {
      report.converged = true;
      break;
    }
  }
  report.vocab.centroids = ToFloat(centers);
  report.vocab.patch_size = summary.patch_size;
  return report;
}

// Sequential mini-batches in stream order with per-center 1/count learning
// rates; every update is a convex step toward an observed row. One
// iteration is one pass over the stream.
template <PatchSource Source>
KMeansReport MiniBatch(Source& source, const KMeansConfig& cfg, const CorpusSummary& summary) {
  const std::size_t k = cfg.vocab_size;

  // Seed from a reservoir sample of 3 * batch_size rows drawn over the whole
  // stream, topped up with further distinct rows if it holds fewer than k.
  Rng rng(cfg.seed);
  const std::size_t reservoir_size = std::min(summary.total, 3 * cfg.batch_size);
  Matrix block(reservoir_size, summary.dim);
  {
    std::size_t seen_rows = 0;
    source.Rewind();
    while (auto pm = source.Next()) {
      for (std::size_t i = 0; i < pm->patch_count(); ++i, ++seen_rows) {
        std::size_t slot = seen_rows;
        if (seen_rows >= reservoir_size) {
          slot = rng.Below(seen_rows + 1);
          if (slot >= reservoir_size) continue;
        }
        std::copy(pm->patch(i).begin(), pm->patch(i).end(), block.row(slot).begin());
      }
    }
    std::unordered_set<std::uint64_t> distinct;
    for (std::size_t i = 0; i < block.rows(); ++i) distinct.insert(HashRow(block.row(i)));
    source.Rewind();
    while (distinct.size() < k) {
      auto pm = source.Next();
      if (!pm) break;
      for (std::size_t i = 0; i < pm->patch_count() && distinct.size() < k; ++i) {
        if (distinct.insert(HashRow(pm->patch(i))).second) block.AppendRow(pm->patch(i));
      }
    }
  }
  BasicMatrix<double> centers = KMeansPlusPlus(block, k, rng);
  std::vector<std::uint64_t> counts(k, 0);

  KMeansReport report;
  Matrix batch;
  std::vector<std::uint32_t> assign;
  std::vector<double> dist;
  std::vector<std::uint64_t> epoch_hits(k, 0);
  // Up to k rows with the largest distance to their nearest center seen in
  // the current pass, farthest first, earlier rows first on ties.
  std::vector<std::pair<double, std::vector<float>>> far;
  auto offer_far = [&](double d, std::span<const float> row) {
    if (far.size() == k && !(d > far.back().first)) return;
    auto pos = std::find_if(far.begin(), far.end(), [&](const auto& f) { return d > f.first; });
    far.insert(pos, {d, std::vector<float>(row.begin(), row.end())});
    if (far.size() > k) far.pop_back();
  };
  auto flush = [&] {
    if (batch.rows() == 0) return;
    assign.resize(batch.rows());
    dist.resize(batch.rows());
    for (std::size_t i = 0; i < batch.rows(); ++i) {
      const Nearest nn = NearestCentroid(batch.row(i), centers);
      assign[i] = nn.index;
      dist[i] = nn.distance;
      offer_far(nn.distance, batch.row(i));
    }
    for (std::size_t i = 0; i < batch.rows(); ++i) {
      const std::uint32_t c = assign[i];
      ++counts[c];
      ++epoch_hits[c];
      const double eta = 1.0 / static_cast<double>(counts[c]);
      auto dst = centers.row(c);
      auto src = batch.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += eta * (src[j] - dst[j]);
    }
    batch = Matrix();
  };

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    const BasicMatrix<double> before = centers;
    std::fill(epoch_hits.begin(), epoch_hits.end(), 0);
    far.clear();
    source.Rewind();
    while (auto pm = source.Next()) {
      for (std::size_t i = 0; i < pm->patch_count(); ++i) {
        batch.AppendRow(pm->patch(i));
        if (batch.rows() == cfg.batch_size) flush();
      }
    }
    flush();
    // A center no row chose during the whole pass is empty: move it onto the
    // farthest observed row.
    std::size_t next_far = 0;
    for (std::size_t c = 0; c < k && next_far < far.size(); ++c) {
      if (epoch_hits[c] != 0) continue;
      const auto& row = far[next_far++].second;
      std::copy(row.begin(), row.end(), centers.row(c).begin());
      counts[c] = 1;
    }
    const double shift = RelativeShift(before, centers);
    report.shift.push_back(shift);
    report.iterations = iter + 1;
    if (shift < cfg.tol) {
      report.converged = true;
      break;
    }
  }
  report.vocab.centroids = ToFloat(centers);
  report.vocab.patch_size = summary.patch_size;
  return report;
}

}  // namespace detail

// Clusters every patch row produced by `source` into cfg.vocab_size visual
// words. Deterministic given (corpus order, cfg).
template <PatchSource Source>
KMeansReport BuildVocab(Source& source, const KMeansConfig& cfg, std::string corpus_name = {}) {
  cfg.Validate();
  const detail::CorpusSummary summary = detail::Summarize(source);
  detail::CheckCorpus(summary, cfg.vocab_size);
  KMeansReport report = cfg.mode == KMeansMode::kLloyd ? detail::Lloyd(source, cfg, summary)
                                                        : detail::MiniBatch(source, cfg, summary);
  report.vocab.space = FeatureSpace::kPixel;
  report.vocab.metadata.corpus = std::move(corpus_name);
  report.vocab.metadata.seed = cfg.seed;
  report.vocab.metadata.iterations = static_cast<std::uint32_t>(report.iterations);
  return report;
}

inline KMeansReport BuildVocab(std::span<const PatchMatrix> corpus, const KMeansConfig& cfg,
                               std::string corpus_name = {}) {
  SpanPatchSource source(corpus);
  return BuildVocab(source, cfg, std::move(corpus_name));
}

// Nearest centroid by squared Euclidean distance; ties go to the lower index.
inline std::vector<std::uint32_t> AssignNearest(const Matrix& rows, const Vocabulary& vocab) {
  Require(rows.cols() == vocab.patch_dim(), ErrorCode::kDimensionMismatch,
          "patch_dim " + std::to_string(rows.cols()) + " does not match vocabulary patch_dim " +
              std::to_string(vocab.patch_dim()));
  Require(vocab.size() > 0, ErrorCode::kInvalidArgument, "empty vocabulary");
  std::vector<std::uint32_t> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < vocab.size(); ++k) {
      const double d = detail::SquaredDistance(rows.row(i), vocab.centroids.row(k));
      if (d < best) {
        best = d;
        out[i] = static_cast<std::uint32_t>(k);
      }
    }
  }
  return out;
}

inline std::vector<std::uint32_t> AssignNearest(const PatchMatrix& patches,
                                                const Vocabulary& vocab) {
  return AssignNearest(patches.values, vocab);
}

namespace detail {

inline std::string EncodeMetadata(const VocabMetadata& m) {
  nlohmann::json j = {{"corpus", m.corpus},
                      {"seed", m.seed},
                      {"iters", m.iterations},
                      {"pixel_range", m.pixel_range}};
  return j.dump();
}

inline VocabMetadata DecodeMetadata(const std::string& s) {
  try {
    const auto j = nlohmann::json::parse(s);
    VocabMetadata m;
    m.corpus = j.at("corpus").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.iterations = j.at("iters").get<std::uint32_t>();
    m.pixel_range = j.value("pixel_range", std::string("[0,1]"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("vocabulary metadata: ") + e.what());
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> EncodeVocab(const Vocabulary& vocab) {
  detail::ByteWriter w;
  w.Magic("VWTV");
  w.U32(kVocabFormatVersion);
  w.U8(static_cast<std::uint8_t>(vocab.space));
  w.U32(static_cast<std::uint32_t>(vocab.patch_size));
  w.U32(static_cast<std::uint32_t>(vocab.patch_dim()));
  w.U32(static_cast<std::uint32_t>(vocab.size()));
  w.F32s(vocab.centroids.data());
  w.String(detail::EncodeMetadata(vocab.metadata));
  return w.bytes();
}

inline Vocabulary DecodeVocab(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  Require(r.MagicIs("VWTV"), ErrorCode::kBadMagic, "bad magic: not a VWTV vocabulary");
  const std::uint32_t version = r.U32();
  Require(version == kVocabFormatVersion, ErrorCode::kVersionMismatch,
          "unsupported vocabulary version " + std::to_string(version));
  const std::uint8_t space = r.U8();
  Require(space <= 1, ErrorCode::kCorruptFile, "unknown feature space " + std::to_string(space));
  Vocabulary v;
  v.space = static_cast<FeatureSpace>(space);
  v.patch_size = r.U32();
  const std::size_t dim = r.U32();
  const std::size_t count = r.U32();
  Require(static_cast<std::uint64_t>(dim) * count * 4 <= r.remaining(), ErrorCode::kTruncated,
          "truncated payload: centroid block exceeds file size");
  v.centroids = Matrix(count, dim);
  r.F32s(v.centroids.data());
  for (float x : v.centroids.data()) {
    Require(std::isfinite(x), ErrorCode::kCorruptFile, "non-finite centroid value");
  }
  v.metadata = detail::DecodeMetadata(r.String());
  Require(r.remaining() == 0, ErrorCode::kCorruptFile, "trailing bytes after vocabulary");
  return v;
}

inline void SaveVocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  detail::WriteFileBytes(path, EncodeVocab(vocab));
}

inline Vocabulary LoadVocab(const std::filesystem::path& path) {
  return DecodeVocab(detail::ReadFileBytes(path));
}

}  // namespace vwt

#endif  // VWT_VOCAB_HPP_
