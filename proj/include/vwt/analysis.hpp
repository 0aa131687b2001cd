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

// Token-length statistics, vocabulary utilization, and an analytic FLOPs
// model standing in for measured power and runtime. All aggregators are
// mergeable, so partial results from parallel workers combine exactly.

#ifndef VWT_ANALYSIS_HPP_
#define VWT_ANALYSIS_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "vwt/error.hpp"
#include "vwt/tokenizer.hpp"

namespace vwt {

struct LengthRecord {
  std::string sample_id;
  TokenizerMode mode = TokenizerMode::kIntra;
  std::size_t length = 0;       // including [CLS]
  std::size_t full_length = 0;  // N + 1

  double ratio() const {
    return static_cast<double>(length) / static_cast<double>(full_length);
  }
};

inline LengthRecord MakeLengthRecord(std::string sample_id, const GroupAssignment& a) {
  return {std::move(sample_id), a.mode, a.compressed_length(), a.patch_count() + 1};
}

class LengthStats {
 public:
  void Add(LengthRecord record) {
    Require(record.length >= 1 && record.length <= record.full_length, ErrorCode::kInvalidArgument,
            "length " + std::to_string(record.length) + " outside [1, " +
                std::to_string(record.full_length) + "] for sample " + record.sample_id);
    sum_ += record.length;
    ratio_sum_ += record.ratio();
    min_ = std::min(min_, record.length);
    max_ = std::max(max_, record.length);
    records_.push_back(std::move(record));
  }

  void Merge(const LengthStats& other) {
    for (const auto& r : other.records_) Add(r);
  }

  std::size_t count() const { return records_.size(); }
  std::size_t min() const { return min_; }
  std::size_t max() const { return max_; }
  std::uint64_t sum() const { return sum_; }
  double mean() const { return static_cast<double>(sum_) / static_cast<double>(count()); }
  // Mean of length / (N + 1).
  double mean_ratio() const { return ratio_sum_ / static_cast<double>(count()); }
  const std::vector<LengthRecord>& records() const { return records_; }

 private:
  std::vector<LengthRecord> records_;
  std::uint64_t sum_ = 0;
  double ratio_sum_ = 0.0;
  std::size_t min_ = std::numeric_limits<std::size_t>::max();
  std::size_t max_ = 0;
};

template <typename Range>
LengthStats ComputeLengthStats(const Range& records) {
  LengthStats stats;
  for (const LengthRecord& r : records) stats.Add(r);
  Require(stats.count() > 0, ErrorCode::kInsufficientData, "no assignments to aggregate");
  return stats;
}

inline nlohmann::json ToJson(const LengthStats& s) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& r : s.records()) {
    samples.push_back({{"sample_id", r.sample_id},
                       {"mode", ToString(r.mode)},
                       {"length", r.length},
                       {"ratio", r.ratio()}});
  }
  return {{"count", s.count()},     {"mean", s.mean()},
          {"min", s.min()},         {"max", s.max()},
          {"mean_ratio", s.mean_ratio()}, {"samples", std::move(samples)}};
}

// Columns: sample_id,mode,length,ratio
inline std::string ToCsv(const LengthStats& s) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_id,mode,length,ratio\n";
  for (const auto& r : s.records()) {
    out << r.sample_id << ',' << ToString(r.mode) << ',' << r.length << ',' << r.ratio() << '\n';
  }
  return out.str();
}

class VocabUsage {
 public:
  explicit VocabUsage(std::size_t vocab_size) : counts_(vocab_size, 0) {}

  void Add(const GroupAssignment& a) {
    Require(IsInterFamily(a.mode), ErrorCode::kModeMismatch,
            "vocabulary usage needs an inter-family assignment, got " +
                std::string(ToString(a.mode)));
    for (Verdict v : a.verdicts) {
      if (!v.matched()) continue;
      Require(v.word() < counts_.size(), ErrorCode::kDimensionMismatch,
              "word " + std::to_string(v.word()) + " outside vocabulary of " +
                  std::to_string(counts_.size()));
      ++counts_[v.word()];
      ++total_;
    }
  }

  void Merge(const VocabUsage& other) {
    Require(other.counts_.size() == counts_.size(), ErrorCode::kDimensionMismatch,
            "cannot merge usage over different vocabulary sizes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
  }

  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }

  // All zeros when nothing matched.
  std::vector<double> probabilities() const {
    std::vector<double> p(counts_.size(), 0.0);
    if (total_ == 0) return p;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    }
    return p;
  }

  std::size_t unused() const {
    return static_cast<std::size_t>(std::count(counts_.begin(), counts_.end(), 0u));
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline nlohmann::json ToJson(const VocabUsage& u) {
  return {{"vocab_size", u.counts().size()},
          {"total_matches", u.total()},
          {"unused", u.unused()},
          {"counts", u.counts()},
          {"probabilities", u.probabilities()}};
}

// sample_id,subgroup_id per line; a header line starting with "sample_id"
// is skipped.
inline std::map<std::string, std::string> ParseLabelsCsv(std::istream& in) {
  std::map<std::string, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("sample_id", 0) == 0) continue;
    const auto comma = line.find(',');
    Require(comma != std::string::npos && comma > 0 && comma + 1 < line.size() &&
                line.find(',', comma + 1) == std::string::npos,
            ErrorCode::kCorruptFile,
            "malformed label line " + std::to_string(line_no) + ": '" + line + "'");
    labels[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return labels;
}

inline std::map<std::string, std::string> LoadLabelsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open label file " + path.string());
  return ParseLabelsCsv(in);
}

inline std::map<std::string, LengthStats> SubgroupBreakdown(
    const LengthStats& stats, const std::map<std::string, std::string>& labels) {
  std::map<std::string, LengthStats> groups;
  for (const auto& r : stats.records()) {
    auto it = labels.find(r.sample_id);
    Require(it != labels.end(), ErrorCode::kMissingLabel,
            "sample '" + r.sample_id + "' has no subgroup label");
    groups[it->second].Add(r);
  }
  return groups;
}

// Analytic per-sample cost of `depth` transformer layers on L tokens of width
// D: depth * (4 L D^2 + 2 L^2 D + 8 L D^2). The terms are the Q/K/V/O
// projections, the attention products, and a 4x MLP.
struct FlopsProxy {
  std::uint64_t embed_dim = 768;
  std::uint64_t depth = 12;

  std::uint64_t operator()(std::uint64_t length) const {
    const std::uint64_t d = embed_dim, l = length;
    return depth * (4 * l * d * d + 2 * l * l * d + 8 * l * d * d);
  }
};

struct EfficiencyRow {
  std::uint64_t length = 0;
  std::uint64_t batch_size = 0;
  std::uint64_t flops_per_sample = 0;
  std::uint64_t batch_flops = 0;
  // FLOPs of the longest length in the sweep divided by this length's FLOPs.
  double reduction = 1.0;
};

inline std::vector<EfficiencyRow> EfficiencySweep(const std::vector<std::uint64_t>& lengths,
                                                  const std::vector<std::uint64_t>& batch_sizes,
                                                  const FlopsProxy& proxy) {
  Require(proxy.embed_dim > 0 && proxy.depth > 0, ErrorCode::kInvalidArgument,
          "embed_dim and depth must be positive");
  Require(!lengths.empty() && !batch_sizes.empty(), ErrorCode::kInvalidArgument,
          "sweep needs at least one length and one batch size");
  for (auto l : lengths) Require(l > 0, ErrorCode::kInvalidArgument, "lengths must be positive");
  for (auto b : batch_sizes) {
    Require(b > 0, ErrorCode::kInvalidArgument, "batch sizes must be positive");
  }
  const std::uint64_t reference = proxy(*std::max_element(lengths.begin(), lengths.end()));
  std::vector<EfficiencyRow> rows;
  for (auto l : lengths) {
    const std::uint64_t per = proxy(l);
    for (auto b : batch_sizes) {
      rows.push_back({l, b, per, per * b, static_cast<double>(reference) / static_cast<double>(per)});
    }
  }
  return rows;
}

inline nlohmann::json ToJson(const std::vector<EfficiencyRow>& rows, const FlopsProxy& proxy) {
  nlohmann::json out = {{"metric", "analytic_flops"},
                        {"embed_dim", proxy.embed_dim},
                        {"depth", proxy.depth},
                        {"rows", nlohmann::json::array()}};
  for (const auto& r : rows) {
    out["rows"].push_back({{"length", r.length},
                           {"batch_size", r.batch_size},
                           {"flops_per_sample", r.flops_per_sample},
                           {"batch_flops", r.batch_flops},
                           {"reduction", r.reduction}});
  }
  return out;
}

inline std::string ToCsv(const std::vector<EfficiencyRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "length,batch_size,flops_per_sample,batch_flops,reduction\n";
  for (const auto& r : rows) {
    out << r.length << ',' << r.batch_size << ',' << r.flops_per_sample << ',' << r.batch_flops
        << ',' << r.reduction << '\n';
  }
  return out.str();
}

}  // namespace vwt

#endif  // VWT_ANALYSIS_HPP_
