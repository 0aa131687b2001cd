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

// A small randomly initialized ViT: patch projection, [CLS] and positional
// embeddings, token grouping, and pre-norm transformer blocks with masked
// attention. Weights are seeded, never trained.
//
// Parameter file ("VWTE", little-endian):
//
//   "VWTE" | u32 version=1 | u32 patch_dim | u32 embed_dim | u32 depth |
//   u32 heads | u32 max_tokens | u32 mlp_dim | u64 seed |
//   f32 blocks in this order: projection weights (patch_dim x D), projection
//   bias (D), positions (max_tokens x D), cls (D), then per layer:
//   ln1 gamma, ln1 beta, wq, bq, wk, bk, wv, bv, wo, bo, ln2 gamma,
//   ln2 beta, w1 (D x mlp_dim), b1, w2 (mlp_dim x D), b2 |
//   u32 n | n bytes metadata (JSON)

#ifndef VWT_ENCODER_HPP_
#define VWT_ENCODER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vwt/batcher.hpp"
#include "vwt/detail/binary_io.hpp"
#include "vwt/error.hpp"
#include "vwt/image.hpp"
#include "vwt/matrix.hpp"
#include "vwt/projection.hpp"
#include "vwt/random.hpp"
#include "vwt/token_sequence.hpp"
#include "vwt/tokenizer.hpp"

namespace vwt {

inline constexpr std::uint32_t kEncoderFormatVersion = 1;

struct EncoderConfig {
  std::size_t patch_dim = 768;
  std::size_t embed_dim = 64;
  std::size_t depth = 2;
  std::size_t heads = 4;
  std::size_t max_tokens = 197;
  std::size_t mlp_dim = 256;
  std::uint64_t seed = 0;

  void Validate() const {
    Require(patch_dim > 0 && embed_dim > 0 && max_tokens > 0 && mlp_dim > 0,
            ErrorCode::kInvalidArgument, "encoder dimensions must be positive");
    Require(heads > 0 && embed_dim % heads == 0, ErrorCode::kInvalidArgument,
            "embed_dim " + std::to_string(embed_dim) + " is not divisible by heads " +
                std::to_string(heads));
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct Linear {
  Matrix weight;  // in x out
  std::vector<float> bias;

  friend bool operator==(const Linear&, const Linear&) = default;
};

struct LayerNormParams {
  std::vector<float> gamma;
  std::vector<float> beta;

  friend bool operator==(const LayerNormParams&, const LayerNormParams&) = default;
};

struct LayerParams {
  LayerNormParams ln1;
  Linear query, key, value, out;
  LayerNormParams ln2;
  Linear fc1, fc2;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct EncoderParams {
  EncoderConfig config;
  Projection projection;
  Matrix positions;  // max_tokens x D, row 0 belongs to [CLS]
  std::vector<float> cls;
  std::vector<LayerParams> layers;

  friend bool operator==(const EncoderParams& a, const EncoderParams& b) {
    return a.config == b.config && a.projection.weights == b.projection.weights &&
           a.projection.bias == b.projection.bias && a.positions == b.positions &&
           a.cls == b.cls && a.layers == b.layers;
  }
};

namespace detail {

inline Linear RandomLinear(std::size_t in, std::size_t out, Rng& rng, double scale) {
  Linear l{Matrix(in, out), std::vector<float>(out, 0.0f)};
  for (float& w : l.weight.data()) w = static_cast<float>(scale * rng.Normal());
  return l;
}

inline LayerNormParams UnitLayerNorm(std::size_t d) {
  return {std::vector<float>(d, 1.0f), std::vector<float>(d, 0.0f)};
}

inline Matrix Apply(const Linear& l, const Matrix& x) {
  return Projection{l.weight, l.bias}.Apply(x);
}

inline Matrix LayerNorm(const Matrix& x, const LayerNormParams& p) {
  constexpr double kEps = 1e-5;
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double mean = 0.0;
    for (float v : row) mean += v;
    mean /= static_cast<double>(row.size());
    double var = 0.0;
    for (float v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(row.size());
    const double inv = 1.0 / std::sqrt(var + kEps);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      dst[j] = static_cast<float>((row[j] - mean) * inv * p.gamma[j] + p.beta[j]);
    }
  }
  return out;
}

inline float Gelu(float x) {
  const double v = x;
  const double c = std::sqrt(2.0 / std::numbers::pi);
  return static_cast<float>(0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v))));
}

}  // namespace detail

inline EncoderParams InitEncoder(const EncoderConfig& cfg) {
  cfg.Validate();
  constexpr double kScale = 0.02;
  Rng rng(cfg.seed);
  const std::size_t d = cfg.embed_dim;
  EncoderParams p;
  p.config = cfg;
  Linear proj = detail::RandomLinear(cfg.patch_dim, d, rng, kScale);
  p.projection = Projection{std::move(proj.weight), std::move(proj.bias)};
  p.positions = Matrix(cfg.max_tokens, d);
  for (float& v : p.positions.data()) v = static_cast<float>(kScale * rng.Normal());
  p.cls.resize(d);
  for (float& v : p.cls) v = static_cast<float>(kScale * rng.Normal());
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    LayerParams layer;
    layer.ln1 = detail::UnitLayerNorm(d);
    layer.query = detail::RandomLinear(d, d, rng, kScale);
    layer.key = detail::RandomLinear(d, d, rng, kScale);
    layer.value = detail::RandomLinear(d, d, rng, kScale);
    layer.out = detail::RandomLinear(d, d, rng, kScale);
    layer.ln2 = detail::UnitLayerNorm(d);
    layer.fc1 = detail::RandomLinear(d, cfg.mlp_dim, rng, kScale);
    layer.fc2 = detail::RandomLinear(cfg.mlp_dim, d, rng, kScale);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

// Token 0 = cls + pos[0]; token i = project(patch i-1) + pos[i].
inline TokenSequence Embed(const PatchMatrix& patches, const EncoderParams& params) {
  const std::size_t n = patches.patch_count();
  Require(patches.patch_dim() == params.config.patch_dim, ErrorCode::kDimensionMismatch,
          "patch_dim " + std::to_string(patches.patch_dim()) + " does not match encoder patch_dim " +
              std::to_string(params.config.patch_dim));
  Require(n + 1 <= params.config.max_tokens, ErrorCode::kDimensionMismatch,
          std::to_string(n) + " patches exceed the positional table (" +
              std::to_string(params.config.max_tokens) + " rows)");
  const Matrix projected = params.projection.Apply(patches.values);
  const std::size_t d = params.config.embed_dim;
  TokenSequence seq;
  seq.embeddings = Matrix(n + 1, d);
  seq.members.resize(n + 1);
  for (std::size_t j = 0; j < d; ++j) seq.embeddings(0, j) = params.cls[j] + params.positions(0, j);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      seq.embeddings(i + 1, j) = projected(i, j) + params.positions(i + 1, j);
    }
    seq.members[i + 1] = {static_cast<std::uint32_t>(i)};
  }
  return seq;
}

// Applies a grouping to a full, position-augmented sequence. Dropped patches
// vanish, each matched word collapses to the element-wise mean of its
// members, intact tokens and [CLS] are copied. Output order is [CLS] first,
// then by each token's smallest member index.
inline TokenSequence Compress(const TokenSequence& seq, const GroupAssignment& assignment) {
  const std::size_t n = assignment.patch_count();
  Require(seq.size() == n + 1, ErrorCode::kDimensionMismatch,
          "sequence length " + std::to_string(seq.size()) + " does not match assignment of " +
              std::to_string(n) + " patches plus [CLS]");
  assignment.Validate();

  // Groups keyed by smallest member; members arrive in increasing order.
  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  std::map<std::uint32_t, std::uint32_t> word_leader;
  for (std::uint32_t i = 0; i < n; ++i) {
    const Verdict v = assignment.verdicts[i];
    if (v.dropped()) continue;
    if (v.intact()) {
      groups[i] = {i};
      continue;
    }
    auto [it, inserted] = word_leader.try_emplace(v.word(), i);
    groups[it->second].push_back(i);
  }

  const std::size_t d = seq.dim();
  TokenSequence out;
  out.embeddings = Matrix(groups.size() + 1, d);
  out.members.reserve(groups.size() + 1);
  auto cls = seq.embeddings.row(0);
  std::copy(cls.begin(), cls.end(), out.embeddings.row(0).begin());
  out.members.emplace_back();
  std::vector<double> acc(d);
  std::size_t t = 1;
  for (auto& [leader, members] : groups) {
    auto dst = out.embeddings.row(t++);
    if (members.size() == 1) {
      auto src = seq.embeddings.row(members[0] + 1);
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::uint32_t m : members) {
        auto src = seq.embeddings.row(m + 1);
        for (std::size_t j = 0; j < d; ++j) acc[j] += src[j];
      }
      for (std::size_t j = 0; j < d; ++j) {
        dst[j] = static_cast<float>(acc[j] / static_cast<double>(members.size()));
      }
    }
    out.members.push_back(std::move(members));
  }
  return out;
}

// Multi-head self-attention over the first `rows` of x, with additive key
// bias `key_bias` (0 for valid keys, kMaskedLogit for pads). Returns the
// output projection.
inline Matrix SelfAttention(const Matrix& x, std::span<const double> key_bias,
                            const LayerParams& layer, std::size_t heads) {
  const std::size_t len = x.rows();
  const std::size_t d = x.cols();
  const std::size_t hd = d / heads;
  const Matrix q = detail::Apply(layer.query, x);
  const Matrix k = detail::Apply(layer.key, x);
  const Matrix v = detail::Apply(layer.value, x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  Matrix mixed(len, d);
  std::vector<double> logits(len);
  std::vector<double> acc(hd);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < len; ++i) {
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < len; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < hd; ++c) {
          dot += static_cast<double>(q(i, off + c)) * k(j, off + c);
        }
        logits[j] = dot * scale + key_bias[j];
        max_logit = std::max(max_logit, logits[j]);
      }
      double total = 0.0;
      for (double& l : logits) {
        l = std::exp(l - max_logit);
        total += l;
      }
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t j = 0; j < len; ++j) {
        const double w = logits[j] / total;
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < hd; ++c) acc[c] += w * v(j, off + c);
      }
      for (std::size_t c = 0; c < hd; ++c) mixed(i, off + c) = static_cast<float>(acc[c]);
    }
  }
  return detail::Apply(layer.out, mixed);
}

struct ForwardResult {
  std::vector<Matrix> outputs;  // per sample, true length x D
  Matrix pooled;                // batch x D, the [CLS] output of each sample
};

// Pre-norm blocks: x += attn(ln1(x)); x += mlp(ln2(x)). Pad keys are masked
// additively; pad query rows are zeroed in the result.
inline ForwardResult Forward(const PaddedBatch& batch, const EncoderParams& params) {
  const std::size_t d = params.config.embed_dim;
  Require(batch.dim == d, ErrorCode::kDimensionMismatch,
          "batch dim " + std::to_string(batch.dim) + " does not match encoder dim " +
              std::to_string(d));
  Require(batch.valid.size() == batch.batch * batch.max_len && batch.lengths.size() == batch.batch,
          ErrorCode::kDimensionMismatch, "batch mask dimensions are inconsistent");
  ForwardResult result;
  result.pooled = Matrix(batch.batch, d);
  std::vector<double> key_bias(batch.max_len);
  for (std::size_t b = 0; b < batch.batch; ++b) {
    std::vector<float> rows(batch.embeddings.begin() + b * batch.max_len * d,
                            batch.embeddings.begin() + (b + 1) * batch.max_len * d);
    Matrix x(batch.max_len, d, std::move(rows));
    for (std::size_t t = 0; t < batch.max_len; ++t) key_bias[t] = batch.additive_mask(b, t);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const LayerParams& layer = params.layers[l];
      const Matrix attn =
          SelfAttention(detail::LayerNorm(x, layer.ln1), key_bias, layer, params.config.heads);
      for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += attn.data()[i];
      Matrix hidden = detail::Apply(layer.fc1, detail::LayerNorm(x, layer.ln2));
      for (float& h : hidden.data()) h = detail::Gelu(h);
      const Matrix mlp = detail::Apply(layer.fc2, hidden);
      for (std::size_t i = 0; i < x.data().size(); ++i) x.data()[i] += mlp.data()[i];
      for (std::size_t t = 0; t < batch.lengths[b]; ++t) {
        for (float v : x.row(t)) {
          Require(std::isfinite(v), ErrorCode::kNonFinite,
                  "non-finite activation in sample " + std::to_string(b) + ", layer " +
                      std::to_string(l) + ", token " + std::to_string(t));
        }
      }
    }
    for (std::size_t t = batch.lengths[b]; t < batch.max_len; ++t) {
      std::fill(x.row(t).begin(), x.row(t).end(), 0.0f);
    }
    if (batch.lengths[b] > 0) {
      std::copy(x.row(0).begin(), x.row(0).end(), result.pooled.row(b).begin());
    }
    std::vector<float> valid_rows(x.data().begin(), x.data().begin() + batch.lengths[b] * d);
    result.outputs.emplace_back(batch.lengths[b], d, std::move(valid_rows));
  }
  return result;
}

inline std::vector<std::uint8_t> EncodeEncoder(const EncoderParams& p) {
  const EncoderConfig& c = p.config;
  detail::ByteWriter w;
  w.Magic("VWTE");
  w.U32(kEncoderFormatVersion);
  for (std::size_t v : {c.patch_dim, c.embed_dim, c.depth, c.heads, c.max_tokens, c.mlp_dim}) {
    w.U32(static_cast<std::uint32_t>(v));
  }
  w.U64(c.seed);
  w.F32s(p.projection.weights.data());
  w.F32s(p.projection.bias);
  w.F32s(p.positions.data());
  w.F32s(p.cls);
  for (const LayerParams& l : p.layers) {
    w.F32s(l.ln1.gamma);
    w.F32s(l.ln1.beta);
    for (const Linear* lin : {&l.query, &l.key, &l.value, &l.out}) {
      w.F32s(lin->weight.data());
      w.F32s(lin->bias);
    }
    w.F32s(l.ln2.gamma);
    w.F32s(l.ln2.beta);
    for (const Linear* lin : {&l.fc1, &l.fc2}) {
      w.F32s(lin->weight.data());
      w.F32s(lin->bias);
    }
  }
  w.String(nlohmann::json({{"seed", c.seed}, {"init", "gaussian(0.02)"}}).dump());
  return w.bytes();
}

inline EncoderParams DecodeEncoder(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  Require(r.MagicIs("VWTE"), ErrorCode::kBadMagic, "bad magic: not a VWTE encoder file");
  const std::uint32_t version = r.U32();
  Require(version == kEncoderFormatVersion, ErrorCode::kVersionMismatch,
          "unsupported encoder version " + std::to_string(version));
  EncoderConfig c;
  c.patch_dim = r.U32();
  c.embed_dim = r.U32();
  c.depth = r.U32();
  c.heads = r.U32();
  c.max_tokens = r.U32();
  c.mlp_dim = r.U32();
  c.seed = r.U64();
  c.Validate();
  const std::size_t d = c.embed_dim;
  const std::uint64_t per_layer = 4 * d + 4 * (d * d + d) + 2 * (d * c.mlp_dim) + c.mlp_dim + d;
  const std::uint64_t floats =
      c.patch_dim * d + d + c.max_tokens * d + d + c.depth * per_layer;
  Require(floats * 4 <= r.remaining(), ErrorCode::kTruncated,
          "truncated payload: encoder weights exceed file size");
  auto read_vec = [&](std::size_t n) {
    std::vector<float> v(n);
    r.F32s(v);
    return v;
  };
  auto read_linear = [&](std::size_t in, std::size_t out) {
    Linear l;
    l.weight = Matrix(in, out, read_vec(in * out));
    l.bias = read_vec(out);
    return l;
  };
  EncoderParams p;
  p.config = c;
  Linear proj = read_linear(c.patch_dim, d);
  p.projection = Projection{std::move(proj.weight), std::move(proj.bias)};
  p.positions = Matrix(c.max_tokens, d, read_vec(c.max_tokens * d));
  p.cls = read_vec(d);
  for (std::size_t i = 0; i < c.depth; ++i) {
    LayerParams l;
    l.ln1.gamma = read_vec(d);
    l.ln1.beta = read_vec(d);
    l.query = read_linear(d, d);
    l.key = read_linear(d, d);
    l.value = read_linear(d, d);
    l.out = read_linear(d, d);
    l.ln2.gamma = read_vec(d);
    l.ln2.beta = read_vec(d);
    l.fc1 = read_linear(d, c.mlp_dim);
    l.fc2 = read_linear(c.mlp_dim, d);
    p.layers.push_back(std::move(l));
  }
  r.String();
  Require(r.remaining() == 0, ErrorCode::kCorruptFile, "trailing bytes after encoder");
  return p;
}

inline void SaveEncoder(const EncoderParams& p, const std::filesystem::path& path) {
  detail::WriteFileBytes(path, EncodeEncoder(p));
}

inline EncoderParams LoadEncoder(const std::filesystem::path& path) {
  return DecodeEncoder(detail::ReadFileBytes(path));
}

}  // namespace vwt

#endif  // VWT_ENCODER_HPP_
