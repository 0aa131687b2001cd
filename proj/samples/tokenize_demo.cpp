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

// End-to-end walk through the library on synthetic images: build a
// vocabulary, tokenize with both families, compress the embedded sequences,
// and run the toy encoder on a padded batch.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <vector>

#include "vwt/vwt.hpp"

namespace {

// Smooth gradients with a few flat tiles, so both families have something to
// drop or merge.
vwt::Image SyntheticImage(std::uint64_t seed) {
  vwt::Rng rng(seed);
  vwt::Image img(224, 224, 3);
  const double fx = rng.Uniform(), fy = rng.Uniform();
  for (std::size_t y = 0; y < 224; ++y) {
    for (std::size_t x = 0; x < 224; ++x) {
      const bool flat = ((y / 16) + (x / 16)) % 5 == 0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = flat ? 0.25 * (c + 1)
                              : 0.5 + 0.5 * std::sin(fx * x / 10.0 + fy * y / 7.0 + c);
        img.at(y, x, c) = static_cast<float>(std::clamp(v + 0.02 * rng.Normal(), 0.0, 1.0));
      }
    }
  }
  return img;
}

}  // namespace

int main() {
  std::vector<vwt::PatchMatrix> corpus;
  for (std::uint64_t i = 0; i < 8; ++i) corpus.push_back(vwt::Patchify(SyntheticImage(i), 16));

  vwt::KMeansConfig kmeans;
  kmeans.vocab_size = 32;
  kmeans.mode = vwt::KMeansMode::kMiniBatch;
  kmeans.batch_size = 256;
  const vwt::Vocabulary vocab = vwt::BuildVocab(corpus, kmeans, "synthetic").vocab;
  std::cout << "vocabulary: " << vocab.size() << " words of " << vocab.patch_dim() << " values\n";

  vwt::EncoderConfig enc_cfg;
  enc_cfg.patch_dim = 768;
  const vwt::EncoderParams encoder = vwt::InitEncoder(enc_cfg);

  const vwt::PatchMatrix probe = vwt::Patchify(SyntheticImage(100), 16);
  const auto intra = vwt::TokenizeIntra(probe, {0.5});
  const auto inter = vwt::TokenizeInter(probe, vocab, {0.1});
  std::cout << "intra (ratio 0.5): " << intra.compressed_length() << " tokens\n"
            << "inter (t = 0.1):   " << inter.compressed_length() << " tokens, "
            << inter.distinct_word_count() << " distinct words\n";

  const vwt::TokenSequence full = vwt::Embed(probe, encoder);
  std::vector<vwt::TokenSequence> batch = {full, vwt::Compress(full, intra),
                                           vwt::Compress(full, inter)};
  const vwt::PaddedBatch padded = vwt::Collate(batch);
  const vwt::ForwardResult result = vwt::Forward(padded, encoder);

  const vwt::FlopsProxy flops;
  std::cout << std::fixed << std::setprecision(3);
  for (std::size_t b = 0; b < padded.batch; ++b) {
    std::cout << "sample " << b << ": " << padded.lengths[b] << " tokens, pooled[0] = "
              << result.pooled(b, 0) << ", analytic FLOPs x"
              << static_cast<double>(flops(padded.lengths[0])) /
                     static_cast<double>(flops(padded.lengths[b]))
              << "\n";
  }
  return 0;
}
