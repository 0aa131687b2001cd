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

// vwt: build vocabularies, tokenize images, aggregate token-length statistics
// and tabulate the analytic cost model.
//
// Every subcommand writes a manifest JSON next to its outputs. `vwt rerun
// <manifest>` replays it with the recorded flag values.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vwt/vwt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwt::cli {
namespace {

constexpr const char* kManifestName = "manifest.json";

// ---------------------------------------------------------------------------
// Small utilities

std::size_t ThreadBudget() {
  const char* env = std::getenv("VWT_THREADS");
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    Require(end != env && *end == '\0' && n > 0, ErrorCode::kInvalidArgument,
            std::string("VWT_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to ThreadBudget() threads. If several calls
// throw, the exception of the lowest index wins so failures are reproducible.
template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(n, ThreadBudget());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void WriteText(const fs::path& path, const std::string& text) {
  EnsureParent(path);
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
}

// "224" or "224x192" (height x width).
std::optional<std::pair<std::size_t, std::size_t>> ParseResize(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto x = s.find('x');
  auto parse = [&](const std::string& part) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    Require(used == part.size() && v > 0, ErrorCode::kInvalidArgument,
            "--resize expects N or HxW, got '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (x == std::string::npos) {
    const auto n = parse(s);
    return std::make_pair(n, n);
  }
  return std::make_pair(parse(s.substr(0, x)), parse(s.substr(x + 1)));
}

bool IsImagePath(const fs::path& p) {
  static const std::set<std::string> kExtensions = {".png", ".jpg", ".jpeg", ".ppm", ".pgm",
                                                    ".pnm", ".vwti", ".raw"};
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return kExtensions.contains(ext);
}

std::vector<fs::path> ListImages(const fs::path& dir) {
  Require(fs::is_directory(dir), ErrorCode::kIo, "input directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && IsImagePath(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Require(!files.empty(), ErrorCode::kInsufficientData,
          "no image files (png, jpg, ppm, pgm, vwti) in " + dir.string());
  return files;
}

// Loads every file in parallel. Unreadable files are reported and dropped;
// it is an error when nothing survives.
struct LoadedImage {
  fs::path path;
  std::string id;
  Image image;
};

std::vector<LoadedImage> LoadAll(const std::vector<fs::path>& files,
                                 std::optional<std::pair<std::size_t, std::size_t>> resize) {
  std::vector<std::optional<Image>> images(files.size());
  std::vector<std::string> problems(files.size());
  ParallelFor(files.size(), [&](std::size_t i) {
    try {
      Image img = LoadImage(files[i]);
      if (resize) img = Resize(img, resize->first, resize->second, ResizeMode::kBilinear);
      images[i] = std::move(img);
    } catch (const Error& e) {
      problems[i] = e.what();
    }
  });
  std::vector<LoadedImage> out;
  std::size_t skipped = 0;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!images[i]) {
      std::cerr << "warning: skipping unreadable image: " << problems[i] << "\n";
      ++skipped;
      continue;
    }
    std::string id = files[i].stem().string();
    Require(ids.insert(id).second, ErrorCode::kInvalidArgument,
            "two input files share the sample id '" + id + "'");
    out.push_back({files[i], std::move(id), std::move(*images[i])});
  }
  if (skipped > 0) std::cerr << "warning: skipped " << skipped << " unreadable image(s)\n";
  Require(!out.empty(), ErrorCode::kInsufficientData,
          "all " + std::to_string(files.size()) + " input images were unreadable");
  return out;
}

PatchMatrix PatchifyNamed(const LoadedImage& img, std::size_t patch_size) {
  try {
    return Patchify(img.image, patch_size);
  } catch (const Error& e) {
    throw Error(e.code(), img.path.string() + ": " + e.what() + " (use --resize)");
  }
}

fs::path ManifestFor(const fs::path& file) {
  return file.parent_path() / (file.stem().string() + ".manifest.json");
}

fs::path CsvBeside(const fs::path& json_path) {
  fs::path p = json_path;
  return p.replace_extension(".csv");
}

json Manifest(const std::string& subcommand, json config, json inputs, json outputs,
              std::optional<std::uint64_t> seed) {
  json m = {{"tool", "vwt"},
            {"version", std::string(kVersion)},
            {"subcommand", subcommand},
            {"config", std::move(config)},
            {"inputs", std::move(inputs)},
            {"outputs", std::move(outputs)}};
  m["seed"] = seed ? json(*seed) : json(nullptr);
  return m;
}

json PathList(const std::vector<fs::path>& paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

// Drops unset optional strings so the manifest only records flags in effect.
json Compact(json config) {
  for (auto it = config.begin(); it != config.end();) {
    if (it->is_null() || (it->is_string() && it->get<std::string>().empty())) {
      it = config.erase(it);
    } else {
      ++it;
    }
  }
  return config;
}

// ---------------------------------------------------------------------------
// build-vocab

struct BuildVocabOptions {
  std::string input_dir;
  std::size_t patch_size = 16;
  std::size_t vocab_size = 100;
  std::string mode = "lloyd";
  std::size_t batch_size = 1024;
  std::size_t max_iters = 100;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  std::string out;
  std::string resize;
  std::string space = "pixel";
  std::string encoder;
};

void RunBuildVocab(const BuildVocabOptions& o) {
  KMeansConfig cfg;
  cfg.vocab_size = o.vocab_size;
  cfg.batch_size = o.batch_size;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  Require(o.mode == "lloyd" || o.mode == "minibatch", ErrorCode::kInvalidArgument,
          "--mode must be lloyd or minibatch, got '" + o.mode + "'");
  cfg.mode = o.mode == "lloyd" ? KMeansMode::kLloyd : KMeansMode::kMiniBatch;
  cfg.Validate();
  Require(o.space == "pixel" || o.space == "embedding", ErrorCode::kInvalidArgument,
          "--space must be pixel or embedding, got '" + o.space + "'");
  Require(o.space == "pixel" || !o.encoder.empty(), ErrorCode::kInvalidArgument,
          "--space embedding needs --encoder");
  Require(o.patch_size > 0, ErrorCode::kInvalidArgument, "--patch-size must be positive");

  const auto files = ListImages(o.input_dir);
  const auto images = LoadAll(files, ParseResize(o.resize));
  std::vector<PatchMatrix> corpus;
  corpus.reserve(images.size());
  for (const auto& img : images) corpus.push_back(PatchifyNamed(img, o.patch_size));

  const std::string corpus_name = fs::path(o.input_dir).filename().string();
  KMeansReport report;
  std::vector<fs::path> inputs(files);
  if (o.space == "pixel") {
    report = BuildVocab(std::span<const PatchMatrix>(corpus), cfg, corpus_name);
  } else {
    const EncoderParams enc = LoadEncoder(o.encoder);
    report = BuildVocabEmbedding(std::span<const PatchMatrix>(corpus), enc.projection, cfg,
                                 corpus_name);
    inputs.push_back(o.encoder);
  }
  EnsureParent(o.out);
  SaveVocab(report.vocab, o.out);

  const json config = Compact({{"input-dir", o.input_dir},
                               {"patch-size", o.patch_size},
                               {"vocab-size", o.vocab_size},
                               {"mode", o.mode},
                               {"batch-size", o.batch_size},
                               {"max-iters", o.max_iters},
                               {"tol", o.tol},
                               {"seed", o.seed},
                               {"out", o.out},
                               {"resize", o.resize},
                               {"space", o.space},
                               {"encoder", o.encoder}});
  WriteJson(ManifestFor(o.out),
            Manifest("build-vocab", config, PathList(inputs), json::array({o.out}), o.seed));
  std::cout << "vocabulary: " << report.vocab.size() << " words x " << report.vocab.patch_dim()
            << " dims from " << images.size() << " images\n"
            << "iterations: " << report.iterations
            << (report.converged ? " (converged)" : " (iteration cap)") << "\n";
  if (!report.objective.empty()) {
    std::cout << "objective: " << std::setprecision(10) << report.objective.back() << "\n";
  }
  std::cout << "wrote " << o.out << "\n";
}

// ---------------------------------------------------------------------------
// tokenize

struct TokenizeOptions {
  std::string mode;
  std::string image;
  std::string input_dir;
  std::string vocab;
  std::string encoder;
  double threshold = 0.1;
  double ratio = 0.5;
  std::uint64_t seed = 0;
  std::size_t patch_size = 0;  // 0: from the vocabulary, else 16
  std::size_t vocab_size = 0;  // random-inter only; 0: from --vocab, else 100
  std::string resize;
  std::string out_dir;
  std::string stats_out;
  std::string render_out;
  std::string render_format = "ppm";
  double alpha = 0.5;
};

void RunTokenize(const TokenizeOptions& o) {
  std::string mode_name = o.mode;
  std::replace(mode_name.begin(), mode_name.end(), '-', '_');
  const TokenizerMode mode = ParseTokenizerMode(mode_name);
  Require(o.image.empty() != o.input_dir.empty(), ErrorCode::kInvalidArgument,
          "give exactly one of --image or --input-dir");
  Require(o.render_format == "ppm" || o.render_format == "png", ErrorCode::kInvalidArgument,
          "--render-format must be ppm or png");
  if (IsInterFamily(mode)) {
    InterConfig{o.threshold}.Validate();
  } else {
    IntraConfig{o.ratio}.Validate();
  }

  std::optional<Vocabulary> vocab;
  std::optional<EncoderParams> encoder;
  if (mode == TokenizerMode::kInter || mode == TokenizerMode::kInterEmbed) {
    Require(!o.vocab.empty(), ErrorCode::kInvalidArgument,
            "--mode " + o.mode + " needs a vocabulary (--vocab)");
  }
  if (mode == TokenizerMode::kInterEmbed) {
    Require(!o.encoder.empty(), ErrorCode::kInvalidArgument,
            "--mode inter-embed needs an encoder (--encoder)");
    encoder = LoadEncoder(o.encoder);
  }
  if (!o.vocab.empty()) vocab = LoadVocab(o.vocab);

  std::size_t patch_size = o.patch_size;
  if (vocab && mode != TokenizerMode::kIntra && mode != TokenizerMode::kRandomIntra) {
    Require(patch_size == 0 || patch_size == vocab->patch_size, ErrorCode::kDimensionMismatch,
            "--patch-size " + std::to_string(patch_size) + " differs from the vocabulary's " +
                std::to_string(vocab->patch_size));
    patch_size = vocab->patch_size;
  }
  if (patch_size == 0) patch_size = 16;
  std::size_t random_vocab = o.vocab_size;
  if (random_vocab == 0) random_vocab = vocab ? vocab->size() : 100;

  const std::vector<fs::path> files =
      o.image.empty() ? ListImages(o.input_dir) : std::vector<fs::path>{o.image};
  const auto images = LoadAll(files, ParseResize(o.resize));

  const fs::path out_dir = o.out_dir;
  fs::create_directories(out_dir);
  if (!o.render_out.empty()) fs::create_directories(o.render_out);

  std::vector<GroupAssignment> assignments(images.size());
  ParallelFor(images.size(), [&](std::size_t i) {
    const PatchMatrix pm = PatchifyNamed(images[i], patch_size);
    // Random modes draw from seed + sample index so results do not depend on
    // thread scheduling.
    const std::uint64_t sample_seed = o.seed + i;
    GroupAssignment a;
    switch (mode) {
      case TokenizerMode::kIntra: a = TokenizeIntra(pm, {o.ratio}); break;
      case TokenizerMode::kRandomIntra:
        a = TokenizeRandomIntra(pm.patch_count(), o.ratio, sample_seed);
        break;
      case TokenizerMode::kInter: a = TokenizeInter(pm, *vocab, {o.threshold}); break;
      case TokenizerMode::kRandomInter:
        a = TokenizeRandomInter(pm.patch_count(), random_vocab, o.threshold, sample_seed);
        break;
      case TokenizerMode::kInterEmbed:
        a = TokenizeInterEmbed(pm, encoder->projection, *vocab, {o.threshold});
        break;
    }
    json j = ToJson(a);
    j["sample_id"] = images[i].id;
    WriteJson(out_dir / (images[i].id + ".json"), j);
    if (!o.render_out.empty()) {
      OverlaySpec spec{images[i].image, a, patch_size, o.seed, o.alpha};
      const Image overlay = IsInterFamily(mode) ? RenderMatchOverlay(spec) : RenderDropOverlay(spec);
      SaveImage(overlay, fs::path(o.render_out) / (images[i].id + "." + o.render_format));
    }
    assignments[i] = std::move(a);
  });

  LengthStats stats;
  for (std::size_t i = 0; i < images.size(); ++i) {
    stats.Add(MakeLengthRecord(images[i].id, assignments[i]));
  }
  std::vector<fs::path> outputs;
  for (const auto& img : images) outputs.push_back(out_dir / (img.id + ".json"));
  if (!o.render_out.empty()) {
    for (const auto& img : images) {
      outputs.push_back(fs::path(o.render_out) / (img.id + "." + o.render_format));
    }
  }
  if (!o.stats_out.empty()) {
    json report = {{"lengths", ToJson(stats)}};
    if (IsInterFamily(mode)) {
      VocabUsage usage(mode == TokenizerMode::kRandomInter ? random_vocab : vocab->size());
      for (const auto& a : assignments) usage.Add(a);
      report["vocab_usage"] = ToJson(usage);
    }
    WriteJson(o.stats_out, report);
    WriteText(CsvBeside(o.stats_out), ToCsv(stats));
    outputs.push_back(o.stats_out);
    outputs.push_back(CsvBeside(o.stats_out));
  }

  std::vector<fs::path> inputs;
  for (const auto& img : images) inputs.push_back(img.path);
  if (!o.vocab.empty()) inputs.push_back(o.vocab);
  if (!o.encoder.empty()) inputs.push_back(o.encoder);
  json config = Compact({{"mode", o.mode},
                         {"image", o.image},
                         {"input-dir", o.input_dir},
                         {"vocab", o.vocab},
                         {"encoder", o.encoder},
                         {"seed", o.seed},
                         {"patch-size", patch_size},
                         {"resize", o.resize},
                         {"out-dir", o.out_dir},
                         {"stats-out", o.stats_out},
                         {"render-out", o.render_out}});
  if (IsInterFamily(mode)) {
    config["threshold"] = o.threshold;
  } else {
    config["ratio"] = o.ratio;
  }
  if (mode == TokenizerMode::kRandomInter) config["vocab-size"] = random_vocab;
  if (!o.render_out.empty()) {
    config["render-format"] = o.render_format;
    config["alpha"] = o.alpha;
  }
  WriteJson(out_dir / kManifestName,
            Manifest("tokenize", config, PathList(inputs), PathList(outputs), o.seed));

  std::cout << "samples: " << stats.count() << "\n"
            << "length: mean " << stats.mean() << ", min " << stats.min() << ", max "
            << stats.max() << "\n"
            << "mean ratio: " << stats.mean_ratio() << "\n";
}

// ---------------------------------------------------------------------------
// stats

struct StatsOptions {
  std::string assignments_dir;
  std::string labels;
  std::string out;
  std::size_t vocab_size = 0;  // 0: largest matched word + 1
};

void RunStats(const StatsOptions& o) {
  const fs::path dir = o.assignments_dir;
  Require(fs::is_directory(dir), ErrorCode::kIo, "assignment directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != kManifestName) {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  Require(!files.empty(), ErrorCode::kInsufficientData, "no assignment files in " + dir.string());

  std::vector<LengthRecord> records;
  std::vector<GroupAssignment> inter;
  std::uint32_t max_word = 0;
  bool any_match = false;
  std::size_t foreign = 0;
  for (const auto& f : files) {
    const json j = ReadJson(f);
    // Reports and other JSON may share the directory.
    if (!j.is_object() || !j.contains("verdicts")) {
      ++foreign;
      continue;
    }
    GroupAssignment a;
    try {
      a = AssignmentFromJson(j);
    } catch (const Error& e) {
      throw Error(e.code(), f.string() + ": " + e.what());
    }
    const std::string id =
        j.contains("sample_id") ? j.at("sample_id").get<std::string>() : f.stem().string();
    records.push_back(MakeLengthRecord(id, a));
    if (IsInterFamily(a.mode)) {
      for (Verdict v : a.verdicts) {
        if (v.matched()) {
          any_match = true;
          max_word = std::max(max_word, v.word());
        }
      }
      inter.push_back(std::move(a));
    }
  }
  if (foreign > 0) std::cerr << "note: ignored " << foreign << " non-assignment JSON file(s)\n";
  const LengthStats stats = ComputeLengthStats(records);
  json report = {{"lengths", ToJson(stats)}};
  if (!inter.empty()) {
    const std::size_t v = o.vocab_size > 0 ? o.vocab_size : (any_match ? max_word + 1u : 1u);
    VocabUsage usage(v);
    for (const auto& a : inter) usage.Add(a);
    report["vocab_usage"] = ToJson(usage);
  }
  if (!o.labels.empty()) {
    json groups = json::object();
    for (const auto& [name, s] : SubgroupBreakdown(stats, LoadLabelsCsv(o.labels))) {
      groups[name] = {{"count", s.count()},
                      {"mean", s.mean()},
                      {"min", s.min()},
                      {"max", s.max()},
                      {"mean_ratio", s.mean_ratio()}};
    }
    report["subgroups"] = std::move(groups);
  }

  std::vector<fs::path> inputs(files);
  if (!o.labels.empty()) inputs.push_back(o.labels);
  if (!o.out.empty()) {
    WriteJson(o.out, report);
    WriteText(CsvBeside(o.out), ToCsv(stats));
    const json config = Compact({{"assignments-dir", o.assignments_dir},
                                 {"labels", o.labels},
                                 {"out", o.out},
                                 {"vocab-size", o.vocab_size > 0 ? json(o.vocab_size) : json()}});
    WriteJson(ManifestFor(o.out),
              Manifest("stats", config, PathList(inputs),
                       PathList({fs::path(o.out), CsvBeside(o.out)}), std::nullopt));
  }
  std::cout << "samples: " << stats.count() << "\n"
            << "length: mean " << stats.mean() << ", min " << stats.min() << ", max "
            << stats.max() << "\n";
  if (report.contains("subgroups")) {
    for (const auto& [name, g] : report["subgroups"].items()) {
      std::cout << "subgroup " << name << ": mean " << g["mean"].get<double>() << " over "
                << g["count"] << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  std::vector<std::uint64_t> lengths;
  std::vector<std::uint64_t> batch_sizes;
  std::uint64_t embed_dim = 768;
  std::uint64_t depth = 12;
  std::string out;
};

void RunBench(BenchOptions o) {
  if (o.batch_sizes.empty()) o.batch_sizes = {1};
  const FlopsProxy proxy{o.embed_dim, o.depth};
  const auto rows = EfficiencySweep(o.lengths, o.batch_sizes, proxy);
  std::cout << "analytic FLOPs (D=" << o.embed_dim << ", depth=" << o.depth << ")\n"
            << std::setw(8) << "length" << std::setw(8) << "batch" << std::setw(20)
            << "flops/sample" << std::setw(22) << "batch flops" << std::setw(12) << "reduction"
            << "\n";
  for (const auto& r : rows) {
    std::cout << std::setw(8) << r.length << std::setw(8) << r.batch_size << std::setw(20)
              << r.flops_per_sample << std::setw(22) << r.batch_flops << std::setw(12)
              << std::setprecision(3) << r.reduction << "\n";
  }
  if (!o.out.empty()) {
    WriteJson(o.out, ToJson(rows, proxy));
    WriteText(CsvBeside(o.out), ToCsv(rows));
    const json config = {{"lengths", o.lengths},
                         {"batch-sizes", o.batch_sizes},
                         {"embed-dim", o.embed_dim},
                         {"depth", o.depth},
                         {"out", o.out}};
    WriteJson(ManifestFor(o.out), Manifest("bench", config, json::array(),
                                           PathList({fs::path(o.out), CsvBeside(o.out)}),
                                           std::nullopt));
  }
}

// ---------------------------------------------------------------------------
// init-encoder

struct InitEncoderOptions {
  std::size_t patch_size = 16;
  std::size_t channels = 3;
  std::size_t embed_dim = 64;
  std::size_t depth = 2;
  std::size_t heads = 4;
  std::size_t max_tokens = 197;
  std::size_t mlp_dim = 256;
  std::uint64_t seed = 0;
  std::string out;
};

void RunInitEncoder(const InitEncoderOptions& o) {
  Require(o.channels == 1 || o.channels == 3, ErrorCode::kInvalidArgument,
          "--channels must be 1 or 3");
  EncoderConfig c;
  c.patch_dim = o.patch_size * o.patch_size * o.channels;
  c.embed_dim = o.embed_dim;
  c.depth = o.depth;
  c.heads = o.heads;
  c.max_tokens = o.max_tokens;
  c.mlp_dim = o.mlp_dim;
  c.seed = o.seed;
  EnsureParent(o.out);
  SaveEncoder(InitEncoder(c), o.out);
  const json config = {{"patch-size", o.patch_size}, {"channels", o.channels},
                       {"embed-dim", o.embed_dim},   {"depth", o.depth},
                       {"heads", o.heads},           {"max-tokens", o.max_tokens},
                       {"mlp-dim", o.mlp_dim},       {"seed", o.seed},
                       {"out", o.out}};
  WriteJson(ManifestFor(o.out),
            Manifest("init-encoder", config, json::array(), json::array({o.out}), o.seed));
  std::cout << "encoder: patch_dim " << c.patch_dim << ", D " << c.embed_dim << ", depth "
            << c.depth << "\nwrote " << o.out << "\n";
}

// ---------------------------------------------------------------------------
// Entry point

void PrintError(std::string_view code, std::string_view message) {
  std::cerr << "error: " << json({{"code", code}, {"message", message}}).dump() << "\n";
}

int Run(const std::vector<std::string>& args);

// Rebuilds the command line recorded in a manifest and runs it again.
int Rerun(const std::string& manifest_path) {
  const json m = ReadJson(manifest_path);
  Require(m.value("tool", "") == "vwt" && m.contains("subcommand") && m.contains("config"),
          ErrorCode::kCorruptFile, manifest_path + " is not a vwt manifest");
  const std::string sub = m.at("subcommand").get<std::string>();
  Require(sub != "rerun", ErrorCode::kCorruptFile, "manifest cannot name rerun");
  std::vector<std::string> args = {"vwt", sub};
  for (const auto& [key, value] : m.at("config").items()) {
    args.push_back("--" + key);
    const auto add = [&](const json& v) {
      if (v.is_string()) {
        args.push_back(v.get<std::string>());
      } else if (v.is_number_float()) {
        std::ostringstream s;
        s << std::setprecision(17) << v.get<double>();
        args.push_back(s.str());
      } else {
        args.push_back(v.dump());
      }
    };
    if (value.is_array()) {
      for (const auto& v : value) add(v);
    } else {
      add(value);
    }
  }
  return Run(args);
}

int Run(const std::vector<std::string>& args) {
  CLI::App app{"Visual word tokenizer: vocabularies, tokenization and token-length reports"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML or INI file with flag defaults ([subcommand] sections)");
  app.require_subcommand(1);

  BuildVocabOptions bv;
  auto* build = app.add_subcommand("build-vocab", "Cluster image patches into a visual vocabulary");
  build->add_option("--input-dir", bv.input_dir, "Directory of images")->required();
  build->add_option("--patch-size", bv.patch_size, "Patch side P")->capture_default_str();
  build->add_option("--vocab-size", bv.vocab_size, "Number of visual words V")
      ->capture_default_str();
  build->add_option("--mode", bv.mode, "lloyd or minibatch")->capture_default_str();
  build->add_option("--batch-size", bv.batch_size, "Minibatch size")->capture_default_str();
  build->add_option("--max-iters", bv.max_iters, "Iteration cap")->capture_default_str();
  build->add_option("--tol", bv.tol, "Relative centroid-shift tolerance")->capture_default_str();
  build->add_option("--seed", bv.seed, "Random seed")->capture_default_str();
  build->add_option("--out", bv.out, "Vocabulary file to write")->required();
  build->add_option("--resize", bv.resize, "Resize inputs to N or HxW first (bilinear)");
  build->add_option("--space", bv.space, "pixel or embedding")->capture_default_str();
  build->add_option("--encoder", bv.encoder, "Encoder file for --space embedding");

  TokenizeOptions tk;
  auto* tokenize = app.add_subcommand("tokenize", "Group or drop patches of one or more images");
  tokenize->add_option("--mode", tk.mode, "intra, inter, random-inter, random-intra, inter-embed")
      ->required();
  tokenize->add_option("--image", tk.image, "Single input image");
  tokenize->add_option("--input-dir", tk.input_dir, "Directory of input images");
  tokenize->add_option("--vocab", tk.vocab, "Vocabulary file (inter modes)");
  tokenize->add_option("--encoder", tk.encoder, "Encoder file (inter-embed)");
  tokenize->add_option("--threshold", tk.threshold, "Cosine-distance threshold in [0,2]")
      ->capture_default_str();
  tokenize->add_option("--ratio", tk.ratio, "Drop ratio in [0,1]")->capture_default_str();
  tokenize->add_option("--seed", tk.seed, "Random seed (random modes, palette)")
      ->capture_default_str();
  tokenize->add_option("--patch-size", tk.patch_size, "Patch side P (default: vocabulary's, or 16)");
  tokenize->add_option("--vocab-size", tk.vocab_size, "V for random-inter (default: vocabulary's, or 100)");
  tokenize->add_option("--resize", tk.resize, "Resize inputs to N or HxW first (bilinear)");
  tokenize->add_option("--out-dir", tk.out_dir, "Directory for per-sample assignment JSON")
      ->required();
  tokenize->add_option("--stats-out", tk.stats_out, "Length statistics JSON (CSV written beside it)");
  tokenize->add_option("--render-out", tk.render_out, "Directory for overlay images");
  tokenize->add_option("--render-format", tk.render_format, "ppm or png")->capture_default_str();
  tokenize->add_option("--alpha", tk.alpha, "Overlay blend fraction")->capture_default_str();

  StatsOptions st;
  auto* stats = app.add_subcommand("stats", "Aggregate token lengths and vocabulary usage");
  stats->add_option("--assignments-dir", st.assignments_dir, "Output directory of tokenize")
      ->required();
  stats->add_option("--labels", st.labels, "CSV of sample_id,subgroup_id");
  stats->add_option("--out", st.out, "Report JSON (CSV written beside it)");
  stats->add_option("--vocab-size", st.vocab_size, "Vocabulary size for usage (default: inferred)");

  BenchOptions bn;
  auto* bench = app.add_subcommand("bench", "Tabulate the analytic FLOPs proxy");
  bench->add_option("--lengths", bn.lengths, "Token lengths L")->required()->expected(1, -1);
  bench->add_option("--batch-sizes", bn.batch_sizes, "Batch sizes B (default 1)")->expected(1, -1);
  bench->add_option("--embed-dim", bn.embed_dim, "Width D")->capture_default_str();
  bench->add_option("--depth", bn.depth, "Number of layers")->capture_default_str();
  bench->add_option("--out", bn.out, "Report JSON (CSV written beside it)");

  InitEncoderOptions ie;
  auto* init = app.add_subcommand("init-encoder", "Write seeded weights for the toy encoder");
  init->add_option("--patch-size", ie.patch_size, "Patch side P")->capture_default_str();
  init->add_option("--channels", ie.channels, "1 or 3")->capture_default_str();
  init->add_option("--embed-dim", ie.embed_dim, "Width D")->capture_default_str();
  init->add_option("--depth", ie.depth, "Number of layers")->capture_default_str();
  init->add_option("--heads", ie.heads, "Attention heads")->capture_default_str();
  init->add_option("--max-tokens", ie.max_tokens, "Positional table rows")->capture_default_str();
  init->add_option("--mlp-dim", ie.mlp_dim, "MLP hidden width")->capture_default_str();
  init->add_option("--seed", ie.seed, "Random seed")->capture_default_str();
  init->add_option("--out", ie.out, "Encoder file to write")->required();

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "Replay the command recorded in a manifest");
  rerun->add_option("manifest", manifest, "Manifest JSON")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  if (build->parsed()) RunBuildVocab(bv);
  if (tokenize->parsed()) RunTokenize(tk);
  if (stats->parsed()) RunStats(st);
  if (bench->parsed()) RunBench(bn);
  if (init->parsed()) RunInitEncoder(ie);
  if (rerun->parsed()) return Rerun(manifest);
  return 0;
}

}  // namespace
}  // namespace vwt::cli

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return vwt::cli::Run(args);
  } catch (const vwt::Error& e) {
    vwt::cli::PrintError(vwt::ToString(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    vwt::cli::PrintError("io", e.what());
  } catch (const std::exception& e) {
    vwt::cli::PrintError("internal", e.what());
  }
  return 1;
}
