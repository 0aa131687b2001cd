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

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "vwt/analysis.hpp"

namespace vwt {
namespace {

using testing::Engine;

GroupAssignment InterWith(std::vector<Verdict> verdicts) {
  GroupAssignment a;
  a.mode = TokenizerMode::kInter;
  a.threshold = 0.1;
  a.verdicts = std::move(verdicts);
  return a;
}

LengthRecord Rec(std::string id, std::size_t length, std::size_t full = 197) {
  return {std::move(id), TokenizerMode::kIntra, length, full};
}

TEST(LengthStatsTest, HalfDropOnViTBase) {
  Engine eng(1);
  LengthStats s;
  for (int i = 0; i < 5; ++i) {
    const auto pm = Patchify(testing::RandomImage(eng, 224, 224, 3), 16);
    s.Add(MakeLengthRecord("img" + std::to_string(i), TokenizeIntra(pm, {0.5})));
  }
  EXPECT_EQ(s.min(), 99u);
  EXPECT_EQ(s.max(), 99u);
  EXPECT_DOUBLE_EQ(s.mean(), 99.0);
  EXPECT_DOUBLE_EQ(s.mean_ratio(), 99.0 / 197.0);
}

TEST(LengthStatsTest, AllIntactAndArithmetic) {
  GroupAssignment a = InterWith(std::vector<Verdict>(196, Verdict::Intact()));
  const std::vector<LengthRecord> one = {MakeLengthRecord("x", a)};
  EXPECT_EQ(ComputeLengthStats(one).max(), 197u);
  const std::vector<LengthRecord> two = {Rec("a", 100, 300), Rec("b", 200, 300)};
  const auto s = ComputeLengthStats(two);
  EXPECT_DOUBLE_EQ(s.mean(), 150.0);
  EXPECT_EQ(s.min(), 100u);
  EXPECT_EQ(s.max(), 200u);
}

TEST(LengthStatsTest, Errors) {
  EXPECT_THROW(ComputeLengthStats(std::vector<LengthRecord>{}), Error);
  LengthStats s;
  EXPECT_THROW(s.Add(Rec("z", 0)), Error);
  EXPECT_THROW(s.Add(Rec("z", 198)), Error);
}

TEST(LengthStatsProperty, MergeOfAnyPartitionEqualsGlobal) {
  Engine eng(2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<LengthRecord> recs;
    for (int i = 0; i < 40; ++i) recs.push_back(Rec(std::to_string(i), 1 + eng() % 197));
    const auto global = ComputeLengthStats(recs);
    EXPECT_GE(global.mean(), static_cast<double>(global.min()));
    EXPECT_LE(global.mean(), static_cast<double>(global.max()));
    LengthStats a, b, c;
    for (const auto& r : recs) {
      switch (eng() % 3) {
        case 0: a.Add(r); break;
        case 1: b.Add(r); break;
        default: c.Add(r); break;
      }
    }
    LengthStats left = a;  // (a + b) + c
    left.Merge(b);
    left.Merge(c);
    LengthStats right = b;  // a + (b + c)
    right.Merge(c);
    LengthStats merged = a;
    merged.Merge(right);
    for (const LengthStats* s : {&left, &merged}) {
      EXPECT_EQ(s->count(), global.count());
      EXPECT_EQ(s->sum(), global.sum());
      EXPECT_EQ(s->min(), global.min());
      EXPECT_EQ(s->max(), global.max());
      EXPECT_NEAR(s->mean_ratio(), global.mean_ratio(), 1e-12);
    }
  }
}

TEST(LengthStatsTest, CsvAndJsonShape) {
  LengthStats s;
  s.Add(Rec("a", 99));
  const std::string csv = ToCsv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_id,mode,length,ratio");
  EXPECT_NE(csv.find("a,intra,99,"), std::string::npos);
  const auto j = ToJson(s);
  EXPECT_EQ(j.at("count"), 1);
  EXPECT_EQ(j.at("samples")[0].at("length"), 99);
}

TEST(VocabUsageTest, NoMatches) {
  VocabUsage u(6);
  u.Add(InterWith(std::vector<Verdict>(10, Verdict::Intact())));
  EXPECT_EQ(u.total(), 0u);
  EXPECT_EQ(u.unused(), 6u);
  for (double p : u.probabilities()) EXPECT_EQ(p, 0.0);
}

TEST(VocabUsageTest, OneHot) {
  VocabUsage u(5);
  u.Add(InterWith(std::vector<Verdict>(7, Verdict::Matched(3))));
  EXPECT_EQ(u.probabilities(), (std::vector<double>{0, 0, 0, 1, 0}));
}

TEST(VocabUsageTest, EngineeredCounts) {
  std::vector<Verdict> v;
  for (int i = 0; i < 5; ++i) v.push_back(Verdict::Matched(0));
  for (int i = 0; i < 3; ++i) v.push_back(Verdict::Matched(1));
  for (int i = 0; i < 2; ++i) v.push_back(Verdict::Matched(2));
  v.push_back(Verdict::Intact());
  VocabUsage u(4);
  u.Add(InterWith(v));
  const auto p = u.probabilities();
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.3);
  EXPECT_DOUBLE_EQ(p[2], 0.2);
  EXPECT_EQ(p[3], 0.0);
  EXPECT_EQ(u.unused(), 1u);
  EXPECT_EQ(ToJson(u).at("unused"), 1);
}

TEST(VocabUsageTest, RejectsIntraAndOutOfRange) {
  VocabUsage u(4);
  try {
    u.Add(TokenizeRandomIntra(10, 0.5, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kModeMismatch);
  }
  EXPECT_THROW(u.Add(InterWith({Verdict::Matched(4)})), Error);
  EXPECT_THROW(u.Merge(VocabUsage(5)), Error);
}

TEST(VocabUsageProperty, DistributionSumsToOne) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    VocabUsage u(100), a(100), b(100);
    for (int i = 0; i < 4; ++i) {
      const auto asg = TokenizeRandomInter(196, 100, 0.01, seed * 10 + i);
      u.Add(asg);
      (i % 2 ? a : b).Add(asg);
    }
    if (u.total() == 0) continue;
    const auto p = u.probabilities();
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    a.Merge(b);
    EXPECT_EQ(a.counts(), u.counts());
  }
}

TEST(SubgroupTest, SingleGroupEqualsGlobal) {
  const std::vector<LengthRecord> recs = {Rec("a", 99), Rec("b", 120), Rec("c", 60)};
  const auto global = ComputeLengthStats(recs);
  const auto groups = SubgroupBreakdown(global, {{"a", "g"}, {"b", "g"}, {"c", "g"}});
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups.at("g").sum(), global.sum());
  EXPECT_EQ(groups.at("g").min(), global.min());
}

TEST(SubgroupTest, EngineeredMeans) {
  std::istringstream csv("sample_id,subgroup_id\ns0,light\ns1,light\ns2,dark\r\ns3,dark\n");
  const auto labels = ParseLabelsCsv(csv);
  ASSERT_EQ(labels.size(), 4u);
  const std::vector<LengthRecord> recs = {Rec("s0", 99), Rec("s1", 99), Rec("s2", 150),
                                          Rec("s3", 150)};
  const auto groups = SubgroupBreakdown(ComputeLengthStats(recs), labels);
  EXPECT_DOUBLE_EQ(groups.at("light").mean(), 99.0);
  EXPECT_DOUBLE_EQ(groups.at("dark").mean(), 150.0);
}

TEST(SubgroupTest, MissingLabelNamesSample) {
  const std::vector<LengthRecord> recs = {Rec("cat_01", 99), Rec("dog_07", 99)};
  try {
    SubgroupBreakdown(ComputeLengthStats(recs), {{"cat_01", "a"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLabel);
    EXPECT_NE(std::string(e.what()).find("dog_07"), std::string::npos);
  }
  std::istringstream bad("a,b,c\n");
  EXPECT_THROW(ParseLabelsCsv(bad), Error);
}

// Polynomial evaluated independently in long double.
long double OracleFlops(long double l, long double d, long double depth) {
  return depth * (12.0L * l * d * d + 2.0L * l * l * d);
}

TEST(FlopsProxyTest, ExactPolynomialAtSmallL) {
  const FlopsProxy f{4, 2};
  // depth * (12 L D^2 + 2 L^2 D) at D=4, depth=2: L=1 -> 400, L=2 -> 832.
  EXPECT_EQ(f(1), 400u);
  EXPECT_EQ(f(2), 832u);
  EXPECT_EQ(f(0), 0u);
  for (std::uint64_t l = 1; l < 300; ++l) {
    EXPECT_EQ(static_cast<long double>(f(l)), OracleFlops(l, 4, 2));
    EXPECT_LT(f(l), f(l + 1));
  }
}

TEST(FlopsProxyTest, RatioAndLinearityInBatch) {
  const FlopsProxy f;
  const auto rows = EfficiencySweep({1, 99, 197}, {1, 2, 8}, f);
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.batch_flops, r.flops_per_sample * r.batch_size);
    const long double want = OracleFlops(197, 768, 12) / OracleFlops(r.length, 768, 12);
    EXPECT_NEAR(r.reduction, static_cast<double>(want), 1e-12);
  }
  EXPECT_EQ(rows[1].batch_flops, 2 * rows[0].batch_flops);
  EXPECT_THROW(EfficiencySweep({}, {1}, f), Error);
  EXPECT_THROW(EfficiencySweep({0}, {1}, f), Error);
  EXPECT_THROW(EfficiencySweep({1}, {1}, FlopsProxy{0, 1}), Error);
}

TEST(FlopsProxyTest, HalfDropReductionToThreeFigures) {
  const FlopsProxy f;
  const double r = static_cast<double>(f(197)) / static_cast<double>(f(99));
  // 197 * (12*768 + 2*197) / (99 * (12*768 + 2*99)) = 1893170 / 931986
  EXPECT_DOUBLE_EQ(r, 1893170.0 / 931986.0);
  EXPECT_EQ(std::round(r * 100.0) / 100.0, 2.03);
  const auto j = ToJson(EfficiencySweep({99, 197}, {1}, f), f);
  EXPECT_EQ(j.at("metric"), "analytic_flops");
}

TEST(FlopsProxyProperty, QuadraticTermDominates) {
  const FlopsProxy f{64, 1};
  // Share of the L^2 term tends to 1.
  const auto share = [&](std::uint64_t l) {
    return 2.0 * l * l * 64 / static_cast<double>(f(l));
  };
  EXPECT_LT(share(10), 0.1);
  EXPECT_GT(share(1000000), 0.99);
}

}  // namespace
}  // namespace vwt
