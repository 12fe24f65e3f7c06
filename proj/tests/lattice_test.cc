// Copyright 2026 The SelfSeg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles/lattice_oracle.h"
#include "selfseg/error.h"
#include "selfseg/lattice.h"
#include "test_util.h"

namespace selfseg {
namespace {

using testing::U;
using testing::Vocab;

SegmentScores Scored(const SubwordVocab& vocab, const Word& word,
                     const std::map<std::u32string, double>& by_subword, double fallback) {
  SegmentScores s = BuildLattice(vocab, word);
  for (auto& e : s.edges()) {
    auto it = by_subword.find(word.substr(e.start, e.end - e.start));
    e.log_prob = it == by_subword.end() ? fallback : it->second;
  }
  return s;
}

SubwordVocab Figure2Vocab() {
  return Vocab({"w", "a", "t", "c", "h", "i", "n", "g", "watch", "ing", "wat", "ching", "ch"});
}

TEST(Enumerate, Examples) {
  EXPECT_EQ(EnumerateSegmentations(U"ab", Vocab({"a", "b", "ab"})).size(), 2u);
  const auto only = EnumerateSegmentations(U"ab", Vocab({"a", "b"}));
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(RenderPlus(only[0]), "a+b");
  std::set<std::string> rendered;
  for (const auto& s : EnumerateSegmentations(U"watching", Figure2Vocab())) rendered.insert(RenderPlus(s));
  EXPECT_TRUE(rendered.count("watch+ing"));
  EXPECT_TRUE(rendered.count("wat+ching"));
}

TEST(Enumerate, AllSubstringsGivesPowerOfTwoInMaskOrder) {
  const Word word = U"abcde";
  const auto segs = EnumerateSegmentations(word, oracle::AllSubstrings(word));
  ASSERT_EQ(segs.size(), 16u);
  EXPECT_EQ(segs.front().boundaries, (std::vector<int>{5}));
  EXPECT_EQ(segs.back().boundaries, (std::vector<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(std::set<Segmentation>(segs.begin(), segs.end()).size(), 16u);
}

TEST(Enumerate, OracleLimit) {
  const Word word(17, U'a');
  try {
    EnumerateSegmentations(word, Vocab({"a"}));
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("oracle limit"), std::string::npos);
  }
}

TEST(LogMarginal, SingleCharacter) {
  const auto s = Scored(Vocab({"a"}), U"a", {{U"a", -0.3}}, 0);
  EXPECT_EQ(s.num_edges(), 1u);
  EXPECT_DOUBLE_EQ(LogMarginal(s).log_prob, -0.3);
}

TEST(LogMarginal, TwoPathClosedForm) {
  const auto s = Scored(Vocab({"a", "b", "ab"}), U"ab", {}, -1.0);
  EXPECT_NEAR(LogMarginal(s).log_prob, std::log(std::exp(-2.0) + std::exp(-1.0)), 1e-12);
}

TEST(LogMarginal, MatchesBruteForceOnRandomWords) {
  Rng rng = make_rng({11});
  for (int k = 0; k < 300; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 8, 0.5, false);
    const double brute = oracle::BruteLogMarginal(static_cast<int>(inst.word.size()),
                                                  oracle::TableOf(inst.scores));
    const double dp = LogMarginal(inst.scores).log_prob;
    EXPECT_NEAR(dp, brute, 1e-6 * std::abs(brute));
    double sum = kNegInf;
    for (const auto& seg : EnumerateSegmentations(inst.word, inst.vocab)) {
      double path = 0.0;
      int begin = 0;
      for (int end : seg.boundaries) {
        path += oracle::TableOf(inst.scores).at({begin, end});
        begin = end;
      }
      sum = LogAdd(sum, path);
    }
    EXPECT_NEAR(dp, sum, 1e-9 * std::abs(sum));
  }
}

TEST(LogMarginal, NoPathFlagged) {
  SegmentScores s(3, {{0, 1, 4, -1.0}, {2, 3, 4, -1.0}});
  const auto r = LogMarginal(s);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.log_prob, kNegInf);
  EXPECT_FALSE(ViterbiDecode(U"abc", s).ok);
  Rng rng = make_rng({1});
  EXPECT_THROW(SampleDecode(U"abc", s, 1.0, rng), DataError);
}

TEST(LogMarginal, LookupsBoundedByLengthTimesMaxSubword) {
  Rng rng = make_rng({12});
  for (int k = 0; k < 100; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 12, 0.3, false);
    const auto r = LogMarginal(inst.scores);
    const size_t t = inst.word.size();
    EXPECT_EQ(r.lookups, inst.scores.num_edges());
    EXPECT_LE(r.lookups, t * static_cast<size_t>(inst.vocab.max_subword_len()));
  }
}

TEST(LogMarginal, AddingASegmentNeverDecreases) {
  Rng rng = make_rng({13});
  for (int k = 0; k < 100; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 10, 0.3, false);
    const double before = LogMarginal(inst.scores).log_prob;
    auto table = oracle::TableOf(inst.scores);
    std::vector<SegmentEdge> edges = inst.scores.edges();
    const int n = static_cast<int>(inst.word.size());
    for (int j = 0; j < n; ++j) {
      for (int i = j + 1; i <= n; ++i) {
        if (!table.count({j, i})) {
          edges.push_back({j, i, 99, -5.0 * uniform01(rng)});
          i = n + 1;
          j = n;
        }
      }
    }
    const double after = LogMarginal(SegmentScores(n, edges)).log_prob;
    EXPECT_GE(after, before - 1e-12);
  }
}

TEST(LogMarginal, AtLeastViterbiEqualIffSinglePath) {
  Rng rng = make_rng({14});
  for (int k = 0; k < 200; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 10, 0.4, false);
    const double m = LogMarginal(inst.scores).log_prob;
    const double v = ViterbiDecode(inst.word, inst.scores).log_prob;
    const size_t paths = EnumerateSegmentations(inst.word, inst.vocab).size();
    EXPECT_GE(m, v - 1e-12);
    if (paths == 1) {
      EXPECT_NEAR(m, v, 1e-12);
    } else {
      EXPECT_GT(m, v);
    }
  }
}

TEST(LogMarginalGradient, MatchesFiniteDifferences) {
  Rng rng = make_rng({15});
  for (int k = 0; k < 50; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 9, 0.5, false);
    const auto g = LogMarginalGradient(inst.scores);
    ASSERT_TRUE(g.ok);
    EXPECT_NEAR(g.log_prob, LogMarginal(inst.scores).log_prob, 1e-12);
    for (size_t e = 0; e < inst.scores.num_edges(); ++e) {
      SegmentScores up = inst.scores, down = inst.scores;
      up.edges()[e].log_prob += 1e-5;
      down.edges()[e].log_prob -= 1e-5;
      const double numeric = (LogMarginal(up).log_prob - LogMarginal(down).log_prob) / 2e-5;
      EXPECT_NEAR(g.edge_grad[e], numeric, 1e-6);
      EXPECT_GE(g.edge_grad[e], 0.0);
      EXPECT_LE(g.edge_grad[e], 1.0 + 1e-12);
    }
  }
}

TEST(Viterbi, SingleCharacter) {
  const auto s = Scored(Vocab({"a"}), U"a", {}, -2.0);
  const auto r = ViterbiDecode(U"a", s);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(RenderPlus(r.segmentation), "a");
  EXPECT_DOUBLE_EQ(r.log_prob, -2.0);
}

TEST(Viterbi, WatchPlusIngDominates) {
  const auto s = Scored(Figure2Vocab(), U"watching", {{U"watch", -0.5}, {U"ing", -0.4}}, -3.0);
  EXPECT_EQ(RenderPlus(ViterbiDecode(U"watching", s).segmentation), "watch+ing");
}

TEST(Viterbi, TieGoesToSmallestStart) {
  // a+b and ab both score -2; the final segment with the smaller start wins.
  const auto s = Scored(Vocab({"a", "b", "ab"}), U"ab", {{U"a", -1.0}, {U"b", -1.0}, {U"ab", -2.0}}, 0);
  EXPECT_EQ(RenderPlus(ViterbiDecode(U"ab", s).segmentation), "ab");
}

TEST(Viterbi, MatchesBruteForceArgmax) {
  Rng rng = make_rng({16});
  for (int k = 0; k < 400; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 12, 0.4, k % 2 == 0);
    const auto best = oracle::BruteArgmax(static_cast<int>(inst.word.size()), oracle::TableOf(inst.scores));
    const auto r = ViterbiDecode(inst.word, inst.scores);
    ASSERT_TRUE(r.ok);
    EXPECT_EQ(r.segmentation.boundaries, best.ends);
    EXPECT_DOUBLE_EQ(r.log_prob, best.score);
    EXPECT_EQ(r.segmentation.word(), inst.word);
  }
}

TEST(Sample, RejectsNonPositiveTemperature) {
  const auto s = Scored(Vocab({"a"}), U"a", {}, -1.0);
  Rng rng = make_rng({1});
  EXPECT_THROW(SampleDecode(U"a", s, 0.0, rng), UsageError);
  EXPECT_THROW(SampleDecode(U"a", s, -1.0, rng), UsageError);
  EXPECT_THROW(SampleDistribution(U"a", s, 0.0), UsageError);
}

TEST(Sample, SingleCharacterAnyTemperature) {
  const auto s = Scored(Vocab({"a"}), U"a", {}, -1.0);
  Rng rng = make_rng({2});
  for (double t : {1e-6, 1.0, 10.0, 1e6}) EXPECT_EQ(RenderPlus(SampleDecode(U"a", s, t, rng)), "a");
}

TEST(Sample, NearZeroTemperatureIsViterbi) {
  Rng rng = make_rng({17});
  for (int k = 0; k < 200; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 12, 0.4, false);
    EXPECT_EQ(SampleDecode(inst.word, inst.scores, 1e-6, rng),
              ViterbiDecode(inst.word, inst.scores).segmentation);
  }
}

TEST(SampleDistribution, TwoPathEqualScores) {
  const auto s = Scored(Vocab({"a", "b", "ab"}), U"ab", {}, -1.0);
  const auto d = SampleDistribution(U"ab", s, 1.0);
  ASSERT_EQ(d.size(), 2u);
  // Final position: beta(ab) = -1, beta(b) = alpha_1 - 1 = -2.
  const double p_ab = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(d.at(Segmentation::FromBoundaries(U"ab", {2})), p_ab, 1e-12);
  EXPECT_NEAR(d.at(Segmentation::FromBoundaries(U"ab", {1, 2})), 1 - p_ab, 1e-12);
  const auto flat = SampleDistribution(U"ab", s, 1e9);
  EXPECT_NEAR(flat.at(Segmentation::FromBoundaries(U"ab", {2})), 0.5, 1e-6);
}

TEST(SampleDistribution, MatchesJointEnumerationAndSumsToOne) {
  Rng rng = make_rng({18});
  for (int k = 0; k < 60; ++k) {
    auto inst = oracle::MakeRandomInstance(rng, 7, 0.5, false);
    const double t = 0.5 + 3.0 * uniform01(rng);
    const auto lib = SampleDistribution(inst.word, inst.scores, t);
    const auto ref = oracle::SamplerDistribution(static_cast<int>(inst.word.size()),
                                                 oracle::TableOf(inst.scores), t);
    double total = 0.0;
    for (const auto& [seg, p] : lib) total += p;
    EXPECT_NEAR(total, 1.0, 1e-9);
    ASSERT_EQ(lib.size(), ref.size());
    for (const auto& [seg, p] : lib) EXPECT_NEAR(p, ref.at(seg.boundaries), 1e-12);
  }
}

TEST(SampleDistribution, MonteCarloAgreement) {
  const auto s = Scored(Vocab({"a", "b", "ab"}), U"ab", {}, -1.0);
  const auto d = SampleDistribution(U"ab", s, 1.0);
  Rng rng = make_rng({19});
  const int draws = 100000;
  std::map<Segmentation, int> counts;
  for (int k = 0; k < draws; ++k) ++counts[SampleDecode(U"ab", s, 1.0, rng)];
  for (const auto& [seg, p] : d) {
    const double sd = std::sqrt(draws * p * (1 - p));
    EXPECT_LE(std::abs(counts[seg] - draws * p), 3 * sd);
  }
  Rng rng2 = make_rng({20});
  auto inst = oracle::MakeRandomInstance(rng2, 6, 0.6, false);
  while (EnumerateSegmentations(inst.word, inst.vocab).size() < 4) inst = oracle::MakeRandomInstance(rng2, 6, 0.6, false);
  const auto d2 = SampleDistribution(inst.word, inst.scores, 2.0);
  std::map<Segmentation, int> c2;
  for (int k = 0; k < draws; ++k) ++c2[SampleDecode(inst.word, inst.scores, 2.0, rng2)];
  for (const auto& [seg, p] : d2) {
    const double sd = std::sqrt(draws * p * (1 - p));
    EXPECT_LE(std::abs(c2[seg] - draws * p), 3 * sd + 1e-9);
  }
  for (const auto& [seg, c] : c2) EXPECT_TRUE(d2.count(seg));
}

TEST(Lattice, BuildRejectsBadWords) {
  const auto v = Vocab({"a"});
  EXPECT_THROW(BuildLattice(v, U""), DataError);
  EXPECT_THROW(BuildLattice(v, Word(kMaxLatticeWordLength + 1, U'a')), DataError);
  EXPECT_NO_THROW(BuildLattice(v, Word(kMaxLatticeWordLength, U'a')));
  EXPECT_THROW(BuildLattice(v, U"ab"), UnknownCharacterError);
}

TEST(Lattice, LongWordStaysFinite) {
  const auto v = Vocab({"a", "aa", "aaa"});
  const Word word(kMaxLatticeWordLength, U'a');
  auto s = BuildLattice(v, word);
  for (auto& e : s.edges()) e.log_prob = -9.0;
  const auto r = LogMarginal(s);
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(std::isfinite(r.log_prob));
}

}  // namespace
}  // namespace selfseg
