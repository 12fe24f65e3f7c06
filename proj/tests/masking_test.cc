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

#include <set>

#include "selfseg/error.h"
#include "selfseg/masking.h"
#include "selfseg/rng.h"
#include "test_util.h"

namespace selfseg {
namespace {

using testing::U;

void ExpectConsistent(const MaskedWord& m) {
  ASSERT_EQ(m.masked_chars.size(), m.original.size());
  const std::set<int> pos(m.mask_positions.begin(), m.mask_positions.end());
  EXPECT_EQ(pos.size(), m.mask_positions.size());
  for (size_t i = 0; i < m.original.size(); ++i) {
    if (pos.count(static_cast<int>(i))) {
      EXPECT_EQ(m.masked_chars[i], kMaskChar);
    } else {
      EXPECT_EQ(m.masked_chars[i], m.original[i]);
    }
  }
}

TEST(CharMass, HalfOfEightIsOneSpanInFirstHalf) {
  Rng rng = make_rng({1});
  MaskConfig cfg;
  std::set<int> starts;
  for (int k = 0; k < 400; ++k) {
    const auto m = MaskCharMass(U"abcdefgh", cfg, rng);
    ExpectConsistent(m);
    ASSERT_EQ(m.mask_positions.size(), 4u);
    for (size_t i = 1; i < 4; ++i) EXPECT_EQ(m.mask_positions[i], m.mask_positions[0] + static_cast<int>(i));
    starts.insert(m.mask_positions[0]);
  }
  EXPECT_EQ(starts, (std::set<int>{0, 1, 2, 3}));
}

TEST(CharMass, SingleCharacterUnmasked) {
  Rng rng = make_rng({2});
  const auto m = MaskCharMass(U"a", MaskConfig{}, rng);
  EXPECT_TRUE(m.mask_positions.empty());
  EXPECT_EQ(m, NoMask(U"a"));
}

TEST(CharMass, NonConsecutiveNinetyPercent) {
  Rng rng = make_rng({3});
  MaskConfig cfg;
  cfg.ratio = 0.9;
  cfg.consecutive = false;
  std::set<int> survivors;
  for (int k = 0; k < 200; ++k) {
    const auto m = MaskCharMass(U"abcdefghij", cfg, rng);
    ExpectConsistent(m);
    ASSERT_EQ(m.mask_positions.size(), 9u);
    for (int p = 0; p < 10; ++p) {
      if (m.masked_chars[p] != kMaskChar) survivors.insert(p);
    }
  }
  EXPECT_EQ(survivors.size(), 10u);
}

TEST(CharMass, CountFormula) {
  EXPECT_EQ(CharMassCount(8, 0.5), 4);
  EXPECT_EQ(CharMassCount(7, 0.5), 3);
  EXPECT_EQ(CharMassCount(10, 0.3), 3);
  EXPECT_EQ(CharMassCount(10, 0.7), 7);
  EXPECT_EQ(CharMassCount(1, 0.5), 0);
  EXPECT_EQ(CharMassCount(5, 1.0), 5);
}

TEST(CharMass, StartRangeIntersectsFitAndClamps) {
  EXPECT_EQ(MassStartRange(8, 4), std::make_pair(0, 3));
  EXPECT_EQ(MassStartRange(7, 3), std::make_pair(0, 3));
  EXPECT_EQ(MassStartRange(10, 9), std::make_pair(0, 1));
  EXPECT_EQ(MassStartRange(5, 5), std::make_pair(0, 0));
  EXPECT_EQ(MassStartRange(1, 1), std::make_pair(0, 0));
}

TEST(CharMass, RatioZeroIsIdentity) {
  Rng rng = make_rng({4});
  MaskConfig cfg;
  cfg.ratio = 0.0;
  for (auto w : {U"a", U"watching", U"xy"}) EXPECT_EQ(MaskCharMass(w, cfg, rng), NoMask(w));
}

TEST(CharMass, ExactCountsAndConsistencyAcrossLengths) {
  Rng rng = make_rng({5});
  for (bool consecutive : {true, false}) {
    for (double ratio : {0.1, 0.5, 0.75, 1.0}) {
      MaskConfig cfg;
      cfg.ratio = ratio;
      cfg.consecutive = consecutive;
      for (int len = 1; len <= 30; ++len) {
        const auto m = MaskCharMass(Word(static_cast<size_t>(len), U'q'), cfg, rng);
        ExpectConsistent(m);
        EXPECT_EQ(static_cast<int>(m.mask_positions.size()), CharMassCount(len, ratio));
      }
    }
  }
}

TEST(CharMass, StartUniformChiSquare) {
  // T = 9, ratio 0.5: span 4, legal starts {0..4}.
  Rng rng = make_rng({6});
  MaskConfig cfg;
  std::vector<int> hist(9, 0);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) ++hist[MaskCharMass(U"abcdefghi", cfg, rng).mask_positions[0]];
  double chi2 = 0.0;
  for (int s = 0; s < 5; ++s) {
    const double e = draws / 5.0;
    chi2 += (hist[s] - e) * (hist[s] - e) / e;
  }
  for (int s = 5; s < 9; ++s) EXPECT_EQ(hist[s], 0);
  EXPECT_LT(chi2, 13.277);  // 4 dof, 1% level
}

TEST(SubwordMass, WatchingMasksWatch) {
  Rng rng = make_rng({7});
  const auto seg = Segmentation::FromBoundaries(U"watching", {5, 8});
  for (int k = 0; k < 20; ++k) {
    const auto m = MaskSubwordMass(seg, rng);
    EXPECT_EQ(m.mask_positions, (std::vector<int>{0, 1, 2, 3, 4}));
  }
}

TEST(SubwordMass, FourSegmentsMaskTwoConsecutive) {
  Rng rng = make_rng({8});
  const auto seg = Segmentation::FromBoundaries(U"abcdefg", {2, 3, 5, 7});
  std::set<std::vector<int>> seen;
  for (int k = 0; k < 100; ++k) {
    const auto m = MaskSubwordMass(seg, rng);
    ExpectConsistent(m);
    seen.insert(m.mask_positions);
  }
  EXPECT_EQ(seen, (std::set<std::vector<int>>{{0, 1, 2}, {2, 3, 4}}));
}

TEST(SubwordMass, SingleSegmentIdentity) {
  Rng rng = make_rng({9});
  const auto seg = Segmentation::FromBoundaries(U"word", {4});
  EXPECT_EQ(MaskSubwordMass(seg, rng), NoMask(U"word"));
}

TEST(SubwordMask, ProbabilityExtremes) {
  Rng rng = make_rng({10});
  const auto seg = Segmentation::FromBoundaries(U"abcdef", {2, 3, 6});
  MaskConfig cfg;
  cfg.subword_mask_prob = 0.0;
  EXPECT_EQ(MaskSubwordMask(seg, cfg, rng), NoMask(U"abcdef"));
  cfg.subword_mask_prob = 1.0;
  EXPECT_EQ(MaskSubwordMask(seg, cfg, rng).mask_positions, (std::vector<int>{0, 1, 2, 3, 4, 5}));
}

TEST(SubwordMask, RateNearFifteenPercent) {
  Rng rng = make_rng({11});
  MaskConfig cfg;
  const auto seg = Segmentation::FromBoundaries(U"abcdefghij", {1, 3, 4, 6, 10});
  int masked = 0, total = 0;
  while (total < 10000) {
    const auto m = MaskSubwordMask(seg, cfg, rng);
    ExpectConsistent(m);
    const std::set<int> pos(m.mask_positions.begin(), m.mask_positions.end());
    int begin = 0;
    for (int end : seg.boundaries) {
      const bool first = pos.count(begin) > 0;
      for (int p = begin; p < end; ++p) EXPECT_EQ(pos.count(p) > 0, first);
      masked += first;
      ++total;
      begin = end;
    }
  }
  EXPECT_NEAR(static_cast<double>(masked) / total, 0.15, 0.01);
}

TEST(NoMask, Identity) {
  for (auto w : {U"watch", U"a", U"xyz"}) {
    const auto m = NoMask(w);
    EXPECT_EQ(m.masked_chars, w);
    EXPECT_TRUE(m.mask_positions.empty());
  }
}

TEST(ApplyMask, DispatchesAndUsesGreedySegmentation) {
  const auto vocab = testing::Vocab({"w", "a", "t", "c", "h", "i", "n", "g", "watch", "ing"});
  Rng rng = make_rng({12});
  MaskConfig cfg;
  cfg.strategy = MaskStrategy::kSubwordMass;
  EXPECT_EQ(ApplyMask(U"watching", cfg, vocab, rng).mask_positions, (std::vector<int>{0, 1, 2, 3, 4}));
  cfg.strategy = MaskStrategy::kNone;
  EXPECT_EQ(ApplyMask(U"watching", cfg, vocab, rng), NoMask(U"watching"));
  cfg.strategy = MaskStrategy::kCharMass;
  EXPECT_EQ(ApplyMask(U"watching", cfg, vocab, rng).mask_positions.size(), 4u);
}

TEST(MaskConfig, ParsingAndValidation) {
  EXPECT_EQ(ParseMaskStrategy("subwordmask"), MaskStrategy::kSubwordMask);
  EXPECT_EQ(MaskStrategyName(MaskStrategy::kCharMass), "charmass");
  EXPECT_THROW(ParseMaskStrategy("bert"), UsageError);
  MaskConfig cfg;
  cfg.ratio = 1.5;
  EXPECT_THROW(cfg.Validate(), UsageError);
  cfg.ratio = 0.5;
  cfg.subword_mask_prob = -0.1;
  EXPECT_THROW(cfg.Validate(), UsageError);
}

TEST(Masking, SeededDeterminism) {
  MaskConfig cfg;
  cfg.consecutive = false;
  Rng a = make_rng({99, 3, 0}), b = make_rng({99, 3, 0});
  for (int k = 0; k < 50; ++k) EXPECT_EQ(MaskCharMass(U"determinism", cfg, a), MaskCharMass(U"determinism", cfg, b));
}

}  // namespace
}  // namespace selfseg
