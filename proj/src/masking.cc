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

#include "selfseg/masking.h"

#include <algorithm>
#include <cmath>

#include "selfseg/error.h"

namespace selfseg {

MaskStrategy ParseMaskStrategy(std::string_view name) {
  if (name == "charmass") return MaskStrategy::kCharMass;
  if (name == "subwordmass") return MaskStrategy::kSubwordMass;
  if (name == "subwordmask") return MaskStrategy::kSubwordMask;
  if (name == "none") return MaskStrategy::kNone;
  throw UsageError("unknown mask strategy '" + std::string(name) +
                   "' (expected charmass, subwordmass, subwordmask or none)");
}

std::string_view MaskStrategyName(MaskStrategy strategy) {
  switch (strategy) {
    case MaskStrategy::kCharMass: return "charmass";
    case MaskStrategy::kSubwordMass: return "subwordmass";
    case MaskStrategy::kSubwordMask: return "subwordmask";
    case MaskStrategy::kNone: return "none";
  }
  return "none";
}

void MaskConfig::Validate() const {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw UsageError("mask ratio must be in [0, 1]");
  if (!(subword_mask_prob >= 0.0 && subword_mask_prob <= 1.0)) {
    throw UsageError("sub-word mask probability must be in [0, 1]");
  }
}

int CharMassCount(int length, double ratio) {
  return static_cast<int>(std::floor(ratio * length + 1e-9));
}

std::pair<int, int> MassStartRange(int length, int span) {
  const int first_half = (length + 1) / 2;  // ceil(length / 2) starts
  const int last = std::min(first_half - 1, length - span);
  if (last < 0) return {0, 0};
  return {0, last};
}

namespace {

MaskedWord FromPositions(const Word& word, std::vector<int> positions) {
  MaskedWord m{word, word, std::move(positions)};
  std::sort(m.mask_positions.begin(), m.mask_positions.end());
  for (int p : m.mask_positions) m.masked_chars[p] = kMaskChar;
  return m;
}

MaskedWord MaskSegmentRange(const Segmentation& seg, size_t first, size_t count) {
  std::vector<int> positions;
  for (size_t k = first; k < first + count; ++k) {
    const int begin = k == 0 ? 0 : seg.boundaries[k - 1];
    for (int p = begin; p < seg.boundaries[k]; ++p) positions.push_back(p);
  }
  return FromPositions(seg.word(), std::move(positions));
}

}  // namespace

MaskedWord MaskCharMass(const Word& word, const MaskConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(word.size());
  const int m = CharMassCount(n, cfg.ratio);
  if (m == 0) return NoMask(word);
  std::vector<int> positions;
  if (cfg.consecutive) {
    auto [lo, hi] = MassStartRange(n, m);
    const int start = lo + static_cast<int>(uniform_index(rng, hi - lo + 1));
    for (int p = start; p < start + m; ++p) positions.push_back(p);
  } else {
    std::vector<char> flags(n, 0);
    std::fill(flags.begin(), flags.begin() + m, 1);
    std::shuffle(flags.begin(), flags.end(), rng);
    for (int p = 0; p < n; ++p) {
      if (flags[p]) positions.push_back(p);
    }
  }
  return FromPositions(word, std::move(positions));
}

MaskedWord MaskSubwordMass(const Segmentation& seg, Rng& rng) {
  const int tau = static_cast<int>(seg.size());
  const int m = tau / 2;
  if (m == 0) return NoMask(seg.word());
  auto [lo, hi] = MassStartRange(tau, m);
  const int start = lo + static_cast<int>(uniform_index(rng, hi - lo + 1));
  return MaskSegmentRange(seg, start, m);
}

MaskedWord MaskSubwordMask(const Segmentation& seg, const MaskConfig& cfg, Rng& rng) {
  std::vector<int> positions;
  for (size_t k = 0; k < seg.size(); ++k) {
    if (uniform01(rng) >= cfg.subword_mask_prob) continue;
    const int begin = k == 0 ? 0 : seg.boundaries[k - 1];
    for (int p = begin; p < seg.boundaries[k]; ++p) positions.push_back(p);
  }
  return FromPositions(seg.word(), std::move(positions));
}

MaskedWord NoMask(const Word& word) { return MaskedWord{word, word, {}}; }

MaskedWord ApplyMask(const Word& word, const MaskConfig& cfg,
                     const SubwordVocab& vocab, Rng& rng) {
  switch (cfg.strategy) {
    case MaskStrategy::kCharMass:
      return MaskCharMass(word, cfg, rng);
    case MaskStrategy::kSubwordMass:
      return MaskSubwordMass(vocab.GreedySegment(word), rng);
    case MaskStrategy::kSubwordMask:
      return MaskSubwordMask(vocab.GreedySegment(word), cfg, rng);
    case MaskStrategy::kNone:
      return NoMask(word);
  }
  return NoMask(word);
}

}  // namespace selfseg
