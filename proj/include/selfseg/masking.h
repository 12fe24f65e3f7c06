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

#ifndef SELFSEG_MASKING_H_
#define SELFSEG_MASKING_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfseg/rng.h"
#include "selfseg/segmentation.h"
#include "selfseg/vocab.h"

namespace selfseg {

// Stands in for a masked input character. Lies outside the Unicode range,
// so it can never collide with corpus text.
inline constexpr char32_t kMaskChar = 0x110000;

enum class MaskStrategy { kCharMass, kSubwordMass, kSubwordMask, kNone };

MaskStrategy ParseMaskStrategy(std::string_view name);
std::string_view MaskStrategyName(MaskStrategy strategy);

struct MaskConfig {
  MaskStrategy strategy = MaskStrategy::kCharMass;
  double ratio = 0.5;
  bool consecutive = true;
  double subword_mask_prob = 0.15;
  uint64_t seed = 0;

  // Throws UsageError when a fraction is outside [0, 1].
  void Validate() const;
};

// The encoder input for one training word.
struct MaskedWord {
  Word original;
  Word masked_chars;               // kMaskChar where masked
  std::vector<int> mask_positions;  // ascending, 0-based

  bool operator==(const MaskedWord&) const = default;
};

// floor(ratio * length), guarded against representation error just below
// an integer.
int CharMassCount(int length, double ratio);

// Inclusive 0-based range of legal span starts for a span of `span` items
// in a sequence of `length`: the first half of the indices intersected with
// the starts that fit. Collapses to {0} when the intersection is empty.
std::pair<int, int> MassStartRange(int length, int span);

MaskedWord MaskCharMass(const Word& word, const MaskConfig& cfg, Rng& rng);
MaskedWord MaskSubwordMass(const Segmentation& seg, Rng& rng);
MaskedWord MaskSubwordMask(const Segmentation& seg, const MaskConfig& cfg, Rng& rng);
MaskedWord NoMask(const Word& word);

// Dispatches on cfg.strategy. Sub-word strategies start from the greedy
// longest-match split of `word` under `vocab`.
MaskedWord ApplyMask(const Word& word, const MaskConfig& cfg,
                     const SubwordVocab& vocab, Rng& rng);

}  // namespace selfseg

#endif  // SELFSEG_MASKING_H_
