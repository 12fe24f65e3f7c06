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

#ifndef SELFSEG_FREQNORM_H_
#define SELFSEG_FREQNORM_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "selfseg/corpus.h"
#include "selfseg/rng.h"
#include "selfseg/vocab.h"

namespace selfseg {

// Exact word counts, canonical order.
WordFreqTable CountWords(std::istream& corpus);
WordFreqTable CountWordsInFile(const std::string& path);

enum class NormStrategy { kThreshold, kSqrt, kLog, kOne };

// Maps a raw count to a normalized count:
//   threshold  floor(q / d)
//   sqrt       floor(sqrt(q))
//   log        floor(log2(q))
//   one        1
class FreqNormalizer {
 public:
  // Throws UsageError for an unknown name or d <= 0.
  FreqNormalizer(NormStrategy strategy, int64_t d = 10);
  static FreqNormalizer Parse(std::string_view name, int64_t d = 10);

  int64_t operator()(int64_t q) const;
  NormStrategy strategy() const { return strategy_; }

 private:
  NormStrategy strategy_;
  int64_t d_;
};

// Applies `norm` to every count and drops rows that reach 0.
WordFreqTable Normalize(const WordFreqTable& table, const FreqNormalizer& norm);

// Each word repeated by its count, then shuffled.
std::vector<std::string> Materialize(const WordFreqTable& table, Rng& rng);

}  // namespace selfseg

#endif  // SELFSEG_FREQNORM_H_
