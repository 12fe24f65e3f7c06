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

#include "selfseg/freqnorm.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>

#include "selfseg/error.h"

namespace selfseg {

namespace {

int64_t FloorSqrt(int64_t q) {
  auto s = static_cast<int64_t>(std::sqrt(static_cast<double>(q)));
  while (s > 0 && s * s > q) --s;
  while ((s + 1) * (s + 1) <= q) ++s;
  return s;
}

}  // namespace

WordFreqTable CountWords(std::istream& corpus) {
  std::unordered_map<std::string, int64_t> counts;
  std::string line;
  while (std::getline(corpus, line)) {
    for (auto tok : SplitTokens(line)) ++counts[std::string(tok)];
  }
  WordFreqTable table;
  table.rows.reserve(counts.size());
  for (auto& [word, freq] : counts) table.rows.push_back({word, freq});
  table.SortCanonical();
  return table;
}

WordFreqTable CountWordsInFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return CountWords(in);
}

FreqNormalizer::FreqNormalizer(NormStrategy strategy, int64_t d) : strategy_(strategy), d_(d) {
  if (strategy_ == NormStrategy::kThreshold && d_ <= 0) {
    throw UsageError("threshold divisor d must be positive");
  }
}

FreqNormalizer FreqNormalizer::Parse(std::string_view name, int64_t d) {
  if (name == "threshold") return FreqNormalizer(NormStrategy::kThreshold, d);
  if (name == "sqrt") return FreqNormalizer(NormStrategy::kSqrt, d);
  if (name == "log") return FreqNormalizer(NormStrategy::kLog, d);
  if (name == "one") return FreqNormalizer(NormStrategy::kOne, d);
  throw UsageError("unknown normalization '" + std::string(name) +
                   "' (expected threshold, sqrt, log or one)");
}

int64_t FreqNormalizer::operator()(int64_t q) const {
  if (q <= 0) return 0;
  switch (strategy_) {
    case NormStrategy::kThreshold: return q / d_;
    case NormStrategy::kSqrt: return FloorSqrt(q);
    case NormStrategy::kLog: return std::bit_width(static_cast<uint64_t>(q)) - 1;
    case NormStrategy::kOne: return 1;
  }
  return 0;
}

WordFreqTable Normalize(const WordFreqTable& table, const FreqNormalizer& norm) {
  WordFreqTable out;
  for (const auto& row : table.rows) {
    const int64_t nq = norm(row.freq);
    if (nq > 0) out.rows.push_back({row.word, nq});
  }
  out.SortCanonical();
  return out;
}

std::vector<std::string> Materialize(const WordFreqTable& table, Rng& rng) {
  std::vector<std::string> words;
  words.reserve(static_cast<size_t>(std::max<int64_t>(table.TotalFrequency(), 0)));
  for (const auto& row : table.rows) {
    for (int64_t k = 0; k < row.freq; ++k) words.push_back(row.word);
  }
  std::shuffle(words.begin(), words.end(), rng);
  return words;
}

}  // namespace selfseg
