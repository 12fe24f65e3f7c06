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

#include "selfseg/bpe.h"

#include <map>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "selfseg/error.h"
#include "selfseg/utf8.h"

namespace selfseg {

namespace {

using SymbolPair = std::pair<int, int>;

struct TrainingWord {
  std::vector<int> symbols;
  int64_t freq;
};

class PairQueue {
 public:
  explicit PairQueue(const std::vector<std::u32string>& symbols)
      : symbols_(symbols) {}

  void Adjust(SymbolPair pair, int64_t delta) {
    if (delta == 0) return;
    int64_t& count = counts_[pair];
    if (count > 0) queue_.erase(Key(pair, count));
    count += delta;
    if (count > 0) {
      queue_.insert(Key(pair, count));
    } else {
      counts_.erase(pair);
    }
  }

  bool empty() const { return queue_.empty(); }
  SymbolPair Top() const { return std::get<3>(*queue_.begin()); }

 private:
  using Entry = std::tuple<int64_t, std::u32string, std::u32string, SymbolPair>;

  Entry Key(SymbolPair pair, int64_t count) const {
    return {-count, symbols_[pair.first] + symbols_[pair.second],
            symbols_[pair.first], pair};
  }

  const std::vector<std::u32string>& symbols_;
  std::map<SymbolPair, int64_t> counts_;
  std::set<Entry> queue_;
};

}  // namespace

SubwordVocab BuildBpeVocab(const WordFreqTable& table, size_t target_size) {
  if (table.rows.empty()) throw DataError("cannot build a vocabulary from an empty table");

  std::vector<std::u32string> symbols;
  std::unordered_map<std::u32string, int> symbol_ids;
  auto intern = [&](const std::u32string& s) {
    auto [it, fresh] = symbol_ids.emplace(s, static_cast<int>(symbols.size()));
    if (fresh) symbols.push_back(s);
    return it->second;
  };

  std::set<char32_t> chars;
  std::vector<std::pair<Word, int64_t>> decoded;
  for (const auto& row : table.rows) {
    if (row.freq <= 0) continue;
    Word w = utf8_decode(row.word);
    if (w.empty()) continue;
    chars.insert(w.begin(), w.end());
    decoded.emplace_back(std::move(w), row.freq);
  }
  if (decoded.empty()) throw DataError("frequency table has no positive counts");

  const size_t minimum = chars.size() + SubwordVocab::kNumSpecials;
  if (target_size < minimum) {
    throw UsageError("target vocabulary size " + std::to_string(target_size) +
                     " is below the minimum " + std::to_string(minimum) + " (" +
                     std::to_string(chars.size()) + " characters + " +
                     std::to_string(SubwordVocab::kNumSpecials) + " special symbols)");
  }

  std::vector<std::u32string> entries;
  std::unordered_set<std::u32string> in_vocab;
  for (auto sym : SubwordVocab::kSpecialSymbols) in_vocab.insert(utf8_decode(sym));
  for (char32_t c : chars) {
    std::u32string s(1, c);
    intern(s);
    entries.push_back(s);
    in_vocab.insert(s);
  }
  std::vector<TrainingWord> words;
  words.reserve(decoded.size());
  for (const auto& [w, freq] : decoded) {
    TrainingWord tw{{}, freq};
    for (char32_t c : w) tw.symbols.push_back(symbol_ids.at(std::u32string(1, c)));
    words.push_back(std::move(tw));
  }

  PairQueue queue(symbols);
  std::map<SymbolPair, std::set<size_t>> occurs_in;
  auto add_pairs = [&](size_t w, int sign) {
    const auto& s = words[w].symbols;
    for (size_t i = 0; i + 1 < s.size(); ++i) {
      SymbolPair p{s[i], s[i + 1]};
      queue.Adjust(p, sign * words[w].freq);
      if (sign > 0) occurs_in[p].insert(w);
    }
  };
  for (size_t w = 0; w < words.size(); ++w) add_pairs(w, +1);

  while (entries.size() + SubwordVocab::kNumSpecials < target_size && !queue.empty()) {
    const SymbolPair best = queue.Top();
    const std::u32string merged = symbols[best.first] + symbols[best.second];
    const int merged_id = intern(merged);
    if (in_vocab.insert(merged).second) entries.push_back(merged);

    std::set<size_t> affected = std::move(occurs_in[best]);
    occurs_in.erase(best);
    for (size_t w : affected) {
      auto& s = words[w].symbols;
      add_pairs(w, -1);
      std::vector<int> next;
      next.reserve(s.size());
      for (size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == best.first && s[i + 1] == best.second) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(s[i]);
        }
      }
      s = std::move(next);
      add_pairs(w, +1);
    }
  }
  return SubwordVocab::FromSubwords(entries);
}

}  // namespace selfseg
