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

#ifndef SELFSEG_VOCAB_H_
#define SELFSEG_VOCAB_H_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "selfseg/segmentation.h"

namespace selfseg {

// Word -> corpus frequency.
struct WordFreqTable {
  struct Row {
    std::string word;  // UTF-8
    int64_t freq = 0;
    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;

  // Descending frequency, ties in ascending codepoint order.
  void SortCanonical();
  int64_t TotalFrequency() const;
  bool operator==(const WordFreqTable&) const = default;
};

// `<word>\t<count>` per line.
WordFreqTable ParseFreqTable(std::istream& in, const std::string& source);
WordFreqTable ReadFreqTable(const std::string& path);
void WriteFreqTable(const WordFreqTable& table, std::ostream& out);
void WriteFreqTable(const WordFreqTable& table, const std::string& path);

// Codepoint trie keyed on reversed strings, so that all entries ending at a
// given word position are found by one backward walk.
class SuffixTrie {
 public:
  void Insert(std::u32string_view key, int id);
  // Calls `fn(start, id)` for every entry equal to word[start, end), walking
  // at most `max_len` characters back. Starts are reported in descending
  // order. Returns the number of trie steps taken.
  size_t ForEachEndingAt(std::u32string_view word, int end, int max_len,
                         const std::function<void(int, int)>& fn) const;

 private:
  struct Node {
    std::vector<std::pair<char32_t, int32_t>> children;  // sorted by char
    int32_t id = -1;
  };
  int32_t Child(int32_t node, char32_t c) const;
  std::vector<Node> nodes_{Node{}};
};

// The sub-word vocabulary. Ids are contiguous from 0; the first
// kNumSpecials ids are reserved symbols that never appear as lattice
// segments. Immutable after construction.
class SubwordVocab {
 public:
  static constexpr int kMaskId = 0;
  static constexpr int kBosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kPadId = 3;
  static constexpr int kNumSpecials = 4;
  static constexpr std::array<std::string_view, kNumSpecials> kSpecialSymbols =
      {"<mask>", "<s>", "</s>", "<pad>"};

  SubwordVocab() = default;

  // Prepends the special symbols to `subwords`. Throws DataError if entries
  // repeat, are empty, or the set is not closed under single characters.
  static SubwordVocab FromSubwords(const std::vector<std::u32string>& subwords);

  size_t size() const { return entries_.size(); }
  const std::u32string& subword(int id) const { return entries_[id]; }
  std::optional<int> id_of(std::u32string_view subword) const;
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
  int max_subword_len() const { return max_subword_len_; }
  bool contains_char(char32_t c) const;

  // 0-based starts s, ascending, with word[s, end) in the vocabulary and
  // end - s <= max_subword_len(). Requires 1 <= end <= word.size().
  // Throws UnknownCharacterError if the word has out-of-vocabulary
  // characters.
  std::vector<int> valid_segments(std::u32string_view word, int end) const;

  // Same walk without the character check; `fn(start, id)` in descending
  // start order. Returns the number of trie steps.
  size_t ForEachSegmentEndingAt(std::u32string_view word, int end,
                                const std::function<void(int, int)>& fn) const;

  // Throws UnknownCharacterError naming every offending character.
  void CheckCharacters(std::u32string_view word) const;
  // The distinct characters of `word` that are not in the vocabulary.
  std::u32string UnknownCharacters(std::u32string_view word) const;

  // Left-to-right longest-match split. All characters must be known.
  Segmentation GreedySegment(std::u32string_view word) const;

  // Canonical file image, header included.
  std::string Serialize() const;
  // FNV-1a 64 of Serialize(), as 16 hex digits.
  std::string Hash() const;

  bool operator==(const SubwordVocab& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<std::u32string> entries_;
  std::unordered_map<std::u32string, int> index_;
  SuffixTrie trie_;
  int max_subword_len_ = 0;
};

inline constexpr std::string_view kVocabHeader = "#selfseg-vocab v1";

SubwordVocab ParseVocab(std::istream& in, const std::string& source);
SubwordVocab LoadVocab(const std::string& path);
void SaveVocab(const SubwordVocab& vocab, const std::string& path);

}  // namespace selfseg

#endif  // SELFSEG_VOCAB_H_
