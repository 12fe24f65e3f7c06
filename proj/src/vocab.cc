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

#include "selfseg/vocab.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "selfseg/error.h"
#include "selfseg/rng.h"
#include "selfseg/utf8.h"

namespace selfseg {

namespace {

std::string DescribeChars(const std::u32string& chars) {
  std::string out;
  for (size_t i = 0; i < chars.size(); ++i) {
    if (i > 0) out += ", ";
    out += "'" + utf8_encode(chars[i]) + "'";
  }
  return out;
}

bool ParseInt64(std::string_view text, int64_t* value) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// WordFreqTable

void WordFreqTable::SortCanonical() {
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.freq != b.freq) return a.freq > b.freq;
    return a.word < b.word;  // UTF-8 byte order == codepoint order
  });
}

int64_t WordFreqTable::TotalFrequency() const {
  int64_t total = 0;
  for (const auto& r : rows) total += r.freq;
  return total;
}

WordFreqTable ParseFreqTable(std::istream& in, const std::string& source) {
  WordFreqTable table;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(source, line_no, "expected '<word>\\t<count>'");
    }
    std::string word = line.substr(0, tab);
    int64_t freq = 0;
    if (!ParseInt64(std::string_view(line).substr(tab + 1), &freq) ||
        freq < 0) {
      throw ParseError(source, line_no, "invalid count");
    }
    try {
      utf8_decode(word);
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!seen.insert(word).second) {
      throw ParseError(source, line_no, "duplicate word '" + word + "'");
    }
    table.rows.push_back({std::move(word), freq});
  }
  return table;
}

WordFreqTable ReadFreqTable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ParseFreqTable(in, path);
}

void WriteFreqTable(const WordFreqTable& table, std::ostream& out) {
  for (const auto& r : table.rows) out << r.word << '\t' << r.freq << '\n';
}

void WriteFreqTable(const WordFreqTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteFreqTable(table, out);
}

// ---------------------------------------------------------------------------
// SuffixTrie

int32_t SuffixTrie::Child(int32_t node, char32_t c) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(
      kids.begin(), kids.end(), c,
      [](const std::pair<char32_t, int32_t>& p, char32_t v) { return p.first < v; });
  if (it == kids.end() || it->first != c) return -1;
  return it->second;
}

void SuffixTrie::Insert(std::u32string_view key, int id) {
  int32_t node = 0;
  for (auto it = key.rbegin(); it != key.rend(); ++it) {
    int32_t next = Child(node, *it);
    if (next < 0) {
      next = static_cast<int32_t>(nodes_.size());
      nodes_.emplace_back();
      auto& kids = nodes_[node].children;
      auto pos = std::lower_bound(
          kids.begin(), kids.end(), *it,
          [](const std::pair<char32_t, int32_t>& p, char32_t v) { return p.first < v; });
      kids.insert(pos, {*it, next});
    }
    node = next;
  }
  nodes_[node].id = id;
}

size_t SuffixTrie::ForEachEndingAt(std::u32string_view word, int end,
                                   int max_len,
                                   const std::function<void(int, int)>& fn) const {
  int32_t node = 0;
  size_t steps = 0;
  for (int start = end - 1; start >= 0 && end - start <= max_len; --start) {
    ++steps;
    node = Child(node, word[start]);
    if (node < 0) break;
    if (nodes_[node].id >= 0) fn(start, nodes_[node].id);
  }
  return steps;
}

// ---------------------------------------------------------------------------
// SubwordVocab

SubwordVocab SubwordVocab::FromSubwords(
    const std::vector<std::u32string>& subwords) {
  SubwordVocab vocab;
  for (auto sym : kSpecialSymbols) {
    const int id = static_cast<int>(vocab.entries_.size());
    vocab.entries_.push_back(utf8_decode(sym));
    vocab.index_.emplace(vocab.entries_.back(), id);
  }
  for (const auto& sw : subwords) {
    if (sw.empty()) throw DataError("empty sub-word in vocabulary");
    const int id = static_cast<int>(vocab.entries_.size());
    if (!vocab.index_.emplace(sw, id).second) {
      throw DataError("duplicate vocabulary entry '" + utf8_encode(sw) + "'");
    }
    vocab.entries_.push_back(sw);
    vocab.trie_.Insert(sw, id);
    vocab.max_subword_len_ =
        std::max(vocab.max_subword_len_, static_cast<int>(sw.size()));
  }
  std::u32string missing;
  for (const auto& sw : subwords) {
    for (char32_t c : sw) {
      if (!vocab.contains_char(c) && missing.find(c) == std::u32string::npos) {
        missing.push_back(c);
      }
    }
  }
  if (!missing.empty()) {
    throw DataError("vocabulary is not closed under characters; missing " +
                    DescribeChars(missing));
  }
  return vocab;
}

std::optional<int> SubwordVocab::id_of(std::u32string_view subword) const {
  auto it = index_.find(std::u32string(subword));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SubwordVocab::contains_char(char32_t c) const {
  auto it = index_.find(std::u32string(1, c));
  return it != index_.end() && !is_special(it->second);
}

std::u32string SubwordVocab::UnknownCharacters(std::u32string_view word) const {
  std::u32string missing;
  for (char32_t c : word) {
    if (!contains_char(c) && missing.find(c) == std::u32string::npos) {
      missing.push_back(c);
    }
  }
  return missing;
}

void SubwordVocab::CheckCharacters(std::u32string_view word) const {
  std::u32string missing = UnknownCharacters(word);
  if (!missing.empty()) {
    throw UnknownCharacterError(utf8_encode(word), DescribeChars(missing));
  }
}

size_t SubwordVocab::ForEachSegmentEndingAt(
    std::u32string_view word, int end,
    const std::function<void(int, int)>& fn) const {
  return trie_.ForEachEndingAt(word, end, max_subword_len_, fn);
}

std::vector<int> SubwordVocab::valid_segments(std::u32string_view word,
                                              int end) const {
  if (end < 1 || end > static_cast<int>(word.size())) {
    throw UsageError("segment end " + std::to_string(end) + " out of range");
  }
  CheckCharacters(word);
  std::vector<int> starts;
  ForEachSegmentEndingAt(word, end, [&](int start, int) { starts.push_back(start); });
  std::reverse(starts.begin(), starts.end());
  return starts;
}

Segmentation SubwordVocab::GreedySegment(std::u32string_view word) const {
  CheckCharacters(word);
  std::vector<int> ends;
  int pos = 0;
  const int n = static_cast<int>(word.size());
  while (pos < n) {
    int best = pos + 1;
    for (int len = std::min(max_subword_len_, n - pos); len > 1; --len) {
      auto id = id_of(word.substr(pos, len));
      if (id && !is_special(*id)) {
        best = pos + len;
        break;
      }
    }
    ends.push_back(best);
    pos = best;
  }
  return Segmentation::FromBoundaries(word, std::move(ends));
}

std::string SubwordVocab::Serialize() const {
  std::string out(kVocabHeader);
  out += '\n';
  for (size_t id = 0; id < entries_.size(); ++id) {
    out += utf8_encode(entries_[id]);
    out += '\t';
    out += std::to_string(id);
    out += '\n';
  }
  return out;
}

std::string SubwordVocab::Hash() const { return hex64(fnv1a64(Serialize())); }

// ---------------------------------------------------------------------------
// File format

SubwordVocab ParseVocab(std::istream& in, const std::string& source) {
  std::string line;
  size_t line_no = 1;
  if (!std::getline(in, line) || line != kVocabHeader) {
    throw ParseError(source, 1, "missing header '" + std::string(kVocabHeader) + "'");
  }
  std::unordered_map<std::u32string, size_t> seen;  // subword -> line
  std::vector<std::pair<int64_t, std::u32string>> entries;
  std::vector<size_t> lines;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(source, line_no, "expected '<subword>\\t<id>'");
    }
    int64_t id = 0;
    if (!ParseInt64(std::string_view(line).substr(tab + 1), &id) || id < 0) {
      throw ParseError(source, line_no, "invalid id");
    }
    std::u32string subword;
    try {
      subword = utf8_decode(std::string_view(line).substr(0, tab));
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (auto [it, fresh] = seen.emplace(subword, line_no); !fresh) {
      throw ParseError(source, line_no,
                       "duplicate entry '" + utf8_encode(subword) +
                           "' (first seen at line " + std::to_string(it->second) + ")");
    }
    entries.emplace_back(id, std::move(subword));
    lines.push_back(line_no);
  }
  std::vector<size_t> order(entries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return entries[a].first < entries[b].first;
  });
  std::vector<std::u32string> subwords;
  for (size_t k = 0; k < order.size(); ++k) {
    const auto& [id, subword] = entries[order[k]];
    if (id != static_cast<int64_t>(k)) {
      throw ParseError(source, lines[order[k]],
                       "ids must be contiguous from 0; got " + std::to_string(id));
    }
    if (k < SubwordVocab::kNumSpecials) {
      if (utf8_encode(subword) != SubwordVocab::kSpecialSymbols[k]) {
        throw ParseError(source, lines[order[k]],
                         "id " + std::to_string(k) + " must be the special symbol " +
                             std::string(SubwordVocab::kSpecialSymbols[k]));
      }
    } else {
      subwords.push_back(subword);
    }
  }
  if (entries.size() < SubwordVocab::kNumSpecials) {
    throw ParseError(source, line_no, "missing special symbols");
  }
  try {
    return SubwordVocab::FromSubwords(subwords);
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw ParseError(source, line_no, e.what());
  }
}

SubwordVocab LoadVocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ParseVocab(in, path);
}

void SaveVocab(const SubwordVocab& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << vocab.Serialize();
}

}  // namespace selfseg
