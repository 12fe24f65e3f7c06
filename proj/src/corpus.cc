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

#include "selfseg/corpus.h"

#include "selfseg/error.h"

namespace selfseg {

bool IsCorpusSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

std::vector<std::string_view> SplitTokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsCorpusSpace(line[i])) ++i;
    size_t j = i;
    while (j < line.size() && !IsCorpusSpace(line[j])) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::vector<Segmentation> ParseMarkedLine(std::string_view line) {
  std::vector<Segmentation> words;
  std::vector<std::string_view> pieces;
  for (auto piece : SplitTokens(line)) {
    pieces.push_back(piece);
    if (!piece.ends_with(kContinuationMarker)) {
      words.push_back(ParseMarked(pieces));
      pieces.clear();
    }
  }
  if (!pieces.empty()) throw DataError("line ends inside a word: '" + std::string(line) + "'");
  return words;
}

}  // namespace selfseg
