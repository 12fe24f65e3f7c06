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

#include "selfseg/segmentation.h"

#include "selfseg/error.h"
#include "selfseg/utf8.h"

namespace selfseg {

Segmentation Segmentation::FromBoundaries(std::u32string_view word,
                                          std::vector<int> ends) {
  Segmentation seg;
  int begin = 0;
  for (int end : ends) {
    if (end <= begin || end > static_cast<int>(word.size())) {
      throw DataError("invalid segment boundary " + std::to_string(end));
    }
    seg.segments.emplace_back(word.substr(begin, end - begin));
    begin = end;
  }
  if (begin != static_cast<int>(word.size())) {
    throw DataError("segmentation does not cover the word");
  }
  seg.boundaries = std::move(ends);
  return seg;
}

Segmentation Segmentation::Characters(std::u32string_view word) {
  std::vector<int> ends(word.size());
  for (size_t i = 0; i < word.size(); ++i) ends[i] = static_cast<int>(i + 1);
  return FromBoundaries(word, std::move(ends));
}

Word Segmentation::word() const {
  Word out;
  for (const auto& s : segments) out += s;
  return out;
}

std::string RenderMarked(const Segmentation& seg) {
  std::string out;
  for (size_t k = 0; k < seg.segments.size(); ++k) {
    if (k > 0) out += ' ';
    out += utf8_encode(seg.segments[k]);
    if (k + 1 < seg.segments.size()) out += kContinuationMarker;
  }
  return out;
}

std::string RenderPlus(const Segmentation& seg) {
  std::string out;
  for (size_t k = 0; k < seg.segments.size(); ++k) {
    if (k > 0) out += '+';
    out += utf8_encode(seg.segments[k]);
  }
  return out;
}

Segmentation ParseMarked(const std::vector<std::string_view>& pieces) {
  Segmentation seg;
  int offset = 0;
  for (size_t k = 0; k < pieces.size(); ++k) {
    std::string_view piece = pieces[k];
    const bool last = k + 1 == pieces.size();
    const bool marked = piece.ends_with(kContinuationMarker);
    if (marked == last) {
      throw DataError("misplaced continuation marker in '" +
                      std::string(piece) + "'");
    }
    if (marked) piece.remove_suffix(kContinuationMarker.size());
    if (piece.empty()) throw DataError("empty sub-word");
    Word chars = utf8_decode(piece);
    offset += static_cast<int>(chars.size());
    seg.segments.push_back(std::move(chars));
    seg.boundaries.push_back(offset);
  }
  return seg;
}

}  // namespace selfseg
