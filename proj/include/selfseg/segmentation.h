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

#ifndef SELFSEG_SEGMENTATION_H_
#define SELFSEG_SEGMENTATION_H_

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace selfseg {

// A word is a sequence of Unicode codepoints.
using Word = std::u32string;

// Continuation marker appended to every non-final sub-word in corpus output.
inline constexpr std::string_view kContinuationMarker = "@@";

// A split of one word into consecutive sub-words.
//
// `boundaries[k]` is the exclusive end offset (in characters) of
// `segments[k]`; the last boundary equals the word length.
struct Segmentation {
  std::vector<std::u32string> segments;
  std::vector<int> boundaries;

  // Builds the segmentation of `word` that ends segments at `ends`.
  static Segmentation FromBoundaries(std::u32string_view word,
                                     std::vector<int> ends);
  // One segment per character.
  static Segmentation Characters(std::u32string_view word);

  size_t size() const { return segments.size(); }
  bool empty() const { return segments.empty(); }
  Word word() const;

  bool operator==(const Segmentation&) const = default;
  auto operator<=>(const Segmentation&) const = default;
};

// "watch@@ ing": non-final sub-words carry the continuation marker.
std::string RenderMarked(const Segmentation& seg);
// "watch+ing", for human-readable reports.
std::string RenderPlus(const Segmentation& seg);

// Inverse of RenderMarked applied to the pieces of a single word. Throws
// DataError if a non-final piece lacks the marker or the final one has it.
Segmentation ParseMarked(const std::vector<std::string_view>& pieces);

}  // namespace selfseg

#endif  // SELFSEG_SEGMENTATION_H_
