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

#ifndef SELFSEG_CORPUS_H_
#define SELFSEG_CORPUS_H_

#include <string_view>
#include <vector>

#include "selfseg/segmentation.h"

namespace selfseg {

bool IsCorpusSpace(char c);

// Maximal runs of non-whitespace bytes. '\r' counts as whitespace, so CRLF
// and LF corpora tokenize identically.
std::vector<std::string_view> SplitTokens(std::string_view line);

// Groups the pieces of a marker-segmented line ("watch@@ ing is") back
// into one Segmentation per word. Throws DataError on a dangling marker.
std::vector<Segmentation> ParseMarkedLine(std::string_view line);

}  // namespace selfseg

#endif  // SELFSEG_CORPUS_H_
