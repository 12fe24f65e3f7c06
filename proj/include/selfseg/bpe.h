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

#ifndef SELFSEG_BPE_H_
#define SELFSEG_BPE_H_

#include <cstddef>

#include "selfseg/vocab.h"

namespace selfseg {

// Learns a byte-pair-encoding vocabulary over characters.
//
// `target_size` counts the special symbols. The result holds the specials,
// every character of the table in codepoint order, then merged sub-words in
// merge order, until `target_size` entries exist or no pair is left. Each
// step merges the adjacent pair with the highest frequency-weighted count;
// ties go to the lexicographically smallest merged string, then to the
// smallest left symbol.
SubwordVocab BuildBpeVocab(const WordFreqTable& table, size_t target_size);

}  // namespace selfseg

#endif  // SELFSEG_BPE_H_
