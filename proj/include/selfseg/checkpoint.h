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

#ifndef SELFSEG_CHECKPOINT_H_
#define SELFSEG_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"
#include "selfseg/scorer.h"

namespace selfseg {

// Checkpoint layout:
//   8 bytes   magic "SSEGCKPT"
//   u32 LE    format version
//   u32 LE    header length in bytes
//   header    UTF-8 JSON: config, vocab hash, tensor names and shapes
//   blobs     each tensor row-major as little-endian float32, header order
inline constexpr std::string_view kCheckpointMagic = "SSEGCKPT";
inline constexpr uint32_t kCheckpointVersion = 1;

nlohmann::json ConfigToJson(const ScorerConfig& config);
ScorerConfig ConfigFromJson(const nlohmann::json& j);

void WriteParams(const Scorer& scorer, std::ostream& out);
void SaveParams(const Scorer& scorer, const std::string& path);

// Throws DataError on a damaged file and ModelMismatchError when the
// checkpoint was trained against a different vocabulary.
Scorer ReadParams(std::istream& in, const SubwordVocab& vocab, const std::string& source);
Scorer LoadParams(const std::string& path, const SubwordVocab& vocab);

// FNV-1a 64 over the float32 parameter images, 16 hex digits.
std::string ParamsHash(const Scorer& scorer);

}  // namespace selfseg

#endif  // SELFSEG_CHECKPOINT_H_
