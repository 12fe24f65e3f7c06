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

#ifndef SELFSEG_UTF8_H_
#define SELFSEG_UTF8_H_

#include <string>
#include <string_view>

namespace selfseg {

// Decodes UTF-8 into codepoints. Throws DataError on malformed input.
std::u32string utf8_decode(std::string_view text);

std::string utf8_encode(std::u32string_view text);
std::string utf8_encode(char32_t c);

}  // namespace selfseg

#endif  // SELFSEG_UTF8_H_
