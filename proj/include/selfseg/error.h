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

#ifndef SELFSEG_ERROR_H_
#define SELFSEG_ERROR_H_

#include <stdexcept>
#include <string>

namespace selfseg {

// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command-line usage or invalid configuration values.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (corpora, tables, vocab files, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

// A parse failure that knows which line of which file it came from.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  size_t line() const { return line_; }

 private:
  size_t line_;
};

// A word contains characters that are not in the vocabulary.
class UnknownCharacterError : public DataError {
 public:
  UnknownCharacterError(const std::string& word, const std::string& chars)
      : DataError("word '" + word + "' contains characters not in the "
                  "vocabulary: " + chars),
        chars_(chars) {}

  // The offending characters, UTF-8 encoded, each listed once.
  const std::string& chars() const { return chars_; }

 private:
  std::string chars_;
};

// Checkpoint and vocabulary do not belong together.
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

// Training produced a NaN or infinite loss.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(const std::string& word, const std::string& what)
      : Error(what), word_(word) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

}  // namespace selfseg

#endif  // SELFSEG_ERROR_H_
