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

#ifndef SELFSEG_PIPELINE_H_
#define SELFSEG_PIPELINE_H_

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfseg/scorer.h"
#include "selfseg/segmentation.h"

namespace selfseg {

inline constexpr const char* kThreadsEnvVar = "SELFSEG_THREADS";

// Worker count from SELFSEG_THREADS; 1 when unset or invalid.
int ThreadCountFromEnv();

struct SamplerConfig {
  int n = 10;
  double temperature = 10.0;
  uint64_t seed = 0;

  void Validate() const;
};

struct SegmentOptions {
  // 0 reads SELFSEG_THREADS.
  int threads = 0;
  // Decode each distinct word once. When false every occurrence is decoded.
  bool use_cache = true;
  // Optional `word<TAB>segmentation...` sidecar reused across runs; ignored
  // and rewritten when its key (params, vocab, sampler) differs.
  std::string cache_path;
};

struct SegmentStats {
  size_t lines = 0;
  size_t tokens = 0;
  size_t subwords = 0;
  size_t distinct_words = 0;
  size_t scorer_calls = 0;
  size_t fallback_words = 0;  // distinct words split into characters
  size_t cached_words = 0;    // distinct words served from the sidecar
  double wall_seconds = 0.0;

  double SubwordsPerSentence() const {
    return lines == 0 ? 0.0 : static_cast<double>(subwords) / static_cast<double>(lines);
  }
  nlohmann::json ToJson() const;
};

// Word-level decoding with a trained scorer. Thread-safe.
class Segmenter {
 public:
  explicit Segmenter(const Scorer& scorer) : scorer_(scorer) {}

  // MAP segmentation. Words with unknown characters or longer than the
  // lattice limit come back as single characters with `*fallback` set.
  Segmentation Map(const Word& word, bool* fallback = nullptr) const;

  // `config.n` independent runs of the temperature sampler over one scoring
  // pass, seeded by (config.seed, epoch, word).
  std::vector<Segmentation> Sample(const Word& word, const SamplerConfig& config,
                                   uint64_t epoch, bool* fallback = nullptr) const;

  size_t scorer_calls() const { return calls_.load(); }
  const Scorer& scorer() const { return scorer_; }

 private:
  bool NeedsFallback(const Word& word) const;

  const Scorer& scorer_;
  mutable std::atomic<size_t> calls_{0};
};

// Rewrites every token with its MAP segmentation in `@@ ` notation,
// keeping all whitespace (and line endings) byte for byte. Throws DataError
// for tokens that already contain "@@".
SegmentStats SegmentCorpus(std::istream& in, std::ostream& out, const Scorer& scorer,
                           const SegmentOptions& options = {});
SegmentStats SegmentCorpusFile(const std::string& in_path, const std::string& out_path,
                               const Scorer& scorer, const SegmentOptions& options = {});

// Like SegmentCorpus, but each distinct word gets `config.n` sampled
// segmentations and every occurrence picks one uniformly, seeded by
// (seed, epoch, line, token index).
SegmentStats SegmentCorpusRegularized(std::istream& in, std::ostream& out, const Scorer& scorer,
                                      const SamplerConfig& config, uint64_t epoch,
                                      const SegmentOptions& options = {});
SegmentStats SegmentCorpusRegularizedFile(const std::string& in_path, const std::string& out_path,
                                          const Scorer& scorer, const SamplerConfig& config,
                                          uint64_t epoch, const SegmentOptions& options = {});

// Line, word, sub-word and distinct-word counts of a segmented corpus.
SegmentStats ComputeStats(std::istream& segmented);
SegmentStats ComputeStatsFile(const std::string& path);

}  // namespace selfseg

#endif  // SELFSEG_PIPELINE_H_
