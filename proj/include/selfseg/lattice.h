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

#ifndef SELFSEG_LATTICE_H_
#define SELFSEG_LATTICE_H_

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "selfseg/rng.h"
#include "selfseg/segmentation.h"
#include "selfseg/vocab.h"

namespace selfseg {

// Longest word the lattice accepts; callers fall back to characters.
inline constexpr int kMaxLatticeWordLength = 512;
// Brute-force enumeration limits.
inline constexpr int kEnumerationMaxLength = 16;
inline constexpr int kSampleOracleMaxLength = 12;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One candidate segment word[start, end) with its conditional log-prob
// log p(subword | x_M, word[0, start)).
struct SegmentEdge {
  int start = 0;
  int end = 0;
  int subword_id = -1;
  double log_prob = 0.0;
};

// All candidate segments of one word, ordered by (end, start).
class SegmentScores {
 public:
  SegmentScores() = default;
  // `edges` may come in any order; they are sorted here.
  SegmentScores(int length, std::vector<SegmentEdge> edges);

  int length() const { return length_; }
  size_t num_edges() const { return edges_.size(); }

  std::span<const SegmentEdge> ending_at(int end) const {
    return {edges_.data() + offsets_[end], edges_.data() + offsets_[end + 1]};
  }
  const std::vector<SegmentEdge>& edges() const { return edges_; }
  std::vector<SegmentEdge>& edges() { return edges_; }

 private:
  int length_ = 0;
  std::vector<SegmentEdge> edges_;
  std::vector<size_t> offsets_{0, 0};
};

// Candidate segments of `word` under `vocab`, with zero scores. Throws
// UnknownCharacterError, or DataError for empty words and words longer than
// kMaxLatticeWordLength.
SegmentScores BuildLattice(const SubwordVocab& vocab, std::u32string_view word);

inline double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

struct MarginalResult {
  double log_prob = kNegInf;
  bool ok = false;       // false when no segmentation covers the word
  size_t lookups = 0;    // score reads performed by the recursion
};

// log sum over segmentations of the product of segment probabilities.
MarginalResult LogMarginal(const SegmentScores& scores);

struct MarginalGradient {
  double log_prob = kNegInf;
  bool ok = false;
  // d log_prob / d edge.log_prob, aligned with scores.edges(); equals the
  // posterior probability that the edge is used.
  std::vector<double> edge_grad;
};

// Forward-backward over the lattice.
MarginalGradient LogMarginalGradient(const SegmentScores& scores);

struct ViterbiResult {
  Segmentation segmentation;
  double log_prob = kNegInf;
  bool ok = false;
};

// Best segmentation; among equal scores the smaller start index wins.
ViterbiResult ViterbiDecode(std::u32string_view word, const SegmentScores& scores);

// One run of the temperature sampler: at every position draw the start of
// the last segment from softmax(beta / temperature), set alpha to the chosen
// beta, then retrace from the end. Throws UsageError for temperature <= 0.
Segmentation SampleDecode(std::u32string_view word, const SegmentScores& scores,
                          double temperature, Rng& rng);

// Exact output distribution of SampleDecode, by enumerating every joint
// draw. Word length is limited to kSampleOracleMaxLength.
std::map<Segmentation, double> SampleDistribution(std::u32string_view word,
                                                  const SegmentScores& scores,
                                                  double temperature);

// Every segmentation of `word` into vocabulary entries, ordered by the
// bitmask of internal cut points (bit k = cut after character k + 1).
// Word length is limited to kEnumerationMaxLength.
std::vector<Segmentation> EnumerateSegmentations(std::u32string_view word,
                                                 const SubwordVocab& vocab);

}  // namespace selfseg

#endif  // SELFSEG_LATTICE_H_
