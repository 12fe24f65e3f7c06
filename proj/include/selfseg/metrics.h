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

#ifndef SELFSEG_METRICS_H_
#define SELFSEG_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfseg/segmentation.h"
#include "selfseg/vocab.h"

namespace selfseg {

// Word difference rate: the number of (i, j) pairs with s1[i] != s2[j],
// divided by nword^2. Segmentations compare by boundary positions.
// Throws UsageError for nword == 0 and DataError when a list does not
// hold nword entries.
double DifWord(std::span<const Segmentation> s1, std::span<const Segmentation> s2,
               int64_t nword);

// Corpus difference rate: per-word rates weighted by word frequency.
// Every rated word must appear in `freqs`.
double DifCorpus(const std::map<std::string, double>& per_word_rates,
                 const WordFreqTable& freqs);

enum class FreqBand { kFrequent, kRare, kOneShot };

std::string_view FreqBandName(FreqBand band);

struct DiffRow {
  std::string word;
  int64_t nword = 0;
  FreqBand band = FreqBand::kOneShot;
  double dif_word = 0.0;
  std::string seg_a;  // most common segmentation of the word in A
  std::string seg_b;
};

struct DiffReport {
  int64_t freq_split = 5;
  size_t types = 0;
  int64_t tokens = 0;
  double dif_corpus = 0.0;
  // Words with nword > freq_split, and the rest; empty when a band has no
  // words.
  std::optional<double> dif_high;
  std::optional<double> dif_low;
  std::vector<DiffRow> differing;  // only words with DIF_word > 0
};

// Aligns two marker-segmented versions of one corpus word by word. With
// `original`, both must reconstruct it token for token. Bands: frequent
// (nword > freq_split), rare (1 < nword <= freq_split), one-shot.
DiffReport BuildDiffReport(std::istream& seg_a, std::istream& seg_b, std::istream* original,
                           int64_t freq_split);

std::string RenderDiffMarkdown(const DiffReport& report);
std::string RenderDiffCsv(const DiffReport& report);

}  // namespace selfseg

#endif  // SELFSEG_METRICS_H_
