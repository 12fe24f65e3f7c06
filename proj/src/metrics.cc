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

#include "selfseg/metrics.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "selfseg/corpus.h"
#include "selfseg/error.h"
#include "selfseg/utf8.h"

namespace selfseg {

double DifWord(std::span<const Segmentation> s1, std::span<const Segmentation> s2,
               int64_t nword) {
  if (nword <= 0) throw UsageError("DIF_word needs nword > 0");
  if (static_cast<int64_t>(s1.size()) != nword || static_cast<int64_t>(s2.size()) != nword) {
    throw DataError("DIF_word expects one segmentation per occurrence from each segmenter");
  }
  std::map<std::vector<int>, int64_t> counts_a;
  for (const auto& s : s1) ++counts_a[s.boundaries];
  int64_t agree = 0;
  for (const auto& s : s2) {
    auto it = counts_a.find(s.boundaries);
    if (it != counts_a.end()) agree += it->second;
  }
  const double pairs = static_cast<double>(s1.size()) * static_cast<double>(s2.size());
  return (pairs - static_cast<double>(agree)) / (static_cast<double>(nword) * static_cast<double>(nword));
}

double DifCorpus(const std::map<std::string, double>& per_word_rates, const WordFreqTable& freqs) {
  std::unordered_map<std::string, int64_t> freq_of;
  for (const auto& row : freqs.rows) freq_of[row.word] = row.freq;
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& [word, rate] : per_word_rates) {
    auto it = freq_of.find(word);
    if (it == freq_of.end()) throw DataError("no frequency for word '" + word + "'");
    weighted += rate * static_cast<double>(it->second);
    total += static_cast<double>(it->second);
  }
  if (total <= 0.0) throw UsageError("DIF_corpus needs at least one word with positive frequency");
  return weighted / total;
}

std::string_view FreqBandName(FreqBand band) {
  switch (band) {
    case FreqBand::kFrequent: return "frequent";
    case FreqBand::kRare: return "rare";
    case FreqBand::kOneShot: return "one-shot";
  }
  return "";
}

namespace {

struct Occurrences {
  std::vector<Segmentation> a, b;
};

std::string MostCommon(const std::vector<Segmentation>& segs) {
  std::map<std::vector<int>, std::pair<int64_t, size_t>> counts;  // count, first index
  for (size_t i = 0; i < segs.size(); ++i) {
    auto [it, fresh] = counts.emplace(segs[i].boundaries, std::make_pair(int64_t{0}, i));
    ++it->second.first;
  }
  size_t best = 0;
  int64_t best_count = -1;
  for (const auto& [key, value] : counts) {
    if (value.first > best_count || (value.first == best_count && value.second < best)) {
      best_count = value.first;
      best = value.second;
    }
  }
  return RenderPlus(segs[best]);
}

std::string FormatRate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

DiffReport BuildDiffReport(std::istream& seg_a, std::istream& seg_b, std::istream* original,
                           int64_t freq_split) {
  if (freq_split < 1) throw UsageError("frequency split must be at least 1");
  DiffReport report;
  report.freq_split = freq_split;
  std::map<std::string, Occurrences> occ;
  std::string line_a, line_b, line_o;
  size_t line_no = 0;
  while (true) {
    const bool has_a = static_cast<bool>(std::getline(seg_a, line_a));
    const bool has_b = static_cast<bool>(std::getline(seg_b, line_b));
    const bool has_o = original ? static_cast<bool>(std::getline(*original, line_o)) : has_a;
    if (!has_a && !has_b && !has_o) break;
    ++line_no;
    if (has_a != has_b || has_a != has_o) {
      throw ParseError("diff", line_no, "inputs have different numbers of lines");
    }
    auto words_a = ParseMarkedLine(line_a);
    auto words_b = ParseMarkedLine(line_b);
    if (words_a.size() != words_b.size()) {
      throw ParseError("diff", line_no, "segmented inputs disagree on the number of words");
    }
    std::vector<std::string_view> orig_tokens;
    if (original) {
      orig_tokens = SplitTokens(line_o);
      if (orig_tokens.size() != words_a.size()) {
        throw ParseError("diff", line_no, "segmented input does not match the original corpus");
      }
    }
    for (size_t k = 0; k < words_a.size(); ++k) {
      const std::string word = utf8_encode(words_a[k].word());
      if (utf8_encode(words_b[k].word()) != word ||
          (original && std::string(orig_tokens[k]) != word)) {
        throw ParseError("diff", line_no, "word " + std::to_string(k + 1) + " differs between inputs");
      }
      auto& o = occ[word];
      o.a.push_back(std::move(words_a[k]));
      o.b.push_back(std::move(words_b[k]));
    }
  }

  double weighted = 0.0, high_w = 0.0, low_w = 0.0;
  int64_t high_n = 0, low_n = 0;
  for (const auto& [word, o] : occ) {
    const auto nword = static_cast<int64_t>(o.a.size());
    const double dif = DifWord(o.a, o.b, nword);
    report.tokens += nword;
    weighted += dif * static_cast<double>(nword);
    if (nword > freq_split) {
      high_w += dif * static_cast<double>(nword);
      high_n += nword;
    } else {
      low_w += dif * static_cast<double>(nword);
      low_n += nword;
    }
    if (dif > 0.0) {
      DiffRow row;
      row.word = word;
      row.nword = nword;
      row.band = nword > freq_split ? FreqBand::kFrequent
                 : nword > 1        ? FreqBand::kRare
                                    : FreqBand::kOneShot;
      row.dif_word = dif;
      row.seg_a = MostCommon(o.a);
      row.seg_b = MostCommon(o.b);
      report.differing.push_back(std::move(row));
    }
  }
  report.types = occ.size();
  if (report.tokens > 0) report.dif_corpus = weighted / static_cast<double>(report.tokens);
  if (high_n > 0) report.dif_high = high_w / static_cast<double>(high_n);
  if (low_n > 0) report.dif_low = low_w / static_cast<double>(low_n);
  std::sort(report.differing.begin(), report.differing.end(), [](const DiffRow& x, const DiffRow& y) {
    if (x.band != y.band) return x.band < y.band;
    if (x.nword != y.nword) return x.nword > y.nword;
    return x.word < y.word;
  });
  return report;
}

std::string RenderDiffMarkdown(const DiffReport& r) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? FormatRate(*v) : std::string("n/a"); };
  out << "# Segmentation differences\n\n";
  out << "| scope | DIF_corpus |\n|---|---|\n";
  out << "| all (" << r.types << " types, " << r.tokens << " tokens) | " << FormatRate(r.dif_corpus) << " |\n";
  out << "| nword > " << r.freq_split << " | " << opt(r.dif_high) << " |\n";
  out << "| nword <= " << r.freq_split << " | " << opt(r.dif_low) << " |\n";
  for (FreqBand band : {FreqBand::kFrequent, FreqBand::kRare, FreqBand::kOneShot}) {
    std::vector<const DiffRow*> rows;
    for (const auto& row : r.differing) {
      if (row.band == band) rows.push_back(&row);
    }
    if (rows.empty()) continue;
    out << "\n## " << FreqBandName(band) << "\n\n";
    out << "| word | nword | DIF_word | A | B |\n|---|---|---|---|---|\n";
    for (const auto* row : rows) {
      out << "| " << row->word << " | " << row->nword << " | " << FormatRate(row->dif_word) << " | "
          << row->seg_a << " | " << row->seg_b << " |\n";
    }
  }
  return out.str();
}

std::string RenderDiffCsv(const DiffReport& r) {
  std::ostringstream out;
  out << "word,nword,band,dif_word,seg_a,seg_b\n";
  for (const auto& row : r.differing) {
    out << CsvField(row.word) << ',' << row.nword << ',' << FreqBandName(row.band) << ','
        << FormatRate(row.dif_word) << ',' << CsvField(row.seg_a) << ',' << CsvField(row.seg_b) << '\n';
  }
  return out.str();
}

}  // namespace selfseg
