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

#include "selfseg/pipeline.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <iterator>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "selfseg/checkpoint.h"
#include "selfseg/corpus.h"
#include "selfseg/error.h"
#include "selfseg/lattice.h"
#include "selfseg/utf8.h"

namespace selfseg {

int ThreadCountFromEnv() {
  const char* value = std::getenv(kThreadsEnvVar);
  if (value == nullptr) return 1;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (end == value || *end != '\0' || n < 1) return 1;
  return static_cast<int>(std::min(n, 256L));
}

void SamplerConfig::Validate() const {
  if (n < 1) throw UsageError("sampler N must be at least 1");
  if (!(temperature > 0.0)) throw UsageError("sampler temperature must be positive");
}

nlohmann::json SegmentStats::ToJson() const {
  return {{"lines", lines},
          {"tokens", tokens},
          {"subwords", subwords},
          {"subwords_per_sentence", SubwordsPerSentence()},
          {"distinct_words", distinct_words},
          {"scorer_calls", scorer_calls},
          {"fallback_words", fallback_words},
          {"cached_words", cached_words},
          {"wall_seconds", wall_seconds}};
}

// ---------------------------------------------------------------------------
// Segmenter

bool Segmenter::NeedsFallback(const Word& word) const {
  return word.size() > static_cast<size_t>(kMaxLatticeWordLength) ||
         !scorer_.vocab().UnknownCharacters(word).empty();
}

Segmentation Segmenter::Map(const Word& word, bool* fallback) const {
  if (fallback) *fallback = false;
  if (word.empty()) return {};
  if (NeedsFallback(word)) {
    if (fallback) *fallback = true;
    return Segmentation::Characters(word);
  }
  ++calls_;
  ViterbiResult best = ViterbiDecode(word, scorer_.ScoreSegments(word));
  if (!best.ok) throw DataError("no segmentation covers '" + utf8_encode(word) + "'");
  return best.segmentation;
}

std::vector<Segmentation> Segmenter::Sample(const Word& word, const SamplerConfig& config,
                                            uint64_t epoch, bool* fallback) const {
  config.Validate();
  if (fallback) *fallback = false;
  if (word.empty()) return {Segmentation{}};
  if (NeedsFallback(word)) {
    if (fallback) *fallback = true;
    return {Segmentation::Characters(word)};
  }
  ++calls_;
  const SegmentScores scores = scorer_.ScoreSegments(word);
  Rng rng = make_rng({config.seed, epoch, fnv1a64(utf8_encode(word))});
  std::vector<Segmentation> out;
  out.reserve(config.n);
  for (int k = 0; k < config.n; ++k) out.push_back(SampleDecode(word, scores, config.temperature, rng));
  return out;
}

// ---------------------------------------------------------------------------
// Corpus rewriting

namespace {

constexpr std::string_view kCacheHeader = "#selfseg-cache v1";

struct TokenSpan {
  size_t offset;
  size_t length;
};

struct CorpusLine {
  size_t begin;
  size_t end;  // excludes the '\n'
  bool has_newline;
  std::vector<TokenSpan> tokens;
};

std::vector<CorpusLine> ScanLines(const std::string& text) {
  std::vector<CorpusLine> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    const bool has_nl = nl != std::string::npos;
    if (!has_nl) nl = text.size();
    CorpusLine line{pos, nl, has_nl, {}};
    size_t i = pos;
    while (i < nl) {
      while (i < nl && IsCorpusSpace(text[i])) ++i;
      size_t j = i;
      while (j < nl && !IsCorpusSpace(text[j])) ++j;
      if (j > i) line.tokens.push_back({i, j - i});
      i = j;
    }
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

using DecodeFn = std::function<std::vector<Segmentation>(const Word&, bool*)>;
using PickFn = std::function<size_t(size_t line, size_t token, size_t candidates)>;

using CacheMap = std::unordered_map<std::string, std::vector<Segmentation>>;

CacheMap ReadCache(const std::string& path, const std::string& key) {
  CacheMap cache;
  std::ifstream in(path, std::ios::binary);
  if (!in) return cache;
  std::string line;
  if (!std::getline(in, line) || line != std::string(kCacheHeader) + "\t" + key) return cache;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (size_t tab; (tab = rest.find('\t')) != std::string_view::npos; rest.remove_prefix(tab + 1)) {
      fields.push_back(rest.substr(0, tab));
    }
    fields.push_back(rest);
    if (fields.size() < 2 || fields[0].empty()) throw ParseError(path, line_no, "malformed cache entry");
    std::vector<Segmentation> segs;
    try {
      const Word word = utf8_decode(fields[0]);
      for (size_t k = 1; k < fields.size(); ++k) {
        auto parsed = ParseMarkedLine(fields[k]);
        if (parsed.size() != 1 || parsed[0].word() != word) {
          throw DataError("segmentation does not spell the word");
        }
        segs.push_back(std::move(parsed[0]));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(path, line_no, e.what());
    }
    cache.emplace(std::string(fields[0]), std::move(segs));
  }
  return cache;
}

void WriteCache(const std::string& path, const std::string& key,
                const std::vector<std::string_view>& words,
                const std::vector<std::vector<Segmentation>>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << kCacheHeader << '\t' << key << '\n';
  for (size_t i = 0; i < words.size(); ++i) {
    out << words[i];
    for (const auto& seg : results[i]) out << '\t' << RenderMarked(seg);
    out << '\n';
  }
}

// Runs `fn(i)` for i in [0, n) on `threads` workers; rethrows the first
// failure after all workers stop.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const size_t count = std::min<size_t>(static_cast<size_t>(threads), n);
  for (size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SegmentStats RewriteCorpus(std::istream& in, std::ostream& out, const Segmenter& segmenter,
                           const DecodeFn& decode, const PickFn& pick,
                           const SegmentOptions& options, const std::string& cache_key) {
  const auto started = std::chrono::steady_clock::now();
  const size_t calls_before = segmenter.scorer_calls();
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::vector<CorpusLine> lines = ScanLines(text);

  SegmentStats stats;
  stats.lines = lines.size();

  // One decoding job per distinct word, or per occurrence without caching.
  std::vector<std::string_view> jobs;
  std::vector<std::vector<uint32_t>> job_of(lines.size());
  std::unordered_map<std::string_view, uint32_t> distinct;
  for (size_t l = 0; l < lines.size(); ++l) {
    for (const auto& tok : lines[l].tokens) {
      std::string_view word(text.data() + tok.offset, tok.length);
      if (word.find(kContinuationMarker) != std::string_view::npos) {
        throw ParseError("input", l + 1, "token '" + std::string(word) +
                                             "' contains the reserved continuation marker '@@'");
      }
      ++stats.tokens;
      auto [it, fresh] = distinct.emplace(word, static_cast<uint32_t>(jobs.size()));
      if (!options.use_cache) {
        job_of[l].push_back(static_cast<uint32_t>(jobs.size()));
        jobs.push_back(word);
      } else {
        if (fresh) jobs.push_back(word);
        job_of[l].push_back(it->second);
      }
    }
  }
  stats.distinct_words = distinct.size();

  std::vector<std::vector<Segmentation>> results(jobs.size());
  std::vector<char> done(jobs.size(), 0);
  std::vector<char> fell_back(jobs.size(), 0);
  const bool sidecar = options.use_cache && !options.cache_path.empty();
  if (sidecar) {
    CacheMap cache = ReadCache(options.cache_path, cache_key);
    for (size_t i = 0; i < jobs.size(); ++i) {
      auto it = cache.find(std::string(jobs[i]));
      if (it == cache.end()) continue;
      results[i] = std::move(it->second);
      done[i] = 1;
      ++stats.cached_words;
    }
  }

  const int threads = options.threads > 0 ? options.threads : ThreadCountFromEnv();
  ParallelFor(jobs.size(), threads, [&](size_t i) {
    if (done[i]) return;
    bool fallback = false;
    results[i] = decode(utf8_decode(jobs[i]), &fallback);
    fell_back[i] = fallback ? 1 : 0;
  });
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (fell_back[i]) ++stats.fallback_words;
  }
  if (sidecar) WriteCache(options.cache_path, cache_key, jobs, results);

  std::string buffer;
  for (size_t l = 0; l < lines.size(); ++l) {
    const auto& line = lines[l];
    buffer.clear();
    size_t cursor = line.begin;
    for (size_t t = 0; t < line.tokens.size(); ++t) {
      const auto& tok = line.tokens[t];
      buffer.append(text, cursor, tok.offset - cursor);
      const auto& candidates = results[job_of[l][t]];
      const size_t pick_index = candidates.size() == 1 ? 0 : pick(l, t, candidates.size());
      const Segmentation& seg = candidates[pick_index];
      buffer += RenderMarked(seg);
      stats.subwords += seg.size();
      cursor = tok.offset + tok.length;
    }
    buffer.append(text, cursor, line.end - cursor);
    if (line.has_newline) buffer += '\n';
    out << buffer;
  }
  out.flush();

  stats.scorer_calls = segmenter.scorer_calls() - calls_before;
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

std::string ModelKey(const Scorer& scorer) {
  return "params=" + ParamsHash(scorer) + " vocab=" + scorer.vocab().Hash();
}

template <typename Fn>
SegmentStats WithFiles(const std::string& in_path, const std::string& out_path, Fn&& fn) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + in_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + out_path);
  SegmentStats stats = fn(in, out);
  if (!out) throw DataError("failed writing " + out_path);
  return stats;
}

}  // namespace

SegmentStats SegmentCorpus(std::istream& in, std::ostream& out, const Scorer& scorer,
                           const SegmentOptions& options) {
  Segmenter segmenter(scorer);
  auto decode = [&](const Word& w, bool* fallback) {
    return std::vector<Segmentation>{segmenter.Map(w, fallback)};
  };
  auto pick = [](size_t, size_t, size_t) -> size_t { return 0; };
  const std::string key = options.cache_path.empty() ? "" : ModelKey(scorer) + " mode=map";
  return RewriteCorpus(in, out, segmenter, decode, pick, options, key);
}

SegmentStats SegmentCorpusFile(const std::string& in_path, const std::string& out_path,
                               const Scorer& scorer, const SegmentOptions& options) {
  return WithFiles(in_path, out_path, [&](std::istream& in, std::ostream& out) {
    return SegmentCorpus(in, out, scorer, options);
  });
}

SegmentStats SegmentCorpusRegularized(std::istream& in, std::ostream& out, const Scorer& scorer,
                                      const SamplerConfig& config, uint64_t epoch,
                                      const SegmentOptions& options) {
  config.Validate();
  Segmenter segmenter(scorer);
  auto decode = [&](const Word& w, bool* fallback) {
    return segmenter.Sample(w, config, epoch, fallback);
  };
  auto pick = [&](size_t line, size_t token, size_t candidates) {
    Rng rng = make_rng({config.seed, epoch, static_cast<uint64_t>(line),
                        static_cast<uint64_t>(token), 0x7069636B});
    return uniform_index(rng, candidates);
  };
  std::string key;
  if (!options.cache_path.empty()) {
    char t[64];
    std::snprintf(t, sizeof(t), "%.17g", config.temperature);
    key = ModelKey(scorer) + " mode=sample n=" + std::to_string(config.n) + " t=" + t +
          " seed=" + std::to_string(config.seed) + " epoch=" + std::to_string(epoch);
  }
  return RewriteCorpus(in, out, segmenter, decode, pick, options, key);
}

SegmentStats SegmentCorpusRegularizedFile(const std::string& in_path, const std::string& out_path,
                                          const Scorer& scorer, const SamplerConfig& config,
                                          uint64_t epoch, const SegmentOptions& options) {
  return WithFiles(in_path, out_path, [&](std::istream& in, std::ostream& out) {
    return SegmentCorpusRegularized(in, out, scorer, config, epoch, options);
  });
}

SegmentStats ComputeStats(std::istream& segmented) {
  SegmentStats stats;
  std::unordered_set<std::string> distinct;
  std::string line;
  size_t line_no = 0;
  while (std::getline(segmented, line)) {
    ++line_no;
    ++stats.lines;
    std::vector<Segmentation> words;
    try {
      words = ParseMarkedLine(line);
    } catch (const DataError& e) {
      throw ParseError("segmented corpus", line_no, e.what());
    }
    for (const auto& w : words) {
      ++stats.tokens;
      stats.subwords += w.size();
      distinct.insert(utf8_encode(w.word()));
    }
  }
  stats.distinct_words = distinct.size();
  return stats;
}

SegmentStats ComputeStatsFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ComputeStats(in);
}

}  // namespace selfseg
