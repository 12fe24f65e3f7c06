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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "selfseg/bpe.h"
#include "selfseg/checkpoint.h"
#include "selfseg/error.h"
#include "selfseg/freqnorm.h"
#include "selfseg/lattice.h"
#include "selfseg/metrics.h"
#include "selfseg/pipeline.h"
#include "selfseg/scorer.h"
#include "selfseg/utf8.h"
#include "selfseg/vocab.h"

namespace py = pybind11;

namespace selfseg {
namespace {

using Pieces = std::vector<std::string>;

Pieces ToPieces(const Segmentation& seg) {
  Pieces out;
  for (const auto& s : seg.segments) out.push_back(utf8_encode(s));
  return out;
}

Segmentation FromPieces(const Pieces& pieces) {
  std::u32string word;
  std::vector<int> ends;
  for (const auto& p : pieces) {
    word += utf8_decode(p);
    ends.push_back(static_cast<int>(word.size()));
  }
  return Segmentation::FromBoundaries(word, ends);
}

WordFreqTable ToTable(const std::map<std::string, int64_t>& freqs) {
  WordFreqTable t;
  for (const auto& [w, f] : freqs) t.rows.push_back({w, f});
  t.SortCanonical();
  return t;
}

std::map<std::string, int64_t> FromTable(const WordFreqTable& t) {
  std::map<std::string, int64_t> out;
  for (const auto& r : t.rows) out[r.word] = r.freq;
  return out;
}

py::dict StatsDict(const SegmentStats& st) {
  py::dict d;
  d["lines"] = st.lines;
  d["tokens"] = st.tokens;
  d["subwords"] = st.subwords;
  d["distinct_words"] = st.distinct_words;
  d["scorer_calls"] = st.scorer_calls;
  d["fallback_words"] = st.fallback_words;
  d["cached_words"] = st.cached_words;
  d["subwords_per_sentence"] = st.SubwordsPerSentence();
  return d;
}

SegmentOptions Options(int threads, bool use_cache, const std::string& cache_path) {
  SegmentOptions o;
  o.threads = threads;
  o.use_cache = use_cache;
  o.cache_path = cache_path;
  return o;
}

}  // namespace
}  // namespace selfseg

PYBIND11_MODULE(_core, m) {
  using namespace selfseg;
  m.doc() = "Neural sub-word segmentation";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ModelMismatchError>(m, "ModelMismatchError", base.ptr());
  py::register_exception<NonFiniteLossError>(m, "NonFiniteLossError", base.ptr());
  (void)data;

  py::class_<SubwordVocab>(m, "Vocab")
      .def_static(
          "from_subwords",
          [](const std::vector<std::string>& subs) {
            std::vector<std::u32string> u;
            for (const auto& s : subs) u.push_back(utf8_decode(s));
            return SubwordVocab::FromSubwords(u);
          },
          py::arg("subwords"))
      .def_static("load", &LoadVocab, py::arg("path"))
      .def("save", [](const SubwordVocab& v, const std::string& path) { SaveVocab(v, path); },
           py::arg("path"))
      .def("__len__", &SubwordVocab::size)
      .def("__contains__",
           [](const SubwordVocab& v, const std::string& s) {
             return v.id_of(utf8_decode(s)).has_value();
           })
      .def("entries",
           [](const SubwordVocab& v) {
             std::vector<std::string> out;
             for (size_t i = 0; i < v.size(); ++i) out.push_back(utf8_encode(v.subword(static_cast<int>(i))));
             return out;
           })
      .def("valid_segments",
           [](const SubwordVocab& v, const std::string& word, int end) {
             return v.valid_segments(utf8_decode(word), end);
           },
           py::arg("word"), py::arg("end"))
      .def_property_readonly("max_subword_len", &SubwordVocab::max_subword_len)
      .def_property_readonly("hash", &SubwordVocab::Hash);

  m.def("build_bpe_vocab",
        [](const std::map<std::string, int64_t>& freqs, size_t size) {
          return BuildBpeVocab(ToTable(freqs), size);
        },
        py::arg("freqs"), py::arg("size"));

  m.def("count_words",
        [](const std::string& text) {
          std::istringstream in(text);
          return FromTable(CountWords(in));
        },
        py::arg("text"));
  m.def("normalize",
        [](const std::map<std::string, int64_t>& freqs, const std::string& strategy, int64_t d) {
          return FromTable(Normalize(ToTable(freqs), FreqNormalizer::Parse(strategy, d)));
        },
        py::arg("freqs"), py::arg("strategy"), py::arg("d") = 10);

  py::class_<ScorerConfig>(m, "ScorerConfig")
      .def(py::init<>())
      .def_static("light", &ScorerConfig::Light)
      .def_readwrite("enc_layers", &ScorerConfig::enc_layers)
      .def_readwrite("dec_layers", &ScorerConfig::dec_layers)
      .def_readwrite("model_dim", &ScorerConfig::model_dim)
      .def_readwrite("ff_dim", &ScorerConfig::ff_dim)
      .def_readwrite("heads", &ScorerConfig::heads)
      .def_readwrite("dropout", &ScorerConfig::dropout)
      .def_readwrite("warmup_steps", &ScorerConfig::warmup_steps)
      .def_readwrite("peak_lr", &ScorerConfig::peak_lr)
      .def_readwrite("epochs", &ScorerConfig::epochs)
      .def_readwrite("batch_tokens", &ScorerConfig::batch_tokens)
      .def_readwrite("seed", &ScorerConfig::seed);

  py::class_<Scorer>(m, "Scorer")
      .def(py::init<ScorerConfig, SubwordVocab>(), py::arg("config"), py::arg("vocab"))
      .def_static("load", &LoadParams, py::arg("path"), py::arg("vocab"))
      .def("save", [](const Scorer& s, const std::string& path) { SaveParams(s, path); },
           py::arg("path"))
      .def_property_readonly("vocab", &Scorer::vocab)
      .def_property_readonly("config", &Scorer::config)
      .def_property_readonly("params_hash", [](const Scorer& s) { return ParamsHash(s); })
      .def("log_marginal",
           [](const Scorer& s, const std::string& word) {
             const auto scores = s.ScoreSegments(utf8_decode(word));
             return LogMarginal(scores).log_prob;
           },
           py::arg("word"), py::call_guard<py::gil_scoped_release>())
      .def("segment",
           [](const Scorer& s, const std::string& word) {
             return ToPieces(Segmenter(s).Map(utf8_decode(word)));
           },
           py::arg("word"), py::call_guard<py::gil_scoped_release>())
      .def("sample",
           [](const Scorer& s, const std::string& word, int n, double t, uint64_t seed,
              uint64_t epoch) {
             std::vector<Pieces> out;
             for (const auto& seg : Segmenter(s).Sample(utf8_decode(word), {n, t, seed}, epoch)) {
               out.push_back(ToPieces(seg));
             }
             return out;
           },
           py::arg("word"), py::arg("n") = 10, py::arg("t") = 10.0, py::arg("seed") = 0,
           py::arg("epoch") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("train",
        [](const std::vector<std::string>& words, const SubwordVocab& vocab,
           const ScorerConfig& config, const std::string& mask, double mask_ratio,
           uint64_t mask_seed) {
          std::vector<Word> corpus;
          for (const auto& w : words) corpus.push_back(utf8_decode(w));
          MaskConfig mc;
          mc.strategy = ParseMaskStrategy(mask);
          mc.ratio = mask_ratio;
          mc.seed = mask_seed;
          py::gil_scoped_release release;
          TrainReport report;
          Scorer s = Train(corpus, vocab, config, mc, &report);
          return std::make_pair(std::move(s), report.epoch_losses);
        },
        py::arg("words"), py::arg("vocab"), py::arg("config"), py::arg("mask") = "charmass",
        py::arg("mask_ratio") = 0.5, py::arg("mask_seed") = 0);

  m.def("segment_text",
        [](const std::string& text, const Scorer& s, int threads) {
          std::istringstream in(text);
          std::ostringstream out;
          py::gil_scoped_release release;
          SegmentCorpus(in, out, s, Options(threads, true, ""));
          return out.str();
        },
        py::arg("text"), py::arg("scorer"), py::arg("threads") = 0);
  m.def("segment_text_regularized",
        [](const std::string& text, const Scorer& s, int n, double t, uint64_t seed,
           uint64_t epoch, int threads) {
          std::istringstream in(text);
          std::ostringstream out;
          py::gil_scoped_release release;
          SegmentCorpusRegularized(in, out, s, {n, t, seed}, epoch, Options(threads, true, ""));
          return out.str();
        },
        py::arg("text"), py::arg("scorer"), py::arg("n") = 10, py::arg("t") = 10.0,
        py::arg("seed") = 0, py::arg("epoch") = 1, py::arg("threads") = 0);
  m.def("segment_file",
        [](const std::string& in, const std::string& out, const Scorer& s, int threads,
           bool use_cache, const std::string& cache_path) {
          SegmentStats st;
          {
            py::gil_scoped_release release;
            st = SegmentCorpusFile(in, out, s, Options(threads, use_cache, cache_path));
          }
          return StatsDict(st);
        },
        py::arg("input"), py::arg("output"), py::arg("scorer"), py::arg("threads") = 0,
        py::arg("use_cache") = true, py::arg("cache_path") = "");
  m.def("stats",
        [](const std::string& text) {
          std::istringstream in(text);
          return StatsDict(ComputeStats(in));
        },
        py::arg("text"));

  m.def("dif_word",
        [](const std::vector<Pieces>& s1, const std::vector<Pieces>& s2, int nword) {
          std::vector<Segmentation> a, b;
          for (const auto& p : s1) a.push_back(FromPieces(p));
          for (const auto& p : s2) b.push_back(FromPieces(p));
          return DifWord(a, b, nword);
        },
        py::arg("s1"), py::arg("s2"), py::arg("nword"));
  m.def("dif_corpus",
        [](const std::map<std::string, double>& rates, const std::map<std::string, int64_t>& freqs) {
          return DifCorpus(rates, ToTable(freqs));
        },
        py::arg("rates"), py::arg("freqs"));
}
