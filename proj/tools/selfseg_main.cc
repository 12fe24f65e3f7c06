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

// selfseg command-line tool.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "selfseg/bpe.h"
#include "selfseg/checkpoint.h"
#include "selfseg/corpus.h"
#include "selfseg/error.h"
#include "selfseg/freqnorm.h"
#include "selfseg/masking.h"
#include "selfseg/metrics.h"
#include "selfseg/pipeline.h"
#include "selfseg/scorer.h"
#include "selfseg/utf8.h"
#include "selfseg/vocab.h"

namespace {

using namespace selfseg;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kMismatch = 3 };

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

std::vector<Word> ReadWords(const std::string& path) {
  std::ifstream in = OpenInput(path);
  std::vector<Word> words;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (std::string_view tok : SplitTokens(line)) {
      try {
        words.push_back(utf8_decode(tok));
      } catch (const DataError& e) {
        throw ParseError(path, line_no, e.what());
      }
    }
  }
  return words;
}

void PrintStats(const SegmentStats& stats, const std::string& stats_out) {
  const std::string text = stats.ToJson().dump(2) + "\n";
  if (stats_out.empty()) {
    std::cerr << text;
  } else {
    OpenOutput(stats_out) << text;
  }
}

void AddModelFlags(CLI::App* cmd, ScorerConfig& cfg, bool& light) {
  cmd->add_flag("--light", light, "1 encoder and 1 decoder layer");
  cmd->add_option("--enc-layers", cfg.enc_layers, "encoder layers");
  cmd->add_option("--dec-layers", cfg.dec_layers, "decoder layers");
  cmd->add_option("--dim", cfg.model_dim, "model dimension");
  cmd->add_option("--ff-dim", cfg.ff_dim, "feed-forward dimension");
  cmd->add_option("--heads", cfg.heads, "attention heads");
  cmd->add_option("--dropout", cfg.dropout, "dropout rate");
  cmd->add_option("--warmup", cfg.warmup_steps, "warmup steps");
  cmd->add_option("--lr", cfg.peak_lr, "peak learning rate");
  cmd->add_option("--batch-tokens", cfg.batch_tokens, "characters per batch");
}

int Run(int argc, char** argv) {
  CLI::App app{"selfseg: self-supervised neural sub-word segmentation"};
  app.require_subcommand(1);

  // count
  std::string count_in, count_out;
  auto* count = app.add_subcommand("count", "count word frequencies of a tokenized corpus");
  count->add_option("--input", count_in, "tokenized corpus")->required();
  count->add_option("--out", count_out, "freq.tsv output")->required();

  // build-vocab
  std::string bv_in, bv_out;
  size_t bv_size = 0;
  auto* build_vocab = app.add_subcommand("build-vocab", "build a BPE sub-word vocabulary");
  build_vocab->add_option("--input", bv_in, "freq.tsv")->required();
  build_vocab->add_option("--size", bv_size, "vocabulary size including specials")->required();
  build_vocab->add_option("--out", bv_out, "vocab.txt output")->required();

  // normalize
  std::string nm_strategy = "threshold", nm_in, nm_corpus, nm_out;
  int64_t nm_d = 10;
  bool nm_materialize = false;
  uint64_t nm_seed = 0;
  auto* normalize = app.add_subcommand("normalize", "normalize word frequencies");
  normalize->add_option("--strategy", nm_strategy, "threshold, sqrt, log or one");
  normalize->add_option("--d", nm_d, "threshold divisor");
  auto* nm_in_opt = normalize->add_option("--input", nm_in, "freq.tsv");
  auto* nm_corpus_opt = normalize->add_option("--corpus", nm_corpus, "tokenized corpus");
  nm_in_opt->excludes(nm_corpus_opt);
  normalize->add_option("--out", nm_out, "output path")->required();
  normalize->add_flag("--materialize", nm_materialize,
                      "write a shuffled word list instead of a frequency table");
  normalize->add_option("--seed", nm_seed, "shuffle seed");

  // train
  std::string tr_corpus, tr_vocab, tr_out, tr_mask = "charmass", tr_ckpt_dir;
  MaskConfig tr_mask_cfg;
  bool tr_non_consecutive = false, tr_light = false;
  ScorerConfig tr_cfg;
  auto* train = app.add_subcommand("train", "train a segmenter");
  train->add_option("--corpus", tr_corpus, "word list (whitespace separated)")->required();
  train->add_option("--vocab", tr_vocab, "vocab.txt")->required();
  train->add_option("--out", tr_out, "model output")->required();
  train->add_option("--mask", tr_mask, "charmass, subwordmass, subwordmask or none");
  train->add_option("--mask-ratio", tr_mask_cfg.ratio, "fraction of characters masked");
  train->add_flag("--non-consecutive", tr_non_consecutive, "mask scattered characters");
  train->add_option("--subword-mask-prob", tr_mask_cfg.subword_mask_prob,
                    "per-sub-word masking probability");
  train->add_option("--epochs", tr_cfg.epochs, "training epochs");
  train->add_option("--seed", tr_cfg.seed, "training seed");
  train->add_option("--checkpoint-dir", tr_ckpt_dir, "write a checkpoint after each epoch");
  AddModelFlags(train, tr_cfg, tr_light);

  // segment
  std::string sg_model, sg_vocab, sg_in, sg_out, sg_cache, sg_stats;
  bool sg_no_cache = false;
  auto* segment = app.add_subcommand("segment", "MAP segmentation of a corpus");
  // segment-reg
  SamplerConfig rg_cfg;
  uint64_t rg_epoch = 0;
  auto* segment_reg = app.add_subcommand("segment-reg", "sampled segmentation for one epoch");
  for (auto* cmd : {segment, segment_reg}) {
    cmd->add_option("--model", sg_model, "trained model")->required();
    cmd->add_option("--vocab", sg_vocab, "vocab.txt")->required();
    cmd->add_option("--input", sg_in, "tokenized corpus")->required();
    cmd->add_option("--out", sg_out, "segmented output")->required();
    cmd->add_option("--cache", sg_cache, "persistent decode cache");
    cmd->add_flag("--no-cache", sg_no_cache, "decode every token occurrence");
    cmd->add_option("--stats-out", sg_stats, "write run statistics as JSON");
  }
  segment_reg->add_option("--n", rg_cfg.n, "samples per word");
  segment_reg->add_option("--t", rg_cfg.temperature, "sampling temperature");
  segment_reg->add_option("--epoch", rg_epoch, "epoch index");
  segment_reg->add_option("--seed", rg_cfg.seed, "sampling seed");

  // stats
  std::string st_in;
  auto* stats = app.add_subcommand("stats", "statistics of a segmented corpus");
  stats->add_option("--input", st_in, "segmented corpus")->required();

  // diff
  std::string df_a, df_b, df_orig, df_out, df_csv;
  int64_t df_split = 5;
  auto* diff = app.add_subcommand("diff", "compare two segmented corpora");
  diff->add_option("--a", df_a, "segmented corpus A")->required();
  diff->add_option("--b", df_b, "segmented corpus B")->required();
  diff->add_option("--orig", df_orig, "original corpus");
  diff->add_option("--freq-split", df_split, "frequent words have count above this");
  diff->add_option("--out", df_out, "Markdown report (default stdout)");
  diff->add_option("--csv", df_csv, "CSV output (default <out>.csv, or none)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*count) {
    WriteFreqTable(CountWordsInFile(count_in), count_out);
  } else if (*build_vocab) {
    SaveVocab(BuildBpeVocab(ReadFreqTable(bv_in), bv_size), bv_out);
  } else if (*normalize) {
    if (nm_in.empty() == nm_corpus.empty()) throw UsageError("give exactly one of --input or --corpus");
    const FreqNormalizer norm = FreqNormalizer::Parse(nm_strategy, nm_d);
    const WordFreqTable table = nm_in.empty() ? CountWordsInFile(nm_corpus) : ReadFreqTable(nm_in);
    const WordFreqTable normalized = Normalize(table, norm);
    if (nm_materialize) {
      Rng rng = make_rng({nm_seed});
      std::ofstream out = OpenOutput(nm_out);
      for (const auto& w : Materialize(normalized, rng)) out << w << '\n';
    } else {
      WriteFreqTable(normalized, nm_out);
    }
  } else if (*train) {
    ScorerConfig cfg = tr_cfg;
    if (tr_light) {
      cfg.enc_layers = std::min(cfg.enc_layers, 1);
      cfg.dec_layers = std::min(cfg.dec_layers, 1);
    }
    cfg.Validate();
    MaskConfig mask = tr_mask_cfg;
    mask.strategy = ParseMaskStrategy(tr_mask);
    mask.consecutive = !tr_non_consecutive;
    mask.seed = cfg.seed;
    mask.Validate();
    const SubwordVocab vocab = LoadVocab(tr_vocab);
    const std::vector<Word> words = ReadWords(tr_corpus);
    if (!tr_ckpt_dir.empty()) std::filesystem::create_directories(tr_ckpt_dir);
    TrainReport report;
    const Scorer scorer = Train(words, vocab, cfg, mask, &report,
                                [&](int epoch, const Scorer& s, double loss) {
                                  std::fprintf(stderr, "epoch %d loss %.6f\n", epoch, loss);
                                  if (!tr_ckpt_dir.empty()) {
                                    SaveParams(s, tr_ckpt_dir + "/epoch" +
                                                      std::to_string(epoch) + ".bin");
                                  }
                                });
    if (report.skipped_words > 0) {
      std::fprintf(stderr, "skipped %zu words (unknown characters or too long)\n",
                   report.skipped_words);
    }
    SaveParams(scorer, tr_out);
  } else if (*segment || *segment_reg) {
    const SubwordVocab vocab = LoadVocab(sg_vocab);
    const Scorer scorer = LoadParams(sg_model, vocab);
    SegmentOptions opts;
    opts.use_cache = !sg_no_cache;
    opts.cache_path = sg_cache;
    if (sg_no_cache && !sg_cache.empty()) throw UsageError("--cache conflicts with --no-cache");
    const SegmentStats result =
        *segment ? SegmentCorpusFile(sg_in, sg_out, scorer, opts)
                 : SegmentCorpusRegularizedFile(sg_in, sg_out, scorer, rg_cfg, rg_epoch, opts);
    if (result.fallback_words > 0) {
      std::fprintf(stderr, "warning: %zu distinct words fell back to characters\n",
                   result.fallback_words);
    }
    PrintStats(result, sg_stats);
  } else if (*stats) {
    nlohmann::json j = ComputeStatsFile(st_in).ToJson();
    j.erase("scorer_calls");
    j.erase("fallback_words");
    j.erase("cached_words");
    j.erase("wall_seconds");
    std::cout << j.dump(2) << '\n';
  } else if (*diff) {
    std::ifstream a = OpenInput(df_a), b = OpenInput(df_b);
    std::ifstream orig;
    if (!df_orig.empty()) orig = OpenInput(df_orig);
    const DiffReport report = BuildDiffReport(a, b, df_orig.empty() ? nullptr : &orig, df_split);
    if (df_out.empty()) {
      std::cout << RenderDiffMarkdown(report);
    } else {
      OpenOutput(df_out) << RenderDiffMarkdown(report);
      if (df_csv.empty()) df_csv = df_out + ".csv";
    }
    if (!df_csv.empty()) OpenOutput(df_csv) << RenderDiffCsv(report);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "selfseg: " << e.what() << '\n';
    return kUsage;
  } catch (const ModelMismatchError& e) {
    std::cerr << "selfseg: " << e.what() << '\n';
    return kMismatch;
  } catch (const DataError& e) {
    std::cerr << "selfseg: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "selfseg: " << e.what() << '\n';
    return kData;
  }
}
