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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "selfseg/checkpoint.h"
#include "selfseg/error.h"
#include "selfseg/lattice.h"
#include "selfseg/scorer.h"
#include "test_util.h"

namespace selfseg {
namespace {

using testing::U;
using testing::Vocab;

ScorerConfig Tiny(int dim = 4, int heads = 2, int layers = 1) {
  ScorerConfig cfg;
  cfg.enc_layers = layers;
  cfg.dec_layers = layers;
  cfg.model_dim = dim;
  cfg.ff_dim = 2 * dim;
  cfg.heads = heads;
  cfg.dropout = 0.0;
  cfg.warmup_steps = 10;
  cfg.peak_lr = 1e-2;
  cfg.batch_tokens = 64;
  cfg.seed = 5;
  return cfg;
}

template <typename S>
void ZeroProjection(BasicScorer<S>& scorer) {
  auto& params = scorer.network().params();
  params[*params.Find("projection.weight")].value.setZero();
  params[*params.Find("projection.bias")].value.setZero();
}

TrainBatch Batch(const std::vector<Word>& words) {
  TrainBatch b;
  for (const auto& w : words) b.examples.push_back(NoMask(w));
  return b;
}

template <typename S>
bool SameParams(const nn::ParameterSet<S>& a, const nn::ParameterSet<S>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].value != b[i].value) return false;
  }
  return true;
}

TEST(ScoreSegments, ZeroedOutputIsUniform) {
  const auto vocab = Vocab({"a", "b", "ab", "ba"});
  Scorer scorer(Tiny(), vocab);
  ZeroProjection(scorer);
  const auto scores = scorer.ScoreSegments(U"abba");
  EXPECT_GT(scores.num_edges(), 4u);
  for (const auto& e : scores.edges()) {
    EXPECT_NEAR(e.log_prob, -std::log(static_cast<double>(vocab.size())), 1e-6);
  }
}

TEST(ScoreSegments, SingleCharacterHasOneEdge) {
  const Scorer scorer(Tiny(), Vocab({"a", "b", "ab"}));
  const auto scores = scorer.ScoreSegments(U"a");
  ASSERT_EQ(scores.num_edges(), 1u);
  EXPECT_EQ(scores.edges()[0].start, 0);
  EXPECT_EQ(scores.edges()[0].end, 1);
  EXPECT_LT(scores.edges()[0].log_prob, 0.0);
}

TEST(ScoreSegments, UnknownCharacterRejected) {
  const Scorer scorer(Tiny(), Vocab({"a"}));
  EXPECT_THROW(scorer.ScoreSegments(U"ax"), UnknownCharacterError);
}

TEST(ScoreSegments, DecodeIsDeterministic) {
  ScorerConfig cfg = Tiny(8, 2, 2);
  cfg.dropout = 0.3;
  const Scorer scorer(cfg, Vocab({"a", "b", "c", "ab", "bc"}));
  const auto first = scorer.ScoreSegments(U"abcab");
  const auto second = scorer.ScoreSegments(U"abcab");
  ASSERT_EQ(first.num_edges(), second.num_edges());
  for (size_t i = 0; i < first.num_edges(); ++i) {
    EXPECT_EQ(first.edges()[i].log_prob, second.edges()[i].log_prob);
  }
}

TEST(ScoreSegments, MaskChangesEncoderInputOnly) {
  const Scorer scorer(Tiny(), Vocab({"a", "b", "ab"}));
  MaskedWord masked{U"ab", Word{kMaskChar, U'b'}, {0}};
  const auto plain = scorer.ScoreSegments(U"ab");
  const auto with_mask = scorer.ScoreSegments(masked);
  ASSERT_EQ(plain.num_edges(), with_mask.num_edges());
  bool differs = false;
  for (size_t i = 0; i < plain.num_edges(); ++i) differs |= plain.edges()[i].log_prob != with_mask.edges()[i].log_prob;
  EXPECT_TRUE(differs);
}

TEST(Loss, UniformScorerClosedForm) {
  const auto vocab = Vocab({"a", "b", "ab"});
  BasicScorer<double> scorer(Tiny(), vocab);
  ZeroProjection(scorer);
  const double v = static_cast<double>(vocab.size());
  // Paths a+b and ab.
  EXPECT_NEAR(scorer.Loss(Batch({U"ab"})), -std::log(1.0 / (v * v) + 1.0 / v), 1e-12);
  // Paths a+b+c, ab+c, a+bc: two two-piece paths.
  BasicScorer<double> abc(Tiny(), Vocab({"a", "b", "c", "ab", "bc"}));
  ZeroProjection(abc);
  const double w = 9.0;
  EXPECT_NEAR(abc.Loss(Batch({U"abc"})), -std::log(1.0 / (w * w * w) + 2.0 / (w * w)), 1e-12);
}

TEST(Loss, SingleCharacterWordsAverageNegativeLogSoftmax) {
  const BasicScorer<double> scorer(Tiny(), Vocab({"a", "b", "c"}));
  double expected = 0.0;
  for (auto w : {U"a", U"b", U"c", U"a"}) expected -= scorer.ScoreSegments(Word(w)).edges()[0].log_prob;
  EXPECT_NEAR(scorer.Loss(Batch({U"a", U"b", U"c", U"a"})), expected / 4, 1e-12);
}

TEST(Loss, ClosedUniverseMassAtMostOne) {
  const auto vocab = Vocab({"a", "b"});
  BasicScorer<double> scorer(Tiny(), vocab);
  std::vector<Word> words;
  for (int len = 1; len <= 3; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      Word w;
      for (int i = 0; i < len; ++i) w.push_back(mask & (1 << i) ? U'b' : U'a');
      words.push_back(w);
    }
  }
  ASSERT_EQ(words.size(), 14u);
  for (const auto& w : words) {
    EXPECT_LE(std::exp(LogMarginal(scorer.ScoreSegments(w)).log_prob), 1.0);
  }
  // Each row of the network output is a normalized distribution.
  const auto& net = scorer.network();
  const auto rows = net.Forward({4, 5, 4}, {1, 4, 5}, nullptr, {});
  for (Eigen::Index r = 0; r < rows.rows(); ++r) EXPECT_NEAR(rows.row(r).array().exp().sum(), 1.0, 1e-12);
}

// Central differences for every scalar in the model.
void CheckGradients(BasicScorer<double>& scorer, const TrainBatch& batch) {
  auto& params = scorer.network().params();
  scorer.LossAndGradient(batch, nn::ForwardContext{});
  std::vector<nn::Matrix<double>> analytic;
  for (size_t p = 0; p < params.size(); ++p) analytic.push_back(params[p].grad);
  const double h = 1e-4;
  for (size_t p = 0; p < params.size(); ++p) {
    auto& value = params[p].value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + h;
      const double up = scorer.Loss(batch);
      value.data()[i] = saved - h;
      const double down = scorer.Loss(batch);
      value.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[p].data()[i];
      const double scale = std::max({std::abs(numeric), std::abs(a), 1e-4});
      EXPECT_LE(std::abs(a - numeric), 1e-3 * scale) << params[p].name << "[" << i << "]";
    }
  }
}

TEST(Gradient, TwoDimModelThreeCharWord) {
  BasicScorer<double> scorer(Tiny(2, 1, 1), Vocab({"a", "b", "c", "ab", "bc"}));
  CheckGradients(scorer, Batch({U"abc"}));
}

TEST(Gradient, MaskedBatchTwoLayers) {
  BasicScorer<double> scorer(Tiny(4, 2, 2), Vocab({"a", "b", "c", "ab", "bc", "cab"}));
  TrainBatch batch;
  batch.examples.push_back(MaskedWord{U"cab", Word{U'c', kMaskChar, kMaskChar}, {1, 2}});
  batch.examples.push_back(NoMask(U"abca"));
  batch.examples.push_back(MaskedWord{U"b", Word{kMaskChar}, {0}});
  CheckGradients(scorer, batch);
}

TEST(Gradient, EncoderOnlyAndDecoderOnlyStacks) {
  ScorerConfig cfg = Tiny(4, 1, 1);
  cfg.enc_layers = 0;
  BasicScorer<double> no_encoder(cfg, Vocab({"a", "b", "ab"}));
  CheckGradients(no_encoder, Batch({U"aba"}));
  cfg.enc_layers = 1;
  cfg.dec_layers = 0;
  BasicScorer<double> no_decoder(cfg, Vocab({"a", "b", "ab"}));
  CheckGradients(no_decoder, Batch({U"aba"}));
}

TEST(TrainStep, ZeroLearningRateLeavesParams) {
  ScorerConfig cfg = Tiny();
  cfg.peak_lr = 0.0;
  Scorer scorer(cfg, Vocab({"a", "b", "ab"}));
  const auto before = scorer.network().params();
  AdamOptimizer<float> opt(scorer.network().params(), cfg);
  for (int k = 0; k < 3; ++k) TrainStep(scorer, Batch({U"ab", U"ba"}), opt, {});
  EXPECT_TRUE(SameParams(before, scorer.network().params()));
}

TEST(TrainStep, SingleStepDescends) {
  ScorerConfig cfg = Tiny(8, 2, 1);
  cfg.warmup_steps = 1;
  cfg.peak_lr = 1e-3;
  BasicScorer<double> scorer(cfg, Vocab({"a", "b", "c", "ab", "bc"}));
  const auto batch = Batch({U"abc", U"cab", U"b"});
  AdamOptimizer<double> opt(scorer.network().params(), cfg);
  const double before = TrainStep(scorer, batch, opt, {});
  EXPECT_LT(scorer.Loss(batch), before);
}

TEST(TrainStep, ToyCorpusLossDecreases) {
  ScorerConfig cfg = Tiny(16, 2, 1);
  cfg.peak_lr = 3e-3;
  cfg.warmup_steps = 20;
  std::vector<Word> words;
  const std::vector<std::u32string> stems = {U"walk", U"talk", U"play", U"jump", U"look",
                                             U"call", U"help", U"kick", U"pull", U"work"};
  const std::vector<std::u32string> suffixes = {U"", U"s", U"ed", U"ing", U"er"};
  for (const auto& s : stems) {
    for (const auto& x : suffixes) words.push_back(s + x);
  }
  ASSERT_EQ(words.size(), 50u);
  std::vector<std::u32string> subs;
  for (char32_t c = U'a'; c <= U'z'; ++c) subs.push_back(std::u32string(1, c));
  for (auto s : {U"ing", U"ed", U"er", U"alk", U"ay"}) subs.push_back(s);
  Scorer scorer(cfg, SubwordVocab::FromSubwords(subs));
  const auto batch = Batch(words);
  const double initial = scorer.Loss(batch);
  AdamOptimizer<float> opt(scorer.network().params(), cfg);
  for (int step = 0; step < 200; ++step) TrainStep(scorer, batch, opt, {});
  const double final_loss = scorer.Loss(batch);
  EXPECT_LT(final_loss, initial - 5.0);
}

TEST(TrainStep, NonFiniteLossNamesWord) {
  Scorer scorer(Tiny(), Vocab({"a", "b"}));
  auto& params = scorer.network().params();
  params[*params.Find("projection.bias")].value.setConstant(std::nanf(""));
  AdamOptimizer<float> opt(params, Tiny());
  try {
    TrainStep(scorer, Batch({U"ab"}), opt, {});
    FAIL();
  } catch (const NonFiniteLossError& e) {
    EXPECT_EQ(e.word(), "ab");
  }
}

TEST(Schedule, InverseSqrt) {
  EXPECT_DOUBLE_EQ(InverseSqrtLearningRate(1e-3, 100, 50), 5e-4);
  EXPECT_DOUBLE_EQ(InverseSqrtLearningRate(1e-3, 100, 100), 1e-3);
  EXPECT_DOUBLE_EQ(InverseSqrtLearningRate(1e-3, 100, 400), 5e-4);
  EXPECT_DOUBLE_EQ(InverseSqrtLearningRate(1e-3, 100, 0), 1e-5);
}

TEST(Config, DefaultsAndLight) {
  const ScorerConfig d;
  EXPECT_EQ(d.enc_layers, 4);
  EXPECT_EQ(d.dec_layers, 4);
  EXPECT_DOUBLE_EQ(d.dropout, 0.3);
  EXPECT_EQ(d.warmup_steps, 4000);
  EXPECT_EQ(d.epochs, 50);
  EXPECT_DOUBLE_EQ(d.adam_beta1, 0.9);
  EXPECT_DOUBLE_EQ(d.adam_beta2, 0.98);
  const ScorerConfig light = ScorerConfig::Light();
  EXPECT_EQ(light.enc_layers, 1);
  EXPECT_EQ(light.dec_layers, 1);
  ScorerConfig bad;
  bad.heads = 3;
  EXPECT_THROW(bad.Validate(), UsageError);
  bad = ScorerConfig{};
  bad.dropout = 1.0;
  EXPECT_THROW(bad.Validate(), UsageError);
}

TEST(Train, LightVariantSameCodePath) {
  ScorerConfig cfg = ScorerConfig::Light();
  cfg.model_dim = 16;
  cfg.ff_dim = 32;
  cfg.epochs = 2;
  cfg.warmup_steps = 5;
  TrainReport report;
  const Scorer s = Train({U"abc", U"cab", U"bca"}, Vocab({"a", "b", "c", "ab"}), cfg, MaskConfig{}, &report);
  EXPECT_EQ(report.epoch_losses.size(), 2u);
  EXPECT_TRUE(s.network().params().Find("encoder.0.self_attn.query.weight").has_value());
  EXPECT_FALSE(s.network().params().Find("encoder.1.self_attn.query.weight").has_value());
}

TEST(Train, EmptyCorpusAndZeroEpochs) {
  const auto vocab = Vocab({"a", "b"});
  EXPECT_THROW(Train({}, vocab, Tiny(), MaskConfig{}), DataError);
  EXPECT_THROW(Train({U"xyz"}, vocab, Tiny(), MaskConfig{}), DataError);
  ScorerConfig cfg = Tiny();
  cfg.epochs = 0;
  const Scorer trained = Train({U"ab"}, vocab, cfg, MaskConfig{});
  EXPECT_TRUE(SameParams(trained.network().params(), Scorer(cfg, vocab).network().params()));
}

TEST(Train, SkipsUnknownAndCountsThem) {
  ScorerConfig cfg = Tiny();
  cfg.epochs = 1;
  TrainReport report;
  Train({U"ab", U"axb", U"ba"}, Vocab({"a", "b"}), cfg, MaskConfig{}, &report);
  EXPECT_EQ(report.skipped_words, 1u);
}

TEST(Train, SeededRunsAreBitIdentical) {
  ScorerConfig cfg = Tiny(8, 2, 1);
  cfg.dropout = 0.2;
  cfg.epochs = 3;
  MaskConfig mask;
  mask.seed = 4;
  const std::vector<Word> corpus = {U"abc", U"cab", U"bca", U"ab", U"abcabc", U"c"};
  const auto vocab = Vocab({"a", "b", "c", "ab", "ca"});
  std::ostringstream first, second;
  WriteParams(Train(corpus, vocab, cfg, mask), first);
  WriteParams(Train(corpus, vocab, cfg, mask), second);
  EXPECT_EQ(first.str(), second.str());
  cfg.seed += 1;
  std::ostringstream third;
  WriteParams(Train(corpus, vocab, cfg, mask), third);
  EXPECT_NE(first.str(), third.str());
}

TEST(Train, SingleWordOverfits) {
  ScorerConfig cfg = Tiny(16, 2, 1);
  cfg.epochs = 150;
  cfg.peak_lr = 1e-2;
  cfg.warmup_steps = 10;
  MaskConfig none;
  none.strategy = MaskStrategy::kNone;
  TrainReport report;
  const Scorer s = Train({U"abcab"}, Vocab({"a", "b", "c", "ab", "cab"}), cfg, none, &report);
  const double p = std::exp(LogMarginal(s.ScoreSegments(U"abcab")).log_prob);
  EXPECT_GT(p, 0.9);
  EXPECT_LT(report.epoch_losses.back(), 0.1);
}

// Parameter dump consumed by tests/oracles/forward_oracle.py.
nlohmann::json DumpParams(const BasicScorer<double>& scorer, const std::string& word) {
  nlohmann::json j;
  j["config"] = ConfigToJson(scorer.config());
  std::vector<std::string> vocab;
  for (size_t i = 0; i < scorer.vocab().size(); ++i) vocab.push_back(utf8_encode(scorer.vocab().subword(static_cast<int>(i))));
  j["vocab"] = vocab;
  j["word"] = word;
  const auto& params = scorer.network().params();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& v = params[i].value;
    j["tensors"][params[i].name] = {{"rows", v.rows()},
                                    {"cols", v.cols()},
                                    {"data", std::vector<double>(v.data(), v.data() + v.size())}};
  }
  return j;
}

void LoadDump(BasicScorer<double>& scorer, const nlohmann::json& j) {
  auto& params = scorer.network().params();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& t = j.at("tensors").at(params[i].name);
    const auto data = t.at("data").get<std::vector<double>>();
    ASSERT_EQ(data.size(), static_cast<size_t>(params[i].value.size()));
    std::copy(data.begin(), data.end(), params[i].value.data());
  }
}

TEST(ScoreSegments, MatchesIndependentForwardPass) {
  const std::string dir = SELFSEG_TEST_DATA_DIR;
  ScorerConfig cfg = Tiny(2, 1, 1);
  cfg.ff_dim = 3;
  cfg.seed = 2024;
  BasicScorer<double> scorer(cfg, Vocab({"a", "b", "ab"}));
  if (std::getenv("SELFSEG_REGENERATE_GOLDEN")) {
    std::ofstream(dir + "/tiny_params.json") << DumpParams(scorer, "ab").dump(1) << '\n';
    ASSERT_EQ(std::system(("python3 " + std::string(SELFSEG_TEST_ORACLE_DIR) + "/forward_oracle.py " +
                           dir + "/tiny_params.json " + dir + "/tiny_forward_ab.json")
                              .c_str()),
              0);
  }
  LoadDump(scorer, nlohmann::json::parse(testing::ReadFile(dir + "/tiny_params.json")));
  const auto golden = nlohmann::json::parse(testing::ReadFile(dir + "/tiny_forward_ab.json"));
  const auto rows = golden.at("log_probs").get<std::vector<std::vector<double>>>();
  ASSERT_EQ(rows.size(), 2u);
  const auto scores = scorer.ScoreSegments(U"ab");
  ASSERT_EQ(scores.num_edges(), 3u);
  for (const auto& e : scores.edges()) EXPECT_NEAR(e.log_prob, rows[e.start][e.subword_id], 1e-12);

  Scorer single(cfg, scorer.vocab());
  single.network().params() = scorer.network().params().Cast<float>();
  const auto single_scores = single.ScoreSegments(U"ab");
  for (const auto& e : single_scores.edges()) {
    EXPECT_NEAR(e.log_prob, rows[e.start][e.subword_id], 1e-5);
  }
}

TEST(Checkpoint, RoundTrip) {
  ScorerConfig cfg = Tiny(8, 2, 2);
  const auto vocab = Vocab({"a", "b", "ab"});
  const Scorer original(cfg, vocab);
  testing::TempDir dir;
  SaveParams(original, dir.File("m.bin"));
  const Scorer loaded = LoadParams(dir.File("m.bin"), vocab);
  EXPECT_EQ(loaded.config(), cfg);
  EXPECT_TRUE(SameParams(loaded.network().params(), original.network().params()));
  EXPECT_EQ(ParamsHash(loaded), ParamsHash(original));
  const std::string bytes = testing::ReadFile(dir.File("m.bin"));
  EXPECT_EQ(bytes.substr(0, 8), "SSEGCKPT");
}

TEST(Checkpoint, CorruptMagic) {
  const auto vocab = Vocab({"a"});
  std::ostringstream out;
  WriteParams(Scorer(Tiny(), vocab), out);
  std::string bytes = out.str();
  bytes[0] = 'X';
  std::istringstream in(bytes);
  try {
    ReadParams(in, vocab, "m");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(Checkpoint, VocabMismatchNamesBothHashes) {
  const auto vocab = Vocab({"a", "b"});
  const auto other = Vocab({"a", "b", "ab"});
  std::ostringstream out;
  WriteParams(Scorer(Tiny(), vocab), out);
  std::istringstream in(out.str());
  try {
    ReadParams(in, other, "m");
    FAIL();
  } catch (const ModelMismatchError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(vocab.Hash()), std::string::npos);
    EXPECT_NE(what.find(other.Hash()), std::string::npos);
  }
}

TEST(Checkpoint, TruncatedAndTrailingBytes) {
  const auto vocab = Vocab({"a"});
  std::ostringstream out;
  WriteParams(Scorer(Tiny(), vocab), out);
  const std::string bytes = out.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(ReadParams(truncated, vocab, "m"), DataError);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(ReadParams(trailing, vocab, "m"), DataError);
  std::istringstream header_only(bytes.substr(0, 14));
  EXPECT_THROW(ReadParams(header_only, vocab, "m"), DataError);
}

TEST(Checkpoint, RejectsNonFiniteValues) {
  const auto vocab = Vocab({"a"});
  Scorer scorer(Tiny(), vocab);
  auto& params = scorer.network().params();
  params[0].value(0, 0) = std::numeric_limits<float>::infinity();
  std::ostringstream out;
  WriteParams(scorer, out);
  std::istringstream in(out.str());
  EXPECT_THROW(ReadParams(in, vocab, "m"), DataError);
}

}  // namespace
}  // namespace selfseg
