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

#include "selfseg/scorer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "selfseg/error.h"
#include "selfseg/utf8.h"

namespace selfseg {

// ---------------------------------------------------------------------------
// ScorerConfig

ScorerConfig ScorerConfig::Light() {
  ScorerConfig c;
  c.enc_layers = 1;
  c.dec_layers = 1;
  return c;
}

void ScorerConfig::Validate() const {
  if (enc_layers < 0 || dec_layers < 0) throw UsageError("layer counts must be non-negative");
  if (model_dim <= 0 || ff_dim <= 0 || heads <= 0) {
    throw UsageError("model_dim, ff_dim and heads must be positive");
  }
  if (model_dim % heads != 0) throw UsageError("model_dim must be divisible by heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("dropout must be in [0, 1)");
  if (warmup_steps < 1) throw UsageError("warmup_steps must be at least 1");
  if (!(peak_lr >= 0.0)) throw UsageError("learning rate must be non-negative");
  if (epochs < 0) throw UsageError("epochs must be non-negative");
  if (batch_tokens <= 0) throw UsageError("batch_tokens must be positive");
}

// ---------------------------------------------------------------------------
// SegmenterNetwork

template <typename S>
SegmenterNetwork<S>::SegmenterNetwork(const ScorerConfig& config, int vocab_size)
    : config_(config), vocab_size_(vocab_size) {
  config_.Validate();
  const int d = config_.model_dim;
  embedding_ = params_.Add("embedding", vocab_size, d);
  encoder_.resize(config_.enc_layers);
  for (int l = 0; l < config_.enc_layers; ++l) {
    encoder_[l].Register(params_, "encoder." + std::to_string(l), d, config_.ff_dim, config_.heads);
  }
  encoder_norm_.Register(params_, "encoder.norm", d);
  decoder_.resize(config_.dec_layers);
  for (int l = 0; l < config_.dec_layers; ++l) {
    decoder_[l].Register(params_, "decoder." + std::to_string(l), d, config_.ff_dim, config_.heads);
  }
  decoder_norm_.Register(params_, "decoder.norm", d);
  projection_.Register(params_, "projection", d, vocab_size);
}

template <typename S>
void SegmenterNetwork<S>::Initialize(uint64_t seed) {
  Rng rng = make_rng({seed, 0x1417});
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    const std::string& name = p.name;
    if (i == embedding_) {
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(config_.model_dim));
      for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = static_cast<S>(normal(rng));
    } else if (name.ends_with(".weight")) {
      const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
      for (Eigen::Index k = 0; k < p.value.size(); ++k) {
        p.value.data()[k] = static_cast<S>((2.0 * uniform01(rng) - 1.0) * limit);
      }
    } else if (name.ends_with(".gain")) {
      p.value.setOnes();
    } else {
      p.value.setZero();
    }
  }
}

template <typename S>
nn::Matrix<S> SegmenterNetwork<S>::Forward(const std::vector<int>& encoder_ids,
                                           const std::vector<int>& decoder_ids,
                                           Cache* cache, const nn::ForwardContext& ctx) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  const int d = config_.model_dim;
  const S scale = static_cast<S>(std::sqrt(static_cast<double>(d)));
  const auto& table = params_.value(embedding_);
  auto embed = [&](const std::vector<int>& ids) {
    nn::Matrix<S> x = nn::SinusoidalPositions<S>(static_cast<int>(ids.size()), d);
    for (size_t p = 0; p < ids.size(); ++p) x.row(p) += scale * table.row(ids[p]);
    return x;
  };

  nn::Matrix<S> memory = c.encoder_input_drop.Forward(embed(encoder_ids), ctx);
  c.encoder.resize(encoder_.size());
  for (size_t l = 0; l < encoder_.size(); ++l) {
    memory = encoder_[l].Forward(params_, memory, &c.encoder[l], ctx);
  }
  memory = encoder_norm_.Forward(params_, memory, &c.encoder_norm);

  nn::Matrix<S> h = c.decoder_input_drop.Forward(embed(decoder_ids), ctx);
  c.decoder.resize(decoder_.size());
  for (size_t l = 0; l < decoder_.size(); ++l) {
    h = decoder_[l].Forward(params_, h, memory, &c.decoder[l], ctx);
  }
  h = decoder_norm_.Forward(params_, h, &c.decoder_norm);
  c.log_probs = nn::LogSoftmaxRows<S>(projection_.Forward(params_, h, &c.projection));
  c.encoder_ids = encoder_ids;
  c.decoder_ids = decoder_ids;
  return c.log_probs;
}

template <typename S>
void SegmenterNetwork<S>::Backward(const nn::Matrix<S>& d_log_probs, Cache& c) {
  const int d = config_.model_dim;
  const S scale = static_cast<S>(std::sqrt(static_cast<double>(d)));
  nn::ColVector<S> row_sums = d_log_probs.rowwise().sum();
  nn::Matrix<S> probs = c.log_probs.array().exp();
  nn::Matrix<S> d_logits = d_log_probs - (probs.array().colwise() * row_sums.array()).matrix();

  nn::Matrix<S> dh = projection_.Backward(params_, d_logits, c.projection);
  dh = decoder_norm_.Backward(params_, dh, c.decoder_norm);
  nn::Matrix<S> dmemory = nn::Matrix<S>::Zero(static_cast<Eigen::Index>(c.encoder_ids.size()), d);
  for (size_t l = decoder_.size(); l-- > 0;) {
    dh = decoder_[l].Backward(params_, dh, c.decoder[l], &dmemory);
  }
  dh = c.decoder_input_drop.Backward(dh);

  dmemory = encoder_norm_.Backward(params_, dmemory, c.encoder_norm);
  for (size_t l = encoder_.size(); l-- > 0;) {
    dmemory = encoder_[l].Backward(params_, dmemory, c.encoder[l]);
  }
  dmemory = c.encoder_input_drop.Backward(dmemory);

  auto& grad = params_.grad(embedding_);
  for (size_t p = 0; p < c.decoder_ids.size(); ++p) grad.row(c.decoder_ids[p]) += scale * dh.row(p);
  for (size_t p = 0; p < c.encoder_ids.size(); ++p) grad.row(c.encoder_ids[p]) += scale * dmemory.row(p);
}

// ---------------------------------------------------------------------------
// TrainBatch

size_t TrainBatch::max_length() const {
  size_t n = 0;
  for (const auto& m : examples) n = std::max(n, m.original.size());
  return n;
}

size_t TrainBatch::num_chars() const {
  size_t n = 0;
  for (const auto& m : examples) n += m.original.size();
  return n;
}

// ---------------------------------------------------------------------------
// BasicScorer

namespace {

std::string DescribeMasked(const MaskedWord& masked) {
  std::string s;
  for (char32_t c : masked.masked_chars) {
    s += c == kMaskChar ? std::string(SubwordVocab::kSpecialSymbols[SubwordVocab::kMaskId])
                        : utf8_encode(c);
  }
  return s;
}

}  // namespace

template <typename S>
BasicScorer<S>::BasicScorer(ScorerConfig config, SubwordVocab vocab)
    : config_(config),
      vocab_(std::move(vocab)),
      network_(config_, static_cast<int>(vocab_.size())) {
  network_.Initialize(config_.seed);
}

template <typename S>
std::vector<int> BasicScorer<S>::EncoderIds(const MaskedWord& masked) const {
  std::vector<int> ids;
  ids.reserve(masked.masked_chars.size());
  for (char32_t c : masked.masked_chars) {
    ids.push_back(c == kMaskChar ? SubwordVocab::kMaskId : *vocab_.id_of(std::u32string(1, c)));
  }
  return ids;
}

template <typename S>
std::vector<int> BasicScorer<S>::DecoderIds(const Word& word) const {
  std::vector<int> ids{SubwordVocab::kBosId};
  for (size_t p = 0; p + 1 < word.size(); ++p) ids.push_back(*vocab_.id_of(std::u32string(1, word[p])));
  return ids;
}

template <typename S>
SegmentScores BasicScorer<S>::ScoreSegments(const MaskedWord& masked) const {
  SegmentScores lattice = BuildLattice(vocab_, masked.original);
  nn::Matrix<S> log_probs =
      network_.Forward(EncoderIds(masked), DecoderIds(masked.original), nullptr, {});
  for (auto& e : lattice.edges()) e.log_prob = static_cast<double>(log_probs(e.start, e.subword_id));
  return lattice;
}

template <typename S>
double BasicScorer<S>::AccumulateGradient(const MaskedWord& masked, double weight,
                                          const nn::ForwardContext& ctx) {
  SegmentScores lattice = BuildLattice(vocab_, masked.original);
  typename SegmenterNetwork<S>::Cache cache;
  nn::Matrix<S> log_probs =
      network_.Forward(EncoderIds(masked), DecoderIds(masked.original), &cache, ctx);
  for (auto& e : lattice.edges()) e.log_prob = static_cast<double>(log_probs(e.start, e.subword_id));
  MarginalGradient g = LogMarginalGradient(lattice);
  const double loss = -g.log_prob;
  if (!g.ok || !std::isfinite(loss)) {
    const std::string word = utf8_encode(masked.original);
    throw NonFiniteLossError(word, "non-finite loss " + std::to_string(loss) + " on word '" +
                                       word + "' (encoder input '" +
                                       DescribeMasked(masked) + "')");
  }
  nn::Matrix<S> d_log_probs = nn::Matrix<S>::Zero(log_probs.rows(), log_probs.cols());
  const auto& edges = lattice.edges();
  for (size_t k = 0; k < edges.size(); ++k) {
    d_log_probs(edges[k].start, edges[k].subword_id) -= static_cast<S>(weight * g.edge_grad[k]);
  }
  network_.Backward(d_log_probs, cache);
  return loss;
}

template <typename S>
double BasicScorer<S>::Loss(const TrainBatch& batch) const {
  if (batch.examples.empty()) throw UsageError("empty batch");
  double total = 0.0;
  for (const auto& m : batch.examples) total -= LogMarginal(ScoreSegments(m)).log_prob;
  return total / static_cast<double>(batch.examples.size());
}

template <typename S>
double BasicScorer<S>::LossAndGradient(const TrainBatch& batch, const nn::ForwardContext& ctx) {
  if (batch.examples.empty()) throw UsageError("empty batch");
  network_.params().ZeroGrad();
  const double weight = 1.0 / static_cast<double>(batch.examples.size());
  double total = 0.0;
  for (const auto& m : batch.examples) total += AccumulateGradient(m, weight, ctx);
  return total * weight;
}

// ---------------------------------------------------------------------------
// Optimization

double InverseSqrtLearningRate(double peak_lr, int warmup_steps, int64_t step) {
  const double s = static_cast<double>(std::max<int64_t>(step, 1));
  const double w = static_cast<double>(warmup_steps);
  return peak_lr * std::min(s / w, std::sqrt(w / s));
}

template <typename S>
AdamOptimizer<S>::AdamOptimizer(const nn::ParameterSet<S>& params, const ScorerConfig& config)
    : peak_lr_(config.peak_lr),
      warmup_steps_(config.warmup_steps),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
  for (size_t i = 0; i < params.size(); ++i) {
    first_moment_.push_back(nn::Matrix<S>::Zero(params[i].value.rows(), params[i].value.cols()));
    second_moment_.push_back(first_moment_.back());
  }
}

template <typename S>
double AdamOptimizer<S>::Step(nn::ParameterSet<S>& params) {
  ++step_;
  const double lr = InverseSqrtLearningRate(peak_lr_, warmup_steps_, step_);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  const S b1 = static_cast<S>(beta1_), b2 = static_cast<S>(beta2_);
  const S step_size = static_cast<S>(lr / c1);
  const S inv_c2 = static_cast<S>(1.0 / c2);
  const S eps = static_cast<S>(eps_);
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    m = b1 * m + (S(1) - b1) * p.grad;
    v = b2 * v + (S(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
  }
  return lr;
}

template <typename S>
double TrainStep(BasicScorer<S>& scorer, const TrainBatch& batch, AdamOptimizer<S>& optimizer,
                 const nn::ForwardContext& ctx) {
  const double loss = scorer.LossAndGradient(batch, ctx);
  optimizer.Step(scorer.network().params());
  return loss;
}

namespace {

enum Stream : uint64_t { kOrderStream = 1, kDropoutStream = 2, kMaskShard = 0 };

// Shuffle, bucket by length, then shuffle the buckets.
std::vector<std::vector<size_t>> MakeBatches(const std::vector<Word>& words, int batch_tokens,
                                             Rng& rng) {
  std::vector<size_t> order(words.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return words[a].size() < words[b].size(); });
  std::vector<std::vector<size_t>> batches;
  size_t chars = 0;
  for (size_t idx : order) {
    if (batches.empty() || chars >= static_cast<size_t>(batch_tokens)) {
      batches.emplace_back();
      chars = 0;
    }
    batches.back().push_back(idx);
    chars += words[idx].size();
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

}  // namespace

Scorer Train(const std::vector<Word>& corpus, const SubwordVocab& vocab,
             const ScorerConfig& config, const MaskConfig& mask_config, TrainReport* report,
             const EpochCallback& on_epoch) {
  config.Validate();
  mask_config.Validate();
  if (corpus.empty()) throw DataError("training corpus is empty");
  TrainReport local_report;
  TrainReport& rep = report ? *report : local_report;
  rep = {};

  std::vector<Word> words;
  words.reserve(corpus.size());
  for (const auto& w : corpus) {
    if (w.empty() || w.size() > static_cast<size_t>(kMaxLatticeWordLength) ||
        !vocab.UnknownCharacters(w).empty()) {
      ++rep.skipped_words;
      continue;
    }
    words.push_back(w);
  }
  if (words.empty()) throw DataError("no trainable words: every word was skipped");

  Scorer scorer(config, vocab);
  AdamOptimizer<float> optimizer(scorer.network().params(), config);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng order_rng = make_rng({config.seed, static_cast<uint64_t>(epoch), kOrderStream});
    Rng mask_rng = make_rng({mask_config.seed, static_cast<uint64_t>(epoch), kMaskShard});
    Rng dropout_rng = make_rng({config.seed, static_cast<uint64_t>(epoch), kDropoutStream});
    nn::ForwardContext ctx{config.dropout, &dropout_rng};

    double epoch_total = 0.0;
    for (const auto& indices : MakeBatches(words, config.batch_tokens, order_rng)) {
      TrainBatch batch;
      batch.examples.reserve(indices.size());
      for (size_t idx : indices) batch.examples.push_back(ApplyMask(words[idx], mask_config, vocab, mask_rng));
      epoch_total += TrainStep(scorer, batch, optimizer, ctx) * static_cast<double>(indices.size());
      ++rep.steps;
    }
    const double mean = epoch_total / static_cast<double>(words.size());
    rep.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, scorer, mean);
  }
  return scorer;
}

template class SegmenterNetwork<float>;
template class SegmenterNetwork<double>;
template class BasicScorer<float>;
template class BasicScorer<double>;
template class AdamOptimizer<float>;
template class AdamOptimizer<double>;
template double TrainStep<float>(BasicScorer<float>&, const TrainBatch&, AdamOptimizer<float>&,
                                 const nn::ForwardContext&);
template double TrainStep<double>(BasicScorer<double>&, const TrainBatch&, AdamOptimizer<double>&,
                                  const nn::ForwardContext&);

}  // namespace selfseg
