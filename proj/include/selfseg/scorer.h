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

#ifndef SELFSEG_SCORER_H_
#define SELFSEG_SCORER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "selfseg/lattice.h"
#include "selfseg/masking.h"
#include "selfseg/nn.h"
#include "selfseg/vocab.h"

namespace selfseg {

struct ScorerConfig {
  int enc_layers = 4;
  int dec_layers = 4;
  int model_dim = 256;
  int ff_dim = 1024;
  int heads = 4;
  double dropout = 0.3;
  // Inverse square-root schedule: linear warmup to peak_lr, then
  // peak_lr * sqrt(warmup_steps / step).
  int warmup_steps = 4000;
  double peak_lr = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-8;
  int epochs = 50;
  // Characters per batch; batches hold words of similar length.
  int batch_tokens = 1024;
  uint64_t seed = 1;

  // The one-layer encoder / one-layer decoder variant.
  static ScorerConfig Light();

  // Throws UsageError.
  void Validate() const;
  bool operator==(const ScorerConfig&) const = default;
};

// The mixed character / sub-word encoder-decoder. The encoder reads the
// (possibly masked) characters; decoder position p reads BOS followed by
// the first p characters of the word and predicts the sub-word that starts
// at character p.
template <typename S>
class SegmenterNetwork {
 public:
  SegmenterNetwork(const ScorerConfig& config, int vocab_size);

  // Xavier-uniform projections, N(0, 1/dim) embeddings, unit norms.
  void Initialize(uint64_t seed);

  struct Cache {
    nn::Dropout<S> encoder_input_drop, decoder_input_drop;
    std::vector<typename nn::EncoderLayer<S>::Cache> encoder;
    typename nn::LayerNorm<S>::Cache encoder_norm;
    std::vector<typename nn::DecoderLayer<S>::Cache> decoder;
    typename nn::LayerNorm<S>::Cache decoder_norm;
    typename nn::Linear<S>::Cache projection;
    nn::Matrix<S> log_probs;
    std::vector<int> encoder_ids, decoder_ids;
  };

  // Log-softmax over the vocabulary, one row per decoder position.
  nn::Matrix<S> Forward(const std::vector<int>& encoder_ids,
                        const std::vector<int>& decoder_ids, Cache* cache,
                        const nn::ForwardContext& ctx) const;
  // Accumulates parameter gradients given d loss / d log-probs.
  void Backward(const nn::Matrix<S>& d_log_probs, Cache& cache);

  nn::ParameterSet<S>& params() { return params_; }
  const nn::ParameterSet<S>& params() const { return params_; }
  int vocab_size() const { return vocab_size_; }

 private:
  ScorerConfig config_;
  int vocab_size_;
  nn::ParameterSet<S> params_;
  size_t embedding_ = 0;
  std::vector<nn::EncoderLayer<S>> encoder_;
  nn::LayerNorm<S> encoder_norm_;
  std::vector<nn::DecoderLayer<S>> decoder_;
  nn::LayerNorm<S> decoder_norm_;
  nn::Linear<S> projection_;
};

// Words of one optimizer step, already masked.
struct TrainBatch {
  std::vector<MaskedWord> examples;

  size_t max_length() const;
  size_t num_chars() const;
};

// Segment scorer: network plus the vocabulary it predicts over.
template <typename S>
class BasicScorer {
 public:
  // Parameters are initialized from config.seed.
  BasicScorer(ScorerConfig config, SubwordVocab vocab);

  const ScorerConfig& config() const { return config_; }
  const SubwordVocab& vocab() const { return vocab_; }
  SegmenterNetwork<S>& network() { return network_; }
  const SegmenterNetwork<S>& network() const { return network_; }

  // log p(word[j, i) | x_M, word[0, j)) for every lattice edge of
  // masked.original, without dropout. Throws UnknownCharacterError.
  SegmentScores ScoreSegments(const MaskedWord& masked) const;
  SegmentScores ScoreSegments(const Word& word) const { return ScoreSegments(NoMask(word)); }

  // Runs forward and backward for one word and adds weight * d(-log p)/dθ
  // to the gradients. Returns -log p(word | x_M).
  double AccumulateGradient(const MaskedWord& masked, double weight,
                            const nn::ForwardContext& ctx);

  // Mean of -log p(word | x_M) over the batch, without dropout.
  double Loss(const TrainBatch& batch) const;
  // Zeroes gradients, then accumulates the gradient of the mean loss.
  double LossAndGradient(const TrainBatch& batch, const nn::ForwardContext& ctx);

 private:
  std::vector<int> EncoderIds(const MaskedWord& masked) const;
  std::vector<int> DecoderIds(const Word& word) const;

  ScorerConfig config_;
  SubwordVocab vocab_;
  SegmenterNetwork<S> network_;
};

using Scorer = BasicScorer<float>;

double InverseSqrtLearningRate(double peak_lr, int warmup_steps, int64_t step);

// Adam with bias correction and the inverse square-root schedule.
template <typename S>
class AdamOptimizer {
 public:
  AdamOptimizer(const nn::ParameterSet<S>& params, const ScorerConfig& config);

  // Applies one update from the current gradients; returns the learning
  // rate used.
  double Step(nn::ParameterSet<S>& params);
  int64_t step() const { return step_; }

 private:
  double peak_lr_;
  int warmup_steps_;
  double beta1_, beta2_, eps_;
  int64_t step_ = 0;
  std::vector<nn::Matrix<S>> first_moment_, second_moment_;
};

// One optimizer update on `batch`. Returns the batch loss before the
// update. Throws NonFiniteLossError naming the word on NaN/inf.
template <typename S>
double TrainStep(BasicScorer<S>& scorer, const TrainBatch& batch,
                 AdamOptimizer<S>& optimizer, const nn::ForwardContext& ctx);

struct TrainReport {
  std::vector<double> epoch_losses;  // mean per-word loss of each epoch
  int64_t steps = 0;
  size_t skipped_words = 0;  // unknown characters or over-long
};

using EpochCallback = std::function<void(int epoch, const Scorer& scorer, double loss)>;

// Trains on `corpus` (words with multiplicity). Each epoch shuffles,
// buckets by length, and re-masks every word. Single-threaded and
// deterministic given the seeds.
Scorer Train(const std::vector<Word>& corpus, const SubwordVocab& vocab,
             const ScorerConfig& config, const MaskConfig& mask_config,
             TrainReport* report = nullptr, const EpochCallback& on_epoch = {});

}  // namespace selfseg

#endif  // SELFSEG_SCORER_H_
