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

#ifndef SELFSEG_NN_H_
#define SELFSEG_NN_H_

// Transformer building blocks with explicit forward caches and hand-written
// backward passes. Rows are sequence positions. Instantiated for float
// (training and inference) and double (gradient checking).

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfseg/rng.h"

namespace selfseg::nn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using ColVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Parameter {
  std::string name;
  Matrix<S> value;
  Matrix<S> grad;
};

// Named tensors in registration order.
template <typename S>
class ParameterSet {
 public:
  size_t Add(std::string name, Eigen::Index rows, Eigen::Index cols);

  Parameter<S>& operator[](size_t i) { return params_[i]; }
  const Parameter<S>& operator[](size_t i) const { return params_[i]; }
  const Matrix<S>& value(size_t i) const { return params_[i].value; }
  Matrix<S>& grad(size_t i) { return params_[i].grad; }

  size_t size() const { return params_.size(); }
  size_t NumScalars() const;
  void ZeroGrad();
  std::optional<size_t> Find(const std::string& name) const;

  // Same names and shapes, values converted; gradients zeroed.
  template <typename T>
  ParameterSet<T> Cast() const {
    ParameterSet<T> out;
    for (const auto& p : params_) {
      size_t i = out.Add(p.name, p.value.rows(), p.value.cols());
      out[i].value = p.value.template cast<T>();
    }
    return out;
  }

 private:
  std::vector<Parameter<S>> params_;
};

// Training-time randomness. Dropout is active only when `rng` is set and
// `dropout` > 0.
struct ForwardContext {
  double dropout = 0.0;
  Rng* rng = nullptr;

  bool training() const { return rng != nullptr && dropout > 0.0; }
};

template <typename S>
struct Dropout {
  // Empty when dropout was inactive.
  Matrix<S> mask;

  Matrix<S> Forward(const Matrix<S>& x, const ForwardContext& ctx);
  Matrix<S> Backward(const Matrix<S>& dy) const;
};

template <typename S>
struct Linear {
  size_t weight = 0;  // in x out
  size_t bias = 0;    // 1 x out

  struct Cache {
    Matrix<S> input;
  };

  void Register(ParameterSet<S>& params, const std::string& name, int in, int out);
  Matrix<S> Forward(const ParameterSet<S>& params, const Matrix<S>& x, Cache* cache) const;
  Matrix<S> Backward(ParameterSet<S>& params, const Matrix<S>& dy, const Cache& cache) const;
};

template <typename S>
struct LayerNorm {
  size_t gain = 0;
  size_t bias = 0;
  static constexpr double kEpsilon = 1e-5;

  struct Cache {
    Matrix<S> normalized;
    ColVector<S> inv_std;
  };

  void Register(ParameterSet<S>& params, const std::string& name, int dim);
  Matrix<S> Forward(const ParameterSet<S>& params, const Matrix<S>& x, Cache* cache) const;
  Matrix<S> Backward(ParameterSet<S>& params, const Matrix<S>& dy, const Cache& cache) const;
};

// Multi-head scaled dot-product attention. Queries come from `xq`, keys and
// values from `xkv`. With `causal`, query i sees keys 0..i only.
template <typename S>
struct Attention {
  Linear<S> query, key, value, output;
  int heads = 1;
  bool causal = false;

  struct Cache {
    typename Linear<S>::Cache query, key, value, output;
    Matrix<S> q, k, v;
    std::vector<Matrix<S>> probs;  // per head, rows = queries
  };

  void Register(ParameterSet<S>& params, const std::string& name, int dim,
                int num_heads, bool is_causal);
  Matrix<S> Forward(const ParameterSet<S>& params, const Matrix<S>& xq,
                    const Matrix<S>& xkv, Cache* cache) const;
  // Returns the query-side gradient; adds the key/value-side gradient to
  // `dxkv`, which must be sized like xkv.
  Matrix<S> Backward(ParameterSet<S>& params, const Matrix<S>& dy,
                     const Cache& cache, Matrix<S>* dxkv) const;
};

template <typename S>
struct FeedForward {
  Linear<S> in, out;

  struct Cache {
    typename Linear<S>::Cache in, out;
    Matrix<S> pre_activation;
  };

  void Register(ParameterSet<S>& params, const std::string& name, int dim, int hidden);
  Matrix<S> Forward(const ParameterSet<S>& params, const Matrix<S>& x, Cache* cache) const;
  Matrix<S> Backward(ParameterSet<S>& params, const Matrix<S>& dy, const Cache& cache) const;
};

// Pre-norm encoder block: x + Drop(SelfAttn(LN(x))), then x + Drop(FF(LN(x))).
template <typename S>
struct EncoderLayer {
  LayerNorm<S> attn_norm, ff_norm;
  Attention<S> self_attn;
  FeedForward<S> ff;

  struct Cache {
    typename LayerNorm<S>::Cache attn_norm, ff_norm;
    typename Attention<S>::Cache self_attn;
    typename FeedForward<S>::Cache ff;
    Dropout<S> attn_drop, ff_drop;
  };

  void Register(ParameterSet<S>& params, const std::string& name, int dim,
                int hidden, int heads);
  Matrix<S> Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                    Cache* cache, const ForwardContext& ctx) const;
  Matrix<S> Backward(ParameterSet<S>& params, const Matrix<S>& dy, Cache& cache) const;
};

// Pre-norm decoder block with causal self-attention and cross-attention
// over the encoder output.
template <typename S>
struct DecoderLayer {
  LayerNorm<S> self_norm, cross_norm, ff_norm;
  Attention<S> self_attn, cross_attn;
  FeedForward<S> ff;

  struct Cache {
    typename LayerNorm<S>::Cache self_norm, cross_norm, ff_norm;
    typename Attention<S>::Cache self_attn, cross_attn;
    typename FeedForward<S>::Cache ff;
    Dropout<S> self_drop, cross_drop, ff_drop;
  };

  void Register(ParameterSet<S>& params, const std::string& name, int dim,
                int hidden, int heads);
  Matrix<S> Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                    const Matrix<S>& memory, Cache* cache,
                    const ForwardContext& ctx) const;
  // Adds the memory gradient to `dmemory`.
  Matrix<S> Backward(ParameterSet<S>& params, const Matrix<S>& dy, Cache& cache,
                     Matrix<S>* dmemory) const;
};

// Sinusoidal position table, rows 0..length-1.
template <typename S>
Matrix<S> SinusoidalPositions(int length, int dim);

// Row-wise log-softmax.
template <typename S>
Matrix<S> LogSoftmaxRows(const Matrix<S>& logits);

}  // namespace selfseg::nn

#endif  // SELFSEG_NN_H_
