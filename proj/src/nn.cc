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

#include "selfseg/nn.h"

#include <cmath>
#include <limits>

namespace selfseg::nn {

// ---------------------------------------------------------------------------
// ParameterSet

template <typename S>
size_t ParameterSet<S>::Add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  params_.push_back({std::move(name), Matrix<S>::Zero(rows, cols), Matrix<S>::Zero(rows, cols)});
  return params_.size() - 1;
}

template <typename S>
size_t ParameterSet<S>::NumScalars() const {
  size_t n = 0;
  for (const auto& p : params_) n += static_cast<size_t>(p.value.size());
  return n;
}

template <typename S>
void ParameterSet<S>::ZeroGrad() {
  for (auto& p : params_) p.grad.setZero();
}

template <typename S>
std::optional<size_t> ParameterSet<S>::Find(const std::string& name) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dropout

template <typename S>
Matrix<S> Dropout<S>::Forward(const Matrix<S>& x, const ForwardContext& ctx) {
  if (!ctx.training()) {
    mask.resize(0, 0);
    return x;
  }
  const S keep_scale = static_cast<S>(1.0 / (1.0 - ctx.dropout));
  mask.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform01(*ctx.rng) < ctx.dropout ? S(0) : keep_scale;
  }
  return x.cwiseProduct(mask);
}

template <typename S>
Matrix<S> Dropout<S>::Backward(const Matrix<S>& dy) const {
  if (mask.size() == 0) return dy;
  return dy.cwiseProduct(mask);
}

// ---------------------------------------------------------------------------
// Linear

template <typename S>
void Linear<S>::Register(ParameterSet<S>& params, const std::string& name, int in, int out) {
  weight = params.Add(name + ".weight", in, out);
  bias = params.Add(name + ".bias", 1, out);
}

template <typename S>
Matrix<S> Linear<S>::Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                             Cache* cache) const {
  Matrix<S> y = x * params.value(weight);
  y.rowwise() += params.value(bias).row(0);
  if (cache) cache->input = x;
  return y;
}

template <typename S>
Matrix<S> Linear<S>::Backward(ParameterSet<S>& params, const Matrix<S>& dy,
                              const Cache& cache) const {
  params.grad(weight).noalias() += cache.input.transpose() * dy;
  params.grad(bias) += dy.colwise().sum();
  return dy * params.value(weight).transpose();
}

// ---------------------------------------------------------------------------
// LayerNorm

template <typename S>
void LayerNorm<S>::Register(ParameterSet<S>& params, const std::string& name, int dim) {
  gain = params.Add(name + ".gain", 1, dim);
  bias = params.Add(name + ".bias", 1, dim);
  params[gain].value.setOnes();
}

template <typename S>
Matrix<S> LayerNorm<S>::Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                                Cache* cache) const {
  const Eigen::Index rows = x.rows();
  const Eigen::Index dim = x.cols();
  Matrix<S> normalized(rows, dim);
  ColVector<S> inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const S mean = x.row(r).mean();
    auto centered = (x.row(r).array() - mean).eval();
    const S var = centered.square().mean();
    inv_std(r) = S(1) / std::sqrt(var + static_cast<S>(kEpsilon));
    normalized.row(r) = centered * inv_std(r);
  }
  Matrix<S> y = normalized.array().rowwise() * params.value(gain).row(0).array();
  y.rowwise() += params.value(bias).row(0);
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename S>
Matrix<S> LayerNorm<S>::Backward(ParameterSet<S>& params, const Matrix<S>& dy,
                                 const Cache& cache) const {
  const auto& xhat = cache.normalized;
  params.grad(gain) += dy.cwiseProduct(xhat).colwise().sum();
  params.grad(bias) += dy.colwise().sum();
  Matrix<S> dxhat = dy.array().rowwise() * params.value(gain).row(0).array();
  Matrix<S> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const S m1 = dxhat.row(r).mean();
    const S m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
    dx.row(r) = cache.inv_std(r) *
                (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2).matrix();
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Attention

template <typename S>
void Attention<S>::Register(ParameterSet<S>& params, const std::string& name, int dim,
                            int num_heads, bool is_causal) {
  query.Register(params, name + ".query", dim, dim);
  key.Register(params, name + ".key", dim, dim);
  value.Register(params, name + ".value", dim, dim);
  output.Register(params, name + ".output", dim, dim);
  heads = num_heads;
  causal = is_causal;
}

template <typename S>
Matrix<S> Attention<S>::Forward(const ParameterSet<S>& params, const Matrix<S>& xq,
                                const Matrix<S>& xkv, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c.q = query.Forward(params, xq, &c.query);
  c.k = key.Forward(params, xkv, &c.key);
  c.v = value.Forward(params, xkv, &c.value);
  const Eigen::Index nq = xq.rows();
  const Eigen::Index nk = xkv.rows();
  const Eigen::Index dim = c.q.cols();
  const Eigen::Index dh = dim / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  Matrix<S> context(nq, dim);
  c.probs.resize(heads);
  for (int h = 0; h < heads; ++h) {
    Matrix<S> scores = (c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose()) * scale;
    Matrix<S>& p = c.probs[h];
    p.resize(nq, nk);
    for (Eigen::Index i = 0; i < nq; ++i) {
      const Eigen::Index visible = causal ? std::min(i + 1, nk) : nk;
      const S peak = scores.row(i).head(visible).maxCoeff();
      S total = 0;
      for (Eigen::Index j = 0; j < nk; ++j) {
        const S e = j < visible ? std::exp(scores(i, j) - peak) : S(0);
        p(i, j) = e;
        total += e;
      }
      p.row(i) /= total;
    }
    context.middleCols(h * dh, dh).noalias() = p * c.v.middleCols(h * dh, dh);
  }
  return output.Forward(params, context, &c.output);
}

template <typename S>
Matrix<S> Attention<S>::Backward(ParameterSet<S>& params, const Matrix<S>& dy,
                                 const Cache& c, Matrix<S>* dxkv) const {
  Matrix<S> dcontext = output.Backward(params, dy, c.output);
  const Eigen::Index dim = c.q.cols();
  const Eigen::Index dh = dim / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  Matrix<S> dq(c.q.rows(), dim), dk(c.k.rows(), dim), dv(c.v.rows(), dim);
  for (int h = 0; h < heads; ++h) {
    const Matrix<S>& p = c.probs[h];
    auto dctx_h = dcontext.middleCols(h * dh, dh);
    Matrix<S> dp = dctx_h * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh).noalias() = p.transpose() * dctx_h;
    ColVector<S> row_dot = dp.cwiseProduct(p).rowwise().sum();
    Matrix<S> ds = p.cwiseProduct(dp.colwise() - row_dot) * scale;
    dq.middleCols(h * dh, dh).noalias() = ds * c.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() = ds.transpose() * c.q.middleCols(h * dh, dh);
  }
  *dxkv += key.Backward(params, dk, c.key);
  *dxkv += value.Backward(params, dv, c.value);
  return query.Backward(params, dq, c.query);
}

// ---------------------------------------------------------------------------
// FeedForward

template <typename S>
void FeedForward<S>::Register(ParameterSet<S>& params, const std::string& name, int dim,
                              int hidden) {
  in.Register(params, name + ".in", dim, hidden);
  out.Register(params, name + ".out", hidden, dim);
}

template <typename S>
Matrix<S> FeedForward<S>::Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                                  Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c.pre_activation = in.Forward(params, x, &c.in);
  return out.Forward(params, c.pre_activation.cwiseMax(S(0)), &c.out);
}

template <typename S>
Matrix<S> FeedForward<S>::Backward(ParameterSet<S>& params, const Matrix<S>& dy,
                                   const Cache& c) const {
  Matrix<S> dact = out.Backward(params, dy, c.out);
  Matrix<S> dpre = (c.pre_activation.array() > S(0)).select(dact, Matrix<S>::Zero(dact.rows(), dact.cols()));
  return in.Backward(params, dpre, c.in);
}

// ---------------------------------------------------------------------------
// EncoderLayer

template <typename S>
void EncoderLayer<S>::Register(ParameterSet<S>& params, const std::string& name, int dim,
                               int hidden, int heads) {
  attn_norm.Register(params, name + ".attn_norm", dim);
  self_attn.Register(params, name + ".self_attn", dim, heads, false);
  ff_norm.Register(params, name + ".ff_norm", dim);
  ff.Register(params, name + ".ff", dim, hidden);
}

template <typename S>
Matrix<S> EncoderLayer<S>::Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                                   Cache* cache, const ForwardContext& ctx) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  Matrix<S> a = attn_norm.Forward(params, x, &c.attn_norm);
  Matrix<S> x1 = x + c.attn_drop.Forward(self_attn.Forward(params, a, a, &c.self_attn), ctx);
  Matrix<S> b = ff_norm.Forward(params, x1, &c.ff_norm);
  return x1 + c.ff_drop.Forward(ff.Forward(params, b, &c.ff), ctx);
}

template <typename S>
Matrix<S> EncoderLayer<S>::Backward(ParameterSet<S>& params, const Matrix<S>& dy,
                                    Cache& c) const {
  Matrix<S> dx1 = dy;
  dx1 += ff_norm.Backward(params, ff.Backward(params, c.ff_drop.Backward(dy), c.ff), c.ff_norm);
  Matrix<S> dkv = Matrix<S>::Zero(dy.rows(), dy.cols());
  Matrix<S> da = self_attn.Backward(params, c.attn_drop.Backward(dx1), c.self_attn, &dkv);
  da += dkv;
  return dx1 + attn_norm.Backward(params, da, c.attn_norm);
}

// ---------------------------------------------------------------------------
// DecoderLayer

template <typename S>
void DecoderLayer<S>::Register(ParameterSet<S>& params, const std::string& name, int dim,
                               int hidden, int heads) {
  self_norm.Register(params, name + ".self_norm", dim);
  self_attn.Register(params, name + ".self_attn", dim, heads, true);
  cross_norm.Register(params, name + ".cross_norm", dim);
  cross_attn.Register(params, name + ".cross_attn", dim, heads, false);
  ff_norm.Register(params, name + ".ff_norm", dim);
  ff.Register(params, name + ".ff", dim, hidden);
}

template <typename S>
Matrix<S> DecoderLayer<S>::Forward(const ParameterSet<S>& params, const Matrix<S>& x,
                                   const Matrix<S>& memory, Cache* cache,
                                   const ForwardContext& ctx) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  Matrix<S> a = self_norm.Forward(params, x, &c.self_norm);
  Matrix<S> x1 = x + c.self_drop.Forward(self_attn.Forward(params, a, a, &c.self_attn), ctx);
  Matrix<S> b = cross_norm.Forward(params, x1, &c.cross_norm);
  Matrix<S> x2 = x1 + c.cross_drop.Forward(cross_attn.Forward(params, b, memory, &c.cross_attn), ctx);
  Matrix<S> e = ff_norm.Forward(params, x2, &c.ff_norm);
  return x2 + c.ff_drop.Forward(ff.Forward(params, e, &c.ff), ctx);
}

template <typename S>
Matrix<S> DecoderLayer<S>::Backward(ParameterSet<S>& params, const Matrix<S>& dy, Cache& c,
                                    Matrix<S>* dmemory) const {
  Matrix<S> dx2 = dy;
  dx2 += ff_norm.Backward(params, ff.Backward(params, c.ff_drop.Backward(dy), c.ff), c.ff_norm);
  Matrix<S> db = cross_attn.Backward(params, c.cross_drop.Backward(dx2), c.cross_attn, dmemory);
  Matrix<S> dx1 = dx2 + cross_norm.Backward(params, db, c.cross_norm);
  Matrix<S> dkv = Matrix<S>::Zero(dy.rows(), dy.cols());
  Matrix<S> da = self_attn.Backward(params, c.self_drop.Backward(dx1), c.self_attn, &dkv);
  da += dkv;
  return dx1 + self_norm.Backward(params, da, c.self_norm);
}

// ---------------------------------------------------------------------------
// Helpers

template <typename S>
Matrix<S> SinusoidalPositions(int length, int dim) {
  Matrix<S> pe(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      const double angle = pos * freq;
      pe(pos, i) = static_cast<S>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

template <typename S>
Matrix<S> LogSoftmaxRows(const Matrix<S>& logits) {
  Matrix<S> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const S peak = logits.row(r).maxCoeff();
    const S lse = peak + std::log((logits.row(r).array() - peak).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

#define SELFSEG_INSTANTIATE(S)                                   \
  template class ParameterSet<S>;                                \
  template struct Dropout<S>;                                    \
  template struct Linear<S>;                                     \
  template struct LayerNorm<S>;                                  \
  template struct Attention<S>;                                  \
  template struct FeedForward<S>;                                \
  template struct EncoderLayer<S>;                               \
  template struct DecoderLayer<S>;                               \
  template Matrix<S> SinusoidalPositions<S>(int, int);           \
  template Matrix<S> LogSoftmaxRows<S>(const Matrix<S>&);

SELFSEG_INSTANTIATE(float)
SELFSEG_INSTANTIATE(double)

#undef SELFSEG_INSTANTIATE

}  // namespace selfseg::nn
