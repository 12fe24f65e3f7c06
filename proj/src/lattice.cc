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

#include "selfseg/lattice.h"

#include <algorithm>
#include <functional>

#include "selfseg/error.h"
#include "selfseg/utf8.h"

namespace selfseg {

SegmentScores::SegmentScores(int length, std::vector<SegmentEdge> edges)
    : length_(length), edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end(), [](const SegmentEdge& a, const SegmentEdge& b) {
    return a.end != b.end ? a.end < b.end : a.start < b.start;
  });
  offsets_.assign(static_cast<size_t>(length_) + 2, 0);
  for (const auto& e : edges_) {
    if (e.start < 0 || e.end <= e.start || e.end > length_) {
      throw DataError("segment edge [" + std::to_string(e.start) + ", " +
                      std::to_string(e.end) + ") outside word of length " +
                      std::to_string(length_));
    }
    ++offsets_[e.end + 1];
  }
  for (size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
}

SegmentScores BuildLattice(const SubwordVocab& vocab, std::u32string_view word) {
  if (word.empty()) throw DataError("cannot build a lattice for an empty word");
  if (word.size() > static_cast<size_t>(kMaxLatticeWordLength)) {
    throw DataError("word of " + std::to_string(word.size()) +
                    " characters exceeds the lattice limit of " +
                    std::to_string(kMaxLatticeWordLength));
  }
  vocab.CheckCharacters(word);
  const int n = static_cast<int>(word.size());
  std::vector<SegmentEdge> edges;
  edges.reserve(static_cast<size_t>(n) * std::min(n, vocab.max_subword_len()));
  for (int end = 1; end <= n; ++end) {
    vocab.ForEachSegmentEndingAt(word, end, [&](int start, int id) {
      edges.push_back({start, end, id, 0.0});
    });
  }
  return SegmentScores(n, std::move(edges));
}

namespace {

std::vector<double> ForwardScores(const SegmentScores& scores, size_t* lookups) {
  const int n = scores.length();
  std::vector<double> alpha(n + 1, kNegInf);
  alpha[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    double acc = kNegInf;
    for (const auto& e : scores.ending_at(i)) {
      acc = LogAdd(acc, alpha[e.start] + e.log_prob);
      if (lookups) ++*lookups;
    }
    alpha[i] = acc;
  }
  return alpha;
}

// Softmax weights of beta / temperature over the finite entries.
std::vector<double> LocalChoiceProbs(const std::vector<double>& beta,
                                     double temperature) {
  double best = kNegInf;
  for (double b : beta) best = std::max(best, b);
  std::vector<double> w(beta.size(), 0.0);
  if (best == kNegInf) return w;
  double total = 0.0;
  for (size_t k = 0; k < beta.size(); ++k) {
    if (beta[k] == kNegInf) continue;
    w[k] = std::exp((beta[k] - best) / temperature);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

// Follows back-pointers from the end; `back[i]` is the start of the segment
// ending at i, or -1.
bool Retrace(std::u32string_view word, const std::vector<int>& back,
             Segmentation* out) {
  std::vector<int> ends;
  int pos = static_cast<int>(word.size());
  while (pos > 0) {
    if (back[pos] < 0) return false;
    ends.push_back(pos);
    pos = back[pos];
  }
  std::reverse(ends.begin(), ends.end());
  *out = Segmentation::FromBoundaries(word, std::move(ends));
  return true;
}

void CheckLength(std::u32string_view word, const SegmentScores& scores) {
  if (static_cast<int>(word.size()) != scores.length()) {
    throw UsageError("scores do not match word length");
  }
}

}  // namespace

MarginalResult LogMarginal(const SegmentScores& scores) {
  MarginalResult r;
  auto alpha = ForwardScores(scores, &r.lookups);
  r.log_prob = alpha.back();
  r.ok = std::isfinite(r.log_prob);
  if (!r.ok) r.log_prob = kNegInf;
  return r;
}

MarginalGradient LogMarginalGradient(const SegmentScores& scores) {
  MarginalGradient g;
  const int n = scores.length();
  auto alpha = ForwardScores(scores, nullptr);
  g.log_prob = alpha[n];
  g.edge_grad.assign(scores.num_edges(), 0.0);
  g.ok = std::isfinite(g.log_prob);
  if (!g.ok) {
    g.log_prob = kNegInf;
    return g;
  }
  std::vector<double> beta(n + 1, kNegInf);
  beta[n] = 0.0;
  for (int end = n; end >= 1; --end) {
    for (const auto& e : scores.ending_at(end)) {
      beta[e.start] = LogAdd(beta[e.start], e.log_prob + beta[end]);
    }
  }
  const auto& edges = scores.edges();
  for (size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const double lp = alpha[e.start] + e.log_prob + beta[e.end] - g.log_prob;
    g.edge_grad[k] = std::isfinite(lp) ? std::exp(lp) : 0.0;
  }
  return g;
}

ViterbiResult ViterbiDecode(std::u32string_view word, const SegmentScores& scores) {
  CheckLength(word, scores);
  const int n = scores.length();
  std::vector<double> best(n + 1, kNegInf);
  std::vector<int> back(n + 1, -1);
  best[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (const auto& e : scores.ending_at(i)) {
      const double cand = best[e.start] + e.log_prob;
      if (cand > best[i]) {
        best[i] = cand;
        back[i] = e.start;
      }
    }
  }
  ViterbiResult r;
  if (n > 0 && std::isfinite(best[n]) && Retrace(word, back, &r.segmentation)) {
    r.log_prob = best[n];
    r.ok = true;
  }
  return r;
}

Segmentation SampleDecode(std::u32string_view word, const SegmentScores& scores,
                          double temperature, Rng& rng) {
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  CheckLength(word, scores);
  const int n = scores.length();
  std::vector<double> alpha(n + 1, kNegInf);
  std::vector<int> idx(n + 1, -1);
  alpha[0] = 0.0;
  std::vector<double> beta;
  for (int i = 1; i <= n; ++i) {
    auto cands = scores.ending_at(i);
    beta.clear();
    for (const auto& e : cands) beta.push_back(alpha[e.start] + e.log_prob);
    auto probs = LocalChoiceProbs(beta, temperature);
    const double u = uniform01(rng);
    double cum = 0.0;
    int chosen = -1;
    for (size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] <= 0.0) continue;
      chosen = static_cast<int>(k);
      cum += probs[k];
      if (u < cum) break;
    }
    if (chosen >= 0) {
      idx[i] = cands[chosen].start;
      alpha[i] = beta[chosen];
    }
  }
  Segmentation seg;
  if (!Retrace(word, idx, &seg)) {
    throw DataError("no segmentation covers '" + utf8_encode(std::u32string(word)) + "'");
  }
  return seg;
}

std::map<Segmentation, double> SampleDistribution(std::u32string_view word,
                                                  const SegmentScores& scores,
                                                  double temperature) {
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  CheckLength(word, scores);
  const int n = scores.length();
  if (n > kSampleOracleMaxLength) {
    throw UsageError("oracle limit: word longer than " +
                     std::to_string(kSampleOracleMaxLength) + " characters");
  }
  constexpr size_t kMaxLeaves = 20'000'000;
  std::map<Segmentation, double> dist;
  std::vector<double> alpha(n + 1, kNegInf);
  std::vector<int> idx(n + 1, -1);
  alpha[0] = 0.0;
  size_t leaves = 0;

  std::function<void(int, double)> visit = [&](int i, double prob) {
    if (i > n) {
      if (++leaves > kMaxLeaves) throw UsageError("oracle limit: too many sampler paths");
      Segmentation seg;
      if (Retrace(word, idx, &seg)) dist[seg] += prob;
      return;
    }
    auto cands = scores.ending_at(i);
    std::vector<double> beta;
    for (const auto& e : cands) beta.push_back(alpha[e.start] + e.log_prob);
    auto probs = LocalChoiceProbs(beta, temperature);
    bool any = false;
    for (size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] <= 0.0) continue;
      any = true;
      idx[i] = cands[k].start;
      alpha[i] = beta[k];
      visit(i + 1, prob * probs[k]);
    }
    if (!any) {
      idx[i] = -1;
      alpha[i] = kNegInf;
      visit(i + 1, prob);
    }
  };
  visit(1, 1.0);
  return dist;
}

std::vector<Segmentation> EnumerateSegmentations(std::u32string_view word,
                                                 const SubwordVocab& vocab) {
  const int n = static_cast<int>(word.size());
  if (n > kEnumerationMaxLength) {
    throw UsageError("oracle limit: word longer than " +
                     std::to_string(kEnumerationMaxLength) + " characters");
  }
  std::vector<Segmentation> out;
  if (n == 0) return out;
  const uint32_t masks = 1u << (n - 1);
  for (uint32_t mask = 0; mask < masks; ++mask) {
    std::vector<int> ends;
    bool valid = true;
    int begin = 0;
    for (int pos = 1; pos <= n && valid; ++pos) {
      const bool cut = pos == n || (mask >> (pos - 1)) & 1u;
      if (!cut) continue;
      auto id = vocab.id_of(word.substr(begin, pos - begin));
      valid = id.has_value() && !vocab.is_special(*id);
      ends.push_back(pos);
      begin = pos;
    }
    if (valid) out.push_back(Segmentation::FromBoundaries(word, std::move(ends)));
  }
  return out;
}

}  // namespace selfseg
