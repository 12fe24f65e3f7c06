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

#include "selfseg/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "selfseg/error.h"
#include "selfseg/rng.h"

namespace selfseg {

namespace {

static_assert(sizeof(float) == 4);

void PutU32(std::ostream& out, uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 4);
}

uint32_t GetU32(std::istream& in, const std::string& source) {
  std::array<unsigned char, 4> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw DataError(source + ": truncated checkpoint");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

// Little-endian float32 image of a tensor.
std::string FloatBytes(const nn::Matrix<float>& m) {
  std::string bytes(static_cast<size_t>(m.size()) * 4, '\0');
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    uint32_t bits = std::bit_cast<uint32_t>(m.data()[k]);
    for (int i = 0; i < 4; ++i) bytes[4 * k + i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  }
  return bytes;
}

}  // namespace

nlohmann::json ConfigToJson(const ScorerConfig& c) {
  return {
      {"enc_layers", c.enc_layers},   {"dec_layers", c.dec_layers},
      {"model_dim", c.model_dim},     {"ff_dim", c.ff_dim},
      {"heads", c.heads},             {"dropout", c.dropout},
      {"warmup_steps", c.warmup_steps}, {"peak_lr", c.peak_lr},
      {"adam_beta1", c.adam_beta1},   {"adam_beta2", c.adam_beta2},
      {"adam_eps", c.adam_eps},       {"epochs", c.epochs},
      {"batch_tokens", c.batch_tokens}, {"seed", c.seed},
  };
}

ScorerConfig ConfigFromJson(const nlohmann::json& j) {
  ScorerConfig c;
  c.enc_layers = j.at("enc_layers").get<int>();
  c.dec_layers = j.at("dec_layers").get<int>();
  c.model_dim = j.at("model_dim").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.heads = j.at("heads").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.warmup_steps = j.at("warmup_steps").get<int>();
  c.peak_lr = j.at("peak_lr").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_tokens = j.at("batch_tokens").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

void WriteParams(const Scorer& scorer, std::ostream& out) {
  const auto& params = scorer.network().params();
  nlohmann::json header;
  header["format"] = "selfseg-checkpoint";
  header["version"] = kCheckpointVersion;
  header["config"] = ConfigToJson(scorer.config());
  header["vocab_hash"] = scorer.vocab().Hash();
  header["vocab_size"] = scorer.vocab().size();
  auto tensors = nlohmann::json::array();
  for (size_t i = 0; i < params.size(); ++i) {
    tensors.push_back({{"name", params[i].name},
                       {"shape", {params[i].value.rows(), params[i].value.cols()}}});
  }
  header["tensors"] = std::move(tensors);
  const std::string text = header.dump();

  out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
  PutU32(out, kCheckpointVersion);
  PutU32(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string bytes = FloatBytes(params[i].value);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

void SaveParams(const Scorer& scorer, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteParams(scorer, out);
  if (!out) throw DataError("failed writing " + path);
}

Scorer ReadParams(std::istream& in, const SubwordVocab& vocab, const std::string& source) {
  std::string magic(kCheckpointMagic.size(), '\0');
  if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) || magic != kCheckpointMagic) {
    throw DataError(source + ": not a selfseg checkpoint (bad magic bytes)");
  }
  const uint32_t version = GetU32(in, source);
  if (version != kCheckpointVersion) {
    throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t header_len = GetU32(in, source);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw DataError(source + ": truncated checkpoint header");

  nlohmann::json header;
  ScorerConfig config;
  std::string vocab_hash;
  try {
    header = nlohmann::json::parse(text);
    config = ConfigFromJson(header.at("config"));
    config.Validate();
    vocab_hash = header.at("vocab_hash").get<std::string>();
    if (!header.at("tensors").is_array()) throw DataError("tensors must be an array");
  } catch (const UsageError& e) {
    throw DataError(source + ": invalid model configuration: " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed checkpoint header: " + e.what());
  }
  if (vocab_hash != vocab.Hash()) {
    throw ModelMismatchError(source + ": checkpoint vocabulary hash " + vocab_hash +
                             " does not match the given vocabulary hash " + vocab.Hash());
  }

  Scorer scorer(config, vocab);
  auto& params = scorer.network().params();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size()) {
    throw DataError(source + ": checkpoint has " + std::to_string(tensors.size()) +
                    " tensors, model expects " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto& t = tensors[i];
    bool matches = false;
    try {
      matches = t.at("name").get<std::string>() == p.name &&
                t.at("shape").at(0).get<Eigen::Index>() == p.value.rows() &&
                t.at("shape").at(1).get<Eigen::Index>() == p.value.cols();
    } catch (const nlohmann::json::exception&) {
    }
    if (!matches) {
      throw DataError(source + ": tensor " + std::to_string(i) + " does not match model layout (" +
                      p.name + ")");
    }
    std::string bytes(static_cast<size_t>(p.value.size()) * 4, '\0');
    if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
      throw DataError(source + ": truncated tensor " + p.name);
    }
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[4 * k + b])) << (8 * b);
      }
      p.value.data()[k] = std::bit_cast<float>(bits);
    }
    if (!p.value.allFinite()) throw DataError(source + ": non-finite values in tensor " + p.name);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(source + ": trailing bytes after the last tensor");
  }
  return scorer;
}

Scorer LoadParams(const std::string& path, const SubwordVocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ReadParams(in, vocab, path);
}

std::string ParamsHash(const Scorer& scorer) {
  const auto& params = scorer.network().params();
  uint64_t h = kFnvOffset;
  for (size_t i = 0; i < params.size(); ++i) {
    h = fnv1a64(params[i].name, h);
    h = fnv1a64(FloatBytes(params[i].value), h);
  }
  return hex64(h);
}

}  // namespace selfseg
