// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/weights.hpp"

#include <algorithm>
#include <string>

namespace h2ot {

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (frames < 1) fail("frames must be >= 1");
  if (joints < 1) fail("joints must be >= 1");
  if (blocks < 1) fail("blocks must be >= 1");
  if (dim < 1) fail("dim must be >= 1");
  if (heads < 1) fail("heads must be >= 1");
  if (dim % heads != 0) {
    fail("dim " + std::to_string(dim) + " is not divisible by heads " + std::to_string(heads));
  }
  if (ffn_ratio < 1) fail("ffn_ratio must be >= 1");
  if (knn_k < 1) fail("knn_k must be >= 1");
}

Matrix Linear::apply(const Matrix& x) const {
  Matrix y = matmul(x, weight);
  add_row_bias(y, bias);
  return y;
}

ModelWeights::ModelWeights(const ModelConfig& cfg, bool with_tra)
    : config(cfg),
      embed(2, cfg.dim),
      spatial_pos(cfg.joints, cfg.dim),
      temporal_pos(cfg.frames, cfg.dim),
      head(cfg.dim, 3) {
  blocks.reserve(cfg.blocks);
  for (std::size_t i = 0; i < cfg.blocks; ++i) {
    blocks.push_back({TransformerUnit(cfg.dim, cfg.ffn_ratio),
                      TransformerUnit(cfg.dim, cfg.ffn_ratio)});
  }
  if (with_tra) tra.emplace(cfg.frames, cfg.dim);
}

namespace {

template <typename Ref, typename Self>
std::vector<Ref> enumerate(Self& w) {
  std::vector<Ref> out;
  auto mat = [&](std::string name, auto& m) {
    out.push_back(Ref{std::move(name), {m.rows(), m.cols()}, m.data()});
  };
  auto vec = [&](std::string name, auto& v) {
    out.push_back(Ref{std::move(name), {v.size()}, {v.data(), v.size()}});
  };
  auto linear = [&](const std::string& name, auto& l) {
    mat(name + ".weight", l.weight);
    vec(name + ".bias", l.bias);
  };
  auto attention = [&](const std::string& name, auto& a) {
    linear(name + ".query", a.query);
    linear(name + ".key", a.key);
    linear(name + ".value", a.value);
    linear(name + ".output", a.output);
  };
  auto unit = [&](const std::string& name, auto& u) {
    vec(name + ".norm_attn.gain", u.norm_attn.gain);
    vec(name + ".norm_attn.bias", u.norm_attn.bias);
    attention(name + ".attn", u.attn);
    vec(name + ".norm_ffn.gain", u.norm_ffn.gain);
    vec(name + ".norm_ffn.bias", u.norm_ffn.bias);
    linear(name + ".fc1", u.fc1);
    linear(name + ".fc2", u.fc2);
  };

  linear("embed", w.embed);
  mat("pos.spatial", w.spatial_pos);
  mat("pos.temporal", w.temporal_pos);
  for (std::size_t i = 0; i < w.blocks.size(); ++i) {
    const std::string prefix = "blocks." + std::to_string(i);
    unit(prefix + ".spatial", w.blocks[i].spatial);
    unit(prefix + ".temporal", w.blocks[i].temporal);
  }
  linear("head", w.head);
  if (w.tra) {
    mat(std::string(kTraPrefix) + "queries", w.tra->queries);
    attention(std::string(kTraPrefix) + "attn", w.tra->attn);
  }
  return out;
}

}  // namespace

std::vector<TensorRef> ModelWeights::tensors() { return enumerate<TensorRef>(*this); }

std::vector<ConstTensorRef> ModelWeights::tensors() const {
  return enumerate<ConstTensorRef>(*this);
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.values.size();
  return n;
}

bool ModelWeights::operator==(const ModelWeights& other) const {
  if (!(config == other.config) || tra.has_value() != other.tra.has_value()) return false;
  const auto a = tensors();
  const auto b = other.tensors();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].dims != b[i].dims) return false;
    if (!std::equal(a[i].values.begin(), a[i].values.end(), b[i].values.begin(),
                    b[i].values.end())) {
      return false;
    }
  }
  return true;
}

std::size_t analytic_parameter_count(const ModelConfig& cfg) {
  const std::size_t c = cfg.dim, r = cfg.ffn_ratio;
  const std::size_t unit = (4 + 2 * r) * c * c + (9 + r) * c;
  const std::size_t embed = 3 * c;
  const std::size_t positions = cfg.joints * c + cfg.frames * c;
  const std::size_t head = 3 * c + 3;
  return embed + positions + cfg.blocks * 2 * unit + head;
}

std::size_t analytic_tra_parameter_count(const ModelConfig& cfg) {
  const std::size_t c = cfg.dim;
  return cfg.frames * c + 4 * (c * c + c);
}

}  // namespace h2ot
