// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/vpt_model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace h2ot {

namespace {

void check_heads(std::size_t dim, std::size_t heads) {
  if (heads == 0 || dim % heads != 0) {
    throw ShapeError("attention dim " + std::to_string(dim) + " not divisible by " +
                     std::to_string(heads) + " heads");
  }
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Matrix head_logits(const Matrix& q, const Matrix& k, std::size_t head, std::size_t head_dim) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const std::size_t off = head * head_dim;
  Matrix logits(q.rows(), k.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const auto qi = q.row(i).subspan(off, head_dim);
    for (std::size_t j = 0; j < k.rows(); ++j) {
      const auto kj = k.row(j).subspan(off, head_dim);
      double s = 0.0;
      for (std::size_t p = 0; p < head_dim; ++p) s += qi[p] * kj[p];
      logits(i, j) = s * scale;
    }
  }
  return logits;
}

Matrix unit_forward(Matrix x, const TransformerUnit& u, std::size_t heads, Matrix* mean_probs) {
  const Matrix attn_in = u.norm_attn.apply(x);
  const Matrix attn = multi_head_attention(u.attn, attn_in, attn_in, heads, mean_probs);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += attn.data()[i];

  Matrix hidden = u.fc1.apply(u.norm_ffn.apply(x));
  for (double& v : hidden.data()) v = gelu(v);
  const Matrix ffn = u.fc2.apply(hidden);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += ffn.data()[i];
  return x;
}

Matrix frame_matrix(const PoseTokens& x, std::size_t n) {
  Matrix m(x.joints(), x.dim());
  for (std::size_t j = 0; j < x.joints(); ++j) {
    const auto t = x.token(n, j);
    std::copy(t.begin(), t.end(), m.row(j).begin());
  }
  return m;
}

Matrix joint_matrix(const PoseTokens& x, std::size_t j) {
  Matrix m(x.frames(), x.dim());
  for (std::size_t n = 0; n < x.frames(); ++n) {
    const auto t = x.token(n, j);
    std::copy(t.begin(), t.end(), m.row(n).begin());
  }
  return m;
}

void check_tokens(const PoseTokens& x, const ModelConfig& cfg, const char* where) {
  if (x.dim() != cfg.dim || x.joints() != cfg.joints) {
    throw ShapeError(std::string(where) + ": tokens " + std::to_string(x.joints()) + "x" +
                     std::to_string(x.dim()) + " do not match model joints " +
                     std::to_string(cfg.joints) + " and dim " + std::to_string(cfg.dim));
  }
}

}  // namespace

std::vector<Matrix> attention_logits(const AttentionWeights& w, const Matrix& queries_in,
                                     const Matrix& kv_in, std::size_t heads) {
  const std::size_t dim = w.query.out_features();
  check_heads(dim, heads);
  const Matrix q = w.query.apply(queries_in);
  const Matrix k = w.key.apply(kv_in);
  std::vector<Matrix> out;
  out.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) out.push_back(head_logits(q, k, h, dim / heads));
  return out;
}

Matrix multi_head_attention(const AttentionWeights& w, const Matrix& queries_in,
                            const Matrix& kv_in, std::size_t heads, Matrix* mean_probs) {
  const std::size_t dim = w.query.out_features();
  check_heads(dim, heads);
  const std::size_t hd = dim / heads;
  const Matrix q = w.query.apply(queries_in);
  const Matrix k = w.key.apply(kv_in);
  const Matrix v = w.value.apply(kv_in);
  if (mean_probs && (mean_probs->rows() != q.rows() || mean_probs->cols() != k.rows())) {
    throw ShapeError("attention accumulator shape mismatch");
  }

  Matrix concat(q.rows(), dim);
  const double inv_heads = 1.0 / static_cast<double>(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Matrix probs = softmax_rows(head_logits(q, k, h, hd));
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < q.rows(); ++i) {
      auto dst = concat.row(i).subspan(off, hd);
      for (std::size_t j = 0; j < k.rows(); ++j) {
        const double p = probs(i, j);
        const auto vj = v.row(j).subspan(off, hd);
        for (std::size_t c = 0; c < hd; ++c) dst[c] += p * vj[c];
      }
    }
    if (mean_probs) {
      for (std::size_t i = 0; i < probs.size(); ++i) {
        mean_probs->data()[i] += probs.data()[i] * inv_heads;
      }
    }
  }
  return w.output.apply(concat);
}

PoseTokens embed_poses(const PoseSequence2D& poses, const ModelWeights& w) {
  const ModelConfig& cfg = w.config;
  if (poses.frames() != cfg.frames || poses.joints() != cfg.joints) {
    throw ShapeError("embed_poses: sequence is " + std::to_string(poses.frames()) + "x" +
                     std::to_string(poses.joints()) + ", model expects " +
                     std::to_string(cfg.frames) + "x" + std::to_string(cfg.joints));
  }
  PoseTokens out(cfg.frames, cfg.joints, cfg.dim);
  for (std::size_t n = 0; n < cfg.frames; ++n) {
    const auto tpos = w.temporal_pos.row(n);
    for (std::size_t j = 0; j < cfg.joints; ++j) {
      const double x = poses.at(n, j, 0);
      const double y = poses.at(n, j, 1);
      const auto spos = w.spatial_pos.row(j);
      auto t = out.token(n, j);
      for (std::size_t c = 0; c < cfg.dim; ++c) {
        t[c] = x * w.embed.weight(0, c) + y * w.embed.weight(1, c) + w.embed.bias[c] + spos[c] +
               tpos[c];
      }
    }
  }
  return out;
}

BlockOutput transformer_block(const PoseTokens& x, const ModelWeights& w, std::size_t index) {
  const ModelConfig& cfg = w.config;
  check_tokens(x, cfg, "transformer_block");
  if (index >= w.blocks.size()) throw ShapeError("block index out of range");
  const BlockWeights& block = w.blocks[index];

  BlockOutput out{x, Matrix(x.frames(), x.frames())};
  PoseTokens& y = out.tokens;

  for (std::size_t n = 0; n < y.frames(); ++n) {
    const Matrix updated = unit_forward(frame_matrix(y, n), block.spatial, cfg.heads, nullptr);
    for (std::size_t j = 0; j < y.joints(); ++j) {
      const auto r = updated.row(j);
      std::copy(r.begin(), r.end(), y.token(n, j).begin());
    }
  }

  for (std::size_t j = 0; j < y.joints(); ++j) {
    const Matrix updated =
        unit_forward(joint_matrix(y, j), block.temporal, cfg.heads, &out.temporal_attention);
    for (std::size_t n = 0; n < y.frames(); ++n) {
      const auto r = updated.row(n);
      std::copy(r.begin(), r.end(), y.token(n, j).begin());
    }
  }
  const double inv_joints = 1.0 / static_cast<double>(y.joints());
  for (double& v : out.temporal_attention.data()) v *= inv_joints;

  if (!y.all_finite() || !out.temporal_attention.all_finite()) {
    throw NumericError("non-finite activation in block " + std::to_string(index),
                       static_cast<int>(index));
  }
  return out;
}

std::vector<Matrix> temporal_attention_logits(const PoseTokens& x, const ModelWeights& w,
                                              std::size_t index) {
  check_tokens(x, w.config, "temporal_attention_logits");
  if (index >= w.blocks.size()) throw ShapeError("block index out of range");
  const TransformerUnit& unit = w.blocks[index].temporal;
  std::vector<Matrix> out;
  out.reserve(x.joints() * w.config.heads);
  for (std::size_t j = 0; j < x.joints(); ++j) {
    const Matrix h = unit.norm_attn.apply(joint_matrix(x, j));
    for (Matrix& m : attention_logits(unit.attn, h, h, w.config.heads)) out.push_back(std::move(m));
  }
  return out;
}

Matrix average_attention(const std::vector<Matrix>& logits, double shift) {
  if (logits.empty()) throw ShapeError("average_attention over no logits");
  Matrix acc(logits.front().rows(), logits.front().cols());
  for (const Matrix& l : logits) {
    if (l.rows() != acc.rows() || l.cols() != acc.cols()) {
      throw ShapeError("average_attention over mismatched logits");
    }
    Matrix shifted = l;
    for (double& v : shifted.data()) v += shift;
    const Matrix p = softmax_rows(shifted);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += p.data()[i];
  }
  const double inv = 1.0 / static_cast<double>(logits.size());
  for (double& v : acc.data()) v *= inv;
  return acc;
}

Pose3DSequence regression_head(const PoseTokens& x, const ModelWeights& w) {
  if (x.dim() != w.head.in_features() || w.head.out_features() != 3) {
    throw ShapeError("regression_head: token dim " + std::to_string(x.dim()) +
                     " does not match head input " + std::to_string(w.head.in_features()));
  }
  Pose3DSequence out(x.frames(), x.joints());
  for (std::size_t n = 0; n < x.frames(); ++n) {
    for (std::size_t j = 0; j < x.joints(); ++j) {
      const auto t = x.token(n, j);
      for (std::size_t d = 0; d < 3; ++d) {
        double s = w.head.bias[d];
        for (std::size_t c = 0; c < t.size(); ++c) s += t[c] * w.head.weight(c, d);
        out.at(n, j, d) = s;
      }
    }
  }
  return out;
}

ModelWeights init_weights(const ModelConfig& cfg, Rng& rng, bool with_tra) {
  cfg.validate();
  ModelWeights w(cfg, with_tra);
  const std::string tra_queries = std::string(kTraPrefix) + "queries";
  for (TensorRef& t : w.tensors()) {
    if (t.dims.size() != 2 || t.name == tra_queries) continue;
    const bool position = t.name.starts_with("pos.");
    const double bound =
        position ? 0.1 : 1.0 / std::sqrt(static_cast<double>(t.dims[0]));
    for (double& v : t.values) v = rng.uniform(-bound, bound);
  }
  return w;
}

// Weight container, little-endian throughout:
//   magic "H2OTWTS1" | u32 version | u64 x 7 config | u64 tensor count
//   per tensor: u32 name bytes | name | u32 rank | u64 x rank dims | f64 x prod(dims)

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

constexpr char kWeightsMagic[8] = {'H', '2', 'O', 'T', 'W', 'T', 'S', '1'};
constexpr std::uint32_t kWeightsVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T), what);
    return v;
  }

  void read(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw ParseError("weight file truncated at byte " + std::to_string(offset_ + got) +
                       " while reading " + what + " (expected " + std::to_string(n) +
                       " bytes, got " + std::to_string(got) + ")");
    }
    offset_ += n;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

}  // namespace

void save_weights(const ModelWeights& w, std::ostream& out) {
  out.write(kWeightsMagic, sizeof(kWeightsMagic));
  put<std::uint32_t>(out, kWeightsVersion);
  const ModelConfig& c = w.config;
  for (std::size_t v : {c.frames, c.joints, c.blocks, c.dim, c.heads, c.ffn_ratio, c.knn_k}) {
    put<std::uint64_t>(out, v);
  }
  const auto tensors = w.tensors();
  put<std::uint64_t>(out, tensors.size());
  for (const auto& t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (std::size_t d : t.dims) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing weight file");
}

void save_weights(const ModelWeights& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_weights(w, out);
}

ModelWeights load_weights(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.read(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kWeightsMagic, sizeof(magic)) != 0) {
    throw ParseError("weight file: bad magic at byte 0");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kWeightsVersion) {
    throw ParseError("weight file: unsupported version " + std::to_string(version));
  }
  ModelConfig cfg;
  for (std::size_t* field : {&cfg.frames, &cfg.joints, &cfg.blocks, &cfg.dim, &cfg.heads,
                             &cfg.ffn_ratio, &cfg.knn_k}) {
    *field = static_cast<std::size_t>(r.get<std::uint64_t>("config"));
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("weight file header: ") + e.what());
  }
  const auto count = r.get<std::uint64_t>("tensor count");

  struct Record {
    std::vector<std::size_t> dims;
    std::vector<double> values;
    std::size_t offset;
  };
  std::map<std::string, Record> records;
  bool has_tra = false;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t start = r.offset();
    const auto name_len = r.get<std::uint32_t>("name length");
    if (name_len > 4096) {
      throw ParseError("weight file: implausible name length at byte " + std::to_string(start));
    }
    std::string name(name_len, '\0');
    r.read(name.data(), name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) throw ParseError("weight file: tensor " + name + " has rank " + std::to_string(rank));
    Record rec;
    rec.offset = start;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      rec.dims.push_back(static_cast<std::size_t>(r.get<std::uint64_t>("dims")));
      total *= rec.dims.back();
    }
    if (total > (std::size_t{1} << 32)) {
      throw ParseError("weight file: tensor " + name + " is implausibly large");
    }
    rec.values.resize(total);
    r.read(reinterpret_cast<char*>(rec.values.data()), total * sizeof(double), "tensor values");
    if (name.starts_with(kTraPrefix)) has_tra = true;
    if (!records.emplace(name, std::move(rec)).second) {
      throw ParseError("weight file: duplicate tensor " + name);
    }
  }

  ModelWeights w(cfg, has_tra);
  for (TensorRef& t : w.tensors()) {
    auto it = records.find(t.name);
    if (it == records.end()) throw ParseError("weight file: missing tensor " + t.name);
    if (it->second.dims != t.dims) {
      throw ParseError("weight file: tensor " + t.name + " at byte " +
                       std::to_string(it->second.offset) + " has wrong shape");
    }
    std::copy(it->second.values.begin(), it->second.values.end(), t.values.begin());
    records.erase(it);
  }
  if (!records.empty()) {
    throw ParseError("weight file: unexpected tensor " + records.begin()->first);
  }
  return w;
}

ModelWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load_weights(in);
}

}  // namespace h2ot
