// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/token_recovering.hpp"

#include <algorithm>
#include <string>

#include "h2ot/vpt_model.hpp"

namespace h2ot {

PoseTokens tra_recover(const PoseTokens& last, const TraWeights& w, std::size_t heads) {
  const std::size_t frames = w.queries.rows();
  const std::size_t dim = w.queries.cols();
  if (last.dim() != dim) {
    throw ShapeError("tra_recover: token dim " + std::to_string(last.dim()) +
                     " does not match query dim " + std::to_string(dim));
  }
  if (last.frames() == 0) throw ShapeError("tra_recover: no tokens to recover from");

  PoseTokens out(frames, last.joints(), dim);
  Matrix kv(last.frames(), dim);
  for (std::size_t j = 0; j < last.joints(); ++j) {
    for (std::size_t n = 0; n < last.frames(); ++n) {
      const auto t = last.token(n, j);
      std::copy(t.begin(), t.end(), kv.row(n).begin());
    }
    const Matrix attended = multi_head_attention(w.attn, w.queries, kv, heads);
    for (std::size_t f = 0; f < frames; ++f) {
      auto dst = out.token(f, j);
      const auto q = w.queries.row(f);
      const auto a = attended.row(f);
      for (std::size_t c = 0; c < dim; ++c) dst[c] = q[c] + a[c];
    }
  }
  return out;
}

Pose3DSequence tri_recover(const Pose3DSequence& poses, std::span<const std::size_t> kept,
                           std::size_t frames) {
  if (kept.size() != poses.frames()) {
    throw RecoveryError("tri_recover: " + std::to_string(kept.size()) + " kept indices for " +
                        std::to_string(poses.frames()) + " poses");
  }
  if (kept.size() < 2) throw RecoveryError("tri_recover needs at least two kept frames");
  if (kept.front() != 0 || kept.back() + 1 != frames) {
    throw RecoveryError("tri_recover: kept frames must cover 0 and " +
                        std::to_string(frames - 1) + " (no extrapolation)");
  }
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (kept[i] <= kept[i - 1]) throw RecoveryError("tri_recover: kept frames not ascending");
  }

  const std::size_t joints = poses.joints();
  Pose3DSequence out(frames, joints);
  for (std::size_t s = 0; s + 1 < kept.size(); ++s) {
    const std::size_t a = kept[s], b = kept[s + 1];
    const auto pa = poses.frame(s);
    const auto pb = poses.frame(s + 1);
    std::copy(pa.begin(), pa.end(), out.frame(a).begin());
    const double span = static_cast<double>(b - a);
    for (std::size_t t = a + 1; t < b; ++t) {
      const double w = static_cast<double>(t - a) / span;
      auto dst = out.frame(t);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pa[i] + w * (pb[i] - pa[i]);
    }
  }
  const auto tail = poses.frame(kept.size() - 1);
  std::copy(tail.begin(), tail.end(), out.frame(frames - 1).begin());
  return out;
}

}  // namespace h2ot
