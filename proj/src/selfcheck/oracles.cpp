// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace h2ot::oracle {

Points pool_frames(const PoseTokens& tokens) {
  Points out(tokens.frames(), std::vector<double>(tokens.dim(), 0.0));
  for (std::size_t n = 0; n < tokens.frames(); ++n) {
    for (std::size_t c = 0; c < tokens.dim(); ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < tokens.joints(); ++j) s += tokens.at(n, j, c);
      out[n][c] = s / static_cast<double>(tokens.joints());
    }
  }
  return out;
}

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

}  // namespace

DensityPeaksRef density_peaks(const Points& points, std::size_t k) {
  const std::size_t n = points.size();
  DensityPeaksRef out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(sq_distance(points[i], points[j]));
    }
    std::sort(d.begin(), d.end());
    double sum = 0.0;
    for (std::size_t t = 0; t < k; ++t) sum += d[t];
    out.density[i] = std::exp(-sum / static_cast<double>(k));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> denser;
    std::vector<double> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist = std::sqrt(sq_distance(points[i], points[j]));
      all.push_back(dist);
      const bool higher = out.density[j] > out.density[i] ||
                          (out.density[j] == out.density[i] && j < i);
      if (higher) denser.push_back(dist);
    }
    out.distance[i] = denser.empty() ? *std::max_element(all.begin(), all.end())
                                     : *std::min_element(denser.begin(), denser.end());
    out.score[i] = out.density[i] * out.distance[i];
  }
  return out;
}

std::vector<std::size_t> select_top(const std::vector<double>& scores, std::size_t r) {
  std::vector<bool> taken(scores.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t round = 0; round < r; ++round) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (taken[i]) continue;
      if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    taken[best] = true;
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> cluster_select(const PoseTokens& tokens, std::size_t r, std::size_t k) {
  return select_top(density_peaks(pool_frames(tokens), k).score, r);
}

std::vector<std::size_t> uniform_sample(std::size_t n, std::size_t r) {
  if (r == 1) return {0};
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < r; ++j) {
    const double x = static_cast<double>(j) * static_cast<double>(n - 1) /
                     static_cast<double>(r - 1);
    out.push_back(static_cast<std::size_t>(std::floor(x + 0.5)));
  }
  return out;
}

double interpolate(const std::vector<std::size_t>& kept, const std::vector<double>& values,
                   std::size_t t) {
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] == t) return values[i];
    if (kept[i] > t) {
      const double a = static_cast<double>(kept[i - 1]);
      const double b = static_cast<double>(kept[i]);
      const double u = (static_cast<double>(t) - a) / (b - a);
      return (1.0 - u) * values[i - 1] + u * values[i];
    }
  }
  return values.back();
}

double total_block_flops(const std::vector<std::size_t>& counts, std::size_t dim,
                         std::size_t joints, std::size_t ffn_ratio) {
  const double d = static_cast<double>(dim);
  const double j = static_cast<double>(joints);
  const double proj = 2.0 * (4.0 + 2.0 * static_cast<double>(ffn_ratio));
  double total = 0.0;
  for (std::size_t count : counts) {
    const double n = static_cast<double>(count);
    total += proj * j * n * d * d + 2.0 * j * n * n * d + 2.0 * n * j * j * d;
  }
  return total;
}

std::vector<std::size_t> replay_counts(std::size_t frames, std::size_t blocks,
                                       const std::vector<std::size_t>& keep,
                                       const std::vector<std::size_t>& at_block) {
  std::vector<std::size_t> counts;
  std::size_t current = frames;
  for (std::size_t l = 0; l < blocks; ++l) {
    for (std::size_t m = 0; m < at_block.size(); ++m) {
      if (at_block[m] == l) current = keep[m];
    }
    counts.push_back(current);
  }
  return counts;
}

std::vector<std::vector<double>> tra_uniform_frame(const PoseTokens& last, const TraWeights& w) {
  const std::size_t c = last.dim();
  std::vector<std::vector<double>> out(last.joints(), std::vector<double>(c, 0.0));
  for (std::size_t j = 0; j < last.joints(); ++j) {
    std::vector<double> mean_v(c, 0.0);
    for (std::size_t n = 0; n < last.frames(); ++n) {
      for (std::size_t o = 0; o < c; ++o) {
        double v = w.attn.value.bias[o];
        for (std::size_t i = 0; i < c; ++i) v += last.at(n, j, i) * w.attn.value.weight(i, o);
        mean_v[o] += v / static_cast<double>(last.frames());
      }
    }
    for (std::size_t o = 0; o < c; ++o) {
      double v = w.attn.output.bias[o];
      for (std::size_t i = 0; i < c; ++i) v += mean_v[i] * w.attn.output.weight(i, o);
      out[j][o] = v;
    }
  }
  return out;
}

std::size_t enumerate_parameters(const ModelWeights& w) {
  std::size_t total = 0;
  for (const auto& t : w.tensors()) {
    std::size_t prod = 1;
    for (std::size_t d : t.dims) prod *= d;
    total += prod;
  }
  return total;
}

}  // namespace h2ot::oracle
