// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Release acceptance checks. Each check is self-contained, seeds its own
// random draws and reports a single pass/fail line.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace h2ot::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 20260101;
  /// Embedding width used for the wall-clock comparison.
  std::size_t bench_dim = 64;
  std::size_t bench_sequences = 2;
  std::size_t bench_repetitions = 3;
  bool include_throughput = true;
};

CriterionResult flops_reduction_ratio(const Options& opts);
CriterionResult schedule_token_counts(const Options& opts);
CriterionResult cluster_oracle_equivalence(const Options& opts);
CriterionResult interpolation_exactness(const Options& opts);
CriterionResult tra_zero_init(const Options& opts);
CriterionResult attention_invariants(const Options& opts);
CriterionResult seq2frame_center(const Options& opts);
CriterionResult parameter_accounting(const Options& opts);
CriterionResult throughput_direction(const Options& opts);
CriterionResult determinism(const Options& opts);

/// Runs every criterion in order (throughput only when enabled).
std::vector<CriterionResult> run_all(const Options& opts,
                                     const std::function<void(const CriterionResult&)>& on_result = {});

/// "[PASS] AC01 name: detail (0.123 s)"
std::string format(const CriterionResult& r);

}  // namespace h2ot::acceptance
