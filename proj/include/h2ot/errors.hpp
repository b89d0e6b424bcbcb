// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace h2ot {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared during a forward pass.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int block)
      : Error(what), block_(block) {}

  /// Index of the transformer block that produced the value, -1 if none.
  int block() const noexcept { return block_; }

 private:
  int block_;
};

/// A pruning schedule violates its invariants.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// An algorithm parameter is outside its domain (e.g. k >= n for kNN).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Token or pose recovery cannot be performed for the given selection.
class RecoveryError : public Error {
 public:
  using Error::Error;
};

/// Pipeline or run configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace h2ot
