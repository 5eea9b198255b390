#pragma once

#include <stdexcept>
#include <string>

namespace chnet {

/// Violated precondition: shape mismatch, out-of-range label, and so on.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad user configuration (unsupported QAM order, unknown config key, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factorization hit a non-positive pivot.
class NotSpdError : public NumericError {
 public:
  NotSpdError() : NumericError("matrix not SPD") {}
};

/// H^T H is singular, so ZF-type equalizers are undefined.
class RankDeficientError : public NumericError {
 public:
  RankDeficientError() : NumericError("rank-deficient channel") {}
};

class InstanceTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chnet
