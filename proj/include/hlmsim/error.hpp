// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hlmsim {

/// Invalid argument to an operation (non-positive temperature, zero baseline, ...).
class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(const std::string& what) : std::invalid_argument(what) {}
};

/// A value failed a type invariant (non-finite logit, bad probability mass,
/// dimension mismatch, sequence overflow).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller misuse that violates a documented contract (resampling with no
/// positive residual, verifying a draft the proposal cannot have produced).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Config file problems. The message names the offending key; the CLI maps
/// this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hlmsim
