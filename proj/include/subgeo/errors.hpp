// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace subgeo {

// Bad input: malformed function, chain, certificate or configuration.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Input too large for an exact algorithm (subset enumeration and friends).
class StateCapError : public ValidationError {
 public:
  explicit StateCapError(const std::string& what) : ValidationError(what) {}
};

// Quadrature, root finding or a certificate check failed numerically.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace subgeo
