// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace aim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree; the message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A precondition on a value (count, ratio, layer index) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A NaN or Inf reached a container that requires finite values.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Cosine similarity is undefined for zero vectors.
class ZeroNormError : public Error {
 public:
  explicit ZeroNormError(std::optional<std::uint64_t> token_id = std::nullopt)
      : Error(token_id ? "zero-norm embedding for token " + std::to_string(*token_id)
                       : std::string("zero-norm vector: cosine similarity is undefined")),
        token_id_(token_id) {}

  std::optional<std::uint64_t> token_id() const { return token_id_; }

 private:
  std::optional<std::uint64_t> token_id_;
};

// Malformed token file, profile or config document.
class FormatError : public Error {
 public:
  using Error::Error;
};

// No candidate satisfies the budget. Carries the cheapest candidate's cost
// (in the unit of the budget) so callers can report how far off it was.
class BudgetInfeasible : public Error {
 public:
  BudgetInfeasible(const std::string& what, double cheapest_cost)
      : Error(what), cheapest_cost_(cheapest_cost) {}

  double cheapest_cost() const { return cheapest_cost_; }

 private:
  double cheapest_cost_;
};

}  // namespace aim
