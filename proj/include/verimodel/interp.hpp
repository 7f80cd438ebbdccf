//===-- interp.hpp - Concrete big-step interpreter -------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verimodel/ast.hpp"

namespace verimodel {

struct Trap {
  enum class Kind { DivideByZero, OutOfBounds, StepLimit };
  Kind kind;
  SourceLoc loc;
  bool operator==(const Trap&) const = default;
};

const char* to_string(Trap::Kind k);

struct ConcreteInput {
  std::map<std::string, std::int64_t> scalars;
  std::map<std::string, std::vector<std::int64_t>> arrays;
};

struct InterpResult {
  std::optional<std::int64_t> value;
  std::optional<Trap> trap;
  bool ok() const { return value.has_value(); }
};

// Evaluates the entry function on a total concrete input. Arithmetic wraps
// at 64 bits; division and modulo trunc toward zero and trap on a zero
// divisor; array accesses trap out of bounds. A step budget guards against
// non-terminating loops.
InterpResult interpret(const Program& p, const ConcreteInput& in,
                       std::uint64_t max_steps = 100'000'000);

// Wrapping 64-bit arithmetic shared with the symbolic executor. Division
// ops must not be called with rhs == 0; INT64_MIN / -1 wraps.
std::int64_t wrap_add(std::int64_t a, std::int64_t b);
std::int64_t wrap_sub(std::int64_t a, std::int64_t b);
std::int64_t wrap_mul(std::int64_t a, std::int64_t b);
std::int64_t wrap_neg(std::int64_t a);
std::int64_t wrap_div(std::int64_t a, std::int64_t b);
std::int64_t wrap_mod(std::int64_t a, std::int64_t b);

}  // namespace verimodel
