//===-- solver.hpp - Finite-domain constraint solver ------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Branch-and-prune over finite integer domains: interval propagation to a
// fixpoint, then split the widest variable at its midpoint and recurse.
// Sound and complete over the declared domains; exposes deterministic work
// counters (propagation steps, splits) that stand in for query cost.
//
// Arithmetic inside constraints is interpreted over the unbounded integers
// (no 64-bit wrap-around); a point where a division by zero occurs does not
// satisfy the atom containing it.
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

enum class RelOp { Lt, Le, Eq, Ne };

const char* to_symbol(RelOp op);

struct Atom {
  ExprRef lhs;
  RelOp op = RelOp::Lt;
  ExprRef rhs;

  // Operator-flipped negation keeps constraints plain conjunctions:
  // not(a < b) == b <= a, not(a <= b) == b < a, and Eq/Ne swap.
  Atom negated() const;
};

// Conjunction of relational atoms over symbolic variables.
struct Constraint {
  std::vector<Atom> atoms;

  std::size_t atom_count() const { return atoms.size(); }
  std::size_t var_count() const;
  std::vector<std::string> variables() const;  // sorted, distinct
};

struct Domain {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

// Variable declarations in order; declaration order breaks splitting ties.
struct DomainMap {
  std::vector<std::pair<std::string, Domain>> vars;

  void declare(const std::string& name, std::int64_t lo, std::int64_t hi);
  const Domain* find(const std::string& name) const;
};

enum class SolveStatus { Sat, Unsat, BudgetExceeded };

struct SolverResult {
  SolveStatus status = SolveStatus::Unsat;
  std::map<std::string, std::int64_t> witness;  // full assignment when Sat
  std::uint64_t propagation_steps = 0;          // atom re-evaluations
  std::uint64_t splits = 0;
};

struct SolverLimits {
  std::uint64_t max_splits = 1'000'000;
};

// Decides satisfiability of `c` over the given finite domains. Every
// variable mentioned by an atom must be declared. A split budget overrun is
// reported as BudgetExceeded, never as Unsat.
SolverResult decide(const Constraint& c, const DomainMap& domains,
                    const SolverLimits& limits = {});

// True iff every atom of `c` evaluates to true under the total assignment.
bool check_witness(const Constraint& c,
                   const std::map<std::string, std::int64_t>& assignment);

}  // namespace verimodel
