//===-- interp.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/interp.hpp"

#include <deque>
#include <stdexcept>
#include <unordered_map>

namespace verimodel {

const char* to_string(Trap::Kind k) {
  switch (k) {
    case Trap::Kind::DivideByZero: return "divide-by-zero";
    case Trap::Kind::OutOfBounds: return "out-of-bounds";
    case Trap::Kind::StepLimit: return "step-limit";
  }
  return "?";
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) +
                                   static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) -
                                   static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) *
                                   static_cast<std::uint64_t>(b));
}
std::int64_t wrap_neg(std::int64_t a) {
  return static_cast<std::int64_t>(-static_cast<std::uint64_t>(a));
}
std::int64_t wrap_div(std::int64_t a, std::int64_t b) {
  if (a == INT64_MIN && b == -1) return INT64_MIN;  // wraps
  return a / b;
}
std::int64_t wrap_mod(std::int64_t a, std::int64_t b) {
  if (a == INT64_MIN && b == -1) return 0;
  return a % b;
}

namespace {

struct TrapSignal {
  Trap trap;
};

class Interp {
 public:
  Interp(const Program& p, std::uint64_t max_steps)
      : program_(p), max_steps_(max_steps) {}

  InterpResult run(const ConcreteInput& in) {
    const Function& entry = program_.entry_function();
    Scope scope;
    for (const auto& param : entry.params) {
      if (param.is_array()) {
        auto it = in.arrays.find(param.name);
        if (it == in.arrays.end() ||
            it->second.size() != static_cast<std::size_t>(*param.array_length)) {
          throw std::invalid_argument("input does not cover array parameter '" +
                                      param.name + "'");
        }
        storage_.push_back(it->second);
        scope.arrays[param.name] = &storage_.back();
      } else {
        auto it = in.scalars.find(param.name);
        if (it == in.scalars.end()) {
          throw std::invalid_argument("input does not cover scalar parameter '" +
                                      param.name + "'");
        }
        scope.scalars[param.name] = it->second;
      }
    }
    try {
      return {call_body(entry.body, scope), std::nullopt};
    } catch (const TrapSignal& t) {
      return {std::nullopt, t.trap};
    }
  }

 private:
  struct Scope {
    std::unordered_map<std::string, std::int64_t> scalars;
    std::unordered_map<std::string, std::vector<std::int64_t>*> arrays;
  };

  void tick(SourceLoc loc) {
    if (++steps_ > max_steps_) throw TrapSignal{{Trap::Kind::StepLimit, loc}};
  }

  std::int64_t eval(const Expr& e, Scope& scope) {
    tick(e.loc);
    return std::visit(
        Overload{
            [&](const IntLit& x) { return x.value; },
            [&](const VarRef& x) { return scope.scalars.at(x.name); },
            [&](const ArrayLoad& x) {
              std::int64_t idx = eval(*x.index, scope);
              const auto& arr = *scope.arrays.at(x.array);
              if (idx < 0 || idx >= static_cast<std::int64_t>(arr.size())) {
                throw TrapSignal{{Trap::Kind::OutOfBounds, e.loc}};
              }
              return arr[static_cast<std::size_t>(idx)];
            },
            [&](const UnaryExpr& x) {
              if (x.op == UnaryOp::Not) {
                return static_cast<std::int64_t>(eval(*x.operand, scope) == 0);
              }
              return wrap_neg(eval(*x.operand, scope));
            },
            [&](const BinaryExpr& x) -> std::int64_t {
              // && and || short-circuit on the truthiness of the left side.
              if (x.op == BinaryOp::And) {
                if (eval(*x.lhs, scope) == 0) return 0;
                return eval(*x.rhs, scope) != 0;
              }
              if (x.op == BinaryOp::Or) {
                if (eval(*x.lhs, scope) != 0) return 1;
                return eval(*x.rhs, scope) != 0;
              }
              std::int64_t a = eval(*x.lhs, scope);
              std::int64_t b = eval(*x.rhs, scope);
              switch (x.op) {
                case BinaryOp::Add: return wrap_add(a, b);
                case BinaryOp::Sub: return wrap_sub(a, b);
                case BinaryOp::Mul: return wrap_mul(a, b);
                case BinaryOp::Div:
                  if (b == 0) throw TrapSignal{{Trap::Kind::DivideByZero, e.loc}};
                  return wrap_div(a, b);
                case BinaryOp::Mod:
                  if (b == 0) throw TrapSignal{{Trap::Kind::DivideByZero, e.loc}};
                  return wrap_mod(a, b);
                case BinaryOp::Lt: return a < b;
                case BinaryOp::Le: return a <= b;
                case BinaryOp::Eq: return a == b;
                case BinaryOp::Ne: return a != b;
                default: throw std::logic_error("unreachable");
              }
            },
        },
        e.node);
  }

  // Executes a block; returns the function result when a return runs.
  std::optional<std::int64_t> exec_block(const Block& b, Scope& scope) {
    for (const auto& s : b) {
      if (auto r = exec_stmt(*s, scope)) return r;
    }
    return std::nullopt;
  }

  std::optional<std::int64_t> exec_stmt(const Stmt& s, Scope& scope) {
    tick(s.loc);
    return std::visit(
        Overload{
            [&](const Assign& x) -> std::optional<std::int64_t> {
              scope.scalars[x.name] = eval(*x.value, scope);
              return std::nullopt;
            },
            [&](const ArrayStore& x) -> std::optional<std::int64_t> {
              std::int64_t idx = eval(*x.index, scope);
              std::int64_t v = eval(*x.value, scope);
              auto& arr = *scope.arrays.at(x.array);
              if (idx < 0 || idx >= static_cast<std::int64_t>(arr.size())) {
                throw TrapSignal{{Trap::Kind::OutOfBounds, s.loc}};
              }
              arr[static_cast<std::size_t>(idx)] = v;
              return std::nullopt;
            },
            [&](const If& x) -> std::optional<std::int64_t> {
              if (eval(*x.cond, scope) != 0) return exec_block(x.then_body, scope);
              return exec_block(x.else_body, scope);
            },
            [&](const While& x) -> std::optional<std::int64_t> {
              while (eval(*x.cond, scope) != 0) {
                if (auto r = exec_block(x.body, scope)) return r;
                tick(s.loc);
              }
              return std::nullopt;
            },
            [&](const For& x) -> std::optional<std::int64_t> {
              std::int64_t lo = eval(*x.lo, scope);
              std::int64_t hi = eval(*x.hi, scope);
              for (std::int64_t i = lo; i < hi; ++i) {
                scope.scalars[x.var] = i;
                if (auto r = exec_block(x.body, scope)) return r;
                tick(s.loc);
              }
              scope.scalars.erase(x.var);
              return std::nullopt;
            },
            [&](const Return& x) -> std::optional<std::int64_t> {
              return eval(*x.value, scope);
            },
            [&](const CallAssign& x) -> std::optional<std::int64_t> {
              const Function* callee = program_.find_function(x.callee);
              Scope inner;
              for (std::size_t i = 0; i < callee->params.size(); ++i) {
                const Param& p = callee->params[i];
                if (p.is_array()) {
                  const auto& var = std::get<VarRef>(x.args[i]->node);
                  inner.arrays[p.name] = scope.arrays.at(var.name);
                } else {
                  inner.scalars[p.name] = eval(*x.args[i], scope);
                }
              }
              scope.scalars[x.target] = call_body(callee->body, inner);
              return std::nullopt;
            },
        },
        s.node);
  }

  std::int64_t call_body(const Block& body, Scope& scope) {
    auto r = exec_block(body, scope);
    if (!r) throw std::logic_error("function body fell through without return");
    return *r;
  }

  const Program& program_;
  std::uint64_t max_steps_;
  std::uint64_t steps_ = 0;
  std::deque<std::vector<std::int64_t>> storage_;
};

}  // namespace

InterpResult interpret(const Program& p, const ConcreteInput& in,
                       std::uint64_t max_steps) {
  return Interp(p, max_steps).run(in);
}

}  // namespace verimodel
