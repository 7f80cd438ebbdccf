//===-- symexec.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// The executor first lowers the program so that every statement contains at
// most one forking operation: short-circuit && / || become explicit ifs
// over fresh temporaries, and array accesses and divisions move into
// dedicated assignment statements with pure operands. Forks then construct
// their children directly (with the split's effect applied and the
// continuation advanced), so no statement is ever re-executed.
//
//===----------------------------------------------------------------------===//

#include "verimodel/symexec.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

namespace verimodel {

std::int64_t deterministic_cost(const PathStats& s, const CostWeights& w) {
  return w.instruction * static_cast<std::int64_t>(s.instructions_executed) +
         w.memory * static_cast<std::int64_t>(s.memory_accesses) +
         w.fork * static_cast<std::int64_t>(s.forks) +
         w.propagation * static_cast<std::int64_t>(s.propagation_steps_total);
}

namespace {

//===----------------------------------------------------------------------===//
// Lowering
//===----------------------------------------------------------------------===//

bool pure_expr(const Expr& e) {
  return std::visit(
      Overload{
          [](const IntLit&) { return true; },
          [](const VarRef&) { return true; },
          [](const ArrayLoad&) { return false; },
          [](const UnaryExpr& x) { return pure_expr(*x.operand); },
          [](const BinaryExpr& x) {
            if (x.op == BinaryOp::And || x.op == BinaryOp::Or ||
                x.op == BinaryOp::Div || x.op == BinaryOp::Mod) {
              return false;
            }
            return pure_expr(*x.lhs) && pure_expr(*x.rhs);
          },
      },
      e.node);
}

class Lowerer {
 public:
  Block block(const Block& b) {
    Block out;
    for (const auto& s : b) stmt(s, out);
    return out;
  }

 private:
  std::string fresh() { return "%t" + std::to_string(counter_++); }

  // Emits temp statements into `out` and returns a pure expression.
  ExprRef expr(const ExprRef& e, Block& out) {
    return std::visit(
        Overload{
            [&](const IntLit&) { return e; },
            [&](const VarRef&) { return e; },
            [&](const ArrayLoad& x) {
              ExprRef idx = expr(x.index, out);
              std::string t = fresh();
              out.push_back(
                  make_stmt(Assign{t, make_load(x.array, idx, e->loc)}, e->loc));
              return make_var(t, e->loc);
            },
            [&](const UnaryExpr& x) {
              ExprRef operand = expr(x.operand, out);
              if (operand == x.operand) return e;
              return make_unary(x.op, operand, e->loc);
            },
            [&](const BinaryExpr& x) -> ExprRef {
              if (x.op == BinaryOp::And || x.op == BinaryOp::Or) {
                ExprRef lhs = expr(x.lhs, out);
                std::string t = fresh();
                Block rhs_stmts;
                ExprRef rhs = expr(x.rhs, rhs_stmts);
                rhs_stmts.push_back(make_stmt(
                    Assign{t, make_binary(BinaryOp::Ne, rhs, make_int(0, e->loc),
                                          e->loc)},
                    e->loc));
                out.push_back(make_stmt(Assign{t, make_int(0, e->loc)}, e->loc));
                if (x.op == BinaryOp::And) {
                  out.push_back(
                      make_stmt(If{lhs, std::move(rhs_stmts), {}}, e->loc));
                } else {
                  Block then_b;
                  then_b.push_back(
                      make_stmt(Assign{t, make_int(1, e->loc)}, e->loc));
                  out.push_back(make_stmt(
                      If{lhs, std::move(then_b), std::move(rhs_stmts)}, e->loc));
                }
                return make_var(t, e->loc);
              }
              ExprRef lhs = expr(x.lhs, out);
              ExprRef rhs = expr(x.rhs, out);
              if (x.op == BinaryOp::Div || x.op == BinaryOp::Mod) {
                std::string t = fresh();
                out.push_back(make_stmt(
                    Assign{t, make_binary(x.op, lhs, rhs, e->loc)}, e->loc));
                return make_var(t, e->loc);
              }
              if (lhs == x.lhs && rhs == x.rhs) return e;
              return make_binary(x.op, lhs, rhs, e->loc);
            },
        },
        e->node);
  }

  void stmt(const StmtRef& s, Block& out) {
    std::visit(
        Overload{
            [&](const Assign& x) {
              ExprRef v = expr(x.value, out);
              out.push_back(make_stmt(Assign{x.name, v}, s->loc));
            },
            [&](const ArrayStore& x) {
              // Index evaluated before the stored value.
              ExprRef idx = expr(x.index, out);
              ExprRef val = expr(x.value, out);
              out.push_back(make_stmt(ArrayStore{x.array, idx, val}, s->loc));
            },
            [&](const If& x) {
              ExprRef cond = expr(x.cond, out);
              out.push_back(make_stmt(
                  If{cond, block(x.then_body), block(x.else_body)}, s->loc));
            },
            [&](const While& x) {
              if (pure_expr(*x.cond)) {
                out.push_back(make_stmt(While{x.cond, block(x.body)}, s->loc));
                return;
              }
              // Rotate impure conditions: evaluate once before the loop and
              // again at the end of each iteration.
              Block prefix;
              ExprRef cond = expr(x.cond, prefix);
              out.insert(out.end(), prefix.begin(), prefix.end());
              Block body = block(x.body);
              body.insert(body.end(), prefix.begin(), prefix.end());
              out.push_back(make_stmt(While{cond, std::move(body)}, s->loc));
            },
            [&](const For& x) {
              ExprRef lo = expr(x.lo, out);
              ExprRef hi = expr(x.hi, out);
              out.push_back(
                  make_stmt(For{x.var, lo, hi, block(x.body)}, s->loc));
            },
            [&](const Return& x) {
              ExprRef v = expr(x.value, out);
              out.push_back(make_stmt(Return{v}, s->loc));
            },
            [&](const CallAssign& x) {
              std::vector<ExprRef> args;
              for (const auto& a : x.args) args.push_back(expr(a, out));
              out.push_back(
                  make_stmt(CallAssign{x.target, x.callee, std::move(args)},
                            s->loc));
            },
        },
        s->node);
  }

  int counter_ = 0;
};

//===----------------------------------------------------------------------===//
// Symbolic state
//===----------------------------------------------------------------------===//

using SymValue = std::variant<std::int64_t, ExprRef>;

bool is_concrete(const SymValue& v) {
  return std::holds_alternative<std::int64_t>(v);
}

std::int64_t concrete(const SymValue& v) { return std::get<std::int64_t>(v); }

ExprRef to_expr(const SymValue& v) {
  if (is_concrete(v)) return make_int(concrete(v));
  return std::get<ExprRef>(v);
}

struct ArrayObj {
  std::vector<SymValue> elems;
};

struct Frame {
  const Function* fn = nullptr;
  std::map<std::string, SymValue> scalars;
  std::map<std::string, std::size_t> arrays;  // name -> store index
};

struct ContItem {
  enum class Kind { Block, WhileCheck, ForCheck, CallRet };
  Kind kind = Kind::Block;
  const Block* block = nullptr;  // Block
  std::size_t idx = 0;
  const Stmt* stmt = nullptr;    // WhileCheck / ForCheck
  std::uint64_t iters = 0;
  SymValue cur = std::int64_t{0};  // ForCheck: next induction value
  SymValue hi = std::int64_t{0};   // ForCheck: bound, evaluated once
  std::string call_target;         // CallRet
};

struct State {
  std::vector<Frame> frames;
  std::vector<ArrayObj> store;
  std::vector<ContItem> cont;
  std::vector<Atom> pc;
  std::uint64_t decisions = 0;
};

//===----------------------------------------------------------------------===//
// Engine
//===----------------------------------------------------------------------===//

class Engine {
 public:
  Engine(const Program& program, const SymbolSpec& spec, const Limits& limits,
         const CostWeights& weights)
      : limits_(limits), weights_(weights) {
    lowered_ = program;
    Lowerer lowerer;
    for (auto& f : lowered_.functions) f.body = lowerer.block(f.body);
    entry_ = lowered_.find_function(lowered_.entry);
    if (!entry_) throw std::invalid_argument("program has no entry function");
    spec.validate_against(*entry_);
    build_initial(spec);
  }

  CostReport run() {
    auto t0 = std::chrono::steady_clock::now();
    while (!worklist_.empty()) {
      if (leaves() >= limits_.max_paths) {
        // Path budget exhausted: every in-flight path is truncated.
        stats_.paths_truncated += worklist_.size();
        worklist_.clear();
        break;
      }
      State state = std::move(worklist_.back());
      worklist_.pop_back();
      step(std::move(state));
    }
    auto t1 = std::chrono::steady_clock::now();

    CostReport report;
    report.stats = stats_;
    report.wall_time_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    report.deterministic_cost = deterministic_cost(stats_, weights_);
    report.error_paths = errors_;
    for (const auto& [line, col] : loop_sites_) {
      report.symbolic_loop_sites.push_back({line, col});
    }
    if (stats_.paths_completed == 1 && single_return_) {
      report.single_concrete_return = single_return_;
    }
    return report;
  }

 private:
  std::uint64_t leaves() const {
    return stats_.paths_completed + stats_.paths_infeasible +
           stats_.paths_truncated;
  }

  void build_initial(const SymbolSpec& spec) {
    State init;
    Frame frame;
    frame.fn = entry_;
    for (const auto& p : entry_->params) {
      if (p.is_array()) {
        const ArraySpec& a = spec.arrays.at(p.name);
        ArrayObj obj;
        std::int64_t len = *p.array_length;
        for (std::int64_t i = 0; i < len; ++i) {
          if (a.symbolic) {
            std::string elem = p.name + "[" + std::to_string(i) + "]";
            domains_.declare(elem, a.elem_lo, a.elem_hi);
            obj.elems.push_back(make_var(elem));
          } else {
            obj.elems.push_back(a.values[static_cast<std::size_t>(i)]);
          }
        }
        frame.arrays[p.name] = init.store.size();
        init.store.push_back(std::move(obj));
      } else {
        const ScalarSpec& s = spec.scalars.at(p.name);
        if (s.symbolic) {
          domains_.declare(p.name, s.lo, s.hi);
          frame.scalars[p.name] = make_var(p.name);
        } else {
          frame.scalars[p.name] = s.value;
        }
      }
    }
    init.frames.push_back(std::move(frame));
    init.cont.push_back(
        {ContItem::Kind::Block, &entry_->body, 0, nullptr, 0, {}, {}, {}});
    worklist_.push_back(std::move(init));
  }

  //===--------------------------------------------------------------------===//
  // Pure symbolic evaluation (counts instructions and arithmetic)
  //===--------------------------------------------------------------------===//

  SymValue eval(const Expr& e, State& state) {
    ++stats_.instructions_executed;
    return std::visit(
        Overload{
            [&](const IntLit& x) -> SymValue { return x.value; },
            [&](const VarRef& x) -> SymValue {
              return state.frames.back().scalars.at(x.name);
            },
            [&](const ArrayLoad&) -> SymValue {
              throw std::logic_error("array load escaped lowering");
            },
            [&](const UnaryExpr& x) -> SymValue {
              SymValue v = eval(*x.operand, state);
              if (x.op == UnaryOp::Neg) {
                ++stats_.arithmetic_ops;
                if (is_concrete(v)) return wrap_neg(concrete(v));
                return ExprRef(make_unary(UnaryOp::Neg, to_expr(v), e.loc));
              }
              if (is_concrete(v)) {
                return static_cast<std::int64_t>(concrete(v) == 0);
              }
              return ExprRef(make_unary(UnaryOp::Not, to_expr(v), e.loc));
            },
            [&](const BinaryExpr& x) -> SymValue {
              SymValue a = eval(*x.lhs, state);
              SymValue b = eval(*x.rhs, state);
              if (is_arithmetic(x.op)) ++stats_.arithmetic_ops;
              if (is_concrete(a) && is_concrete(b)) {
                std::int64_t l = concrete(a);
                std::int64_t r = concrete(b);
                switch (x.op) {
                  case BinaryOp::Add: return wrap_add(l, r);
                  case BinaryOp::Sub: return wrap_sub(l, r);
                  case BinaryOp::Mul: return wrap_mul(l, r);
                  case BinaryOp::Lt: return static_cast<std::int64_t>(l < r);
                  case BinaryOp::Le: return static_cast<std::int64_t>(l <= r);
                  case BinaryOp::Eq: return static_cast<std::int64_t>(l == r);
                  case BinaryOp::Ne: return static_cast<std::int64_t>(l != r);
                  default:
                    throw std::logic_error("impure operator escaped lowering");
                }
              }
              return ExprRef(make_binary(x.op, to_expr(a), to_expr(b), e.loc));
            },
        },
        e.node);
  }

  //===--------------------------------------------------------------------===//
  // Leaf bookkeeping
  //===--------------------------------------------------------------------===//

  void complete_path(const SymValue& ret) {
    ++stats_.paths_completed;
    if (stats_.paths_completed == 1 && is_concrete(ret)) {
      single_return_ = concrete(ret);
    } else {
      single_return_.reset();
    }
  }

  void complete_error_path(Trap::Kind kind, SourceLoc loc) {
    ++stats_.paths_completed;
    errors_.push_back({kind, loc});
    single_return_.reset();
  }

  //===--------------------------------------------------------------------===//
  // Forking
  //===--------------------------------------------------------------------===//

  // Queries pc && atom. Returns the feasible child (pc extended); infeasible
  // and budget-exhausted sides are recorded as leaves and return nullopt.
  std::optional<State> try_side(const State& base, const Atom& atom) {
    Constraint c;
    c.atoms = base.pc;
    c.atoms.push_back(atom);
    SolverResult res = decide(c, domains_, limits_.solver);
    ++stats_.queries;
    stats_.propagation_steps_total += res.propagation_steps;
    switch (res.status) {
      case SolveStatus::Sat: {
        State child = base;
        child.pc.push_back(atom);
        child.decisions += 1;
        return child;
      }
      case SolveStatus::Unsat:
        ++stats_.paths_infeasible;
        return std::nullopt;
      case SolveStatus::BudgetExceeded:
        ++stats_.paths_truncated;
        return std::nullopt;
    }
    return std::nullopt;
  }

  bool depth_exhausted(State& state) {
    if (state.decisions < limits_.max_depth) return false;
    ++stats_.paths_truncated;
    return true;
  }

  //===--------------------------------------------------------------------===//
  // Main interpreter loop for one state
  //===--------------------------------------------------------------------===//

  void step(State state) {
    for (;;) {
      if (state.cont.empty()) {
        throw std::logic_error("path ended without a return");
      }
      ContItem& item = state.cont.back();
      switch (item.kind) {
        case ContItem::Kind::Block: {
          if (item.idx >= item.block->size()) {
            if (state.cont.size() >= 2 &&
                state.cont[state.cont.size() - 2].kind ==
                    ContItem::Kind::CallRet) {
              throw std::logic_error("function body fell through");
            }
            state.cont.pop_back();
            continue;
          }
          const Stmt& s = *(*item.block)[item.idx];
          ++item.idx;
          if (!exec_stmt(s, state)) return;  // forked or completed
          continue;
        }
        case ContItem::Kind::WhileCheck:
          if (!while_check(state)) return;
          continue;
        case ContItem::Kind::ForCheck:
          if (!for_check(state)) return;
          continue;
        case ContItem::Kind::CallRet:
          throw std::logic_error("call marker executed directly");
      }
    }
  }

  // Returns false when the state stopped being current (fork or leaf).
  bool exec_stmt(const Stmt& s, State& state) {
    ++stats_.instructions_executed;
    return std::visit(
        Overload{
            [&](const Assign& x) { return exec_assign(s, x, state); },
            [&](const ArrayStore& x) { return exec_store(s, x, state); },
            [&](const If& x) {
              SymValue cond = eval(*x.cond, state);
              if (is_concrete(cond)) {
                const Block& taken =
                    concrete(cond) != 0 ? x.then_body : x.else_body;
                state.cont.push_back(
                    {ContItem::Kind::Block, &taken, 0, nullptr, 0, {}, {}, {}});
                return true;
              }
              if (depth_exhausted(state)) return false;
              ExprRef cv = to_expr(cond);
              Atom true_atom{cv, RelOp::Ne, make_int(0)};
              Atom false_atom{cv, RelOp::Eq, make_int(0)};
              ++stats_.forks;
              auto true_side = try_side(state, true_atom);
              auto false_side = try_side(state, false_atom);
              if (true_side) {
                true_side->cont.push_back({ContItem::Kind::Block, &x.then_body, 0,
                                           nullptr, 0, {}, {}, {}});
              }
              if (false_side) {
                false_side->cont.push_back({ContItem::Kind::Block, &x.else_body,
                                            0, nullptr, 0, {}, {}, {}});
              }
              // True branch explored first: push it last.
              if (false_side) worklist_.push_back(std::move(*false_side));
              if (true_side) worklist_.push_back(std::move(*true_side));
              return false;
            },
            [&](const While&) {
              ContItem item;
              item.kind = ContItem::Kind::WhileCheck;
              item.stmt = &s;
              state.cont.push_back(std::move(item));
              return true;
            },
            [&](const For& x) {
              ContItem item;
              item.kind = ContItem::Kind::ForCheck;
              item.stmt = &s;
              item.cur = eval(*x.lo, state);
              item.hi = eval(*x.hi, state);
              state.cont.push_back(std::move(item));
              return true;
            },
            [&](const Return& x) { return exec_return(x, state); },
            [&](const CallAssign& x) {
              const Function* callee = lowered_.find_function(x.callee);
              Frame frame;
              frame.fn = callee;
              Frame& caller = state.frames.back();
              for (std::size_t i = 0; i < callee->params.size(); ++i) {
                const Param& p = callee->params[i];
                if (p.is_array()) {
                  const auto& var = std::get<VarRef>(x.args[i]->node);
                  frame.arrays[p.name] = caller.arrays.at(var.name);
                } else {
                  frame.scalars[p.name] = eval(*x.args[i], state);
                }
              }
              ContItem ret;
              ret.kind = ContItem::Kind::CallRet;
              ret.call_target = x.target;
              state.cont.push_back(std::move(ret));
              state.cont.push_back({ContItem::Kind::Block, &callee->body, 0,
                                    nullptr, 0, {}, {}, {}});
              state.frames.push_back(std::move(frame));
              return true;
            },
        },
        s.node);
  }

  bool exec_assign(const Stmt& s, const Assign& x, State& state) {
    // Lowered forms: a single array load, a single div/mod, or a pure value.
    if (const auto* load = std::get_if<ArrayLoad>(&x.value->node)) {
      return exec_load(s, x.name, *load, state);
    }
    if (const auto* bin = std::get_if<BinaryExpr>(&x.value->node);
        bin && (bin->op == BinaryOp::Div || bin->op == BinaryOp::Mod)) {
      return exec_div(s, x.name, *bin, state);
    }
    state.frames.back().scalars[x.name] = eval(*x.value, state);
    return true;
  }

  bool exec_load(const Stmt& s, const std::string& target, const ArrayLoad& load,
                 State& state) {
    ++stats_.instructions_executed;  // the load itself
    ++stats_.memory_accesses;
    Frame& frame = state.frames.back();
    ArrayObj& arr = state.store[frame.arrays.at(load.array)];
    std::int64_t len = static_cast<std::int64_t>(arr.elems.size());
    SymValue idx = eval(*load.index, state);
    if (is_concrete(idx)) {
      std::int64_t i = concrete(idx);
      if (i < 0 || i >= len) {
        complete_error_path(Trap::Kind::OutOfBounds, s.loc);
        return false;
      }
      frame.scalars[target] = arr.elems[static_cast<std::size_t>(i)];
      return true;
    }
    if (depth_exhausted(state)) return false;
    ExprRef iv = to_expr(idx);
    // Case-split over the index domain plus the two out-of-bounds sides.
    std::vector<State> children;
    std::uint64_t sides = 0;
    for (std::int64_t k = 0; k < len; ++k) {
      ++sides;
      if (auto child = try_side(state, Atom{iv, RelOp::Eq, make_int(k)})) {
        child->frames.back().scalars[target] =
            child->store[child->frames.back().arrays.at(load.array)]
                .elems[static_cast<std::size_t>(k)];
        children.push_back(std::move(*child));
      }
    }
    ++sides;
    if (try_side(state, Atom{iv, RelOp::Lt, make_int(0)})) {
      complete_error_path(Trap::Kind::OutOfBounds, s.loc);
    }
    ++sides;
    if (try_side(state, Atom{make_int(len), RelOp::Le, iv})) {
      complete_error_path(Trap::Kind::OutOfBounds, s.loc);
    }
    stats_.forks += sides - 1;
    // Ascending index order explored first.
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      worklist_.push_back(std::move(*it));
    }
    return false;
  }

  bool exec_store(const Stmt& s, const ArrayStore& x, State& state) {
    ++stats_.memory_accesses;
    SymValue idx = eval(*x.index, state);
    SymValue val = eval(*x.value, state);
    Frame& frame = state.frames.back();
    std::size_t arr_index = frame.arrays.at(x.array);
    std::int64_t len =
        static_cast<std::int64_t>(state.store[arr_index].elems.size());
    if (is_concrete(idx)) {
      std::int64_t i = concrete(idx);
      if (i < 0 || i >= len) {
        complete_error_path(Trap::Kind::OutOfBounds, s.loc);
        return false;
      }
      state.store[arr_index].elems[static_cast<std::size_t>(i)] = val;
      return true;
    }
    if (depth_exhausted(state)) return false;
    ExprRef iv = to_expr(idx);
    std::vector<State> children;
    std::uint64_t sides = 0;
    for (std::int64_t k = 0; k < len; ++k) {
      ++sides;
      if (auto child = try_side(state, Atom{iv, RelOp::Eq, make_int(k)})) {
        child->store[arr_index].elems[static_cast<std::size_t>(k)] = val;
        children.push_back(std::move(*child));
      }
    }
    ++sides;
    if (try_side(state, Atom{iv, RelOp::Lt, make_int(0)})) {
      complete_error_path(Trap::Kind::OutOfBounds, s.loc);
    }
    ++sides;
    if (try_side(state, Atom{make_int(len), RelOp::Le, iv})) {
      complete_error_path(Trap::Kind::OutOfBounds, s.loc);
    }
    stats_.forks += sides - 1;
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      worklist_.push_back(std::move(*it));
    }
    return false;
  }

  bool exec_div(const Stmt& s, const std::string& target, const BinaryExpr& bin,
                State& state) {
    ++stats_.instructions_executed;  // the division node
    SymValue lhs = eval(*bin.lhs, state);
    SymValue rhs = eval(*bin.rhs, state);
    ++stats_.arithmetic_ops;
    if (is_concrete(rhs)) {
      if (concrete(rhs) == 0) {
        complete_error_path(Trap::Kind::DivideByZero, s.loc);
        return false;
      }
      if (is_concrete(lhs)) {
        std::int64_t v = bin.op == BinaryOp::Div
                             ? wrap_div(concrete(lhs), concrete(rhs))
                             : wrap_mod(concrete(lhs), concrete(rhs));
        state.frames.back().scalars[target] = v;
        return true;
      }
      state.frames.back().scalars[target] =
          ExprRef(make_binary(bin.op, to_expr(lhs), to_expr(rhs)));
      return true;
    }
    if (depth_exhausted(state)) return false;
    ExprRef rv = to_expr(rhs);
    ++stats_.forks;
    // Division by zero is a completed error path when feasible.
    if (try_side(state, Atom{rv, RelOp::Eq, make_int(0)})) {
      complete_error_path(Trap::Kind::DivideByZero, s.loc);
    }
    auto ok = try_side(state, Atom{rv, RelOp::Ne, make_int(0)});
    if (ok) {
      ok->frames.back().scalars[target] =
          ExprRef(make_binary(bin.op, to_expr(lhs), rv));
      worklist_.push_back(std::move(*ok));
    }
    return false;
  }

  bool exec_return(const Return& x, State& state) {
    SymValue v = eval(*x.value, state);
    // Unwind to the nearest call marker; a bare stack means the entry
    // function returned and the path is complete.
    while (!state.cont.empty() &&
           state.cont.back().kind != ContItem::Kind::CallRet) {
      state.cont.pop_back();
    }
    if (state.cont.empty()) {
      complete_path(v);
      return false;
    }
    std::string target = state.cont.back().call_target;
    state.cont.pop_back();
    state.frames.pop_back();
    state.frames.back().scalars[target] = v;
    return true;
  }

  // Shared branch logic for loop condition checks. `on_take` configures the
  // child that re-enters the loop body.
  bool loop_branch(State& state, const SymValue& cond, const Block& body,
                   SourceLoc loc) {
    ContItem& item = state.cont.back();
    if (is_concrete(cond)) {
      if (concrete(cond) == 0) {
        exit_loop(state);
        return true;
      }
      if (item.iters >= limits_.max_loop_iterations) {
        ++stats_.paths_truncated;
        return false;
      }
      enter_iteration(state, body);
      return true;
    }
    if (depth_exhausted(state)) return false;
    loop_sites_.insert({loc.line, loc.col});
    ExprRef cv = to_expr(cond);
    ++stats_.forks;
    auto take = try_side(state, Atom{cv, RelOp::Ne, make_int(0)});
    auto exit = try_side(state, Atom{cv, RelOp::Eq, make_int(0)});
    if (take) {
      if (take->cont.back().iters >= limits_.max_loop_iterations) {
        ++stats_.paths_truncated;
        take.reset();
      } else {
        enter_iteration(*take, body);
      }
    }
    if (exit) exit_loop(*exit);
    if (exit) worklist_.push_back(std::move(*exit));
    if (take) worklist_.push_back(std::move(*take));  // explored first
    return false;
  }

  void enter_iteration(State& state, const Block& body) {
    ContItem& item = state.cont.back();
    ++item.iters;
    if (item.kind == ContItem::Kind::ForCheck) {
      const auto& f = std::get<For>(item.stmt->node);
      state.frames.back().scalars[f.var] = item.cur;
      if (is_concrete(item.cur)) {
        item.cur = wrap_add(concrete(item.cur), 1);
      } else {
        item.cur = ExprRef(
            make_binary(BinaryOp::Add, to_expr(item.cur), make_int(1)));
      }
      ++stats_.arithmetic_ops;
    }
    state.cont.push_back({ContItem::Kind::Block, &body, 0, nullptr, 0, {}, {}, {}});
  }

  void exit_loop(State& state) {
    ContItem& item = state.cont.back();
    if (item.kind == ContItem::Kind::ForCheck) {
      const auto& f = std::get<For>(item.stmt->node);
      state.frames.back().scalars.erase(f.var);
    }
    state.cont.pop_back();
  }

  bool while_check(State& state) {
    ContItem& item = state.cont.back();
    const auto& w = std::get<While>(item.stmt->node);
    ++stats_.instructions_executed;  // the check itself
    SymValue cond = eval(*w.cond, state);
    return loop_branch(state, cond, w.body, item.stmt->loc);
  }

  bool for_check(State& state) {
    ContItem& item = state.cont.back();
    const auto& f = std::get<For>(item.stmt->node);
    ++stats_.instructions_executed;
    SymValue cond;
    if (is_concrete(item.cur) && is_concrete(item.hi)) {
      cond = static_cast<std::int64_t>(concrete(item.cur) < concrete(item.hi));
    } else {
      cond = ExprRef(
          make_binary(BinaryOp::Lt, to_expr(item.cur), to_expr(item.hi)));
    }
    return loop_branch(state, cond, f.body, item.stmt->loc);
  }

  Program lowered_;
  const Function* entry_ = nullptr;
  Limits limits_;
  CostWeights weights_;
  DomainMap domains_;
  std::vector<State> worklist_;
  PathStats stats_;
  std::vector<PathError> errors_;
  std::set<std::pair<int, int>> loop_sites_;
  std::optional<std::int64_t> single_return_;
};

}  // namespace

CostReport execute(const Program& p, const SymbolSpec& spec, const Limits& limits,
                   const CostWeights& weights) {
  if (limits.max_paths == 0 || limits.max_depth == 0 ||
      limits.max_loop_iterations == 0 || limits.solver.max_splits == 0) {
    throw std::invalid_argument("all execution limits must be positive");
  }
  return Engine(p, spec, limits, weights).run();
}

}  // namespace verimodel
