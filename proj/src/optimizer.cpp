//===-- optimizer.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Five semantics-preserving passes: constant folding, constant propagation,
// dead-code elimination, unrolling of concrete-bound for loops, and call
// inlining. Every rewrite must preserve return values and trap behaviour
// for all concrete inputs, so expressions are only discarded when they are
// provably trap-free.
//
//===----------------------------------------------------------------------===//

#include "verimodel/optimizer.hpp"

#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "verimodel/errors.hpp"
#include "verimodel/interp.hpp"

namespace verimodel {

const char* to_string(PassKind p) {
  switch (p) {
    case PassKind::ConstantFold: return "constant-fold";
    case PassKind::ConstantPropagate: return "constant-propagate";
    case PassKind::DeadCodeEliminate: return "dead-code-eliminate";
    case PassKind::UnrollConcreteLoops: return "unroll-concrete-loops";
    case PassKind::Inline: return "inline";
  }
  return "?";
}

OptConfig OptConfig::from_names(const std::string& names) {
  OptConfig cfg;
  cfg.passes.clear();
  std::stringstream ss(names);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "constant-fold") cfg.passes.push_back(PassKind::ConstantFold);
    else if (item == "constant-propagate") cfg.passes.push_back(PassKind::ConstantPropagate);
    else if (item == "dead-code-eliminate") cfg.passes.push_back(PassKind::DeadCodeEliminate);
    else if (item == "unroll-concrete-loops") cfg.passes.push_back(PassKind::UnrollConcreteLoops);
    else if (item == "inline") cfg.passes.push_back(PassKind::Inline);
    else throw ConfigError("unknown optimizer pass: " + item);
  }
  return cfg;
}

namespace {

std::optional<std::int64_t> as_literal(const Expr& e) {
  if (const auto* lit = std::get_if<IntLit>(&e.node)) return lit->value;
  return std::nullopt;
}

// Array lengths of the enclosing function, needed to prove loads in-bounds.
using ArrayLens = std::map<std::string, std::int64_t>;

ArrayLens array_lens(const Function& f) {
  ArrayLens lens;
  for (const auto& p : f.params) {
    if (p.is_array()) lens[p.name] = *p.array_length;
  }
  return lens;
}

// True when evaluating e can never trap: no division by a non-constant or
// zero divisor and no array access that is not a constant in-bounds index.
bool trap_free(const Expr& e, const ArrayLens& lens) {
  return std::visit(
      Overload{
          [](const IntLit&) { return true; },
          [](const VarRef&) { return true; },
          [&](const ArrayLoad& x) {
            auto idx = as_literal(*x.index);
            auto len = lens.find(x.array);
            return idx && len != lens.end() && *idx >= 0 && *idx < len->second &&
                   trap_free(*x.index, lens);
          },
          [&](const UnaryExpr& x) { return trap_free(*x.operand, lens); },
          [&](const BinaryExpr& x) {
            if (x.op == BinaryOp::Div || x.op == BinaryOp::Mod) {
              auto d = as_literal(*x.rhs);
              if (!d || *d == 0) return false;
            }
            return trap_free(*x.lhs, lens) && trap_free(*x.rhs, lens);
          },
      },
      e.node);
}

//===----------------------------------------------------------------------===//
// Constant folding
//===----------------------------------------------------------------------===//

ExprRef truthiness(ExprRef e) {
  if (auto v = as_literal(*e)) return make_int(*v != 0, e->loc);
  return make_binary(BinaryOp::Ne, e, make_int(0, e->loc), e->loc);
}

ExprRef fold_expr(const ExprRef& e, const ArrayLens& lens) {
  return std::visit(
      Overload{
          [&](const IntLit&) { return e; },
          [&](const VarRef&) { return e; },
          [&](const ArrayLoad& x) -> ExprRef {
            ExprRef idx = fold_expr(x.index, lens);
            if (idx == x.index) return e;
            return make_load(x.array, idx, e->loc);
          },
          [&](const UnaryExpr& x) -> ExprRef {
            ExprRef operand = fold_expr(x.operand, lens);
            if (auto v = as_literal(*operand)) {
              if (x.op == UnaryOp::Neg) return make_int(wrap_neg(*v), e->loc);
              return make_int(*v == 0, e->loc);
            }
            if (operand == x.operand) return e;
            return make_unary(x.op, operand, e->loc);
          },
          [&](const BinaryExpr& x) -> ExprRef {
            ExprRef lhs = fold_expr(x.lhs, lens);
            ExprRef rhs = fold_expr(x.rhs, lens);
            auto lv = as_literal(*lhs);
            auto rv = as_literal(*rhs);

            // Short-circuit operators: the left side is always evaluated,
            // the right side only when the left did not decide the result.
            if (x.op == BinaryOp::And) {
              if (lv) return *lv == 0 ? make_int(0, e->loc) : truthiness(rhs);
              if (rv) {
                if (*rv != 0) return truthiness(lhs);
                if (trap_free(*lhs, lens)) return make_int(0, e->loc);
              }
            } else if (x.op == BinaryOp::Or) {
              if (lv) return *lv != 0 ? make_int(1, e->loc) : truthiness(rhs);
              if (rv) {
                if (*rv == 0) return truthiness(lhs);
                if (trap_free(*lhs, lens)) return make_int(1, e->loc);
              }
            } else if (lv && rv) {
              switch (x.op) {
                case BinaryOp::Add: return make_int(wrap_add(*lv, *rv), e->loc);
                case BinaryOp::Sub: return make_int(wrap_sub(*lv, *rv), e->loc);
                case BinaryOp::Mul: return make_int(wrap_mul(*lv, *rv), e->loc);
                case BinaryOp::Div:
                  if (*rv != 0) return make_int(wrap_div(*lv, *rv), e->loc);
                  break;  // division by zero must keep trapping at runtime
                case BinaryOp::Mod:
                  if (*rv != 0) return make_int(wrap_mod(*lv, *rv), e->loc);
                  break;
                case BinaryOp::Lt: return make_int(*lv < *rv, e->loc);
                case BinaryOp::Le: return make_int(*lv <= *rv, e->loc);
                case BinaryOp::Eq: return make_int(*lv == *rv, e->loc);
                case BinaryOp::Ne: return make_int(*lv != *rv, e->loc);
                default: break;
              }
            } else if (x.op == BinaryOp::Add) {
              // x + 0
              if (lv && *lv == 0) return rhs;
              if (rv && *rv == 0) return lhs;
            } else if (x.op == BinaryOp::Mul) {
              // x * 1 and x * 0 (the latter only when x cannot trap)
              if (lv && *lv == 1) return rhs;
              if (rv && *rv == 1) return lhs;
              if (lv && *lv == 0 && trap_free(*rhs, lens)) return make_int(0, e->loc);
              if (rv && *rv == 0 && trap_free(*lhs, lens)) return make_int(0, e->loc);
            }
            if (lhs == x.lhs && rhs == x.rhs) return e;
            return make_binary(x.op, lhs, rhs, e->loc);
          },
      },
      e->node);
}

Block fold_block(const Block& b, const ArrayLens& lens);

StmtRef fold_stmt(const StmtRef& s, const ArrayLens& lens) {
  return std::visit(
      Overload{
          [&](const Assign& x) {
            return make_stmt(Assign{x.name, fold_expr(x.value, lens)}, s->loc);
          },
          [&](const ArrayStore& x) {
            return make_stmt(ArrayStore{x.array, fold_expr(x.index, lens),
                                        fold_expr(x.value, lens)},
                             s->loc);
          },
          [&](const If& x) {
            return make_stmt(If{fold_expr(x.cond, lens),
                                fold_block(x.then_body, lens),
                                fold_block(x.else_body, lens)},
                             s->loc);
          },
          [&](const While& x) {
            return make_stmt(While{fold_expr(x.cond, lens), fold_block(x.body, lens)},
                             s->loc);
          },
          [&](const For& x) {
            return make_stmt(For{x.var, fold_expr(x.lo, lens),
                                 fold_expr(x.hi, lens), fold_block(x.body, lens)},
                             s->loc);
          },
          [&](const Return& x) {
            return make_stmt(Return{fold_expr(x.value, lens)}, s->loc);
          },
          [&](const CallAssign& x) {
            std::vector<ExprRef> args;
            args.reserve(x.args.size());
            for (const auto& a : x.args) args.push_back(fold_expr(a, lens));
            return make_stmt(CallAssign{x.target, x.callee, std::move(args)},
                             s->loc);
          },
      },
      s->node);
}

Block fold_block(const Block& b, const ArrayLens& lens) {
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) out.push_back(fold_stmt(s, lens));
  return out;
}

//===----------------------------------------------------------------------===//
// Constant propagation (with on-the-fly folding of rewritten expressions)
//===----------------------------------------------------------------------===//

using ConstEnv = std::map<std::string, std::int64_t>;

ExprRef subst_consts(const ExprRef& e, const ConstEnv& env) {
  return std::visit(
      Overload{
          [&](const IntLit&) { return e; },
          [&](const VarRef& x) -> ExprRef {
            auto it = env.find(x.name);
            if (it != env.end()) return make_int(it->second, e->loc);
            return e;
          },
          [&](const ArrayLoad& x) -> ExprRef {
            ExprRef idx = subst_consts(x.index, env);
            if (idx == x.index) return e;
            return make_load(x.array, idx, e->loc);
          },
          [&](const UnaryExpr& x) -> ExprRef {
            ExprRef operand = subst_consts(x.operand, env);
            if (operand == x.operand) return e;
            return make_unary(x.op, operand, e->loc);
          },
          [&](const BinaryExpr& x) -> ExprRef {
            ExprRef lhs = subst_consts(x.lhs, env);
            ExprRef rhs = subst_consts(x.rhs, env);
            if (lhs == x.lhs && rhs == x.rhs) return e;
            return make_binary(x.op, lhs, rhs, e->loc);
          },
      },
      e->node);
}

void assigned_vars(const Block& b, std::set<std::string>& out) {
  for (const auto& s : b) {
    std::visit(Overload{
                   [&](const Assign& x) { out.insert(x.name); },
                   [&](const CallAssign& x) { out.insert(x.target); },
                   [&](const If& x) {
                     assigned_vars(x.then_body, out);
                     assigned_vars(x.else_body, out);
                   },
                   [&](const While& x) { assigned_vars(x.body, out); },
                   [&](const For& x) {
                     out.insert(x.var);
                     assigned_vars(x.body, out);
                   },
                   [](const auto&) {},
               },
               s->node);
  }
}

class Propagator {
 public:
  explicit Propagator(const ArrayLens& lens) : lens_(lens) {}

  Block block(const Block& b, ConstEnv& env) {
    Block out;
    out.reserve(b.size());
    for (const auto& s : b) out.push_back(stmt(s, env));
    return out;
  }

 private:
  ExprRef rewrite(const ExprRef& e, const ConstEnv& env) {
    return fold_expr(subst_consts(e, env), lens_);
  }

  StmtRef stmt(const StmtRef& s, ConstEnv& env) {
    return std::visit(
        Overload{
            [&](const Assign& x) {
              ExprRef v = rewrite(x.value, env);
              if (auto lit = as_literal(*v)) {
                env[x.name] = *lit;
              } else {
                env.erase(x.name);
              }
              return make_stmt(Assign{x.name, v}, s->loc);
            },
            [&](const ArrayStore& x) {
              return make_stmt(
                  ArrayStore{x.array, rewrite(x.index, env), rewrite(x.value, env)},
                  s->loc);
            },
            [&](const If& x) {
              ExprRef cond = rewrite(x.cond, env);
              ConstEnv then_env = env;
              ConstEnv else_env = env;
              Block t = block(x.then_body, then_env);
              Block f = block(x.else_body, else_env);
              if (auto v = as_literal(*cond)) {
                env = *v != 0 ? then_env : else_env;
              } else {
                ConstEnv merged;
                for (const auto& [k, v] : then_env) {
                  auto it = else_env.find(k);
                  if (it != else_env.end() && it->second == v) merged[k] = v;
                }
                env = std::move(merged);
              }
              return make_stmt(If{cond, std::move(t), std::move(f)}, s->loc);
            },
            [&](const While& x) {
              std::set<std::string> killed;
              assigned_vars(x.body, killed);
              for (const auto& k : killed) env.erase(k);
              ExprRef cond = rewrite(x.cond, env);
              ConstEnv body_env = env;
              Block body = block(x.body, body_env);
              return make_stmt(While{cond, std::move(body)}, s->loc);
            },
            [&](const For& x) {
              ExprRef lo = rewrite(x.lo, env);
              ExprRef hi = rewrite(x.hi, env);
              std::set<std::string> killed;
              assigned_vars(x.body, killed);
              killed.insert(x.var);
              for (const auto& k : killed) env.erase(k);
              ConstEnv body_env = env;
              Block body = block(x.body, body_env);
              return make_stmt(For{x.var, lo, hi, std::move(body)}, s->loc);
            },
            [&](const Return& x) {
              return make_stmt(Return{rewrite(x.value, env)}, s->loc);
            },
            [&](const CallAssign& x) {
              std::vector<ExprRef> args;
              args.reserve(x.args.size());
              for (const auto& a : x.args) args.push_back(rewrite(a, env));
              env.erase(x.target);
              return make_stmt(CallAssign{x.target, x.callee, std::move(args)},
                               s->loc);
            },
        },
        s->node);
  }

  const ArrayLens& lens_;
};

//===----------------------------------------------------------------------===//
// Dead-code elimination
//===----------------------------------------------------------------------===//

bool stmt_returns_dce(const Stmt& s);

bool block_returns_dce(const Block& b) {
  for (const auto& s : b) {
    if (stmt_returns_dce(*s)) return true;
  }
  return false;
}

bool stmt_returns_dce(const Stmt& s) {
  return std::visit(Overload{
                        [](const Return&) { return true; },
                        [](const If& x) {
                          return !x.else_body.empty() &&
                                 block_returns_dce(x.then_body) &&
                                 block_returns_dce(x.else_body);
                        },
                        [](const auto&) { return false; },
                    },
                    s.node);
}

using LiveSet = std::set<std::string>;

void reads_of(const Expr& e, LiveSet& out) {
  std::vector<std::string> names;
  collect_reads(e, names);
  out.insert(names.begin(), names.end());
}

// Backward liveness over a block; removes assignments whose target is dead
// and whose right-hand side cannot trap. Arrays are caller-visible, so
// array stores are never removed.
Block dead_store_block(const Block& b, LiveSet& live, const ArrayLens& lens);

StmtRef dead_store_stmt(const StmtRef& s, LiveSet& live, const ArrayLens& lens,
                        bool& removed) {
  return std::visit(
      Overload{
          [&](const Assign& x) -> StmtRef {
            if (!live.count(x.name) && trap_free(*x.value, lens)) {
              removed = true;
              return nullptr;
            }
            live.erase(x.name);
            reads_of(*x.value, live);
            return s;
          },
          [&](const ArrayStore& x) -> StmtRef {
            reads_of(*x.index, live);
            reads_of(*x.value, live);
            return s;
          },
          [&](const If& x) -> StmtRef {
            LiveSet then_live = live;
            LiveSet else_live = live;
            Block t = dead_store_block(x.then_body, then_live, lens);
            Block f = dead_store_block(x.else_body, else_live, lens);
            live = then_live;
            live.insert(else_live.begin(), else_live.end());
            reads_of(*x.cond, live);
            return make_stmt(If{x.cond, std::move(t), std::move(f)}, s->loc);
          },
          [&](const While& x) -> StmtRef {
            // Fixpoint: everything live at the head stays live around the
            // back edge; the set only grows, so this terminates.
            LiveSet head = live;
            reads_of(*x.cond, head);
            Block body;
            for (;;) {
              LiveSet body_live = head;
              body = dead_store_block(x.body, body_live, lens);
              LiveSet next = head;
              next.insert(body_live.begin(), body_live.end());
              if (next == head) break;
              head = std::move(next);
            }
            live = head;
            return make_stmt(While{x.cond, std::move(body)}, s->loc);
          },
          [&](const For& x) -> StmtRef {
            LiveSet head = live;
            reads_of(*x.lo, head);
            reads_of(*x.hi, head);
            Block body;
            for (;;) {
              LiveSet body_live = head;
              body = dead_store_block(x.body, body_live, lens);
              body_live.erase(x.var);
              LiveSet next = head;
              next.insert(body_live.begin(), body_live.end());
              if (next == head) break;
              head = std::move(next);
            }
            live = head;
            return make_stmt(For{x.var, x.lo, x.hi, std::move(body)}, s->loc);
          },
          [&](const Return& x) -> StmtRef {
            live.clear();
            reads_of(*x.value, live);
            return s;
          },
          [&](const CallAssign& x) -> StmtRef {
            // Calls may trap or write arrays; never removed.
            live.erase(x.target);
            for (const auto& a : x.args) reads_of(*a, live);
            return s;
          },
      },
      s->node);
}

Block dead_store_block(const Block& b, LiveSet& live, const ArrayLens& lens) {
  std::vector<StmtRef> rev;
  for (auto it = b.rbegin(); it != b.rend(); ++it) {
    bool removed = false;
    StmtRef s = dead_store_stmt(*it, live, lens, removed);
    if (!removed) rev.push_back(std::move(s));
  }
  return Block(rev.rbegin(), rev.rend());
}

Block dce_block(const Block& b, const ArrayLens& lens);

// May expand to zero or more statements (constant ifs splice their taken
// branch into the parent block).
void dce_stmt(const StmtRef& s, const ArrayLens& lens, Block& out) {
  std::visit(
      Overload{
          [&](const If& x) {
            if (auto v = as_literal(*x.cond)) {
              const Block& taken = *v != 0 ? x.then_body : x.else_body;
              Block inner = dce_block(taken, lens);
              out.insert(out.end(), inner.begin(), inner.end());
              return;
            }
            Block t = dce_block(x.then_body, lens);
            Block f = dce_block(x.else_body, lens);
            if (t.empty() && f.empty() && trap_free(*x.cond, lens)) return;
            out.push_back(make_stmt(If{x.cond, std::move(t), std::move(f)}, s->loc));
          },
          [&](const While& x) {
            if (auto v = as_literal(*x.cond); v && *v == 0) return;
            out.push_back(make_stmt(While{x.cond, dce_block(x.body, lens)}, s->loc));
          },
          [&](const For& x) {
            auto lo = as_literal(*x.lo);
            auto hi = as_literal(*x.hi);
            if (lo && hi && *lo >= *hi) return;  // zero-trip loop
            out.push_back(make_stmt(
                For{x.var, x.lo, x.hi, dce_block(x.body, lens)}, s->loc));
          },
          [&](const auto&) { out.push_back(s); },
      },
      s->node);
}

Block dce_block(const Block& b, const ArrayLens& lens) {
  Block out;
  for (const auto& s : b) {
    dce_stmt(s, lens, out);
    if (!out.empty() && stmt_returns_dce(*out.back())) break;  // unreachable tail
  }
  return out;
}

void reachable_functions(const Program& p, const std::string& name,
                         std::set<std::string>& seen) {
  if (!seen.insert(name).second) return;
  const Function* f = p.find_function(name);
  if (!f) return;
  std::function<void(const Block&)> walk = [&](const Block& b) {
    for (const auto& s : b) {
      std::visit(Overload{
                     [&](const CallAssign& x) {
                       reachable_functions(p, x.callee, seen);
                     },
                     [&](const If& x) {
                       walk(x.then_body);
                       walk(x.else_body);
                     },
                     [&](const While& x) { walk(x.body); },
                     [&](const For& x) { walk(x.body); },
                     [](const auto&) {},
                 },
                 s->node);
    }
  };
  walk(f->body);
}

//===----------------------------------------------------------------------===//
// Loop unrolling
//===----------------------------------------------------------------------===//

ExprRef subst_var(const ExprRef& e, const std::string& var, std::int64_t value) {
  ConstEnv env{{var, value}};
  return subst_consts(e, env);
}

Block subst_var_block(const Block& b, const std::string& var, std::int64_t value);

StmtRef subst_var_stmt(const StmtRef& s, const std::string& var,
                       std::int64_t value) {
  return std::visit(
      Overload{
          [&](const Assign& x) {
            return make_stmt(Assign{x.name, subst_var(x.value, var, value)}, s->loc);
          },
          [&](const ArrayStore& x) {
            return make_stmt(ArrayStore{x.array, subst_var(x.index, var, value),
                                        subst_var(x.value, var, value)},
                             s->loc);
          },
          [&](const If& x) {
            return make_stmt(If{subst_var(x.cond, var, value),
                                subst_var_block(x.then_body, var, value),
                                subst_var_block(x.else_body, var, value)},
                             s->loc);
          },
          [&](const While& x) {
            return make_stmt(While{subst_var(x.cond, var, value),
                                   subst_var_block(x.body, var, value)},
                             s->loc);
          },
          [&](const For& x) {
            // Inner loop variables cannot shadow `var` (validated), so the
            // substitution passes through unconditionally.
            return make_stmt(For{x.var, subst_var(x.lo, var, value),
                                 subst_var(x.hi, var, value),
                                 subst_var_block(x.body, var, value)},
                             s->loc);
          },
          [&](const Return& x) {
            return make_stmt(Return{subst_var(x.value, var, value)}, s->loc);
          },
          [&](const CallAssign& x) {
            std::vector<ExprRef> args;
            for (const auto& a : x.args) args.push_back(subst_var(a, var, value));
            return make_stmt(CallAssign{x.target, x.callee, std::move(args)},
                             s->loc);
          },
      },
      s->node);
}

Block subst_var_block(const Block& b, const std::string& var, std::int64_t value) {
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) out.push_back(subst_var_stmt(s, var, value));
  return out;
}

class Unroller {
 public:
  Unroller(std::int64_t budget, std::vector<OptNote>* notes)
      : budget_(budget), notes_(notes) {}

  Block block(const Block& b) {
    Block out;
    for (const auto& s : b) stmt(s, out);
    return out;
  }

 private:
  void stmt(const StmtRef& s, Block& out) {
    std::visit(
        Overload{
            [&](const If& x) {
              out.push_back(make_stmt(
                  If{x.cond, block(x.then_body), block(x.else_body)}, s->loc));
            },
            [&](const While& x) {
              out.push_back(make_stmt(While{x.cond, block(x.body)}, s->loc));
            },
            [&](const For& x) {
              Block body = block(x.body);  // unroll inner loops first
              auto lo = as_literal(*x.lo);
              auto hi = as_literal(*x.hi);
              if (!lo || !hi) {
                out.push_back(make_stmt(For{x.var, x.lo, x.hi, std::move(body)},
                                        s->loc));
                return;
              }
              __int128 trips128 = static_cast<__int128>(*hi) - *lo;
              if (trips128 < 0) trips128 = 0;
              if (trips128 > budget_) {
                if (notes_) {
                  notes_->push_back(
                      {"unroll-concrete-loops", s->loc,
                       "loop trip count exceeds the unroll budget of " +
                           std::to_string(budget_) + "; loop left intact"});
                }
                out.push_back(make_stmt(For{x.var, x.lo, x.hi, std::move(body)},
                                        s->loc));
                return;
              }
              for (std::int64_t k = *lo; k < *hi; ++k) {
                Block copy = subst_var_block(body, x.var, k);
                out.insert(out.end(), copy.begin(), copy.end());
              }
            },
            [&](const auto&) { out.push_back(s); },
        },
        s->node);
  }

  std::int64_t budget_;
  std::vector<OptNote>* notes_;
};

//===----------------------------------------------------------------------===//
// Inlining
//===----------------------------------------------------------------------===//

// Renames every variable in a callee body with a call-site prefix; array
// parameters are replaced by the caller's array names (pass-by-reference).
class Renamer {
 public:
  Renamer(std::string prefix, std::map<std::string, std::string> array_map)
      : prefix_(std::move(prefix)), array_map_(std::move(array_map)) {}

  std::string scalar(const std::string& name) const { return prefix_ + name; }

  std::string array(const std::string& name) const {
    auto it = array_map_.find(name);
    return it != array_map_.end() ? it->second : prefix_ + name;
  }

  ExprRef expr(const ExprRef& e) const {
    return std::visit(
        Overload{
            [&](const IntLit&) { return e; },
            [&](const VarRef& x) { return make_var(scalar(x.name), e->loc); },
            [&](const ArrayLoad& x) {
              return make_load(array(x.array), expr(x.index), e->loc);
            },
            [&](const UnaryExpr& x) {
              return make_unary(x.op, expr(x.operand), e->loc);
            },
            [&](const BinaryExpr& x) {
              return make_binary(x.op, expr(x.lhs), expr(x.rhs), e->loc);
            },
        },
        e->node);
  }

  Block block(const Block& b) const {
    Block out;
    out.reserve(b.size());
    for (const auto& s : b) out.push_back(stmt(s));
    return out;
  }

  StmtRef stmt(const StmtRef& s) const {
    return std::visit(
        Overload{
            [&](const Assign& x) {
              return make_stmt(Assign{scalar(x.name), expr(x.value)}, s->loc);
            },
            [&](const ArrayStore& x) {
              return make_stmt(
                  ArrayStore{array(x.array), expr(x.index), expr(x.value)}, s->loc);
            },
            [&](const If& x) {
              return make_stmt(
                  If{expr(x.cond), block(x.then_body), block(x.else_body)}, s->loc);
            },
            [&](const While& x) {
              return make_stmt(While{expr(x.cond), block(x.body)}, s->loc);
            },
            [&](const For& x) {
              return make_stmt(For{scalar(x.var), expr(x.lo), expr(x.hi),
                                   block(x.body)},
                               s->loc);
            },
            [&](const Return& x) {
              return make_stmt(Return{expr(x.value)}, s->loc);
            },
            [&](const CallAssign& x) {
              std::vector<ExprRef> args;
              for (const auto& a : x.args) args.push_back(expr(a));
              return make_stmt(CallAssign{scalar(x.target), x.callee,
                                          std::move(args)},
                               s->loc);
            },
        },
        s->node);
  }

 private:
  std::string prefix_;
  std::map<std::string, std::string> array_map_;
};

bool stmt_may_return(const Stmt& s) {
  return std::visit(
      Overload{
          [](const Return&) { return true; },
          [](const If& x) {
            for (const auto& t : x.then_body)
              if (stmt_may_return(*t)) return true;
            for (const auto& t : x.else_body)
              if (stmt_may_return(*t)) return true;
            return false;
          },
          [](const While& x) {
            for (const auto& t : x.body)
              if (stmt_may_return(*t)) return true;
            return false;
          },
          [](const For& x) {
            for (const auto& t : x.body)
              if (stmt_may_return(*t)) return true;
            return false;
          },
          [](const auto&) { return false; },
      },
      s.node);
}

// True iff the only return is the final statement of the top-level block.
bool single_exit(const Block& b) {
  if (b.empty() || !std::holds_alternative<Return>(b.back()->node)) return false;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    if (stmt_may_return(*b[i])) return false;
  }
  return true;
}

class Inliner {
 public:
  Inliner(const Program& program, int max_depth, std::vector<OptNote>* notes)
      : program_(program), max_depth_(max_depth), notes_(notes) {}

  Block block(const Block& b, int depth) {
    Block out;
    for (const auto& s : b) stmt(s, depth, out);
    return out;
  }

 private:
  void stmt(const StmtRef& s, int depth, Block& out) {
    std::visit(
        Overload{
            [&](const If& x) {
              out.push_back(make_stmt(
                  If{x.cond, block(x.then_body, depth), block(x.else_body, depth)},
                  s->loc));
            },
            [&](const While& x) {
              out.push_back(make_stmt(While{x.cond, block(x.body, depth)}, s->loc));
            },
            [&](const For& x) {
              out.push_back(
                  make_stmt(For{x.var, x.lo, x.hi, block(x.body, depth)}, s->loc));
            },
            [&](const CallAssign& x) { expand_call(s, x, depth, out); },
            [&](const auto&) { out.push_back(s); },
        },
        s->node);
  }

  void expand_call(const StmtRef& s, const CallAssign& call, int depth,
                   Block& out) {
    if (depth >= max_depth_) {
      if (notes_) {
        notes_->push_back({"inline", s->loc,
                           "call to '" + call.callee +
                               "' left in place: inline depth budget reached"});
      }
      out.push_back(s);
      return;
    }
    const Function& callee = *program_.find_function(call.callee);
    std::string prefix = "__in" + std::to_string(counter_++) + "_";

    std::map<std::string, std::string> array_map;
    for (std::size_t i = 0; i < callee.params.size(); ++i) {
      const Param& p = callee.params[i];
      if (p.is_array()) {
        array_map[p.name] = std::get<VarRef>(call.args[i]->node).name;
      } else {
        // Scalar arguments are evaluated eagerly, left to right.
        out.push_back(make_stmt(Assign{prefix + p.name, call.args[i]}, s->loc));
      }
    }

    Renamer renamer(prefix, std::move(array_map));
    Block body = block(renamer.block(callee.body), depth + 1);

    if (single_exit(body)) {
      const auto& ret = std::get<Return>(body.back()->node);
      for (std::size_t i = 0; i + 1 < body.size(); ++i) out.push_back(body[i]);
      out.push_back(make_stmt(Assign{call.target, ret.value}, s->loc));
      return;
    }

    // General case: convert the body to single-exit form with a completion
    // flag; statements after a possibly-returning statement are guarded.
    std::string done = prefix + "done";
    std::string ret = prefix + "ret";
    out.push_back(make_stmt(Assign{done, make_int(0)}, s->loc));
    out.push_back(make_stmt(Assign{ret, make_int(0)}, s->loc));
    Block guarded = guard_block(body, done, ret, prefix);
    out.insert(out.end(), guarded.begin(), guarded.end());
    out.push_back(make_stmt(Assign{call.target, make_var(ret)}, s->loc));
  }

  ExprRef not_done(const std::string& done) {
    return make_binary(BinaryOp::Eq, make_var(done), make_int(0));
  }

  Block guard_block(const Block& b, const std::string& done,
                    const std::string& ret, const std::string& prefix) {
    Block out;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const StmtRef& s = b[i];
      if (!stmt_may_return(*s)) {
        out.push_back(s);
        continue;
      }
      guard_stmt(s, done, ret, prefix, out);
      Block rest(b.begin() + static_cast<std::ptrdiff_t>(i) + 1, b.end());
      if (!rest.empty()) {
        Block guarded_rest = guard_block(rest, done, ret, prefix);
        out.push_back(make_stmt(If{not_done(done), std::move(guarded_rest), {}},
                                s->loc));
      }
      return out;
    }
    return out;
  }

  void guard_stmt(const StmtRef& s, const std::string& done,
                  const std::string& ret, const std::string& prefix, Block& out) {
    std::visit(
        Overload{
            [&](const Return& x) {
              out.push_back(make_stmt(Assign{ret, x.value}, s->loc));
              out.push_back(make_stmt(Assign{done, make_int(1)}, s->loc));
            },
            [&](const If& x) {
              out.push_back(make_stmt(If{x.cond,
                                         guard_block(x.then_body, done, ret, prefix),
                                         guard_block(x.else_body, done, ret, prefix)},
                                      s->loc));
            },
            [&](const While& x) {
              out.push_back(make_stmt(
                  While{make_binary(BinaryOp::And, not_done(done), x.cond),
                        guard_block(x.body, done, ret, prefix)},
                  s->loc));
            },
            [&](const For& x) {
              // A for loop with an early return becomes an explicit while:
              // bounds evaluated once, induction variable incremented after
              // the (guarded) body.
              std::string iv = prefix + "fv" + std::to_string(loop_counter_);
              std::string hv = prefix + "fh" + std::to_string(loop_counter_);
              ++loop_counter_;
              out.push_back(make_stmt(Assign{iv, x.lo}, s->loc));
              out.push_back(make_stmt(Assign{hv, x.hi}, s->loc));
              Block body;
              body.push_back(make_stmt(Assign{x.var, make_var(iv)}, s->loc));
              Block inner = guard_block(x.body, done, ret, prefix);
              body.insert(body.end(), inner.begin(), inner.end());
              body.push_back(make_stmt(
                  Assign{iv, make_binary(BinaryOp::Add, make_var(iv), make_int(1))},
                  s->loc));
              out.push_back(make_stmt(
                  While{make_binary(
                            BinaryOp::And, not_done(done),
                            make_binary(BinaryOp::Lt, make_var(iv), make_var(hv))),
                        std::move(body)},
                  s->loc));
            },
            [&](const auto&) { out.push_back(s); },
        },
        s->node);
  }

  const Program& program_;
  int max_depth_;
  std::vector<OptNote>* notes_;
  int counter_ = 0;
  int loop_counter_ = 0;
};

//===----------------------------------------------------------------------===//
// Pass driver
//===----------------------------------------------------------------------===//

Program apply_pass(const Program& p, PassKind pass, const OptConfig& cfg,
                   std::vector<OptNote>* notes) {
  Program out = p;
  switch (pass) {
    case PassKind::ConstantFold:
      for (auto& f : out.functions) {
        f.body = fold_block(f.body, array_lens(f));
      }
      break;
    case PassKind::ConstantPropagate:
      for (auto& f : out.functions) {
        ArrayLens lens = array_lens(f);
        ConstEnv env;
        f.body = Propagator(lens).block(f.body, env);
      }
      break;
    case PassKind::DeadCodeEliminate: {
      for (auto& f : out.functions) {
        ArrayLens lens = array_lens(f);
        Block b = dce_block(f.body, lens);
        LiveSet live;
        f.body = dead_store_block(b, live, lens);
      }
      std::set<std::string> reach;
      reachable_functions(out, out.entry, reach);
      std::vector<Function> kept;
      for (auto& f : out.functions) {
        if (reach.count(f.name)) kept.push_back(std::move(f));
      }
      out.functions = std::move(kept);
      break;
    }
    case PassKind::UnrollConcreteLoops:
      for (auto& f : out.functions) {
        f.body = Unroller(cfg.max_body_copies, notes).block(f.body);
      }
      break;
    case PassKind::Inline:
      for (auto& f : out.functions) {
        Inliner per(out, cfg.max_depth, notes);
        f.body = per.block(f.body, 0);
      }
      break;
  }
  return out;
}

}  // namespace

namespace {

void check_config(const OptConfig& config) {
  if (config.max_body_copies < 1) {
    throw ConfigError("unroll budget (max_body_copies) must be >= 1");
  }
  if (config.max_depth < 1) {
    throw ConfigError("inline depth (max_depth) must be >= 1");
  }
}

}  // namespace

Program optimize(const Program& p, const OptConfig& config,
                 std::vector<OptNote>* notes) {
  check_config(config);
  Program cur = p;
  for (PassKind pass : config.passes) {
    cur = apply_pass(cur, pass, config, notes);
  }
  // Re-run the non-inlining passes to a structural fixpoint; inlining stays
  // a one-shot so its depth budget keeps its meaning.
  constexpr int kMaxRounds = 16;
  for (int round = 0; round < kMaxRounds; ++round) {
    Program next = cur;
    for (PassKind pass : config.passes) {
      if (pass == PassKind::Inline) continue;
      next = apply_pass(next, pass, config, nullptr);
    }
    if (equal(next, cur)) break;
    cur = std::move(next);
  }
  return cur;
}

std::vector<PassTraceEntry> pass_trace(const Program& p, const OptConfig& config,
                                       std::vector<OptNote>* notes) {
  check_config(config);
  std::vector<PassTraceEntry> trace;
  Program cur = p;
  for (PassKind pass : config.passes) {
    std::size_t before = ir_size(cur);
    cur = apply_pass(cur, pass, config, notes);
    trace.push_back({to_string(pass), before, ir_size(cur)});
  }
  return trace;
}

}  // namespace verimodel
