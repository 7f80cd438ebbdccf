//===-- features.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/features.hpp"

#include <algorithm>
#include <functional>

namespace verimodel {

namespace {

std::size_t count_bool_ops(const Expr& e) {
  return std::visit(
      Overload{
          [](const IntLit&) -> std::size_t { return 0; },
          [](const VarRef&) -> std::size_t { return 0; },
          [](const ArrayLoad& x) { return count_bool_ops(*x.index); },
          [](const UnaryExpr& x) { return count_bool_ops(*x.operand); },
          [](const BinaryExpr& x) {
            std::size_t n = count_bool_ops(*x.lhs) + count_bool_ops(*x.rhs);
            if (x.op == BinaryOp::And || x.op == BinaryOp::Or) ++n;
            return n;
          },
      },
      e.node);
}

std::size_t cc_block(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b) {
    n += std::visit(
        Overload{
            [](const If& x) {
              return 1 + count_bool_ops(*x.cond) + cc_block(x.then_body) +
                     cc_block(x.else_body);
            },
            [](const While& x) {
              return 1 + count_bool_ops(*x.cond) + cc_block(x.body);
            },
            [](const For& x) { return 1 + cc_block(x.body); },
            [](const auto&) -> std::size_t { return 0; },
        },
        s->node);
  }
  return n;
}

bool any_tainted(const Expr& e, const std::set<std::string>& taint) {
  std::vector<std::string> reads;
  collect_reads(e, reads);
  return std::any_of(reads.begin(), reads.end(),
                     [&](const std::string& r) { return taint.count(r) > 0; });
}

}  // namespace

std::size_t cyclomatic_complexity(const Function& f) { return 1 + cc_block(f.body); }

std::set<std::string> tainted_vars(const Function& f, const SymbolSpec& spec) {
  std::set<std::string> taint;
  for (const auto& p : f.params) {
    if (spec.is_symbolic_param(p.name)) taint.insert(p.name);
  }

  // One monotone sweep per round until the set stops growing.
  bool changed = true;
  std::function<void(const Block&)> walk = [&](const Block& b) {
    for (const auto& s : b) {
      std::visit(
          Overload{
              [&](const Assign& x) {
                if (!taint.count(x.name) && any_tainted(*x.value, taint)) {
                  taint.insert(x.name);
                  changed = true;
                }
              },
              [&](const ArrayStore& x) {
                if (!taint.count(x.array) &&
                    (any_tainted(*x.index, taint) || any_tainted(*x.value, taint))) {
                  taint.insert(x.array);
                  changed = true;
                }
              },
              [&](const If& x) {
                walk(x.then_body);
                walk(x.else_body);
              },
              [&](const While& x) { walk(x.body); },
              [&](const For& x) {
                // The induction variable carries the taint of its start
                // bound; the end bound only controls the trip count.
                if (!taint.count(x.var) && any_tainted(*x.lo, taint)) {
                  taint.insert(x.var);
                  changed = true;
                }
                walk(x.body);
              },
              [&](const Return&) {},
              [&](const CallAssign& x) {
                bool any = false;
                for (const auto& a : x.args) any = any || any_tainted(*a, taint);
                if (any) {
                  if (!taint.count(x.target)) {
                    taint.insert(x.target);
                    changed = true;
                  }
                  // Callees can write symbolic data into array arguments.
                  for (const auto& a : x.args) {
                    if (const auto* var = std::get_if<VarRef>(&a->node)) {
                      const Param* p = f.find_param(var->name);
                      if (p && p->is_array() && !taint.count(var->name)) {
                        taint.insert(var->name);
                        changed = true;
                      }
                    }
                  }
                }
              },
          },
          s->node);
    }
  };
  while (changed) {
    changed = false;
    walk(f.body);
  }
  return taint;
}

namespace {

enum class Degree { Const, Affine, Nonlinear };

Degree max_deg(Degree a, Degree b) { return a > b ? a : b; }

// Degree of an expression viewed as a function of tainted variables.
Degree degree_of(const Expr& e, const std::set<std::string>& taint) {
  return std::visit(
      Overload{
          [](const IntLit&) { return Degree::Const; },
          [&](const VarRef& x) {
            return taint.count(x.name) ? Degree::Affine : Degree::Const;
          },
          [&](const ArrayLoad& x) {
            // A load from concrete contents with a concrete index is a fixed
            // value; anything else acts as an opaque symbolic term.
            if (!taint.count(x.array) &&
                degree_of(*x.index, taint) == Degree::Const) {
              return Degree::Const;
            }
            return Degree::Affine;
          },
          [&](const UnaryExpr& x) {
            Degree d = degree_of(*x.operand, taint);
            if (x.op == UnaryOp::Neg) return d;
            return d == Degree::Const ? Degree::Const : Degree::Nonlinear;
          },
          [&](const BinaryExpr& x) {
            Degree l = degree_of(*x.lhs, taint);
            Degree r = degree_of(*x.rhs, taint);
            switch (x.op) {
              case BinaryOp::Add:
              case BinaryOp::Sub:
                return max_deg(l, r);
              case BinaryOp::Mul:
                if (l == Degree::Const) return r;
                if (r == Degree::Const) return l;
                return Degree::Nonlinear;  // product of symbolic subexpressions
              case BinaryOp::Div:
              case BinaryOp::Mod:
                if (r == Degree::Const) {
                  return l == Degree::Nonlinear ? Degree::Nonlinear : l;
                }
                return Degree::Nonlinear;  // symbolic divisor
              default:
                // Comparisons and boolean operators used as arithmetic
                // operands are step functions.
                return l == Degree::Const && r == Degree::Const
                           ? Degree::Const
                           : Degree::Nonlinear;
            }
          },
      },
      e.node);
}

// A condition is linear iff every relational atom in its boolean structure
// compares affine sides.
bool atoms_linear(const Expr& e, const std::set<std::string>& taint) {
  if (const auto* u = std::get_if<UnaryExpr>(&e.node)) {
    if (u->op == UnaryOp::Not) return atoms_linear(*u->operand, taint);
  }
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    if (b->op == BinaryOp::And || b->op == BinaryOp::Or) {
      return atoms_linear(*b->lhs, taint) && atoms_linear(*b->rhs, taint);
    }
    if (is_comparison(b->op)) {
      return degree_of(*b->lhs, taint) != Degree::Nonlinear &&
             degree_of(*b->rhs, taint) != Degree::Nonlinear;
    }
  }
  // Truthiness atom e != 0.
  return degree_of(e, taint) != Degree::Nonlinear;
}

}  // namespace

BranchInfo classify_branch(const Expr& cond, const SymbolSpec& spec,
                           const Function& f) {
  std::set<std::string> taint = tainted_vars(f, spec);
  BranchInfo info;
  info.location = cond.loc;
  info.is_symbolic = any_tainted(cond, taint);
  if (info.is_symbolic) info.is_linear = atoms_linear(cond, taint);
  return info;
}

namespace {

void loops_in_block(const Block& b, const std::set<std::string>& taint,
                    std::vector<LoopInfo>& out) {
  for (const auto& s : b) {
    std::visit(Overload{
                   [&](const While& x) {
                     out.push_back({s->loc, any_tainted(*x.cond, taint),
                                    ir_size(x.body)});
                     loops_in_block(x.body, taint, out);
                   },
                   [&](const For& x) {
                     bool sym = any_tainted(*x.lo, taint) ||
                                any_tainted(*x.hi, taint);
                     out.push_back({s->loc, sym, ir_size(x.body)});
                     loops_in_block(x.body, taint, out);
                   },
                   [&](const If& x) {
                     loops_in_block(x.then_body, taint, out);
                     loops_in_block(x.else_body, taint, out);
                   },
                   [](const auto&) {},
               },
               s->node);
  }
}

void branches_in_block(const Block& b, const SymbolSpec& spec, const Function& f,
                       const std::set<std::string>& taint,
                       std::vector<BranchInfo>& out) {
  for (const auto& s : b) {
    std::visit(Overload{
                   [&](const If& x) {
                     BranchInfo info;
                     info.location = s->loc;
                     info.is_symbolic = any_tainted(*x.cond, taint);
                     if (info.is_symbolic) {
                       info.is_linear = atoms_linear(*x.cond, taint);
                     }
                     out.push_back(info);
                     branches_in_block(x.then_body, spec, f, taint, out);
                     branches_in_block(x.else_body, spec, f, taint, out);
                   },
                   [&](const While& x) {
                     branches_in_block(x.body, spec, f, taint, out);
                   },
                   [&](const For& x) {
                     branches_in_block(x.body, spec, f, taint, out);
                   },
                   [](const auto&) {},
               },
               s->node);
  }
}

}  // namespace

std::vector<LoopInfo> analyze_loops(const Function& f, const SymbolSpec& spec) {
  std::set<std::string> taint = tainted_vars(f, spec);
  std::vector<LoopInfo> out;
  loops_in_block(f.body, taint, out);
  return out;
}

FeatureVector extract_features(const Function& f, const SymbolSpec& spec) {
  FeatureVector fv;
  fv.cc = cyclomatic_complexity(f);

  std::set<std::string> taint = tainted_vars(f, spec);
  for (const LoopInfo& loop : analyze_loops(f, spec)) {
    if (!loop.is_symbolic) continue;
    ++fv.n_sym_loops;
    fv.sym_loop_body_total += loop.body_instruction_count;
    fv.sym_loop_body_max =
        std::max(fv.sym_loop_body_max, loop.body_instruction_count);
  }

  std::vector<BranchInfo> branches;
  branches_in_block(f.body, spec, f, taint, branches);
  for (const BranchInfo& b : branches) {
    if (!b.is_symbolic) continue;
    if (*b.is_linear) {
      ++fv.n_sym_branches_linear;
    } else {
      ++fv.n_sym_branches_nonlinear;
    }
  }

  for (const auto& p : f.params) {
    if (spec.is_symbolic_param(p.name)) ++fv.n_sym_params;
    if (p.is_array()) {
      fv.array_size_total += *p.array_length;
      fv.array_size_max = std::max(fv.array_size_max, *p.array_length);
    } else {
      auto it = spec.scalars.find(p.name);
      if (it != spec.scalars.end()) {
        if (it->second.symbolic) {
          fv.domain_widths[p.name] = it->second.width();
        } else {
          fv.scalar_values[p.name] = it->second.value;
        }
      }
    }
  }
  return fv;
}

std::vector<std::pair<std::string, std::int64_t>> feature_columns(
    const FeatureVector& fv) {
  std::vector<std::pair<std::string, std::int64_t>> cols{
      {"cc", static_cast<std::int64_t>(fv.cc)},
      {"n_sym_loops", static_cast<std::int64_t>(fv.n_sym_loops)},
      {"sym_loop_body_total", static_cast<std::int64_t>(fv.sym_loop_body_total)},
      {"sym_loop_body_max", static_cast<std::int64_t>(fv.sym_loop_body_max)},
      {"n_sym_branches_linear",
       static_cast<std::int64_t>(fv.n_sym_branches_linear)},
      {"n_sym_branches_nonlinear",
       static_cast<std::int64_t>(fv.n_sym_branches_nonlinear)},
      {"n_sym_params", static_cast<std::int64_t>(fv.n_sym_params)},
      {"array_size_total", fv.array_size_total},
      {"array_size_max", fv.array_size_max},
  };
  std::vector<std::pair<std::string, std::int64_t>> named;
  for (const auto& [name, v] : fv.scalar_values) named.push_back({"scalar." + name, v});
  for (const auto& [name, v] : fv.domain_widths) named.push_back({"width." + name, v});
  std::sort(named.begin(), named.end());
  cols.insert(cols.end(), named.begin(), named.end());
  return cols;
}

}  // namespace verimodel
