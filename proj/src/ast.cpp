//===-- ast.cpp ------------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/ast.hpp"

#include <stdexcept>

namespace verimodel {

const char* to_symbol(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Not: return "!";
  }
  return "?";
}

const char* to_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  return op == BinaryOp::Lt || op == BinaryOp::Le || op == BinaryOp::Eq ||
         op == BinaryOp::Ne;
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul ||
         op == BinaryOp::Div || op == BinaryOp::Mod;
}

ExprRef make_int(std::int64_t v, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{loc, IntLit{v}});
}

ExprRef make_var(std::string name, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{loc, VarRef{std::move(name)}});
}

ExprRef make_load(std::string array, ExprRef index, SourceLoc loc) {
  return std::make_shared<const Expr>(
      Expr{loc, ArrayLoad{std::move(array), std::move(index)}});
}

ExprRef make_unary(UnaryOp op, ExprRef operand, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{loc, UnaryExpr{op, std::move(operand)}});
}

ExprRef make_binary(BinaryOp op, ExprRef lhs, ExprRef rhs, SourceLoc loc) {
  return std::make_shared<const Expr>(
      Expr{loc, BinaryExpr{op, std::move(lhs), std::move(rhs)}});
}

StmtRef make_stmt(StmtNode node, SourceLoc loc) {
  return std::make_shared<const Stmt>(Stmt{loc, std::move(node)});
}

const Param* Function::find_param(const std::string& pname) const {
  for (const auto& p : params) {
    if (p.name == pname) return &p;
  }
  return nullptr;
}

const Function* Program::find_function(const std::string& fname) const {
  for (const auto& f : functions) {
    if (f.name == fname) return &f;
  }
  return nullptr;
}

const Function& Program::entry_function() const {
  const Function* f = find_function(entry);
  if (!f) throw std::logic_error("program has no entry function '" + entry + "'");
  return *f;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      Overload{
          [&](const IntLit& x) { return x.value == std::get<IntLit>(b.node).value; },
          [&](const VarRef& x) { return x.name == std::get<VarRef>(b.node).name; },
          [&](const ArrayLoad& x) {
            const auto& y = std::get<ArrayLoad>(b.node);
            return x.array == y.array && equal(*x.index, *y.index);
          },
          [&](const UnaryExpr& x) {
            const auto& y = std::get<UnaryExpr>(b.node);
            return x.op == y.op && equal(*x.operand, *y.operand);
          },
          [&](const BinaryExpr& x) {
            const auto& y = std::get<BinaryExpr>(b.node);
            return x.op == y.op && equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
          },
      },
      a.node);
}

static bool equal_stmt(const Stmt& a, const Stmt& b);

bool equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal_stmt(*a[i], *b[i])) return false;
  }
  return true;
}

static bool equal_stmt(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      Overload{
          [&](const Assign& x) {
            const auto& y = std::get<Assign>(b.node);
            return x.name == y.name && equal(*x.value, *y.value);
          },
          [&](const ArrayStore& x) {
            const auto& y = std::get<ArrayStore>(b.node);
            return x.array == y.array && equal(*x.index, *y.index) &&
                   equal(*x.value, *y.value);
          },
          [&](const If& x) {
            const auto& y = std::get<If>(b.node);
            return equal(*x.cond, *y.cond) && equal(x.then_body, y.then_body) &&
                   equal(x.else_body, y.else_body);
          },
          [&](const While& x) {
            const auto& y = std::get<While>(b.node);
            return equal(*x.cond, *y.cond) && equal(x.body, y.body);
          },
          [&](const For& x) {
            const auto& y = std::get<For>(b.node);
            return x.var == y.var && equal(*x.lo, *y.lo) && equal(*x.hi, *y.hi) &&
                   equal(x.body, y.body);
          },
          [&](const Return& x) {
            return equal(*x.value, *std::get<Return>(b.node).value);
          },
          [&](const CallAssign& x) {
            const auto& y = std::get<CallAssign>(b.node);
            if (x.target != y.target || x.callee != y.callee ||
                x.args.size() != y.args.size())
              return false;
            for (std::size_t i = 0; i < x.args.size(); ++i) {
              if (!equal(*x.args[i], *y.args[i])) return false;
            }
            return true;
          },
      },
      a.node);
}

bool equal(const Function& a, const Function& b) {
  if (a.name != b.name || a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name ||
        a.params[i].array_length != b.params[i].array_length)
      return false;
  }
  return equal(a.body, b.body);
}

bool equal(const Program& a, const Program& b) {
  if (a.entry != b.entry || a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    if (!equal(a.functions[i], b.functions[i])) return false;
  }
  return true;
}

std::size_t ir_size(const Expr& e) {
  return std::visit(
      Overload{
          [](const IntLit&) -> std::size_t { return 1; },
          [](const VarRef&) -> std::size_t { return 1; },
          [](const ArrayLoad& x) { return 1 + ir_size(*x.index); },
          [](const UnaryExpr& x) { return 1 + ir_size(*x.operand); },
          [](const BinaryExpr& x) { return 1 + ir_size(*x.lhs) + ir_size(*x.rhs); },
      },
      e.node);
}

static std::size_t ir_size_stmt(const Stmt& s) {
  return std::visit(
      Overload{
          [](const Assign& x) { return 1 + ir_size(*x.value); },
          [](const ArrayStore& x) {
            return 1 + ir_size(*x.index) + ir_size(*x.value);
          },
          [](const If& x) {
            return 1 + ir_size(*x.cond) + ir_size(x.then_body) +
                   ir_size(x.else_body);
          },
          [](const While& x) { return 1 + ir_size(*x.cond) + ir_size(x.body); },
          [](const For& x) {
            return 1 + ir_size(*x.lo) + ir_size(*x.hi) + ir_size(x.body);
          },
          [](const Return& x) { return 1 + ir_size(*x.value); },
          [](const CallAssign& x) {
            std::size_t n = 1;
            for (const auto& a : x.args) n += ir_size(*a);
            return n;
          },
      },
      s.node);
}

std::size_t ir_size(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b) n += ir_size_stmt(*s);
  return n;
}

std::size_t ir_size(const Function& f) { return ir_size(f.body); }

std::size_t ir_size(const Program& p) {
  std::size_t n = 0;
  for (const auto& f : p.functions) n += ir_size(f);
  return n;
}

void collect_reads(const Expr& e, std::vector<std::string>& out) {
  std::visit(Overload{
                 [](const IntLit&) {},
                 [&](const VarRef& x) { out.push_back(x.name); },
                 [&](const ArrayLoad& x) {
                   out.push_back(x.array);
                   collect_reads(*x.index, out);
                 },
                 [&](const UnaryExpr& x) { collect_reads(*x.operand, out); },
                 [&](const BinaryExpr& x) {
                   collect_reads(*x.lhs, out);
                   collect_reads(*x.rhs, out);
                 },
             },
             e.node);
}

}  // namespace verimodel
