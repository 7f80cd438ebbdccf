//===-- ast.hpp - MiniC intermediate representation -----------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//
//
// Tree-form IR for MiniC: 64-bit integer scalars, fixed-length integer
// arrays, structured control flow, calls without recursion. Nodes are
// immutable after construction and shared via shared_ptr, so programs can
// be rewritten persistently and read from any number of threads.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace verimodel {

struct SourceLoc {
  int line = 0;
  int col = 0;
  bool operator==(const SourceLoc&) const = default;
};

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Lt, Le, Eq, Ne, And, Or };

const char* to_symbol(UnaryOp op);
const char* to_symbol(BinaryOp op);
bool is_comparison(BinaryOp op);   // Lt, Le, Eq, Ne
bool is_arithmetic(BinaryOp op);   // Add..Mod

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct IntLit {
  std::int64_t value = 0;
};
struct VarRef {
  std::string name;
};
struct ArrayLoad {
  std::string array;
  ExprRef index;
};
struct UnaryExpr {
  UnaryOp op;
  ExprRef operand;
};
struct BinaryExpr {
  BinaryOp op;
  ExprRef lhs;
  ExprRef rhs;
};

struct Expr {
  SourceLoc loc;
  std::variant<IntLit, VarRef, ArrayLoad, UnaryExpr, BinaryExpr> node;
};

ExprRef make_int(std::int64_t v, SourceLoc loc = {});
ExprRef make_var(std::string name, SourceLoc loc = {});
ExprRef make_load(std::string array, ExprRef index, SourceLoc loc = {});
ExprRef make_unary(UnaryOp op, ExprRef operand, SourceLoc loc = {});
ExprRef make_binary(BinaryOp op, ExprRef lhs, ExprRef rhs, SourceLoc loc = {});

struct Stmt;
using StmtRef = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtRef>;

struct Assign {
  std::string name;
  ExprRef value;
};
struct ArrayStore {
  std::string array;
  ExprRef index;
  ExprRef value;
};
struct If {
  ExprRef cond;
  Block then_body;
  Block else_body;  // may be empty
};
struct While {
  ExprRef cond;
  Block body;
};
// `for v in lo..hi` runs the body for v = lo, lo+1, ..., hi-1; lo and hi are
// evaluated once on entry and v is read-only inside the body.
struct For {
  std::string var;
  ExprRef lo;
  ExprRef hi;
  Block body;
};
struct Return {
  ExprRef value;
};
// target = callee(args); the only place a call can appear. Array arguments
// must be plain variable references and are passed by reference.
struct CallAssign {
  std::string target;
  std::string callee;
  std::vector<ExprRef> args;
};

struct Stmt {
  SourceLoc loc;
  std::variant<Assign, ArrayStore, If, While, For, Return, CallAssign> node;
};

using ExprNode = std::variant<IntLit, VarRef, ArrayLoad, UnaryExpr, BinaryExpr>;

using StmtNode = std::variant<Assign, ArrayStore, If, While, For, Return, CallAssign>;
StmtRef make_stmt(StmtNode node, SourceLoc loc = {});

struct Param {
  std::string name;
  std::optional<std::int64_t> array_length;  // nullopt for scalars
  bool is_array() const { return array_length.has_value(); }
};

struct Function {
  std::string name;
  std::vector<Param> params;
  Block body;
  SourceLoc loc;
  const Param* find_param(const std::string& name) const;
};

struct Program {
  std::vector<Function> functions;
  std::string entry;  // name of the function under test
  const Function* find_function(const std::string& name) const;
  const Function& entry_function() const;
};

// Structural equality, ignoring source locations.
bool equal(const Expr& a, const Expr& b);
bool equal(const Block& a, const Block& b);
bool equal(const Function& a, const Function& b);
bool equal(const Program& a, const Program& b);

// IR size = number of statement plus expression nodes.
std::size_t ir_size(const Expr& e);
std::size_t ir_size(const Block& b);
std::size_t ir_size(const Function& f);
std::size_t ir_size(const Program& p);

// Variable names read by an expression (array loads report the array name
// and recurse into the index).
void collect_reads(const Expr& e, std::vector<std::string>& out);

// Helper for visiting variants in place.
template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace verimodel
