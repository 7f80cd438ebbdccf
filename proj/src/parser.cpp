//===-- parser.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace verimodel {

namespace {

enum class Tok {
  End,
  Ident,
  Int,
  KwFn,
  KwIf,
  KwElse,
  KwWhile,
  KwFor,
  KwIn,
  KwReturn,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Assign,
  DotDot,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  NotEq,
  AndAnd,
  OrOr,
  Not,
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer literal";
    case Tok::KwFn: return "'fn'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwFor: return "'for'";
    case Tok::KwIn: return "'in'";
    case Tok::KwReturn: return "'return'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Assign: return "'='";
    case Tok::DotDot: return "'..'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Not: return "'!'";
  }
  return "?";
}

struct Token {
  Tok kind;
  SourceLoc loc;
  std::string text;      // Ident
  std::int64_t value{};  // Int
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.loc = {line_, col_};
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        id.push_back(take_char());
      }
      tok_.kind = keyword(id);
      tok_.text = std::move(id);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        int d = take_char() - '0';
        if (v > (static_cast<std::uint64_t>(INT64_MAX) - d) / 10) {
          throw ParseError(tok_.loc, "integer literal out of 64-bit range");
        }
        v = v * 10 + d;
      }
      tok_.kind = Tok::Int;
      tok_.value = static_cast<std::int64_t>(v);
      return;
    }
    take_char();
    switch (c) {
      case '(': tok_.kind = Tok::LParen; return;
      case ')': tok_.kind = Tok::RParen; return;
      case '{': tok_.kind = Tok::LBrace; return;
      case '}': tok_.kind = Tok::RBrace; return;
      case '[': tok_.kind = Tok::LBracket; return;
      case ']': tok_.kind = Tok::RBracket; return;
      case ',': tok_.kind = Tok::Comma; return;
      case ';': tok_.kind = Tok::Semi; return;
      case '+': tok_.kind = Tok::Plus; return;
      case '-': tok_.kind = Tok::Minus; return;
      case '*': tok_.kind = Tok::Star; return;
      case '/': tok_.kind = Tok::Slash; return;
      case '%': tok_.kind = Tok::Percent; return;
      case '.':
        if (eat('.')) {
          tok_.kind = Tok::DotDot;
          return;
        }
        throw ParseError(tok_.loc, "expected '..'");
      case '<': tok_.kind = eat('=') ? Tok::Le : Tok::Lt; return;
      case '>': tok_.kind = eat('=') ? Tok::Ge : Tok::Gt; return;
      case '=': tok_.kind = eat('=') ? Tok::EqEq : Tok::Assign; return;
      case '!': tok_.kind = eat('=') ? Tok::NotEq : Tok::Not; return;
      case '&':
        if (eat('&')) {
          tok_.kind = Tok::AndAnd;
          return;
        }
        throw ParseError(tok_.loc, "expected '&&'");
      case '|':
        if (eat('|')) {
          tok_.kind = Tok::OrOr;
          return;
        }
        throw ParseError(tok_.loc, "expected '||'");
      default:
        throw ParseError(tok_.loc,
                         std::string("unexpected character '") + c + "'");
    }
  }

  static Tok keyword(const std::string& id) {
    if (id == "fn") return Tok::KwFn;
    if (id == "if") return Tok::KwIf;
    if (id == "else") return Tok::KwElse;
    if (id == "while") return Tok::KwWhile;
    if (id == "for") return Tok::KwFor;
    if (id == "in") return Tok::KwIn;
    if (id == "return") return Tok::KwReturn;
    return Tok::Ident;
  }

  // Consumes the next character if it matches.
  bool eat(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      take_char();
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') take_char();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take_char();
      } else {
        break;
      }
    }
  }

  char take_char() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Program parse_program() {
    Program p;
    while (lex_.peek().kind != Tok::End) {
      p.functions.push_back(parse_function());
    }
    if (p.functions.empty()) {
      throw ParseError(lex_.peek().loc, "expected 'fn', got end of input");
    }
    p.entry = p.functions.front().name;
    return p;
  }

  ExprRef parse_standalone_expr() {
    ExprRef e = parse_expr();
    expect(Tok::End);
    return e;
  }

 private:
  Function parse_function() {
    Function f;
    f.loc = lex_.peek().loc;
    expect(Tok::KwFn);
    f.name = expect(Tok::Ident).text;
    expect(Tok::LParen);
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        Param param;
        param.name = expect(Tok::Ident).text;
        if (lex_.peek().kind == Tok::LBracket) {
          lex_.take();
          Token len = expect(Tok::Int);
          if (len.value <= 0) {
            throw ParseError(len.loc, "array length must be positive");
          }
          param.array_length = len.value;
          expect(Tok::RBracket);
        }
        f.params.push_back(std::move(param));
        if (lex_.peek().kind != Tok::Comma) break;
        lex_.take();
      }
    }
    expect(Tok::RParen);
    f.body = parse_block();
    return f;
  }

  Block parse_block() {
    expect(Tok::LBrace);
    Block b;
    while (lex_.peek().kind != Tok::RBrace) {
      b.push_back(parse_stmt());
    }
    lex_.take();
    return b;
  }

  StmtRef parse_stmt() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::KwIf: return parse_if();
      case Tok::KwWhile: {
        SourceLoc loc = lex_.take().loc;
        expect(Tok::LParen);
        ExprRef cond = parse_expr();
        expect(Tok::RParen);
        Block body = parse_block();
        return make_stmt(While{std::move(cond), std::move(body)}, loc);
      }
      case Tok::KwFor: {
        SourceLoc loc = lex_.take().loc;
        std::string var = expect(Tok::Ident).text;
        expect(Tok::KwIn);
        ExprRef lo = parse_expr();
        expect(Tok::DotDot);
        ExprRef hi = parse_expr();
        Block body = parse_block();
        return make_stmt(For{std::move(var), std::move(lo), std::move(hi),
                             std::move(body)},
                         loc);
      }
      case Tok::KwReturn: {
        SourceLoc loc = lex_.take().loc;
        ExprRef value = parse_expr();
        expect(Tok::Semi);
        return make_stmt(Return{std::move(value)}, loc);
      }
      case Tok::Ident: return parse_assign();
      default:
        throw ParseError(t.loc, std::string("expected statement, got ") +
                                    tok_name(t.kind));
    }
  }

  StmtRef parse_if() {
    SourceLoc loc = lex_.take().loc;
    expect(Tok::LParen);
    ExprRef cond = parse_expr();
    expect(Tok::RParen);
    Block then_body = parse_block();
    Block else_body;
    if (lex_.peek().kind == Tok::KwElse) {
      lex_.take();
      if (lex_.peek().kind == Tok::KwIf) {
        else_body.push_back(parse_if());
      } else {
        else_body = parse_block();
      }
    }
    return make_stmt(
        If{std::move(cond), std::move(then_body), std::move(else_body)}, loc);
  }

  // assignment, array store, or call-assign; all start with an identifier.
  StmtRef parse_assign() {
    Token name = lex_.take();
    if (lex_.peek().kind == Tok::LBracket) {
      lex_.take();
      ExprRef index = parse_expr();
      expect(Tok::RBracket);
      expect(Tok::Assign);
      ExprRef value = parse_expr();
      expect(Tok::Semi);
      return make_stmt(ArrayStore{name.text, std::move(index), std::move(value)},
                       name.loc);
    }
    expect(Tok::Assign);
    // A call is only legal as the full right-hand side of an assignment.
    if (lex_.peek().kind == Tok::Ident) {
      Token callee = lex_.take();
      if (lex_.peek().kind == Tok::LParen) {
        lex_.take();
        std::vector<ExprRef> args;
        if (lex_.peek().kind != Tok::RParen) {
          for (;;) {
            args.push_back(parse_expr());
            if (lex_.peek().kind != Tok::Comma) break;
            lex_.take();
          }
        }
        expect(Tok::RParen);
        expect(Tok::Semi);
        return make_stmt(CallAssign{name.text, callee.text, std::move(args)},
                         name.loc);
      }
      // Not a call: continue parsing an expression that starts with callee.
      ExprRef lhs = finish_primary(callee);
      ExprRef value = parse_binary_rest(std::move(lhs), 0);
      expect(Tok::Semi);
      return make_stmt(Assign{name.text, std::move(value)}, name.loc);
    }
    ExprRef value = parse_expr();
    expect(Tok::Semi);
    return make_stmt(Assign{name.text, std::move(value)}, name.loc);
  }

  // Binary operator precedence, higher binds tighter.
  static int precedence(Tok t) {
    switch (t) {
      case Tok::OrOr: return 1;
      case Tok::AndAnd: return 2;
      case Tok::EqEq:
      case Tok::NotEq: return 3;
      case Tok::Lt:
      case Tok::Le:
      case Tok::Gt:
      case Tok::Ge: return 4;
      case Tok::Plus:
      case Tok::Minus: return 5;
      case Tok::Star:
      case Tok::Slash:
      case Tok::Percent: return 6;
      default: return 0;
    }
  }

  ExprRef parse_expr() { return parse_binary_rest(parse_unary(), 0); }

  // Precedence-climbing loop; `>` and `>=` are normalized to `<` / `<=`
  // with swapped operands so the IR carries four comparison ops only.
  ExprRef parse_binary_rest(ExprRef lhs, int min_prec) {
    for (;;) {
      Tok op = lex_.peek().kind;
      int prec = precedence(op);
      if (prec == 0 || prec < min_prec) return lhs;
      SourceLoc loc = lex_.take().loc;
      ExprRef rhs = parse_unary();
      for (;;) {
        int next = precedence(lex_.peek().kind);
        if (next <= prec) break;
        rhs = parse_binary_rest(std::move(rhs), next);
      }
      switch (op) {
        case Tok::Plus: lhs = make_binary(BinaryOp::Add, lhs, rhs, loc); break;
        case Tok::Minus: lhs = make_binary(BinaryOp::Sub, lhs, rhs, loc); break;
        case Tok::Star: lhs = make_binary(BinaryOp::Mul, lhs, rhs, loc); break;
        case Tok::Slash: lhs = make_binary(BinaryOp::Div, lhs, rhs, loc); break;
        case Tok::Percent: lhs = make_binary(BinaryOp::Mod, lhs, rhs, loc); break;
        case Tok::Lt: lhs = make_binary(BinaryOp::Lt, lhs, rhs, loc); break;
        case Tok::Le: lhs = make_binary(BinaryOp::Le, lhs, rhs, loc); break;
        case Tok::Gt: lhs = make_binary(BinaryOp::Lt, rhs, lhs, loc); break;
        case Tok::Ge: lhs = make_binary(BinaryOp::Le, rhs, lhs, loc); break;
        case Tok::EqEq: lhs = make_binary(BinaryOp::Eq, lhs, rhs, loc); break;
        case Tok::NotEq: lhs = make_binary(BinaryOp::Ne, lhs, rhs, loc); break;
        case Tok::AndAnd: lhs = make_binary(BinaryOp::And, lhs, rhs, loc); break;
        case Tok::OrOr: lhs = make_binary(BinaryOp::Or, lhs, rhs, loc); break;
        default: throw ParseError(loc, "expected binary operator");
      }
    }
  }

  ExprRef parse_unary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Minus) {
      SourceLoc loc = lex_.take().loc;
      return make_unary(UnaryOp::Neg, parse_unary(), loc);
    }
    if (t.kind == Tok::Not) {
      SourceLoc loc = lex_.take().loc;
      return make_unary(UnaryOp::Not, parse_unary(), loc);
    }
    return parse_primary();
  }

  ExprRef parse_primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::Int: return make_int(t.value, t.loc);
      case Tok::Ident: return finish_primary(t);
      case Tok::LParen: {
        ExprRef e = parse_expr();
        expect(Tok::RParen);
        return e;
      }
      default:
        throw ParseError(t.loc, std::string("expected expression, got ") +
                                    tok_name(t.kind));
    }
  }

  ExprRef finish_primary(const Token& ident) {
    if (lex_.peek().kind == Tok::LBracket) {
      lex_.take();
      ExprRef index = parse_expr();
      expect(Tok::RBracket);
      return make_load(ident.text, std::move(index), ident.loc);
    }
    if (lex_.peek().kind == Tok::LParen) {
      throw ParseError(lex_.peek().loc,
                       "calls are only allowed as the right-hand side of an "
                       "assignment");
    }
    return make_var(ident.text, ident.loc);
  }

  Token expect(Tok kind) {
    const Token& t = lex_.peek();
    if (t.kind != kind) {
      throw ParseError(t.loc, std::string("expected ") + tok_name(kind) +
                                  ", got " + tok_name(t.kind));
    }
    return lex_.take();
  }

  Lexer lex_;
};

}  // namespace

Program parse_program(std::string_view source) {
  return Parser(source).parse_program();
}

Program parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open program file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

ExprRef parse_expr_text(std::string_view source) {
  return Parser(source).parse_standalone_expr();
}

}  // namespace verimodel
