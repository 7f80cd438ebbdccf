//===-- solver.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/solver.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace verimodel {

const char* to_symbol(RelOp op) {
  switch (op) {
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
  }
  return "?";
}

Atom Atom::negated() const {
  switch (op) {
    case RelOp::Lt: return {rhs, RelOp::Le, lhs};
    case RelOp::Le: return {rhs, RelOp::Lt, lhs};
    case RelOp::Eq: return {lhs, RelOp::Ne, rhs};
    case RelOp::Ne: return {lhs, RelOp::Eq, rhs};
  }
  return *this;
}

std::vector<std::string> Constraint::variables() const {
  std::set<std::string> names;
  std::vector<std::string> reads;
  for (const Atom& a : atoms) {
    reads.clear();
    collect_reads(*a.lhs, reads);
    collect_reads(*a.rhs, reads);
    names.insert(reads.begin(), reads.end());
  }
  return {names.begin(), names.end()};
}

std::size_t Constraint::var_count() const { return variables().size(); }

void DomainMap::declare(const std::string& name, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("empty domain for " + name);
  for (auto& [n, d] : vars) {
    if (n == name) {
      d = {lo, hi};
      return;
    }
  }
  vars.push_back({name, {lo, hi}});
}

const Domain* DomainMap::find(const std::string& name) const {
  for (const auto& [n, d] : vars) {
    if (n == name) return &d;
  }
  return nullptr;
}

namespace {

using i128 = __int128;

// Interval bounds live in a guarded sub-range of __int128; anything beyond
// kInf is treated as unbounded so saturation only ever widens.
constexpr i128 kInf = (static_cast<i128>(1) << 120);

i128 clamp_inf(i128 v) { return v > kInf ? kInf : (v < -kInf ? -kInf : v); }

i128 sat_add(i128 a, i128 b) {
  if (a >= kInf || b >= kInf) {
    if (a <= -kInf || b <= -kInf) return kInf;  // inf + -inf: widen upward
    return kInf;
  }
  if (a <= -kInf || b <= -kInf) return -kInf;
  return clamp_inf(a + b);
}

i128 sat_mul(i128 a, i128 b) {
  bool inf = a >= kInf || a <= -kInf || b >= kInf || b <= -kInf;
  int sign = ((a < 0) != (b < 0)) ? -1 : 1;
  if (a == 0 || b == 0) return 0;
  if (inf) return sign > 0 ? kInf : -kInf;
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) return sign > 0 ? kInf : -kInf;
  return clamp_inf(r);
}

struct IVal {
  i128 lo;
  i128 hi;
  bool singleton() const { return lo == hi; }
};

using MaybeIVal = std::optional<IVal>;  // nullopt = empty (no valid value)

IVal point(i128 v) { return {v, v}; }

MaybeIVal meet(const IVal& a, i128 lo, i128 hi) {
  i128 l = std::max(a.lo, lo);
  i128 h = std::min(a.hi, hi);
  if (l > h) return std::nullopt;
  return IVal{l, h};
}

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

IVal add_iv(const IVal& a, const IVal& b) {
  return {sat_add(a.lo, b.lo), sat_add(a.hi, b.hi)};
}

IVal sub_iv(const IVal& a, const IVal& b) {
  return {sat_add(a.lo, -b.hi), sat_add(a.hi, -b.lo)};
}

IVal neg_iv(const IVal& a) { return {-a.hi, -a.lo}; }

IVal mul_iv(const IVal& a, const IVal& b) {
  i128 c[4] = {sat_mul(a.lo, b.lo), sat_mul(a.lo, b.hi), sat_mul(a.hi, b.lo),
               sat_mul(a.hi, b.hi)};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

// C-style truncated division with the zero divisor excluded. Extremes occur
// at dividend endpoints against the divisor endpoints and the divisors
// closest to zero.
MaybeIVal div_iv(const IVal& a, const IVal& b) {
  std::vector<i128> divisors;
  auto add_divisor = [&](i128 v) {
    if (v != 0 && v >= b.lo && v <= b.hi) divisors.push_back(v);
  };
  add_divisor(b.lo);
  add_divisor(b.hi);
  add_divisor(1);
  add_divisor(-1);
  if (divisors.empty()) return std::nullopt;  // only divisor is zero
  i128 lo = kInf, hi = -kInf;
  for (i128 d : divisors) {
    for (i128 x : {a.lo, a.hi}) {
      i128 q = (x >= kInf || x <= -kInf) ? ((x < 0) != (d < 0) ? -kInf : kInf)
                                         : clamp_inf(x / d);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
  }
  // Truncation can pull interior values toward zero past both endpoints'
  // quotients; include zero when the dividend range spans it.
  if (a.lo <= 0 && a.hi >= 0) {
    lo = std::min<i128>(lo, 0);
    hi = std::max<i128>(hi, 0);
  }
  return IVal{lo, hi};
}

MaybeIVal mod_iv(const IVal& a, const IVal& b) {
  if (a.singleton() && b.singleton() && a.lo > -kInf && a.lo < kInf &&
      b.lo > -kInf && b.lo < kInf) {
    if (b.lo == 0) return std::nullopt;
    return point(a.lo % b.lo);
  }
  i128 m = std::max(b.hi < 0 ? -b.lo : b.lo > 0 ? b.hi : std::max(-b.lo, b.hi),
                    static_cast<i128>(0));
  if (m == 0) return std::nullopt;  // only divisor is zero
  i128 bound = m - 1;
  i128 lo = a.lo >= 0 ? 0 : -bound;
  i128 hi = a.hi <= 0 ? 0 : bound;
  // |a % b| <= |a| as well.
  i128 amax = std::max(a.hi < 0 ? -a.lo : a.lo > 0 ? a.hi : std::max(-a.lo, a.hi),
                       static_cast<i128>(0));
  lo = std::max(lo, -amax);
  hi = std::min(hi, amax);
  return IVal{lo, hi};
}

enum class Truth { True, False, Unknown };

Truth compare_iv(RelOp op, const IVal& a, const IVal& b) {
  switch (op) {
    case RelOp::Lt:
      if (a.hi < b.lo) return Truth::True;
      if (a.lo >= b.hi) return Truth::False;
      return Truth::Unknown;
    case RelOp::Le:
      if (a.hi <= b.lo) return Truth::True;
      if (a.lo > b.hi) return Truth::False;
      return Truth::Unknown;
    case RelOp::Eq:
      if (a.singleton() && b.singleton() && a.lo == b.lo) return Truth::True;
      if (a.hi < b.lo || b.hi < a.lo) return Truth::False;
      return Truth::Unknown;
    case RelOp::Ne:
      if (a.singleton() && b.singleton()) {
        return a.lo == b.lo ? Truth::False : Truth::True;
      }
      if (a.hi < b.lo || b.hi < a.lo) return Truth::True;
      return Truth::Unknown;
  }
  return Truth::Unknown;
}

struct BudgetSignal {};

class Engine {
 public:
  Engine(const Constraint& c, const DomainMap& domains, const SolverLimits& limits)
      : constraint_(c), limits_(limits) {
    for (const auto& [name, d] : domains.vars) {
      index_[name] = boxes_.size();
      boxes_.push_back({d.lo, d.hi});
    }
    for (const std::string& v : c.variables()) {
      if (!index_.count(v)) {
        throw std::invalid_argument("constraint variable '" + v +
                                    "' has no declared domain");
      }
    }
  }

  SolverResult run() {
    SolverResult result;
    try {
      bool sat = search(boxes_);
      result.status = sat ? SolveStatus::Sat : SolveStatus::Unsat;
      if (sat) result.witness = witness_;
    } catch (const BudgetSignal&) {
      result.status = SolveStatus::BudgetExceeded;
    }
    result.propagation_steps = steps_;
    result.splits = splits_;
    return result;
  }

 private:
  struct Box {
    std::int64_t lo;
    std::int64_t hi;
  };
  using Boxes = std::vector<Box>;

  // Forward interval evaluation. `val` is the interval of values over the
  // non-trapping points of the box (nullopt when no point in the box
  // evaluates at all); `may_trap` records that evaluation can divide by
  // zero somewhere in the box, which blocks entailment claims.
  struct EvalRes {
    MaybeIVal val;
    bool may_trap = false;
  };

  static constexpr EvalRes no_value() { return {std::nullopt, true}; }

  static bool certainly_true(const IVal& v) { return v.lo > 0 || v.hi < 0; }
  static bool certainly_false(const IVal& v) { return v.lo == 0 && v.hi == 0; }

  EvalRes eval(const Expr& e, const Boxes& boxes) const {
    return std::visit(
        Overload{
            [&](const IntLit& x) -> EvalRes { return {point(x.value), false}; },
            [&](const VarRef& x) -> EvalRes {
              const Box& b = boxes[index_.at(x.name)];
              return {IVal{b.lo, b.hi}, false};
            },
            [&](const ArrayLoad&) -> EvalRes {
              // The executor resolves loads before constraints reach the
              // solver; treat a residual load as unconstrained.
              return {IVal{-kInf, kInf}, false};
            },
            [&](const UnaryExpr& x) -> EvalRes {
              EvalRes v = eval(*x.operand, boxes);
              if (!v.val) return no_value();
              if (x.op == UnaryOp::Neg) return {neg_iv(*v.val), v.may_trap};
              if (certainly_false(*v.val)) return {point(1), v.may_trap};
              if (certainly_true(*v.val)) return {point(0), v.may_trap};
              return {IVal{0, 1}, v.may_trap};
            },
            [&](const BinaryExpr& x) -> EvalRes {
              EvalRes a = eval(*x.lhs, boxes);
              if (x.op == BinaryOp::And || x.op == BinaryOp::Or) {
                return eval_shortcircuit(x, a, boxes);
              }
              EvalRes b = eval(*x.rhs, boxes);
              if (!a.val || !b.val) return no_value();
              bool trap = a.may_trap || b.may_trap;
              switch (x.op) {
                case BinaryOp::Add: return {add_iv(*a.val, *b.val), trap};
                case BinaryOp::Sub: return {sub_iv(*a.val, *b.val), trap};
                case BinaryOp::Mul: return {mul_iv(*a.val, *b.val), trap};
                case BinaryOp::Div: {
                  MaybeIVal q = div_iv(*a.val, *b.val);
                  if (!q) return no_value();
                  return {q, trap || (b.val->lo <= 0 && b.val->hi >= 0)};
                }
                case BinaryOp::Mod: {
                  MaybeIVal q = mod_iv(*a.val, *b.val);
                  if (!q) return no_value();
                  return {q, trap || (b.val->lo <= 0 && b.val->hi >= 0)};
                }
                case BinaryOp::Lt:
                case BinaryOp::Le:
                case BinaryOp::Eq:
                case BinaryOp::Ne: {
                  RelOp rel = x.op == BinaryOp::Lt   ? RelOp::Lt
                              : x.op == BinaryOp::Le ? RelOp::Le
                              : x.op == BinaryOp::Eq ? RelOp::Eq
                                                     : RelOp::Ne;
                  switch (compare_iv(rel, *a.val, *b.val)) {
                    case Truth::True: return {point(1), trap};
                    case Truth::False: return {point(0), trap};
                    case Truth::Unknown: return {IVal{0, 1}, trap};
                  }
                  return {IVal{0, 1}, trap};
                }
                default: return no_value();
              }
            },
        },
        e.node);
  }

  // Short-circuit && / || over intervals: the right side only contributes
  // (values or traps) on the points where the left side did not decide.
  EvalRes eval_shortcircuit(const BinaryExpr& x, const EvalRes& a,
                            const Boxes& boxes) const {
    bool is_and = x.op == BinaryOp::And;
    if (!a.val) return no_value();
    if (is_and ? certainly_false(*a.val) : certainly_true(*a.val)) {
      return {point(is_and ? 0 : 1), a.may_trap};
    }
    EvalRes b = eval(*x.rhs, boxes);
    bool trap = a.may_trap || b.may_trap;
    bool left_decided = is_and ? certainly_true(*a.val) : certainly_false(*a.val);
    if (left_decided) {
      if (!b.val) return no_value();
      if (certainly_true(*b.val)) return {point(1), trap};
      if (certainly_false(*b.val)) return {point(0), trap};
      return {IVal{0, 1}, trap};
    }
    // Left side undecided: the short-circuit value is attainable, and the
    // right side may add the other truth value or a trap.
    if (!b.val) return {point(is_and ? 0 : 1), true};
    i128 lo = is_and ? 0 : (certainly_true(*b.val) ? 1 : 0);
    i128 hi = is_and ? (certainly_false(*b.val) ? 0 : 1) : 1;
    return {IVal{lo, hi}, trap};
  }

  // Constrains e to `req`; narrows variable boxes downward where a clean
  // inverse exists (add, sub, neg, multiplication by a constant). Returns
  // false when the requirement is unsatisfiable.
  bool narrow(const Expr& e, IVal req, Boxes& boxes, bool& narrowed) const {
    return std::visit(
        Overload{
            [&](const IntLit& x) {
              return x.value >= req.lo && x.value <= req.hi;
            },
            [&](const VarRef& x) {
              Box& b = boxes[index_.at(x.name)];
              std::int64_t lo =
                  req.lo <= -kInf ? b.lo
                                  : static_cast<std::int64_t>(std::max<i128>(
                                        req.lo, b.lo));
              std::int64_t hi =
                  req.hi >= kInf ? b.hi
                                 : static_cast<std::int64_t>(std::min<i128>(
                                       req.hi, b.hi));
              if (lo > hi) return false;
              if (lo != b.lo || hi != b.hi) {
                b = {lo, hi};
                narrowed = true;
              }
              return true;
            },
            [&](const ArrayLoad&) { return true; },
            [&](const UnaryExpr& x) {
              if (x.op == UnaryOp::Neg) {
                return narrow(*x.operand, {-req.hi, -req.lo}, boxes, narrowed);
              }
              // not(e) forced true means e == 0.
              if (req.lo > 0) return narrow(*x.operand, point(0), boxes, narrowed);
              return true;
            },
            [&](const BinaryExpr& x) {
              MaybeIVal a = eval(*x.lhs, boxes).val;
              MaybeIVal b = eval(*x.rhs, boxes).val;
              if (!a || !b) return false;
              switch (x.op) {
                case BinaryOp::Add:
                  return narrow(*x.lhs, sub_iv(req, *b), boxes, narrowed) &&
                         narrow(*x.rhs, sub_iv(req, *a), boxes, narrowed);
                case BinaryOp::Sub:
                  return narrow(*x.lhs, add_iv(req, *b), boxes, narrowed) &&
                         narrow(*x.rhs, sub_iv(*a, req), boxes, narrowed);
                case BinaryOp::Mul:
                  if (b->singleton() && b->lo != 0 && b->lo < kInf &&
                      b->lo > -kInf) {
                    i128 k = b->lo;
                    IVal inv = k > 0 ? IVal{ceil_div(req.lo, k), floor_div(req.hi, k)}
                                     : IVal{ceil_div(req.hi, k), floor_div(req.lo, k)};
                    if (inv.lo > inv.hi) return false;
                    return narrow(*x.lhs, inv, boxes, narrowed);
                  }
                  if (a->singleton() && a->lo != 0 && a->lo < kInf &&
                      a->lo > -kInf) {
                    i128 k = a->lo;
                    IVal inv = k > 0 ? IVal{ceil_div(req.lo, k), floor_div(req.hi, k)}
                                     : IVal{ceil_div(req.hi, k), floor_div(req.lo, k)};
                    if (inv.lo > inv.hi) return false;
                    return narrow(*x.rhs, inv, boxes, narrowed);
                  }
                  return true;
                default:
                  return true;  // no clean inverse; forward pruning only
              }
            },
        },
        e.node);
  }

  enum class AtomState { Infeasible, Entailed, Unknown };

  AtomState revise(const Atom& atom, Boxes& boxes, bool& narrowed) const {
    EvalRes lhs = eval(*atom.lhs, boxes);
    EvalRes rhs = eval(*atom.rhs, boxes);
    if (!lhs.val || !rhs.val) return AtomState::Infeasible;
    const IVal& a = *lhs.val;
    const IVal& b = *rhs.val;
    Truth t = compare_iv(atom.op, a, b);
    if (t == Truth::False) return AtomState::Infeasible;
    // A trap anywhere in the box makes the atom false at that point, so
    // "true for every point" additionally needs trap-freedom.
    if (t == Truth::True && !lhs.may_trap && !rhs.may_trap) {
      return AtomState::Entailed;
    }

    bool ok = true;
    switch (atom.op) {
      case RelOp::Lt:
        ok = narrow(*atom.lhs, {-kInf, sat_add(b.hi, -1)}, boxes, narrowed) &&
             narrow(*atom.rhs, {sat_add(a.lo, 1), kInf}, boxes, narrowed);
        break;
      case RelOp::Le:
        ok = narrow(*atom.lhs, {-kInf, b.hi}, boxes, narrowed) &&
             narrow(*atom.rhs, {a.lo, kInf}, boxes, narrowed);
        break;
      case RelOp::Eq: {
        auto m = meet(a, b.lo, b.hi);
        if (!m) return AtomState::Infeasible;
        ok = narrow(*atom.lhs, *m, boxes, narrowed) &&
             narrow(*atom.rhs, *m, boxes, narrowed);
        break;
      }
      case RelOp::Ne:
        if (b.singleton()) {
          if (a.lo == b.lo) {
            ok = narrow(*atom.lhs, {a.lo + 1, a.hi}, boxes, narrowed);
          } else if (a.hi == b.lo) {
            ok = narrow(*atom.lhs, {a.lo, a.hi - 1}, boxes, narrowed);
          }
        }
        if (ok && a.singleton()) {
          if (b.lo == a.lo) {
            ok = narrow(*atom.rhs, {b.lo + 1, b.hi}, boxes, narrowed);
          } else if (b.hi == a.lo) {
            ok = narrow(*atom.rhs, {b.lo, b.hi - 1}, boxes, narrowed);
          }
        }
        break;
    }
    return ok ? AtomState::Unknown : AtomState::Infeasible;
  }

  enum class PropResult { Infeasible, AllEntailed, Open };

  PropResult propagate(Boxes& boxes) {
    for (;;) {
      bool narrowed = false;
      bool all_entailed = true;
      for (const Atom& atom : constraint_.atoms) {
        ++steps_;
        switch (revise(atom, boxes, narrowed)) {
          case AtomState::Infeasible: return PropResult::Infeasible;
          case AtomState::Entailed: break;
          case AtomState::Unknown: all_entailed = false; break;
        }
      }
      if (!narrowed) {
        return all_entailed ? PropResult::AllEntailed : PropResult::Open;
      }
    }
  }

  bool search(Boxes boxes) {
    switch (propagate(boxes)) {
      case PropResult::Infeasible: return false;
      case PropResult::AllEntailed:
        record_witness(boxes);
        return true;
      case PropResult::Open: break;
    }

    // Split the widest box; ties go to declaration order.
    std::size_t split_var = boxes.size();
    i128 best_width = -1;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      i128 width = static_cast<i128>(boxes[i].hi) - boxes[i].lo;
      if (width > 0 && width > best_width) {
        best_width = width;
        split_var = i;
      }
    }
    if (split_var == boxes.size()) {
      // Every variable is a singleton yet some atom stayed undecided; that
      // only happens when interval arithmetic hit its guard range. The
      // point is not provably a model, so reject it.
      return false;
    }

    if (++splits_ > limits_.max_splits) throw BudgetSignal{};
    const Box box = boxes[split_var];
    std::int64_t mid = static_cast<std::int64_t>(
        floor_div(static_cast<i128>(box.lo) + box.hi, 2));

    Boxes left = boxes;
    left[split_var] = {box.lo, mid};
    if (search(std::move(left))) return true;
    Boxes right = std::move(boxes);
    right[split_var] = {mid + 1, box.hi};
    return search(std::move(right));
  }

  void record_witness(const Boxes& boxes) {
    witness_.clear();
    for (const auto& [name, idx] : index_) {
      witness_[name] = boxes[idx].lo;
    }
  }

  const Constraint& constraint_;
  SolverLimits limits_;
  std::map<std::string, std::size_t> index_;
  Boxes boxes_;
  std::map<std::string, std::int64_t> witness_;
  std::uint64_t steps_ = 0;
  std::uint64_t splits_ = 0;
};

}  // namespace

SolverResult decide(const Constraint& c, const DomainMap& domains,
                    const SolverLimits& limits) {
  return Engine(c, domains, limits).run();
}

namespace {

std::optional<i128> clamp_check(i128 v) {
  if (v >= kInf || v <= -kInf) return std::nullopt;
  return v;
}

// Exact integer evaluation at a point; nullopt on division by zero or when
// a value leaves the guarded range.
std::optional<i128> eval_point(const Expr& e,
                               const std::map<std::string, std::int64_t>& env) {
  return std::visit(
      Overload{
          [&](const IntLit& x) -> std::optional<i128> { return x.value; },
          [&](const VarRef& x) -> std::optional<i128> {
            auto it = env.find(x.name);
            if (it == env.end()) return std::nullopt;
            return it->second;
          },
          [&](const ArrayLoad&) -> std::optional<i128> { return std::nullopt; },
          [&](const UnaryExpr& x) -> std::optional<i128> {
            auto v = eval_point(*x.operand, env);
            if (!v) return std::nullopt;
            return x.op == UnaryOp::Neg ? -*v : static_cast<i128>(*v == 0);
          },
          [&](const BinaryExpr& x) -> std::optional<i128> {
            auto a = eval_point(*x.lhs, env);
            if (!a) return std::nullopt;
            if (x.op == BinaryOp::And && *a == 0) return 0;
            if (x.op == BinaryOp::Or && *a != 0) return 1;
            auto b = eval_point(*x.rhs, env);
            if (!b) return std::nullopt;
            switch (x.op) {
              case BinaryOp::Add: return clamp_check(sat_add(*a, *b));
              case BinaryOp::Sub: return clamp_check(sat_add(*a, -*b));
              case BinaryOp::Mul: return clamp_check(sat_mul(*a, *b));
              case BinaryOp::Div:
                if (*b == 0) return std::nullopt;
                return *a / *b;
              case BinaryOp::Mod:
                if (*b == 0) return std::nullopt;
                return *a % *b;
              case BinaryOp::Lt: return static_cast<i128>(*a < *b);
              case BinaryOp::Le: return static_cast<i128>(*a <= *b);
              case BinaryOp::Eq: return static_cast<i128>(*a == *b);
              case BinaryOp::Ne: return static_cast<i128>(*a != *b);
              case BinaryOp::And: return static_cast<i128>(*b != 0);
              case BinaryOp::Or: return static_cast<i128>(*b != 0);
            }
            return std::nullopt;
          },
      },
      e.node);
}

}  // namespace

bool check_witness(const Constraint& c,
                   const std::map<std::string, std::int64_t>& assignment) {
  for (const Atom& atom : c.atoms) {
    auto a = eval_point(*atom.lhs, assignment);
    auto b = eval_point(*atom.rhs, assignment);
    if (!a || !b) return false;
    bool ok = false;
    switch (atom.op) {
      case RelOp::Lt: ok = *a < *b; break;
      case RelOp::Le: ok = *a <= *b; break;
      case RelOp::Eq: ok = *a == *b; break;
      case RelOp::Ne: ok = *a != *b; break;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace verimodel
