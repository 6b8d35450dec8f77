// Copyright 2026 The shf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Formula expression trees shared by model-space equations (table element
// references) and sheet-space cells (cell references).

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "shf/address.hpp"
#include "shf/error.hpp"

namespace shf {

// ---------------------------------------------------------------------------
// Integer expressions: bounds, indices and offsets before size parameters are
// substituted.

struct IntExpr {
  enum class Kind { Literal, Name, Neg, Add, Sub, Mul };
  Kind kind = Kind::Literal;
  std::int64_t value = 0;
  std::string name;
  std::shared_ptr<const IntExpr> lhs;
  std::shared_ptr<const IntExpr> rhs;
};

using IntExprPtr = std::shared_ptr<const IntExpr>;

inline IntExprPtr int_literal(std::int64_t v) {
  auto e = std::make_shared<IntExpr>();
  e->kind = IntExpr::Kind::Literal;
  e->value = v;
  return e;
}

inline IntExprPtr int_name(std::string n) {
  auto e = std::make_shared<IntExpr>();
  e->kind = IntExpr::Kind::Name;
  e->name = std::move(n);
  return e;
}

inline IntExprPtr int_node(IntExpr::Kind k, IntExprPtr a, IntExprPtr b = nullptr) {
  auto e = std::make_shared<IntExpr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

/// Affine form `sum(coef * name) + constant`.
struct Affine {
  std::map<std::string, std::int64_t> coef;
  std::int64_t constant = 0;
  bool nonlinear = false;
};

using IntEnv = std::map<std::string, std::int64_t, std::less<>>;

inline Affine to_affine(const IntExpr& e, const IntEnv& env) {
  Affine out;
  switch (e.kind) {
    case IntExpr::Kind::Literal:
      out.constant = e.value;
      return out;
    case IntExpr::Kind::Name:
      if (auto it = env.find(e.name); it != env.end()) {
        out.constant = it->second;
      } else {
        out.coef[e.name] = 1;
      }
      return out;
    case IntExpr::Kind::Neg: {
      out = to_affine(*e.lhs, env);
      out.constant = -out.constant;
      for (auto& [k, v] : out.coef) v = -v;
      return out;
    }
    case IntExpr::Kind::Add:
    case IntExpr::Kind::Sub: {
      out = to_affine(*e.lhs, env);
      Affine r = to_affine(*e.rhs, env);
      const std::int64_t sign = e.kind == IntExpr::Kind::Add ? 1 : -1;
      out.constant += sign * r.constant;
      for (auto& [k, v] : r.coef) out.coef[k] += sign * v;
      out.nonlinear = out.nonlinear || r.nonlinear;
      std::erase_if(out.coef, [](const auto& kv) { return kv.second == 0; });
      return out;
    }
    case IntExpr::Kind::Mul: {
      Affine a = to_affine(*e.lhs, env);
      Affine b = to_affine(*e.rhs, env);
      if (!a.coef.empty() && !b.coef.empty()) {
        out.nonlinear = true;
        return out;
      }
      if (!b.coef.empty()) std::swap(a, b);
      out.constant = a.constant * b.constant;
      for (auto& [k, v] : a.coef) {
        if (v * b.constant != 0) out.coef[k] = v * b.constant;
      }
      out.nonlinear = a.nonlinear || b.nonlinear;
      return out;
    }
  }
  return out;
}

/// Evaluates to a constant; throws when a free name remains.
inline std::int64_t eval_int(const IntExpr& e, const IntEnv& env) {
  Affine a = to_affine(e, env);
  if (a.nonlinear || !a.coef.empty()) {
    std::string names;
    for (const auto& [k, v] : a.coef) names += (names.empty() ? "" : ", ") + k;
    throw Error(ErrorKind::Semantic, "integer expression depends on unknown name(s): " + (names.empty() ? std::string("?") : names));
  }
  return a.constant;
}

inline std::string to_string(const IntExpr& e) {
  switch (e.kind) {
    case IntExpr::Kind::Literal: return std::to_string(e.value);
    case IntExpr::Kind::Name: return e.name;
    case IntExpr::Kind::Neg: return "-(" + to_string(*e.lhs) + ")";
    case IntExpr::Kind::Add: return to_string(*e.lhs) + "+" + to_string(*e.rhs);
    case IntExpr::Kind::Sub: return to_string(*e.lhs) + "-(" + to_string(*e.rhs) + ")";
    case IntExpr::Kind::Mul: return "(" + to_string(*e.lhs) + ")*(" + to_string(*e.rhs) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Index expressions: a literal, or a quantified variable plus a constant.

struct IndexExpr {
  std::string var;  // empty => literal `offset`
  std::int64_t offset = 0;
  IntExprPtr symbolic;  // only before instantiation

  static IndexExpr literal(std::int64_t v) { return {{}, v, nullptr}; }
  static IndexExpr variable(std::string name, std::int64_t off = 0) { return {std::move(name), off, nullptr}; }

  bool is_literal() const { return var.empty() && !symbolic; }

  friend bool operator==(const IndexExpr& a, const IndexExpr& b) {
    if (a.symbolic || b.symbolic) {
      return a.symbolic && b.symbolic && to_string(*a.symbolic) == to_string(*b.symbolic);
    }
    return a.var == b.var && a.offset == b.offset;
  }
};

inline std::string to_string(const IndexExpr& ix) {
  if (ix.symbolic) return to_string(*ix.symbolic);
  if (ix.var.empty()) return std::to_string(ix.offset);
  if (ix.offset == 0) return ix.var;
  if (ix.offset > 0) return ix.var + "+" + std::to_string(ix.offset);
  return ix.var + "-" + std::to_string(-ix.offset);
}

// ---------------------------------------------------------------------------
// Formula nodes.

enum class BinaryOp { Add, Sub, Mul, Div, Concat, Eq, Ne, Lt, Le, Gt, Ge };

inline std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Concat: return "&";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
  }
  return "?";
}

inline int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 1;
    case BinaryOp::Concat: return 2;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 3;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 4;
  }
  return 0;
}

struct FormulaNode;

/// Immutable, cheaply copyable handle to an expression tree.
class Formula {
 public:
  Formula();
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}

  const FormulaNode& node() const { return *node_; }
  const FormulaNode* get() const { return node_.get(); }

  static Formula number(double v);
  static Formula text(std::string s);
  static Formula var(std::string name);
  static Formula element(std::string table, std::vector<IndexExpr> indices);
  static Formula element_range(std::string table, std::vector<IndexExpr> first, std::vector<IndexExpr> last);
  static Formula cell(CellRef ref);
  static Formula cell_range(CellRef first, CellRef last);
  static Formula negate(Formula operand);
  static Formula binary(BinaryOp op, Formula lhs, Formula rhs);
  static Formula call(std::string name, std::vector<Formula> args);

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  std::shared_ptr<const FormulaNode> node_;
};

struct NumberLit {
  double value = 0;
};
struct TextLit {
  std::string value;
};
/// A quantified variable used as a value, e.g. `t[all i] = i`.
struct VarRef {
  std::string name;
};
struct ElementRef {
  std::string table;
  std::vector<IndexExpr> indices;
  friend bool operator==(const ElementRef&, const ElementRef&) = default;
};
struct ElementRange {
  ElementRef first;
  ElementRef last;
};
struct CellRangeRef {
  CellRef first;
  CellRef last;  // sheet of `last` is ignored; it follows `first`
};
struct Negate {
  Formula operand;
};
struct Binary {
  BinaryOp op;
  Formula lhs;
  Formula rhs;
};
struct Call {
  std::string name;
  std::vector<Formula> args;
};

struct FormulaNode {
  std::variant<NumberLit, TextLit, VarRef, ElementRef, ElementRange, CellRef, CellRangeRef, Negate, Binary, Call> v;
};

inline Formula::Formula() : node_(std::make_shared<const FormulaNode>(FormulaNode{NumberLit{0}})) {}

inline Formula Formula::number(double v) { return Formula(std::make_shared<const FormulaNode>(FormulaNode{NumberLit{v}})); }
inline Formula Formula::text(std::string s) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{TextLit{std::move(s)}}));
}
inline Formula Formula::var(std::string name) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{VarRef{std::move(name)}}));
}
inline Formula Formula::element(std::string table, std::vector<IndexExpr> indices) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{ElementRef{std::move(table), std::move(indices)}}));
}
inline Formula Formula::element_range(std::string table, std::vector<IndexExpr> first, std::vector<IndexExpr> last) {
  ElementRange r{ElementRef{table, std::move(first)}, ElementRef{table, std::move(last)}};
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{std::move(r)}));
}
inline Formula Formula::cell(CellRef ref) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{std::move(ref)}));
}
inline Formula Formula::cell_range(CellRef first, CellRef last) {
  last.sheet = first.sheet;
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{CellRangeRef{std::move(first), std::move(last)}}));
}
inline Formula Formula::negate(Formula operand) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{Negate{std::move(operand)}}));
}
inline Formula Formula::binary(BinaryOp op, Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{Binary{op, std::move(lhs), std::move(rhs)}}));
}
inline Formula Formula::call(std::string name, std::vector<Formula> args) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{Call{std::move(name), std::move(args)}}));
}

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = a.node_->v;
  const auto& y = b.node_->v;
  if (x.index() != y.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const T& rhs = std::get<T>(y);
        if constexpr (std::is_same_v<T, NumberLit>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, TextLit>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return lhs.name == rhs.name;
        } else if constexpr (std::is_same_v<T, ElementRef>) {
          return lhs == rhs;
        } else if constexpr (std::is_same_v<T, ElementRange>) {
          return lhs.first == rhs.first && lhs.last == rhs.last;
        } else if constexpr (std::is_same_v<T, CellRef>) {
          return lhs == rhs;
        } else if constexpr (std::is_same_v<T, CellRangeRef>) {
          return lhs.first == rhs.first && lhs.last == rhs.last;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return lhs.operand == rhs.operand;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return lhs.op == rhs.op && lhs.lhs == rhs.lhs && lhs.rhs == rhs.rhs;
        } else {
          return lhs.name == rhs.name && lhs.args == rhs.args;
        }
      },
      x);
}

// ---------------------------------------------------------------------------
// Traversal.

/// Calls `fn` on every leaf (anything that is not Negate/Binary/Call).
template <typename Fn>
void for_each_leaf(const Formula& f, Fn&& fn) {
  const auto& v = f.node().v;
  if (const auto* n = std::get_if<Negate>(&v)) {
    for_each_leaf(n->operand, fn);
  } else if (const auto* b = std::get_if<Binary>(&v)) {
    for_each_leaf(b->lhs, fn);
    for_each_leaf(b->rhs, fn);
  } else if (const auto* c = std::get_if<Call>(&v)) {
    for (const auto& a : c->args) for_each_leaf(a, fn);
  } else {
    fn(f.node());
  }
}

/// Rebuilds the tree bottom-up. `fn(leaf)` returns a replacement or nullopt
/// to keep the leaf. Unchanged subtrees are shared, not copied.
template <typename Fn>
Formula map_leaves(const Formula& f, Fn&& fn) {
  const auto& v = f.node().v;
  if (const auto* n = std::get_if<Negate>(&v)) {
    Formula o = map_leaves(n->operand, fn);
    return o.get() == n->operand.get() ? f : Formula::negate(std::move(o));
  }
  if (const auto* b = std::get_if<Binary>(&v)) {
    Formula l = map_leaves(b->lhs, fn);
    Formula r = map_leaves(b->rhs, fn);
    if (l.get() == b->lhs.get() && r.get() == b->rhs.get()) return f;
    return Formula::binary(b->op, std::move(l), std::move(r));
  }
  if (const auto* c = std::get_if<Call>(&v)) {
    std::vector<Formula> args;
    args.reserve(c->args.size());
    bool changed = false;
    for (const auto& a : c->args) {
      args.push_back(map_leaves(a, fn));
      changed = changed || args.back().get() != a.get();
    }
    return changed ? Formula::call(c->name, std::move(args)) : f;
  }
  std::optional<Formula> repl = fn(f.node());
  return repl ? std::move(*repl) : f;
}

inline bool uses_elements(const Formula& f) {
  bool found = false;
  for_each_leaf(f, [&](const FormulaNode& n) {
    if (std::holds_alternative<ElementRef>(n.v) || std::holds_alternative<ElementRange>(n.v)) found = true;
  });
  return found;
}

inline bool uses_cells(const Formula& f) {
  bool found = false;
  for_each_leaf(f, [&](const FormulaNode& n) {
    if (std::holds_alternative<CellRef>(n.v) || std::holds_alternative<CellRangeRef>(n.v)) found = true;
  });
  return found;
}

inline bool is_text_valued(const Formula& f) {
  const auto& v = f.node().v;
  if (std::holds_alternative<TextLit>(v)) return true;
  if (const auto* b = std::get_if<Binary>(&v)) return b->op == BinaryOp::Concat;
  return false;
}

// ---------------------------------------------------------------------------
// Printing.

/// Shortest representation that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

enum class RefStyle { Model, A1, R1C1 };

namespace detail {

inline std::string r1c1_part(char axis, std::int64_t value, bool absolute, std::int64_t host) {
  std::string out(1, axis);
  if (absolute) return out + std::to_string(value);
  const std::int64_t d = value - host;
  if (d != 0) out += "[" + std::to_string(d) + "]";
  return out;
}

inline std::string format_ref(const CellRef& r, RefStyle style, const CellAddr& host, bool with_sheet) {
  if (style == RefStyle::R1C1) {
    std::string out = with_sheet ? sheet_prefix(r.sheet) : std::string{};
    out += r1c1_part('R', r.row, r.row_abs, host.row);
    out += r1c1_part('C', r.col, r.col_abs, host.col);
    return out;
  }
  CellRef copy = r;
  if (!with_sheet) copy.sheet.clear();
  return a1_format(copy);
}

inline int node_precedence(const Formula& f) {
  const auto& v = f.node().v;
  if (const auto* b = std::get_if<Binary>(&v)) return precedence(b->op);
  if (std::holds_alternative<Negate>(v)) return 5;
  if (const auto* n = std::get_if<NumberLit>(&v)) return n->value < 0 || std::signbit(n->value) ? 5 : 6;
  return 6;
}

inline void print(std::string& out, const Formula& f, RefStyle style, const CellAddr& host);

inline void print_element(std::string& out, const ElementRef& e) {
  out += e.table;
  out += '[';
  for (std::size_t i = 0; i < e.indices.size(); ++i) {
    if (i) out += ", ";
    out += to_string(e.indices[i]);
  }
  out += ']';
}

inline void print(std::string& out, const Formula& f, RefStyle style, const CellAddr& host) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, TextLit>) {
          out += quote_string(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, ElementRef>) {
          print_element(out, n);
        } else if constexpr (std::is_same_v<T, ElementRange>) {
          print_element(out, n.first);
          out += ':';
          print_element(out, n.last);
        } else if constexpr (std::is_same_v<T, CellRef>) {
          out += format_ref(n, style, host, true);
        } else if constexpr (std::is_same_v<T, CellRangeRef>) {
          out += format_ref(n.first, style, host, true);
          out += ':';
          // Model text has no bare cell tokens, so both corners carry the sheet.
          out += format_ref(n.last, style, host, style == RefStyle::Model);
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          const auto& ov = n.operand.node().v;
          const bool wrap = node_precedence(n.operand) < 5 || std::holds_alternative<NumberLit>(ov) ||
                            std::holds_alternative<Negate>(ov);  // `--` starts a comment in model text
          if (wrap) out += '(';
          print(out, n.operand, style, host);
          if (wrap) out += ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = precedence(n.op);
          const bool wl = node_precedence(n.lhs) < p;
          const bool wr = node_precedence(n.rhs) <= p;
          if (wl) out += '(';
          print(out, n.lhs, style, host);
          if (wl) out += ')';
          out += ' ';
          out += to_string(n.op);
          out += ' ';
          if (wr) out += '(';
          print(out, n.rhs, style, host);
          if (wr) out += ')';
        } else {
          out += n.name;
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print(out, n.args[i], style, host);
          }
          out += ')';
        }
      },
      f.node().v);
}

}  // namespace detail

/// Model notation (no leading '='); cell references print in A1 style.
inline std::string to_model_string(const Formula& f) {
  std::string out;
  detail::print(out, f, RefStyle::Model, CellAddr{});
  return out;
}

/// Sheet formula body in A1 style, without the leading '='.
inline std::string to_a1_string(const Formula& f) {
  std::string out;
  detail::print(out, f, RefStyle::A1, CellAddr{});
  return out;
}

/// Sheet formula body in R1C1 style relative to `host`, without '='.
inline std::string to_r1c1_string(const Formula& f, const CellAddr& host) {
  std::string out;
  detail::print(out, f, RefStyle::R1C1, host);
  return out;
}

}  // namespace shf
