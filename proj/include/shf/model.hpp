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

// Layout-free models: table declarations plus (possibly quantified)
// equations over their elements.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "shf/error.hpp"
#include "shf/formula.hpp"

namespace shf {

/// Inclusive index range of one table dimension.
struct Bounds {
  std::int64_t lo = 1;
  std::int64_t hi = 1;

  std::int64_t extent() const { return hi - lo + 1; }
  bool contains(std::int64_t i) const { return i >= lo && i <= hi; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct TableDecl {
  std::string name;
  std::vector<Bounds> dims;

  std::size_t rank() const { return dims.size(); }
  std::int64_t element_count() const {
    std::int64_t n = 1;
    for (const auto& b : dims) n *= b.extent();
    return n;
  }
  friend bool operator==(const TableDecl&, const TableDecl&) = default;
};

/// How a table's dimensions run on a worksheet.
enum class Orientation { Scalar, YX, XY, Y, X };

inline std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::Scalar: return "";
    case Orientation::YX: return "yx";
    case Orientation::XY: return "xy";
    case Orientation::Y: return "y";
    case Orientation::X: return "x";
  }
  return "";
}

inline std::optional<Orientation> parse_orientation(std::string_view s) {
  if (s == "yx") return Orientation::YX;
  if (s == "xy") return Orientation::XY;
  if (s == "y") return Orientation::Y;
  if (s == "x") return Orientation::X;
  return std::nullopt;
}

inline std::size_t orientation_rank(Orientation o) {
  switch (o) {
    case Orientation::Scalar: return 0;
    case Orientation::Y:
    case Orientation::X: return 1;
    case Orientation::YX:
    case Orientation::XY: return 2;
  }
  return 0;
}

struct Quantifier {
  enum class Kind { All, Gt, Lt, Eq, Ge, Le };
  std::string var;
  Kind kind = Kind::All;
  std::int64_t k = 0;
  IntExprPtr symbolic_k;  // before instantiation

  /// Range of the variable once intersected with the dimension bounds.
  /// May be empty (lo > hi).
  Bounds effective(const Bounds& dim) const {
    Bounds r = dim;
    switch (kind) {
      case Kind::All: break;
      case Kind::Gt: r.lo = std::max(r.lo, k + 1); break;
      case Kind::Ge: r.lo = std::max(r.lo, k); break;
      case Kind::Lt: r.hi = std::min(r.hi, k - 1); break;
      case Kind::Le: r.hi = std::min(r.hi, k); break;
      case Kind::Eq:
        r.lo = std::max(r.lo, k);
        r.hi = std::min(r.hi, k);
        break;
    }
    return r;
  }
};

inline std::string_view to_string(Quantifier::Kind k) {
  switch (k) {
    case Quantifier::Kind::All: return "all";
    case Quantifier::Kind::Gt: return ">";
    case Quantifier::Kind::Lt: return "<";
    case Quantifier::Kind::Eq: return "=";
    case Quantifier::Kind::Ge: return ">=";
    case Quantifier::Kind::Le: return "<=";
  }
  return "";
}

/// One left-hand index: a quantifier, or a literal.
struct LhsIndex {
  std::optional<Quantifier> quantifier;
  std::int64_t literal = 0;
  IntExprPtr symbolic;  // literal before instantiation

  static LhsIndex fixed(std::int64_t v) { return {std::nullopt, v, nullptr}; }
  static LhsIndex all(std::string var) { return {Quantifier{std::move(var), Quantifier::Kind::All, 0, nullptr}, 0, nullptr}; }
  static LhsIndex constrained(std::string var, Quantifier::Kind kind, std::int64_t k) {
    return {Quantifier{std::move(var), kind, k, nullptr}, 0, nullptr};
  }
};

struct Equation {
  std::string table;
  std::vector<LhsIndex> lhs;
  Formula rhs;
};

inline std::string to_string(const LhsIndex& ix) {
  if (!ix.quantifier) return ix.symbolic ? to_string(*ix.symbolic) : std::to_string(ix.literal);
  const Quantifier& q = *ix.quantifier;
  if (q.kind == Quantifier::Kind::All) return "all " + q.var;
  return q.var + std::string(to_string(q.kind)) + (q.symbolic_k ? to_string(*q.symbolic_k) : std::to_string(q.k));
}

inline std::string to_string(const Equation& eq) {
  std::string out = eq.table + "[";
  for (std::size_t i = 0; i < eq.lhs.size(); ++i) {
    if (i) out += ", ";
    out += to_string(eq.lhs[i]);
  }
  out += "] = ";
  out += to_model_string(eq.rhs);
  return out;
}

/// Renames the quantified variables of `eq` using `rename`.
inline Equation rename_vars(const Equation& eq, const std::map<std::string, std::string>& rename) {
  Equation out = eq;
  for (auto& ix : out.lhs) {
    if (ix.quantifier) {
      if (auto it = rename.find(ix.quantifier->var); it != rename.end()) ix.quantifier->var = it->second;
    }
  }
  auto rename_indices = [&](std::vector<IndexExpr> idx) {
    for (auto& e : idx) {
      if (auto it = rename.find(e.var); it != rename.end()) e.var = it->second;
    }
    return idx;
  };
  out.rhs = map_leaves(eq.rhs, [&](const FormulaNode& n) -> std::optional<Formula> {
    if (const auto* v = std::get_if<VarRef>(&n.v)) {
      if (auto it = rename.find(v->name); it != rename.end()) return Formula::var(it->second);
    } else if (const auto* e = std::get_if<ElementRef>(&n.v)) {
      return Formula::element(e->table, rename_indices(e->indices));
    } else if (const auto* r = std::get_if<ElementRange>(&n.v)) {
      return Formula::element_range(r->first.table, rename_indices(r->first.indices), rename_indices(r->last.indices));
    }
    return std::nullopt;
  });
  return out;
}

/// Structural identity up to renaming of quantified variables: variables are
/// renumbered by their left-hand position.
inline std::string canonical_key(const Equation& eq) {
  std::map<std::string, std::string> rename;
  for (std::size_t i = 0; i < eq.lhs.size(); ++i) {
    if (eq.lhs[i].quantifier) rename[eq.lhs[i].quantifier->var] = "%" + std::to_string(i);
  }
  return to_string(rename_vars(eq, rename));
}

/// Tables plus a set of equations. Equations are kept in insertion order
/// but compared as a set.
class Object {
 public:
  const std::map<std::string, TableDecl>& tables() const { return tables_; }
  const std::vector<Equation>& equations() const { return equations_; }

  const TableDecl* find_table(std::string_view name) const {
    auto it = tables_.find(std::string(name));
    return it == tables_.end() ? nullptr : &it->second;
  }

  /// Adds a table; an existing table of the same rank widens to the hull of
  /// both bounds.
  void declare(const TableDecl& t) {
    auto [it, inserted] = tables_.try_emplace(t.name, t);
    if (inserted) return;
    TableDecl& have = it->second;
    if (have.rank() != t.rank()) {
      throw Error(ErrorKind::UnionIncompatible, "table '" + t.name + "' declared with " + std::to_string(have.rank()) +
                                                    " and " + std::to_string(t.rank()) + " dimensions");
    }
    for (std::size_t d = 0; d < t.rank(); ++d) {
      have.dims[d].lo = std::min(have.dims[d].lo, t.dims[d].lo);
      have.dims[d].hi = std::max(have.dims[d].hi, t.dims[d].hi);
    }
  }

  /// Returns false when a structurally equal equation is already present.
  bool add_equation(Equation eq) {
    if (!keys_.insert(canonical_key(eq)).second) return false;
    equations_.push_back(std::move(eq));
    return true;
  }

  bool empty() const { return tables_.empty() && equations_.empty(); }

  friend bool operator==(const Object& a, const Object& b) { return a.tables_ == b.tables_ && a.keys_ == b.keys_; }

 private:
  std::map<std::string, TableDecl> tables_;
  std::vector<Equation> equations_;
  std::set<std::string> keys_;
};

namespace detail {

inline void collect_refs(const Formula& f, const std::function<void(const ElementRef&)>& fn) {
  for_each_leaf(f, [&](const FormulaNode& n) {
    if (const auto* e = std::get_if<ElementRef>(&n.v)) {
      fn(*e);
    } else if (const auto* r = std::get_if<ElementRange>(&n.v)) {
      fn(r->first);
      fn(r->last);
    }
  });
}

}  // namespace detail

/// Checks that every referenced table is declared with matching arity and
/// that every variable is bound on the left-hand side. With `open_world`,
/// tables the object does not declare are assumed to come from another
/// operand of a union and are not checked.
inline void validate(const Object& o, bool open_world = false) {
  for (const auto& eq : o.equations()) {
    const TableDecl* t = o.find_table(eq.table);
    if (!t && !open_world) throw Error(ErrorKind::Semantic, "equation defines undeclared table '" + eq.table + "'");
    if (t && eq.lhs.size() != t->rank()) {
      throw Error(ErrorKind::Semantic, "equation '" + to_string(eq) + "' has " + std::to_string(eq.lhs.size()) +
                                           " indices but '" + eq.table + "' has " + std::to_string(t->rank()) +
                                           " dimensions");
    }
    std::set<std::string> bound;
    for (const auto& ix : eq.lhs) {
      if (ix.quantifier && !bound.insert(ix.quantifier->var).second) {
        throw Error(ErrorKind::Semantic, "variable '" + ix.quantifier->var + "' quantified twice in '" + to_string(eq) + "'");
      }
    }
    auto check_var = [&](const std::string& v) {
      if (!v.empty() && !bound.contains(v)) {
        throw Error(ErrorKind::Semantic, "unbound variable '" + v + "' in '" + to_string(eq) + "'");
      }
    };
    detail::collect_refs(eq.rhs, [&](const ElementRef& ref) {
      const TableDecl* u = o.find_table(ref.table);
      if (!u && open_world) {
        for (const auto& ix : ref.indices) check_var(ix.var);
        return;
      }
      if (!u) throw Error(ErrorKind::Semantic, "reference to undeclared table '" + ref.table + "' in '" + to_string(eq) + "'");
      if (ref.indices.size() != u->rank()) {
        throw Error(ErrorKind::Semantic, "reference to '" + ref.table + "' with " + std::to_string(ref.indices.size()) +
                                             " indices in '" + to_string(eq) + "'");
      }
      for (const auto& ix : ref.indices) check_var(ix.var);
    });
    for_each_leaf(eq.rhs, [&](const FormulaNode& n) {
      if (const auto* v = std::get_if<VarRef>(&n.v)) check_var(v->name);
    });
  }
}

}  // namespace shf
