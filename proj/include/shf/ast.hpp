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

// Parsed-but-not-instantiated program structure. Bounds, indices, skip sizes
// and address shifts may still mention size parameters; `instantiate_object`
// folds them to constants.

#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shf/address.hpp"
#include "shf/error.hpp"
#include "shf/formula.hpp"
#include "shf/model.hpp"

namespace shf {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct DeclTemplate {
  std::string name;
  std::vector<std::pair<IntExprPtr, IntExprPtr>> dims;
  SourcePos pos;
};

struct EquationTemplate {
  Equation eq;  // symbolic fields still set
  SourcePos pos;
};

struct ObjectTemplate {
  std::vector<DeclTemplate> decls;
  std::vector<EquationTemplate> equations;
};

/// `Sheet!A1 + vector(dx, dy) - vector(...)`
struct AddrExpr {
  CellAddr base;
  std::vector<std::pair<IntExprPtr, IntExprPtr>> shifts;  // already sign-adjusted
};

inline CellAddr eval_addr(const AddrExpr& a, const IntEnv& env) {
  CellAddr out = a.base;
  for (const auto& [dx, dy] : a.shifts) out = addr_add(out, Vec2{eval_int(*dx, env), eval_int(*dy, env)});
  return out;
}

struct MappingClause {
  std::string table;
  AddrExpr origin;
  Orientation orientation = Orientation::Scalar;
  SourcePos pos;
};

struct ObjectExpr;
using ObjectExprPtr = std::shared_ptr<const ObjectExpr>;

struct ObjectExpr {
  enum class Kind { Literal, Call, Union, Mapping };
  Kind kind = Kind::Literal;
  ObjectTemplate literal;
  std::string callee;
  std::vector<IntExprPtr> args;
  ObjectExprPtr lhs;  // Union lhs, Mapping base
  ObjectExprPtr rhs;  // Union rhs
  std::vector<MappingClause> clauses;
  SourcePos pos;
};

struct FunctionDef {
  std::string name;
  std::vector<std::string> params;
  ObjectExprPtr body;
  SourcePos pos;
};

struct ItemTemplate {
  enum class Kind { Table, Text, Skip };
  Kind kind = Kind::Skip;
  std::string name;  // table name or text
  Orientation orientation = Orientation::Scalar;
  IntExprPtr width;
  IntExprPtr height;
  SourcePos pos;
};

struct GridTemplate {
  std::vector<std::vector<ItemTemplate>> rows;
  AddrExpr anchor;
  SourcePos pos;
};

struct Program {
  std::vector<FunctionDef> definitions;
  ObjectExprPtr top;  // may be null when the program only defines functions
  std::vector<GridTemplate> layouts;

  const FunctionDef* find(std::string_view name) const {
    for (const auto& d : definitions) {
      if (d.name == name) return &d;
    }
    return nullptr;
  }
};

namespace detail {

[[noreturn]] inline void fail_at(ErrorKind kind, const SourcePos& pos, const std::string& msg) {
  throw Error(kind, msg, pos.line, pos.column);
}

inline IndexExpr instantiate_index(const IndexExpr& ix, const IntEnv& env, const std::set<std::string>& bound,
                                   const SourcePos& pos) {
  if (!ix.symbolic) return ix;
  Affine a = to_affine(*ix.symbolic, env);
  if (a.nonlinear || a.coef.size() > 1 || (a.coef.size() == 1 && a.coef.begin()->second != 1)) {
    fail_at(ErrorKind::Semantic, pos,
            "index '" + to_string(*ix.symbolic) + "' must be a constant or a variable plus a constant");
  }
  if (a.coef.empty()) return IndexExpr::literal(a.constant);
  const std::string& v = a.coef.begin()->first;
  if (!bound.contains(v)) fail_at(ErrorKind::Semantic, pos, "unknown name '" + v + "' in index");
  return IndexExpr::variable(v, a.constant);
}

}  // namespace detail

/// Folds size parameters to constants and produces a validated Object.
/// Equations whose left side lists fewer indices than the table has
/// dimensions get the missing trailing dimensions quantified implicitly;
/// right-hand references that are short by the same positions inherit them.
inline Object instantiate_object(const ObjectTemplate& t, const IntEnv& env) {
  Object out;
  std::map<std::string, std::size_t> ranks;
  for (const auto& d : t.decls) {
    TableDecl decl{d.name, {}};
    for (std::size_t i = 0; i < d.dims.size(); ++i) {
      Bounds b{eval_int(*d.dims[i].first, env), eval_int(*d.dims[i].second, env)};
      if (b.lo > b.hi) {
        detail::fail_at(ErrorKind::EmptyDimension, d.pos,
                        "table '" + d.name + "' dimension " + std::to_string(i + 1) + " runs from " +
                            std::to_string(b.lo) + " to " + std::to_string(b.hi));
      }
      decl.dims.push_back(b);
    }
    try {
      out.declare(decl);
    } catch (const Error& e) {
      detail::fail_at(ErrorKind::Semantic, d.pos, e.detail());
    }
    ranks[d.name] = decl.rank();
  }

  for (const auto& et : t.equations) {
    const Equation& src = et.eq;
    // A table declared by another union operand takes its rank from the
    // equation itself; the whole model is checked again at expansion.
    auto rank_it = ranks.find(src.table);
    const std::size_t rank = rank_it == ranks.end() ? src.lhs.size() : rank_it->second;
    if (src.lhs.size() > rank) {
      detail::fail_at(ErrorKind::Semantic, et.pos,
                      "'" + src.table + "' has " + std::to_string(rank) + " dimensions but " +
                          std::to_string(src.lhs.size()) + " indices were given");
    }

    Equation eq;
    eq.table = src.table;
    std::set<std::string> bound;
    for (const auto& ix : src.lhs) {
      LhsIndex out_ix = ix;
      if (ix.quantifier) {
        if (env.contains(ix.quantifier->var)) {
          detail::fail_at(ErrorKind::Semantic, et.pos, "quantified variable '" + ix.quantifier->var + "' shadows a parameter");
        }
        if (ix.quantifier->symbolic_k) {
          out_ix.quantifier->k = eval_int(*ix.quantifier->symbolic_k, env);
          out_ix.quantifier->symbolic_k = nullptr;
        }
        bound.insert(ix.quantifier->var);
      } else if (ix.symbolic) {
        out_ix.literal = eval_int(*ix.symbolic, env);
        out_ix.symbolic = nullptr;
      }
      eq.lhs.push_back(std::move(out_ix));
    }
    // Implicit trailing dimensions, keyed by position.
    std::map<std::size_t, std::string> implicit;
    for (std::size_t p = eq.lhs.size(); p < rank; ++p) {
      std::string v = "_d" + std::to_string(p + 1);
      implicit[p] = v;
      bound.insert(v);
      eq.lhs.push_back(LhsIndex::all(v));
    }

    auto complete = [&](const std::string& table, std::vector<IndexExpr> idx) {
      for (auto& ix : idx) ix = detail::instantiate_index(ix, env, bound, et.pos);
      auto r = ranks.find(table);
      if (r != ranks.end() && idx.size() < r->second && !implicit.empty()) {
        for (std::size_t p = idx.size(); p < r->second; ++p) {
          auto it = implicit.find(p);
          if (it == implicit.end()) {
            detail::fail_at(ErrorKind::Semantic, et.pos,
                            "reference to '" + table + "' is missing index " + std::to_string(p + 1));
          }
          idx.push_back(IndexExpr::variable(it->second));
        }
      }
      return idx;
    };

    eq.rhs = map_leaves(src.rhs, [&](const FormulaNode& n) -> std::optional<Formula> {
      if (const auto* v = std::get_if<VarRef>(&n.v)) {
        if (auto it = env.find(v->name); it != env.end()) return Formula::number(static_cast<double>(it->second));
        if (!bound.contains(v->name)) detail::fail_at(ErrorKind::Semantic, et.pos, "unknown name '" + v->name + "'");
        return std::nullopt;
      }
      if (const auto* e = std::get_if<ElementRef>(&n.v)) return Formula::element(e->table, complete(e->table, e->indices));
      if (const auto* r = std::get_if<ElementRange>(&n.v)) {
        return Formula::element_range(r->first.table, complete(r->first.table, r->first.indices),
                                      complete(r->last.table, r->last.indices));
      }
      return std::nullopt;
    });
    out.add_equation(std::move(eq));
  }

  try {
    validate(out, /*open_world=*/true);
  } catch (const Error& e) {
    const SourcePos pos = t.equations.empty() ? SourcePos{} : t.equations.front().pos;
    throw Error(e.kind(), e.detail(), pos.line, pos.column);
  }
  return out;
}

}  // namespace shf
