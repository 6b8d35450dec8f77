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

// Object calculus: union, function application, expansion of quantified
// equations, and the rewrite from table elements to worksheet cells.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shf/ast.hpp"
#include "shf/error.hpp"
#include "shf/formula.hpp"
#include "shf/model.hpp"
#include "shf/workbook.hpp"

namespace shf {

/// Tables are hulled per dimension; equations are a set union.
inline Object union_objects(const Object& a, const Object& b) {
  Object out = a;
  for (const auto& [name, t] : b.tables()) out.declare(t);
  for (const auto& eq : b.equations()) out.add_equation(eq);
  return out;
}

// ---------------------------------------------------------------------------
// Mapping specifications.

struct MappingEntry {
  std::string table;
  CellAddr origin;
  Orientation orientation = Orientation::Scalar;
  friend bool operator==(const MappingEntry&, const MappingEntry&) = default;
};

struct MappingSpec {
  std::vector<MappingEntry> entries;

  const MappingEntry* find(std::string_view table) const {
    for (const auto& e : entries) {
      if (e.table == table) return &e;
    }
    return nullptr;
  }
};

/// A layout-free object plus whatever `mapping` clauses came with it.
struct Model {
  Object object;
  MappingSpec mapping;
};

inline Model union_models(const Model& a, const Model& b) {
  Model out{union_objects(a.object, b.object), a.mapping};
  for (const auto& e : b.mapping.entries) {
    if (std::find(out.mapping.entries.begin(), out.mapping.entries.end(), e) == out.mapping.entries.end()) {
      out.mapping.entries.push_back(e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Function application.

inline Model evaluate_expr(const Program& p, const ObjectExpr& e, const IntEnv& env);

inline Model apply_function(const Program& p, const FunctionDef& f, const std::vector<std::int64_t>& args) {
  if (args.size() != f.params.size()) {
    throw Error(ErrorKind::Semantic, "'" + f.name + "' takes " + std::to_string(f.params.size()) +
                                         " argument(s) but " + std::to_string(args.size()) + " were given");
  }
  IntEnv env;
  for (std::size_t i = 0; i < args.size(); ++i) env[f.params[i]] = args[i];
  return evaluate_expr(p, *f.body, env);
}

inline Model evaluate_expr(const Program& p, const ObjectExpr& e, const IntEnv& env) {
  switch (e.kind) {
    case ObjectExpr::Kind::Literal: return Model{instantiate_object(e.literal, env), {}};
    case ObjectExpr::Kind::Call: {
      const FunctionDef* f = p.find(e.callee);
      if (!f) throw Error(ErrorKind::Semantic, "unknown function '" + e.callee + "'", e.pos.line, e.pos.column);
      std::vector<std::int64_t> args;
      for (const auto& a : e.args) args.push_back(eval_int(*a, env));
      return apply_function(p, *f, args);
    }
    case ObjectExpr::Kind::Union: {
      try {
        return union_models(evaluate_expr(p, *e.lhs, env), evaluate_expr(p, *e.rhs, env));
      } catch (const Error& err) {
        if (err.line() > 0) throw;
        throw Error(err.kind(), err.detail(), e.pos.line, e.pos.column);
      }
    }
    case ObjectExpr::Kind::Mapping: {
      Model m = evaluate_expr(p, *e.lhs, env);
      for (const auto& c : e.clauses) {
        try {
          m.mapping.entries.push_back(MappingEntry{c.table, eval_addr(c.origin, env), c.orientation});
        } catch (const Error& err) {
          throw Error(err.kind(), err.detail(), c.pos.line, c.pos.column);
        }
      }
      return m;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Expansion.

struct ExpandedTable {
  TableDecl decl;
  std::vector<std::optional<Formula>> cells;  // row-major over dims

  std::size_t offset(const std::vector<std::int64_t>& idx) const {
    std::size_t off = 0;
    for (std::size_t d = 0; d < decl.dims.size(); ++d) {
      off = off * static_cast<std::size_t>(decl.dims[d].extent()) + static_cast<std::size_t>(idx[d] - decl.dims[d].lo);
    }
    return off;
  }

  std::vector<std::int64_t> index_of(std::size_t off) const {
    std::vector<std::int64_t> idx(decl.dims.size());
    for (std::size_t d = decl.dims.size(); d-- > 0;) {
      const auto ext = static_cast<std::size_t>(decl.dims[d].extent());
      idx[d] = decl.dims[d].lo + static_cast<std::int64_t>(off % ext);
      off /= ext;
    }
    return idx;
  }

  bool in_bounds(const std::vector<std::int64_t>& idx) const {
    if (idx.size() != decl.dims.size()) return false;
    for (std::size_t d = 0; d < idx.size(); ++d) {
      if (!decl.dims[d].contains(idx[d])) return false;
    }
    return true;
  }
};

/// Every element keyed by (table, concrete indices), each with at most one
/// defining formula. References inside formulas have literal indices only.
struct ExpandedObject {
  std::map<std::string, ExpandedTable> tables;

  std::size_t defined_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tables) {
      for (const auto& c : t.cells) n += c.has_value();
    }
    return n;
  }

  friend bool operator==(const ExpandedObject& a, const ExpandedObject& b) {
    if (a.tables.size() != b.tables.size()) return false;
    for (auto i = a.tables.begin(), j = b.tables.begin(); i != a.tables.end(); ++i, ++j) {
      if (i->first != j->first || !(i->second.decl == j->second.decl) || i->second.cells != j->second.cells) return false;
    }
    return true;
  }
};

inline std::string element_name(const std::string& table, const std::vector<std::int64_t>& idx) {
  std::string out = table + "[";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(idx[i]);
  }
  return out + "]";
}

inline ExpandedObject declare_expanded(const Object& o) {
  ExpandedObject out;
  for (const auto& [name, t] : o.tables()) {
    out.tables[name] = ExpandedTable{t, std::vector<std::optional<Formula>>(static_cast<std::size_t>(t.element_count()))};
  }
  return out;
}

namespace detail {

using VarBinding = std::vector<std::pair<std::string, std::int64_t>>;

inline std::int64_t lookup(const VarBinding& env, const std::string& var) {
  for (const auto& [k, v] : env) {
    if (k == var) return v;
  }
  throw Error(ErrorKind::Semantic, "unbound variable '" + var + "'");
}

inline std::vector<std::int64_t> concrete(const std::vector<IndexExpr>& idx, const VarBinding& env) {
  std::vector<std::int64_t> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = idx[i].var.empty() ? idx[i].offset : lookup(env, idx[i].var) + idx[i].offset;
  return out;
}

inline std::vector<IndexExpr> as_literals(const std::vector<std::int64_t>& idx) {
  std::vector<IndexExpr> out;
  out.reserve(idx.size());
  for (auto v : idx) out.push_back(IndexExpr::literal(v));
  return out;
}

}  // namespace detail

/// Instantiates `eq.rhs` for one binding of its quantified variables.
/// `tables` supplies bounds for out-of-range checks.
inline Formula instantiate_rhs(const Formula& rhs, const detail::VarBinding& env,
                               const std::map<std::string, ExpandedTable>& tables, const std::string& where) {
  auto check = [&](const std::string& table, const std::vector<std::int64_t>& idx) {
    auto it = tables.find(table);
    if (it == tables.end() || !it->second.in_bounds(idx)) {
      throw Error(ErrorKind::OutOfBounds, where + " refers to " + element_name(table, idx) + ", outside its bounds");
    }
  };
  return map_leaves(rhs, [&](const FormulaNode& n) -> std::optional<Formula> {
    if (const auto* v = std::get_if<VarRef>(&n.v)) return Formula::number(static_cast<double>(detail::lookup(env, v->name)));
    if (const auto* e = std::get_if<ElementRef>(&n.v)) {
      auto idx = detail::concrete(e->indices, env);
      check(e->table, idx);
      return Formula::element(e->table, detail::as_literals(idx));
    }
    if (const auto* r = std::get_if<ElementRange>(&n.v)) {
      auto a = detail::concrete(r->first.indices, env);
      auto b = detail::concrete(r->last.indices, env);
      check(r->first.table, a);
      check(r->last.table, b);
      return Formula::element_range(r->first.table, detail::as_literals(a), detail::as_literals(b));
    }
    return std::nullopt;
  });
}

/// Effective per-position ranges of an equation's left-hand side.
inline std::vector<Bounds> lhs_ranges(const Equation& eq, const TableDecl& t) {
  std::vector<Bounds> ranges;
  for (std::size_t d = 0; d < eq.lhs.size(); ++d) {
    const LhsIndex& ix = eq.lhs[d];
    if (ix.quantifier) {
      ranges.push_back(ix.quantifier->effective(t.dims[d]));
    } else {
      if (!t.dims[d].contains(ix.literal)) {
        throw Error(ErrorKind::OutOfBounds, "'" + to_string(eq) + "' defines index " + std::to_string(ix.literal) +
                                                " outside " + std::to_string(t.dims[d].lo) + ":" +
                                                std::to_string(t.dims[d].hi));
      }
      ranges.push_back(Bounds{ix.literal, ix.literal});
    }
  }
  return ranges;
}

/// Number of instances `eq` expands to.
inline std::int64_t instance_count(const Equation& eq, const TableDecl& t) {
  std::int64_t n = 1;
  for (const auto& r : lhs_ranges(eq, t)) n *= std::max<std::int64_t>(0, r.extent());
  return n;
}

inline ExpandedObject expand(const Object& o) {
  validate(o);
  ExpandedObject out = declare_expanded(o);
  for (const auto& eq : o.equations()) {
    ExpandedTable& target = out.tables.at(eq.table);
    const std::vector<Bounds> ranges = lhs_ranges(eq, target.decl);
    if (std::any_of(ranges.begin(), ranges.end(), [](const Bounds& b) { return b.lo > b.hi; })) continue;

    std::vector<std::int64_t> idx(ranges.size());
    for (std::size_t d = 0; d < ranges.size(); ++d) idx[d] = ranges[d].lo;
    detail::VarBinding env;
    for (std::size_t d = 0; d < eq.lhs.size(); ++d) {
      if (eq.lhs[d].quantifier) env.emplace_back(eq.lhs[d].quantifier->var, 0);
    }
    const std::string where = to_string(eq);
    for (;;) {
      std::size_t k = 0;
      for (std::size_t d = 0; d < eq.lhs.size(); ++d) {
        if (eq.lhs[d].quantifier) env[k++].second = idx[d];
      }
      auto& slot = target.cells[target.offset(idx)];
      if (slot) throw Error(ErrorKind::MultipleDefinition, element_name(eq.table, idx) + " is defined more than once");
      slot = instantiate_rhs(eq.rhs, env, out.tables, where);

      bool done = true;
      for (std::size_t d = ranges.size(); d-- > 0;) {
        if (idx[d] < ranges[d].hi) {
          ++idx[d];
          done = false;
          break;
        }
        idx[d] = ranges[d].lo;
      }
      if (done) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mapping onto worksheets.

/// Cell that holds element `idx` of `t` under `e`.
inline CellAddr place_element(const MappingEntry& e, const TableDecl& t, const std::vector<std::int64_t>& idx) {
  CellAddr a = e.origin;
  switch (t.rank()) {
    case 0: return a;
    case 1:
      if (e.orientation == Orientation::Y) {
        a.row += idx[0] - t.dims[0].lo;
      } else {
        a.col += idx[0] - t.dims[0].lo;
      }
      return a;
    default:
      if (e.orientation == Orientation::YX) {
        a.row += idx[0] - t.dims[0].lo;
        a.col += idx[1] - t.dims[1].lo;
      } else {
        a.col += idx[0] - t.dims[0].lo;
        a.row += idx[1] - t.dims[1].lo;
      }
      return a;
  }
}

inline void check_entry(const MappingEntry& e, const TableDecl& t) {
  if (t.rank() > 2) {
    throw Error(ErrorKind::Layout, "table '" + t.name + "' has " + std::to_string(t.rank()) +
                                       " dimensions; only tables of up to two can be laid out");
  }
  if (e.origin.sheet.empty()) throw Error(ErrorKind::Layout, "table '" + t.name + "' is mapped without a sheet");
  if (t.rank() == 0) return;
  if (orientation_rank(e.orientation) != t.rank()) {
    throw Error(ErrorKind::Layout, "table '" + t.name + "' has " + std::to_string(t.rank()) + " dimension(s) but is laid out " +
                                       (e.orientation == Orientation::Scalar ? std::string("without orientation")
                                                                             : "by " + std::string(to_string(e.orientation))));
  }
}

namespace detail {

inline CellRef host_relative(CellAddr a, const CellAddr& host) {
  if (a.sheet == host.sheet) a.sheet.clear();
  return CellRef{a.sheet, a.col, a.row, false, false};
}

inline Cell to_cell(const Formula& f) {
  const auto& v = f.node().v;
  if (const auto* n = std::get_if<NumberLit>(&v)) return n->value;
  if (const auto* s = std::get_if<TextLit>(&v)) return s->value;
  return f;
}

}  // namespace detail

/// Rewrites element references into cell references at the mapped
/// addresses and places every defined element.
inline Workbook map_table(const ExpandedObject& e, const MappingSpec& m) {
  std::map<std::string, const MappingEntry*> entries;
  for (const auto& me : m.entries) {
    if (!entries.emplace(me.table, &me).second) throw Error(ErrorKind::Layout, "table '" + me.table + "' is mapped twice");
  }
  auto entry_for = [&](const std::string& table) -> const MappingEntry& {
    auto it = entries.find(table);
    if (it == entries.end()) throw Error(ErrorKind::MappingIncomplete, "table '" + table + "' has no place on any sheet");
    return *it->second;
  };
  for (const auto& [name, me] : entries) {
    auto t = e.tables.find(name);
    if (t == e.tables.end()) throw Error(ErrorKind::MappingIncomplete, "mapping names unknown table '" + name + "'");
    check_entry(*me, t->second.decl);
  }

  auto address = [&](const ElementRef& r) {
    std::vector<std::int64_t> idx(r.indices.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = r.indices[i].offset;
    return place_element(entry_for(r.table), e.tables.at(r.table).decl, idx);
  };

  Workbook w;
  for (const auto& [name, t] : e.tables) {
    const bool any = std::any_of(t.cells.begin(), t.cells.end(), [](const auto& c) { return c.has_value(); });
    if (!any) continue;
    const MappingEntry& me = entry_for(name);
    for (std::size_t off = 0; off < t.cells.size(); ++off) {
      if (!t.cells[off]) continue;
      const CellAddr host = place_element(me, t.decl, t.index_of(off));
      Formula f = map_leaves(*t.cells[off], [&](const FormulaNode& n) -> std::optional<Formula> {
        if (const auto* r = std::get_if<ElementRef>(&n.v)) return Formula::cell(detail::host_relative(address(*r), host));
        if (const auto* r = std::get_if<ElementRange>(&n.v)) {
          const CellAddr a = address(r->first);
          const CellAddr b = address(r->last);
          CellRef lo = detail::host_relative(CellAddr{a.sheet, std::min(a.col, b.col), std::min(a.row, b.row)}, host);
          CellRef hi = detail::host_relative(CellAddr{a.sheet, std::max(a.col, b.col), std::max(a.row, b.row)}, host);
          return Formula::cell_range(lo, hi);
        }
        if (const auto* c = std::get_if<CellRef>(&n.v)) {
          if (c->sheet == host.sheet) {
            CellRef copy = *c;
            copy.sheet.clear();
            return Formula::cell(copy);
          }
        } else if (const auto* c = std::get_if<CellRangeRef>(&n.v)) {
          if (c->first.sheet == host.sheet) {
            CellRef a = c->first;
            CellRef b = c->last;
            a.sheet.clear();
            return Formula::cell_range(a, b);
          }
        }
        return std::nullopt;
      });
      w.put(host, detail::to_cell(f));
    }
  }
  return w;
}

inline Workbook map_table(const Object& o, const MappingSpec& m) { return map_table(expand(o), m); }

}  // namespace shf
