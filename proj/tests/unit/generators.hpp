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

// Seeded random objects, expanded objects and workbooks for property tests.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "shf/algebra.hpp"
#include "shf/formula.hpp"
#include "shf/model.hpp"
#include "shf/workbook.hpp"

namespace shf::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t range(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(v.size()) - 1))];
  }
  std::mt19937_64& rng() { return rng_; }

  double number() {
    switch (range(0, 4)) {
      case 0: return static_cast<double>(range(-50, 50));
      case 1: return static_cast<double>(range(-400, 400)) / 8.0;
      case 2: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng_);
      case 3: return static_cast<double>(range(0, 1000000)) * 1e15;
      default: return std::uniform_real_distribution<double>(0, 1e-6)(rng_);
    }
  }

  std::string text() {
    static const std::vector<std::string> parts = {"a", "Beer", " ", "x y", "\"q\"", "'", "<&>", "_", "é", "tab\there",
                                                   "line\nbreak", "1", "=", ",", "–"};
    std::string out;
    const auto n = range(0, 3);
    for (std::int64_t i = 0; i < n; ++i) out += pick(parts);
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Objects in the model notation.

inline const std::vector<std::string>& table_pool() {
  static const std::vector<std::string> names = {"a", "b", "c", "Sales", "Stock", "T1"};
  return names;
}

inline TableDecl random_decl(Gen& g, const std::string& name, std::size_t rank) {
  TableDecl t{name, {}};
  for (std::size_t d = 0; d < rank; ++d) {
    const std::int64_t lo = g.range(-2, 3);
    t.dims.push_back(Bounds{lo, lo + g.range(0, 3)});
  }
  return t;
}

/// Right-hand side over `o`'s tables using the variables in `vars`.
inline Formula random_rhs(Gen& g, const Object& o, const std::vector<std::string>& vars, int depth = 0) {
  std::vector<const TableDecl*> tables;
  for (const auto& [n, t] : o.tables()) tables.push_back(&t);
  auto index = [&](const Bounds& b) {
    if (!vars.empty() && g.chance(0.6)) return IndexExpr::variable(g.pick(vars), g.range(-1, 1));
    return IndexExpr::literal(g.range(b.lo, b.hi));
  };
  auto element = [&]() {
    const TableDecl* t = g.pick(tables);
    std::vector<IndexExpr> idx;
    for (const auto& b : t->dims) idx.push_back(index(b));
    return std::make_pair(t, idx);
  };
  const auto kind = depth > 2 ? g.range(0, 3) : g.range(0, 8);
  switch (kind) {
    case 0: return Formula::number(g.number());
    case 1: return Formula::text(g.text());
    case 2: {
      if (vars.empty()) return Formula::number(g.range(0, 9));
      return Formula::var(g.pick(vars));
    }
    case 3: {
      auto [t, idx] = element();
      return Formula::element(t->name, idx);
    }
    case 4: {
      auto [t, first] = element();
      std::vector<IndexExpr> last;
      for (const auto& b : t->dims) last.push_back(IndexExpr::literal(b.hi));
      return Formula::call("SUM", {Formula::element_range(t->name, first, last)});
    }
    case 5: {
      const CellRef a{g.chance(0.5) ? "Data" : "Other sheet", g.range(1, 30), g.range(1, 30), g.chance(0.5), g.chance(0.5)};
      return Formula::cell(a);
    }
    case 6: return Formula::negate(random_rhs(g, o, vars, depth + 1));
    case 7: {
      static const std::vector<BinaryOp> ops = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                                BinaryOp::Concat, BinaryOp::Lt, BinaryOp::Eq};
      return Formula::binary(g.pick(ops), random_rhs(g, o, vars, depth + 1), random_rhs(g, o, vars, depth + 1));
    }
    default: {
      static const std::vector<std::string> fns = {"MAX", "MIN", "IF", "SUM"};
      const std::string fn = g.pick(fns);
      std::vector<Formula> args;
      const auto n = fn == "IF" ? g.range(2, 3) : g.range(1, 3);
      for (std::int64_t i = 0; i < n; ++i) args.push_back(random_rhs(g, o, vars, depth + 1));
      return Formula::call(fn, std::move(args));
    }
  }
}

/// A valid object: declared tables, equations whose left sides mix
/// literals, `all` and constraints. Definitions may overlap; this is about
/// notation, not expansion.
inline Object random_object(Gen& g, std::size_t max_tables = 3, std::size_t max_equations = 4) {
  Object o;
  const auto nt = static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(max_tables)));
  std::vector<std::string> names = table_pool();
  std::shuffle(names.begin(), names.end(), g.rng());
  for (std::size_t i = 0; i < nt; ++i) o.declare(random_decl(g, names[i], static_cast<std::size_t>(g.range(0, 2))));
  if (o.tables().empty()) return o;
  const auto ne = g.range(0, static_cast<std::int64_t>(max_equations));
  static const std::vector<std::string> var_names = {"i", "j", "y", "t"};
  for (std::int64_t e = 0; e < ne; ++e) {
    std::vector<const TableDecl*> tables;
    for (const auto& [n, t] : o.tables()) tables.push_back(&t);
    const TableDecl* t = g.pick(tables);
    Equation eq;
    eq.table = t->name;
    std::vector<std::string> vars;
    for (std::size_t d = 0; d < t->rank(); ++d) {
      const Bounds& b = t->dims[d];
      const std::string v = var_names[d];
      switch (g.range(0, 3)) {
        case 0: eq.lhs.push_back(LhsIndex::fixed(g.range(b.lo, b.hi))); break;
        case 1: eq.lhs.push_back(LhsIndex::all(v)); vars.push_back(v); break;
        case 2: eq.lhs.push_back(LhsIndex::constrained(v, Quantifier::Kind::Gt, b.lo)); vars.push_back(v); break;
        default: eq.lhs.push_back(LhsIndex::constrained(v, Quantifier::Kind::Le, b.hi - 1)); vars.push_back(v); break;
      }
    }
    eq.rhs = random_rhs(g, o, vars);
    o.add_equation(std::move(eq));
  }
  return o;
}

// ---------------------------------------------------------------------------
// Expanded objects with compressible structure.

/// Each table is filled with a few rectangular patches of one relative
/// formula, some literal constants and some holes. References stay inside
/// their tables' bounds.
inline ExpandedObject random_expanded(Gen& g) {
  Object decls;
  const auto nt = g.range(1, 3);
  for (std::int64_t i = 0; i < nt; ++i) {
    decls.declare(random_decl(g, table_pool()[static_cast<std::size_t>(i)], static_cast<std::size_t>(g.range(0, 2))));
  }
  ExpandedObject e = declare_expanded(decls);
  std::vector<const TableDecl*> tables;
  for (const auto& [n, t] : decls.tables()) tables.push_back(&t);

  for (auto& [name, t] : e.tables) {
    const std::size_t rank = t.decl.rank();
    // Patterns: reference to a random table at index (idx[p] + offset) or
    // at a fixed literal, per slot.
    struct Slot {
      int dim;
      std::int64_t value;
    };
    struct Pattern {
      const TableDecl* target;
      std::vector<Slot> slots;
      int op;
    };
    std::vector<Pattern> patterns;
    const auto np = g.range(1, 3);
    for (std::int64_t p = 0; p < np; ++p) {
      Pattern pat{g.pick(tables), {}, static_cast<int>(g.range(0, 2))};
      for (std::size_t d = 0; d < pat.target->rank(); ++d) {
        if (rank > 0 && g.chance(0.7)) {
          const int dim = static_cast<int>(g.chance(0.7) && d < rank ? d : static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(rank) - 1)));
          pat.slots.push_back(Slot{dim, g.range(-1, 1)});
        } else {
          pat.slots.push_back(Slot{-1, g.range(pat.target->dims[d].lo, pat.target->dims[d].hi)});
        }
      }
      patterns.push_back(std::move(pat));
    }
    for (std::size_t off = 0; off < t.cells.size(); ++off) {
      const auto idx = t.index_of(off);
      const auto roll = g.range(0, 9);
      if (roll == 0) continue;  // hole
      if (roll == 1) {
        t.cells[off] = Formula::number(static_cast<double>(g.range(0, 3)));
        continue;
      }
      // Patches: pick the pattern by a coarse region of the index space so
      // that neighbours tend to agree.
      std::int64_t region = 0;
      for (std::size_t d = 0; d < rank; ++d) region += (idx[d] - t.decl.dims[d].lo) / 2;
      const Pattern& pat = patterns[static_cast<std::size_t>(region % static_cast<std::int64_t>(patterns.size()))];
      std::vector<IndexExpr> ref;
      bool ok = true;
      for (std::size_t d = 0; d < pat.slots.size(); ++d) {
        const Slot& s = pat.slots[d];
        const std::int64_t v = s.dim < 0 ? s.value : idx[static_cast<std::size_t>(s.dim)] + s.value;
        const Bounds& b = pat.target->dims[d];
        if (v < b.lo || v > b.hi) ok = false;
        ref.push_back(IndexExpr::literal(v));
      }
      if (!ok) {
        t.cells[off] = Formula::text("edge");
        continue;
      }
      Formula f = Formula::element(pat.target->name, ref);
      if (pat.op == 1) f = Formula::binary(BinaryOp::Mul, f, Formula::number(2));
      if (pat.op == 2) f = Formula::binary(BinaryOp::Add, f, Formula::element(pat.target->name, ref));
      t.cells[off] = f;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Sheet-space workbooks.

inline Formula random_sheet_formula(Gen& g, const std::vector<std::string>& sheets, int depth = 0) {
  auto ref = [&]() {
    const std::string sheet = g.chance(0.6) ? std::string() : g.pick(sheets);
    return CellRef{sheet, g.range(1, 40), g.range(1, 60), g.chance(0.3), g.chance(0.3)};
  };
  const auto kind = depth > 2 ? g.range(0, 3) : g.range(0, 6);
  switch (kind) {
    case 0: return Formula::number(g.number());
    case 1: return Formula::text(g.text());
    case 2: return Formula::cell(ref());
    case 3: {
      CellRef a = ref();
      CellRef b = ref();
      b.sheet = a.sheet;
      return Formula::call("SUM", {Formula::cell_range(a, b)});
    }
    case 4: return Formula::negate(random_sheet_formula(g, sheets, depth + 1));
    case 5: {
      static const std::vector<BinaryOp> ops = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                                BinaryOp::Concat, BinaryOp::Ge, BinaryOp::Ne};
      return Formula::binary(g.pick(ops), random_sheet_formula(g, sheets, depth + 1),
                             random_sheet_formula(g, sheets, depth + 1));
    }
    default: {
      const bool is_if = g.chance(0.5);
      std::vector<Formula> args;
      const auto n = is_if ? g.range(2, 3) : g.range(1, 3);
      for (std::int64_t i = 0; i < n; ++i) args.push_back(random_sheet_formula(g, sheets, depth + 1));
      return Formula::call(is_if ? "IF" : "MAX", std::move(args));
    }
  }
}

inline Workbook random_workbook(Gen& g) {
  static const std::vector<std::string> pool = {"Sheet1", "Data", "Other sheet", "Q&A <1>", "It's"};
  std::vector<std::string> sheets;
  for (const auto& s : pool) {
    if (g.chance(0.5)) sheets.push_back(s);
  }
  if (sheets.empty()) sheets.push_back("Sheet1");
  Workbook w;
  for (const auto& s : sheets) {
    w.sheet(s);
    const auto n = g.range(0, 25);
    for (std::int64_t i = 0; i < n; ++i) {
      const CellAddr a{s, g.range(1, 12), g.range(1, 20)};
      switch (g.range(0, 2)) {
        case 0: w.set(a, g.number()); break;
        case 1: w.set(a, g.text()); break;
        default: w.set(a, random_sheet_formula(g, sheets)); break;
      }
    }
  }
  return w;
}

}  // namespace shf::testing
