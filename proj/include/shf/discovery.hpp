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

// Recovering tables and quantified equations from a finished workbook:
// repeated-formula runs, caption-based names, lifting cells back to table
// elements, and compressing element equations into quantified ones.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shf/address.hpp"
#include "shf/algebra.hpp"
#include "shf/emitter.hpp"
#include "shf/error.hpp"
#include "shf/formula.hpp"
#include "shf/model.hpp"
#include "shf/notation.hpp"
#include "shf/workbook.hpp"

namespace shf {

// ---------------------------------------------------------------------------
// Normal forms and runs.

struct NormalForm {
  std::string key;           // R1C1 text relative to the cell
  std::vector<Vec2> offsets;  // relative references, in leaf order
  friend bool operator==(const NormalForm&, const NormalForm&) = default;
};

inline NormalForm normalize_formula(const Formula& f, const CellAddr& at) {
  NormalForm out{to_r1c1_string(f, at), {}};
  auto add = [&](const CellRef& r) {
    if (!r.col_abs || !r.row_abs) out.offsets.push_back(Vec2{r.col_abs ? 0 : r.col - at.col, r.row_abs ? 0 : r.row - at.row});
  };
  for_each_leaf(f, [&](const FormulaNode& n) {
    if (const auto* r = std::get_if<CellRef>(&n.v)) {
      add(*r);
    } else if (const auto* r = std::get_if<CellRangeRef>(&n.v)) {
      add(r->first);
      add(r->last);
    }
  });
  return out;
}

/// Inclusive rectangle of cells on one sheet.
struct Run {
  std::string sheet;
  std::int64_t c1 = 1, r1 = 1, c2 = 1, r2 = 1;
  std::string key;

  std::int64_t width() const { return c2 - c1 + 1; }
  std::int64_t height() const { return r2 - r1 + 1; }
  std::int64_t area() const { return width() * height(); }
  bool contains(std::int64_t col, std::int64_t row) const { return col >= c1 && col <= c2 && row >= r1 && row <= r2; }
  friend bool operator==(const Run&, const Run&) = default;
};

/// Greedy partition of keyed cells into rectangles of equal key. Seeds are
/// taken in row-major order; each grows right-then-down and down-then-right
/// and keeps the larger (right-first on ties).
inline std::vector<Run> partition_rectangles(const std::string& sheet, const std::map<GridKey, std::string>& keys) {
  std::set<GridKey> taken;
  auto free_with = [&](std::int64_t row, std::int64_t col, const std::string& k) {
    auto it = keys.find({row, col});
    return it != keys.end() && it->second == k && !taken.contains({row, col});
  };
  std::vector<Run> out;
  for (const auto& [pos, k] : keys) {
    if (taken.contains(pos)) continue;
    const auto [r, c] = pos;
    // right, then down
    std::int64_t w1 = 1;
    while (free_with(r, c + w1, k)) ++w1;
    std::int64_t h1 = 1;
    for (;; ++h1) {
      bool ok = true;
      for (std::int64_t x = 0; x < w1 && ok; ++x) ok = free_with(r + h1, c + x, k);
      if (!ok) break;
    }
    // down, then right
    std::int64_t h2 = 1;
    while (free_with(r + h2, c, k)) ++h2;
    std::int64_t w2 = 1;
    for (;; ++w2) {
      bool ok = true;
      for (std::int64_t y = 0; y < h2 && ok; ++y) ok = free_with(r + y, c + w2, k);
      if (!ok) break;
    }
    const bool right_first = w1 * h1 >= w2 * h2;
    const std::int64_t w = right_first ? w1 : w2;
    const std::int64_t h = right_first ? h1 : h2;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) taken.insert({r + y, c + x});
    }
    out.push_back(Run{sheet, c, r, c + w - 1, r + h - 1, k});
  }
  return out;
}

struct RunOptions {
  bool include_constants = false;  // numbers join runs keyed by their value
};

/// Rectangles of cells sharing one normal form.
inline std::vector<Run> detect_runs(const Workbook& w, RunOptions opt = {}) {
  std::vector<Run> out;
  for (const auto& s : w.sheets()) {
    std::map<GridKey, std::string> keys;
    for (const auto& [pos, cell] : s.cells) {
      if (const auto* f = std::get_if<Formula>(&cell)) {
        keys[pos] = "=" + normalize_formula(*f, CellAddr{s.name, pos.second, pos.first}).key;
      } else if (opt.include_constants && std::holds_alternative<double>(cell)) {
        keys[pos] = "#" + format_number(std::get<double>(cell));
      }
    }
    auto runs = partition_rectangles(s.name, keys);
    out.insert(out.end(), runs.begin(), runs.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Names.

inline std::string sanitize_identifier(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending && !out.empty()) out += '_';
      pending = false;
      out += c;
    } else {
      pending = true;
    }
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(0, "T");
  if (reserved_words().contains(out)) out += '_';
  return out;
}

/// Nearest text caption: up the run's first column, else left along its
/// first row. Only the first non-blank cell in each direction counts.
inline std::optional<std::string> find_caption(const Workbook& w, const Run& r) {
  const Sheet* s = w.find_sheet(r.sheet);
  if (!s) return std::nullopt;
  auto text_at = [&](std::int64_t col, std::int64_t row) -> std::optional<std::optional<std::string>> {
    const Cell* c = s->find(col, row);
    if (!c) return std::nullopt;
    if (const auto* t = std::get_if<std::string>(c)) return std::optional<std::string>(*t);
    return std::optional<std::string>();
  };
  for (std::int64_t row = r.r1 - 1; row >= 1; --row) {
    if (auto hit = text_at(r.c1, row)) {
      if (*hit && !sanitize_identifier(**hit).empty()) return **hit;
      break;
    }
  }
  for (std::int64_t col = r.c1 - 1; col >= 1; --col) {
    if (auto hit = text_at(col, r.r1)) {
      if (*hit && !sanitize_identifier(**hit).empty()) return **hit;
      break;
    }
  }
  return std::nullopt;
}

/// One identifier per run. `overrides` (by run index) win; repeated names
/// get _2, _3...; runs without a caption become T1, T2...
inline std::vector<std::string> guess_names(const Workbook& w, const std::vector<Run>& runs,
                                            const std::map<std::size_t, std::string>& overrides = {},
                                            std::set<std::string> used = {}) {
  std::vector<std::string> out(runs.size());
  auto claim = [&](std::string base) {
    std::string name = base;
    for (int k = 2; used.contains(name); ++k) name = base + "_" + std::to_string(k);
    used.insert(name);
    return name;
  };
  for (const auto& [i, name] : overrides) {
    if (i < runs.size()) out[i] = claim(name);
  }
  std::size_t fallback = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (overrides.contains(i)) continue;
    if (auto cap = find_caption(w, runs[i])) {
      out[i] = claim(sanitize_identifier(*cap));
    } else {
      std::string name;
      do {
        name = "T" + std::to_string(++fallback);
      } while (used.contains(name));
      out[i] = claim(name);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lifting a workbook back to table elements.

struct LiftResult {
  ExpandedObject object;
  std::vector<std::string> warnings;
};

namespace detail {

struct Footprint {
  const MappingEntry* entry;
  const TableDecl* decl;
  Run rect;
};

inline Run footprint(const MappingEntry& e, const TableDecl& t) {
  std::vector<std::int64_t> hi(t.rank());
  for (std::size_t d = 0; d < t.rank(); ++d) hi[d] = t.dims[d].hi;
  std::vector<std::int64_t> lo(t.rank());
  for (std::size_t d = 0; d < t.rank(); ++d) lo[d] = t.dims[d].lo;
  const CellAddr a = place_element(e, t, lo);
  const CellAddr b = place_element(e, t, hi);
  return Run{e.origin.sheet, std::min(a.col, b.col), std::min(a.row, b.row), std::max(a.col, b.col), std::max(a.row, b.row), {}};
}

inline std::vector<std::int64_t> element_at(const Footprint& f, const CellAddr& a) {
  const TableDecl& t = *f.decl;
  const CellAddr& o = f.entry->origin;
  switch (t.rank()) {
    case 0: return {};
    case 1:
      return {t.dims[0].lo + (f.entry->orientation == Orientation::Y ? a.row - o.row : a.col - o.col)};
    default:
      if (f.entry->orientation == Orientation::YX) return {t.dims[0].lo + a.row - o.row, t.dims[1].lo + a.col - o.col};
      return {t.dims[0].lo + a.col - o.col, t.dims[1].lo + a.row - o.row};
  }
}

}  // namespace detail

/// Inverse of map_table: every mapped cell becomes an element; references
/// into mapped tables become element references; other references stay in
/// sheet space (with an explicit sheet) and are reported.
inline LiftResult lift(const Workbook& w, const MappingSpec& m, const Object& tables) {
  LiftResult out;
  out.object = declare_expanded(tables);
  std::vector<detail::Footprint> prints;
  for (const auto& e : m.entries) {
    const TableDecl* t = tables.find_table(e.table);
    if (!t) throw Error(ErrorKind::MappingIncomplete, "mapping names unknown table '" + e.table + "'");
    check_entry(e, *t);
    prints.push_back(detail::Footprint{&e, t, detail::footprint(e, *t)});
  }
  auto owner = [&](const CellAddr& a) -> const detail::Footprint* {
    for (const auto& p : prints) {
      if (p.rect.sheet == a.sheet && p.rect.contains(a.col, a.row)) return &p;
    }
    return nullptr;
  };

  for (const auto& p : prints) {
    ExpandedTable& et = out.object.tables.at(p.entry->table);
    for (std::size_t off = 0; off < et.cells.size(); ++off) {
      const auto idx = et.index_of(off);
      const CellAddr host = place_element(*p.entry, *p.decl, idx);
      const Cell* c = w.find(host);
      if (!c) continue;
      if (const auto* d = std::get_if<double>(c)) {
        et.cells[off] = Formula::number(*d);
        continue;
      }
      if (const auto* s = std::get_if<std::string>(c)) {
        et.cells[off] = Formula::text(*s);
        continue;
      }
      auto absolute = [&](CellRef r) {
        if (r.sheet.empty()) r.sheet = host.sheet;
        return r;
      };
      auto warn = [&](const std::string& what) {
        out.warnings.push_back(a1_format(host) + " refers to " + what + ", which lies in no table");
      };
      et.cells[off] = map_leaves(std::get<Formula>(*c), [&](const FormulaNode& n) -> std::optional<Formula> {
        if (const auto* r = std::get_if<CellRef>(&n.v)) {
          const CellRef abs = absolute(*r);
          if (const auto* f = owner(abs.addr())) {
            return Formula::element(f->entry->table, detail::as_literals(detail::element_at(*f, abs.addr())));
          }
          warn(a1_format(abs));
          return Formula::cell(abs);
        }
        if (const auto* r = std::get_if<CellRangeRef>(&n.v)) {
          CellRef a = absolute(r->first);
          CellRef b = r->last;
          b.sheet = a.sheet;
          const CellAddr tl{a.sheet, std::min(a.col, b.col), std::min(a.row, b.row)};
          const CellAddr br{a.sheet, std::max(a.col, b.col), std::max(a.row, b.row)};
          const auto* f1 = owner(tl);
          if (f1 && f1 == owner(br)) {
            return Formula::element_range(f1->entry->table, detail::as_literals(detail::element_at(*f1, tl)),
                                          detail::as_literals(detail::element_at(*f1, br)));
          }
          warn(a1_format(a) + ":" + a1_format(CellRef{"", b.col, b.row, b.col_abs, b.row_abs}));
          return Formula::cell_range(a, b);
        }
        return std::nullopt;
      });
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compression.

namespace detail {

struct SlotInfo {
  std::vector<std::int64_t> values;
  std::vector<std::size_t> positions;  // index position within its reference
};

inline SlotInfo slots_of(const Formula& f) {
  SlotInfo s;
  auto add = [&](const ElementRef& e) {
    for (std::size_t p = 0; p < e.indices.size(); ++p) {
      s.values.push_back(e.indices[p].offset);
      s.positions.push_back(p);
    }
  };
  for_each_leaf(f, [&](const FormulaNode& n) {
    if (const auto* e = std::get_if<ElementRef>(&n.v)) {
      add(*e);
    } else if (const auto* r = std::get_if<ElementRange>(&n.v)) {
      add(r->first);
      add(r->last);
    }
  });
  return s;
}

inline std::string shape_of(const Formula& f) {
  auto blank = [](const std::vector<IndexExpr>& idx) { return std::vector<IndexExpr>(idx.size(), IndexExpr::literal(0)); };
  return to_model_string(map_leaves(f, [&](const FormulaNode& n) -> std::optional<Formula> {
    if (const auto* e = std::get_if<ElementRef>(&n.v)) return Formula::element(e->table, blank(e->indices));
    if (const auto* r = std::get_if<ElementRange>(&n.v)) {
      return Formula::element_range(r->first.table, blank(r->first.indices), blank(r->last.indices));
    }
    return std::nullopt;
  }));
}

/// A slot is either a literal or `index[dim] + offset` of the defined element.
struct SlotRep {
  int dim = -1;
  std::int64_t value = 0;  // literal value, or offset
};

/// Rewrites the slots of `f` in leaf order using `make(slot)`.
template <typename Make>
Formula rewrite_slots(const Formula& f, Make&& make) {
  std::size_t k = 0;
  auto conv = [&](const std::vector<IndexExpr>& idx) {
    std::vector<IndexExpr> out;
    out.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out.push_back(make(k++));
    return out;
  };
  return map_leaves(f, [&](const FormulaNode& n) -> std::optional<Formula> {
    if (const auto* e = std::get_if<ElementRef>(&n.v)) return Formula::element(e->table, conv(e->indices));
    if (const auto* r = std::get_if<ElementRange>(&n.v)) {
      auto first = conv(r->first.indices);
      auto last = conv(r->last.indices);
      return Formula::element_range(r->first.table, std::move(first), std::move(last));
    }
    return std::nullopt;
  });
}

inline std::string var_name(std::size_t d) {
  static const char* names[] = {"i", "j", "k", "l", "m", "n"};
  return d < 6 ? names[d] : "v" + std::to_string(d + 1);
}

class TableCompressor {
 public:
  TableCompressor(const std::string& name, const ExpandedTable& t) : name_(name), t_(t), n_(t.decl.rank()) {
    shapes_.resize(t.cells.size());
    slots_.resize(t.cells.size());
    for (std::size_t off = 0; off < t.cells.size(); ++off) {
      if (!t.cells[off]) continue;
      shapes_[off] = shape_of(*t.cells[off]);
      slots_[off] = slots_of(*t.cells[off]);
    }
    covered_.assign(t.cells.size(), false);
  }

  void run(Object& out) {
    for (std::size_t off = 0; off < t_.cells.size(); ++off) {
      if (!t_.cells[off] || covered_[off]) continue;
      const auto seed = t_.index_of(off);
      const auto reps = choose_reps(off, seed);
      std::vector<std::int64_t> hi = grow(seed, reps);
      for_box(seed, hi, [&](const std::vector<std::int64_t>& idx) { covered_[t_.offset(idx)] = true; });
      emit(out, *t_.cells[off], seed, hi, reps);
    }
  }

 private:
  bool usable(std::size_t off, const std::string& shape) const {
    return t_.cells[off] && !covered_[off] && shapes_[off] == shape;
  }

  std::vector<SlotRep> choose_reps(std::size_t off, const std::vector<std::int64_t>& seed) const {
    const SlotInfo& s = slots_[off];
    // step[d][k]: change of slot k when moving +1 along d; nullopt if unknown.
    std::vector<std::optional<std::vector<std::int64_t>>> step(n_);
    for (std::size_t d = 0; d < n_; ++d) {
      if (seed[d] >= t_.decl.dims[d].hi) continue;
      auto nb = seed;
      ++nb[d];
      const std::size_t noff = t_.offset(nb);
      if (!usable(noff, shapes_[off])) continue;
      std::vector<std::int64_t> diff(s.values.size());
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = slots_[noff].values[k] - s.values[k];
      step[d] = std::move(diff);
    }
    std::vector<SlotRep> reps(s.values.size());
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const std::size_t p = s.positions[k];
      auto rel = [&](std::size_t d) { return SlotRep{static_cast<int>(d), s.values[k] - seed[d]}; };
      auto moves = [&](std::size_t d) { return step[d] && (*step[d])[k] == 1; };
      if (p < n_ && moves(p)) {
        reps[k] = rel(p);
        continue;
      }
      bool done = false;
      for (std::size_t d = 0; d < n_ && !done; ++d) {
        if (moves(d)) {
          reps[k] = rel(d);
          done = true;
        }
      }
      if (done) continue;
      if (p < n_ && !step[p]) {
        reps[k] = rel(p);
      } else {
        reps[k] = SlotRep{-1, s.values[k]};
      }
    }
    return reps;
  }

  Formula instantiate(const Formula& tmpl, const std::vector<SlotRep>& reps, const std::vector<std::int64_t>& idx) const {
    return rewrite_slots(tmpl, [&](std::size_t k) {
      const SlotRep& r = reps[k];
      return IndexExpr::literal(r.dim < 0 ? r.value : idx[static_cast<std::size_t>(r.dim)] + r.value);
    });
  }

  bool matches(const std::vector<std::int64_t>& idx, const Formula& tmpl, const std::string& shape,
               const std::vector<SlotRep>& reps) const {
    const std::size_t off = t_.offset(idx);
    if (!usable(off, shape)) return false;
    return instantiate(tmpl, reps, idx) == *t_.cells[off];
  }

  template <typename Fn>
  void for_box(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi, Fn&& fn) const {
    std::vector<std::int64_t> idx = lo;
    for (;;) {
      fn(idx);
      bool done = true;
      for (std::size_t d = n_; d-- > 0;) {
        if (idx[d] < hi[d]) {
          ++idx[d];
          done = false;
          break;
        }
        idx[d] = lo[d];
      }
      if (done) return;
    }
  }

  std::vector<std::int64_t> grow_in_order(const std::vector<std::int64_t>& seed, const std::vector<SlotRep>& reps,
                                          const std::vector<std::size_t>& order) const {
    const std::size_t off = t_.offset(seed);
    const Formula& tmpl = *t_.cells[off];
    const std::string& shape = shapes_[off];
    std::vector<std::int64_t> hi = seed;
    for (std::size_t d : order) {
      while (hi[d] < t_.decl.dims[d].hi) {
        auto lo = seed;
        auto top = hi;
        lo[d] = top[d] = hi[d] + 1;
        bool ok = true;
        for_box(lo, top, [&](const std::vector<std::int64_t>& idx) {
          if (ok && !matches(idx, tmpl, shape, reps)) ok = false;
        });
        if (!ok) break;
        ++hi[d];
      }
    }
    return hi;
  }

  std::vector<std::int64_t> grow(const std::vector<std::int64_t>& seed, const std::vector<SlotRep>& reps) const {
    std::vector<std::size_t> order(n_);
    for (std::size_t d = 0; d < n_; ++d) order[d] = d;
    auto best = grow_in_order(seed, reps, order);
    if (n_ == 2) {
      auto alt = grow_in_order(seed, reps, {1, 0});
      auto area = [&](const std::vector<std::int64_t>& h) { return (h[0] - seed[0] + 1) * (h[1] - seed[1] + 1); };
      if (area(alt) > area(best)) best = alt;
    }
    return best;
  }

  // Splits a box dimension into emitted index forms: one quantifier, or a
  // list of literals when the interval touches neither bound.
  struct DimForm {
    std::optional<Quantifier> q;
    std::vector<std::int64_t> literals;
  };

  DimForm dim_form(std::size_t d, std::int64_t a, std::int64_t b) const {
    const Bounds& dim = t_.decl.dims[d];
    DimForm f;
    const std::string v = var_name(d);
    if (a == b) {
      f.literals = {a};
    } else if (a == dim.lo && b == dim.hi) {
      f.q = Quantifier{v, Quantifier::Kind::All, 0, nullptr};
    } else if (b == dim.hi) {
      f.q = Quantifier{v, Quantifier::Kind::Gt, a - 1, nullptr};
    } else if (a == dim.lo) {
      f.q = Quantifier{v, Quantifier::Kind::Lt, b + 1, nullptr};
    } else {
      for (std::int64_t x = a; x <= b; ++x) f.literals.push_back(x);
    }
    return f;
  }

  void emit(Object& out, const Formula& tmpl, const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
            const std::vector<SlotRep>& reps) const {
    std::vector<DimForm> forms;
    for (std::size_t d = 0; d < n_; ++d) forms.push_back(dim_form(d, lo[d], hi[d]));
    std::vector<std::size_t> pick(n_, 0);
    for (;;) {
      Equation eq;
      eq.table = name_;
      std::vector<std::optional<std::int64_t>> fixed(n_);
      for (std::size_t d = 0; d < n_; ++d) {
        if (forms[d].q) {
          eq.lhs.push_back(LhsIndex{forms[d].q, 0, nullptr});
        } else {
          fixed[d] = forms[d].literals[pick[d]];
          eq.lhs.push_back(LhsIndex::fixed(*fixed[d]));
        }
      }
      eq.rhs = rewrite_slots(tmpl, [&](std::size_t k) {
        const SlotRep& r = reps[k];
        if (r.dim < 0) return IndexExpr::literal(r.value);
        const auto d = static_cast<std::size_t>(r.dim);
        if (fixed[d]) return IndexExpr::literal(*fixed[d] + r.value);
        return IndexExpr::variable(var_name(d), r.value);
      });
      out.add_equation(std::move(eq));
      bool done = true;
      for (std::size_t d = n_; d-- > 0;) {
        if (!forms[d].q && pick[d] + 1 < forms[d].literals.size()) {
          ++pick[d];
          done = false;
          break;
        }
        pick[d] = 0;
      }
      if (done) return;
    }
  }

  const std::string& name_;
  const ExpandedTable& t_;
  std::size_t n_;
  std::vector<std::string> shapes_;
  std::vector<SlotInfo> slots_;
  std::vector<bool> covered_;
};

}  // namespace detail

/// Merges elements whose formulas agree up to index-relative references
/// into quantified equations over maximal boxes. expand(compress(e)) == e.
inline Object compress(const ExpandedObject& e) {
  Object out;
  for (const auto& [name, t] : e.tables) out.declare(t.decl);
  for (const auto& [name, t] : e.tables) detail::TableCompressor(name, t).run(out);
  return out;
}

/// Text-valued equations whose table no equation refers to are
/// annotations; everything else is calculation. union(C, A) == o.
inline std::pair<Object, Object> split_annotations(const Object& o) {
  std::set<std::string> referenced;
  for (const auto& eq : o.equations()) {
    detail::collect_refs(eq.rhs, [&](const ElementRef& r) { referenced.insert(r.table); });
  }
  Object calc;
  Object notes;
  std::set<std::string> note_tables;
  for (const auto& eq : o.equations()) {
    if (is_text_valued(eq.rhs) && !referenced.contains(eq.table)) {
      note_tables.insert(eq.table);
    }
  }
  for (const auto& eq : o.equations()) {
    const bool note = is_text_valued(eq.rhs) && !referenced.contains(eq.table);
    (note ? notes : calc).add_equation(eq);
  }
  for (const auto& [name, t] : o.tables()) {
    const bool calc_uses = std::any_of(calc.equations().begin(), calc.equations().end(),
                                       [&](const Equation& eq) { return eq.table == name; });
    if (!note_tables.contains(name) || calc_uses) calc.declare(t);
    if (note_tables.contains(name)) notes.declare(t);
  }
  return {calc, notes};
}

// ---------------------------------------------------------------------------
// The whole discovery pipeline.

/// One line per range: `range Sheet!A1:B9 [name=X]`. `#` starts a comment.
struct RangeOverride {
  Run range;
  std::string name;
};

inline std::vector<RangeOverride> parse_overrides(std::string_view text) {
  std::vector<RangeOverride> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string kw, range, opt;
    if (!(words >> kw)) continue;
    if (kw != "range") throw Error(ErrorKind::Parse, "expected 'range Sheet!A1:B9 [name=X]'", lineno, 1);
    // The range token may hold a quoted sheet name with spaces.
    words >> std::ws;
    if (words.peek() == '\'') {
      range += static_cast<char>(words.get());
      for (int ch; (ch = words.get()) != EOF;) {
        range += static_cast<char>(ch);
        if (ch != '\'') continue;
        if (words.peek() != '\'') break;
        range += static_cast<char>(words.get());
      }
    }
    std::string rest;
    words >> rest;
    range += rest;
    if (range.empty()) throw Error(ErrorKind::Parse, "expected 'range Sheet!A1:B9 [name=X]'", lineno, 1);
    RangeOverride o;
    const auto colon = range.rfind(':');
    try {
      const CellRef a = a1_parse(range.substr(0, colon));
      const CellRef b = colon == std::string::npos ? a : a1_parse(range.substr(colon + 1));
      if (a.sheet.empty()) throw Error(ErrorKind::Parse, "range needs a sheet name", lineno, 1);
      o.range = Run{a.sheet, std::min(a.col, b.col), std::min(a.row, b.row), std::max(a.col, b.col), std::max(a.row, b.row), {}};
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, e.detail(), lineno, 1);
    }
    while (words >> opt) {
      if (opt.rfind("name=", 0) != 0) throw Error(ErrorKind::Parse, "unknown option '" + opt + "'", lineno, 1);
      o.name = opt.substr(5);
      if (sanitize_identifier(o.name) != o.name || o.name.empty()) {
        throw Error(ErrorKind::Parse, "'" + o.name + "' is not a usable table name", lineno, 1);
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

struct Discovery {
  Object calculations;  // C
  Object annotations;   // A
  std::map<std::string, std::string> layouts;  // sheet -> layout CSV text (L)
  MappingSpec mapping;  // every region, C and A alike
  std::vector<Run> runs;
  std::vector<std::string> warnings;
  std::size_t cells = 0;
};

namespace detail {

struct Region {
  Run rect;
  bool annotation = false;
  std::string override_name;
};

inline Orientation region_orientation(const Run& r) {
  if (r.width() > 1 && r.height() > 1) return Orientation::YX;
  if (r.height() > 1) return Orientation::Y;
  if (r.width() > 1) return Orientation::X;
  return Orientation::Scalar;
}

inline TableDecl region_decl(const std::string& name, const Run& r) {
  switch (region_orientation(r)) {
    case Orientation::YX: return {name, {Bounds{1, r.height()}, Bounds{1, r.width()}}};
    case Orientation::Y: return {name, {Bounds{1, r.height()}}};
    case Orientation::X: return {name, {Bounds{1, r.width()}}};
    default: return {name, {}};
  }
}

inline std::set<CellAddr> referenced_cells(const Workbook& w) {
  std::set<CellAddr> out;
  for (const auto& s : w.sheets()) {
    for (const auto& [pos, cell] : s.cells) {
      const auto* f = std::get_if<Formula>(&cell);
      if (!f) continue;
      for_each_leaf(*f, [&](const FormulaNode& n) {
        if (const auto* r = std::get_if<CellRef>(&n.v)) {
          out.insert(CellAddr{r->sheet.empty() ? s.name : r->sheet, r->col, r->row});
        } else if (const auto* r = std::get_if<CellRangeRef>(&n.v)) {
          const std::string sheet = r->first.sheet.empty() ? s.name : r->first.sheet;
          const Sheet* target = w.find_sheet(sheet);
          if (!target) return;
          const std::int64_t r1 = std::min(r->first.row, r->last.row), r2 = std::max(r->first.row, r->last.row);
          const std::int64_t c1 = std::min(r->first.col, r->last.col), c2 = std::max(r->first.col, r->last.col);
          for (auto it = target->cells.lower_bound({r1, c1}); it != target->cells.end() && it->first.first <= r2; ++it) {
            if (it->first.second >= c1 && it->first.second <= c2) out.insert(CellAddr{sheet, it->first.second, it->first.first});
          }
        }
      });
    }
  }
  return out;
}

// Splits `r` at every start strictly inside it.
inline std::vector<Run> split_at(const Run& r, const std::set<std::int64_t>& xs, const std::set<std::int64_t>& ys) {
  std::vector<std::int64_t> cx{r.c1}, cy{r.r1};
  for (auto it = xs.upper_bound(r.c1); it != xs.end() && *it <= r.c2; ++it) cx.push_back(*it);
  for (auto it = ys.upper_bound(r.r1); it != ys.end() && *it <= r.r2; ++it) cy.push_back(*it);
  cx.push_back(r.c2 + 1);
  cy.push_back(r.r2 + 1);
  std::vector<Run> out;
  for (std::size_t j = 0; j + 1 < cy.size(); ++j) {
    for (std::size_t i = 0; i + 1 < cx.size(); ++i) out.push_back(Run{r.sheet, cx[i], cy[j], cx[i + 1] - 1, cy[j + 1] - 1, r.key});
  }
  return out;
}

inline std::string layout_csv(const std::vector<std::pair<Run, std::string>>& items) {
  std::set<std::int64_t> xs{1}, ys{1};
  for (const auto& [r, text] : items) {
    xs.insert(r.c1);
    ys.insert(r.r1);
  }
  const std::vector<std::int64_t> cx(xs.begin(), xs.end()), cy(ys.begin(), ys.end());
  std::vector<std::int64_t> widths(cx.size()), heights(cy.size());
  for (std::size_t i = 0; i + 1 < cx.size(); ++i) widths[i] = cx[i + 1] - cx[i];
  for (std::size_t j = 0; j + 1 < cy.size(); ++j) heights[j] = cy[j + 1] - cy[j];
  std::vector<std::vector<std::string>> grid(cy.size() + 1, std::vector<std::string>(cx.size() + 1));
  for (const auto& [r, text] : items) {
    const auto i = static_cast<std::size_t>(std::lower_bound(cx.begin(), cx.end(), r.c1) - cx.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(cy.begin(), cy.end(), r.r1) - cy.begin());
    grid[j][i] = text;
    if (i + 1 == cx.size()) widths[i] = std::max(widths[i], r.width());
    if (j + 1 == cy.size()) heights[j] = std::max(heights[j], r.height());
  }
  // A closing row and column of skips pin every column width and row height.
  for (std::size_t i = 0; i < cx.size(); ++i) grid[cy.size()][i] = "skip(" + std::to_string(widths[i]) + ",0)";
  for (std::size_t j = 0; j < cy.size(); ++j) grid[j][cx.size()] = "skip(0," + std::to_string(heights[j]) + ")";
  grid[cy.size()][cx.size()] = "skip(0,0)";
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

/// Regions of same-class cells (calculations: formulas and numbers; text)
/// become tables named from captions; text regions nobody refers to are
/// annotations and appear in the layout as literal text.
inline Discovery discover(const Workbook& w, const std::vector<RangeOverride>& overrides = {}) {
  Discovery out;
  out.runs = detect_runs(w);
  out.cells = w.cell_count();
  const std::set<CellAddr> referenced = detail::referenced_cells(w);

  std::vector<detail::Region> regions;
  for (const auto& s : w.sheets()) {
    std::set<GridKey> claimed;
    for (const auto& o : overrides) {
      if (o.range.sheet != s.name) continue;
      detail::Region r{o.range, false, o.name};
      for (std::int64_t y = o.range.r1; y <= o.range.r2; ++y) {
        for (std::int64_t x = o.range.c1; x <= o.range.c2; ++x) {
          if (!claimed.insert({y, x}).second) throw Error(ErrorKind::Semantic, "override ranges overlap on sheet " + s.name);
        }
      }
      regions.push_back(std::move(r));
    }
    std::map<GridKey, std::string> keys;
    for (const auto& [pos, cell] : s.cells) {
      if (claimed.contains(pos)) continue;
      keys[pos] = std::holds_alternative<std::string>(cell) ? "text" : "calc";
    }
    for (auto& run : partition_rectangles(s.name, keys)) {
      bool note = run.key == "text";
      for (std::int64_t y = run.r1; y <= run.r2 && note; ++y) {
        for (std::int64_t x = run.c1; x <= run.c2 && note; ++x) note = !referenced.contains(CellAddr{s.name, x, y});
      }
      regions.push_back(detail::Region{run, note, {}});
    }
  }

  // Table starts and annotation cells cut the sheet into grid columns and
  // rows; tables that straddle a cut are split so the layout can be exact.
  std::map<std::string, std::pair<std::set<std::int64_t>, std::set<std::int64_t>>> cuts;
  for (const auto& r : regions) {
    auto& [xs, ys] = cuts[r.rect.sheet];
    if (r.annotation) {
      for (std::int64_t x = r.rect.c1; x <= r.rect.c2; ++x) xs.insert(x);
      for (std::int64_t y = r.rect.r1; y <= r.rect.r2; ++y) ys.insert(y);
    } else {
      xs.insert(r.rect.c1);
      ys.insert(r.rect.r1);
    }
  }
  std::vector<detail::Region> calc, notes;
  for (const auto& r : regions) {
    if (r.annotation) {
      notes.push_back(r);
      continue;
    }
    const auto& [xs, ys] = cuts[r.rect.sheet];
    for (const auto& piece : detail::split_at(r.rect, xs, ys)) calc.push_back(detail::Region{piece, false, r.override_name});
  }

  std::vector<Run> rects;
  std::map<std::size_t, std::string> named;
  for (const auto& r : calc) {
    if (!r.override_name.empty()) named[rects.size()] = r.override_name;
    rects.push_back(r.rect);
  }
  // Annotation tables are named after their own first cell.
  for (const auto& r : notes) {
    const Cell* first = w.find(CellAddr{r.rect.sheet, r.rect.c1, r.rect.r1});
    const std::string base = sanitize_identifier(first ? cell_text(*first) : std::string());
    named[rects.size()] = base.empty() ? "Text" : "Text_" + base;
    rects.push_back(r.rect);
  }
  const std::vector<std::string> names = guess_names(w, rects, named);

  Object decls;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    decls.declare(detail::region_decl(names[i], rects[i]));
    out.mapping.entries.push_back(
        MappingEntry{names[i], CellAddr{rects[i].sheet, rects[i].c1, rects[i].r1}, detail::region_orientation(rects[i])});
  }

  LiftResult lifted = lift(w, out.mapping, decls);
  out.warnings = std::move(lifted.warnings);
  const Object compressed = compress(lifted.object);
  auto [c, a] = split_annotations(compressed);

  // Only literal text in annotation regions becomes layout text; anything
  // else split off as an annotation goes back with the calculations.
  std::set<std::string> note_names(names.begin() + static_cast<std::ptrdiff_t>(calc.size()), names.end());
  Object calc_out;
  Object notes_out;
  for (const auto& [name, t] : compressed.tables()) (note_names.contains(name) ? notes_out : calc_out).declare(t);
  for (const auto& eq : compressed.equations()) {
    const bool note = note_names.contains(eq.table) && std::holds_alternative<TextLit>(eq.rhs.node().v);
    (note ? notes_out : calc_out).add_equation(eq);
    if (note_names.contains(eq.table) && !note) {
      out.warnings.push_back("annotation '" + eq.table + "' holds a computed value; kept with the calculations");
      calc_out.declare(*compressed.find_table(eq.table));
    }
  }
  out.calculations = std::move(calc_out);
  out.annotations = std::move(notes_out);

  std::map<std::string, std::vector<std::pair<Run, std::string>>> items;
  for (std::size_t i = 0; i < calc.size(); ++i) {
    std::string label = names[i];
    const Orientation o = detail::region_orientation(rects[i]);
    if (o != Orientation::Scalar) label += " " + std::string(to_string(o));
    items[rects[i].sheet].emplace_back(rects[i], label);
  }
  for (const auto& r : notes) {
    const Sheet* s = w.find_sheet(r.rect.sheet);
    for (std::int64_t y = r.rect.r1; y <= r.rect.r2; ++y) {
      for (std::int64_t x = r.rect.c1; x <= r.rect.c2; ++x) {
        const Cell* cell = s->find(x, y);
        items[r.rect.sheet].emplace_back(Run{r.rect.sheet, x, y, x, y, {}}, "'" + std::get<std::string>(*cell) + "'");
      }
    }
  }
  for (const auto& s : w.sheets()) {
    auto it = items.find(s.name);
    if (it != items.end()) out.layouts[s.name] = detail::layout_csv(it->second);
  }
  return out;
}

}  // namespace shf
