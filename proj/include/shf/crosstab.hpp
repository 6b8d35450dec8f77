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

// Cross-tabulation of two columns of flat data: a value-combiner column of
// concatenated keys and a table of COUNTIF cells over it.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shf/address.hpp"
#include "shf/algebra.hpp"
#include "shf/emitter.hpp"
#include "shf/error.hpp"
#include "shf/formula.hpp"
#include "shf/model.hpp"
#include "shf/workbook.hpp"

namespace shf {

struct CrosstabSpec {
  std::string source_sheet = "Sheet1";
  std::int64_t header_row = 1;
  Bounds data_rows{2, 1};
  std::vector<std::int64_t> dim_columns;
  std::string combiner_sheet = "Combine";
  CellAddr result_anchor{"Crosstab", 1, 1};
};

/// key=value lines; `#` starts a comment. Keys: source_sheet, header_row,
/// rows (lo:hi), dims (column letters, comma separated), result_anchor,
/// combiner_sheet.
inline CrosstabSpec parse_crosstab_spec(std::string_view text) {
  CrosstabSpec spec;
  bool have_rows = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void { throw Error(ErrorKind::Crosstab, msg, lineno, 1); };
  auto integer = [&](const std::string& s) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) fail("'" + s + "' is not an integer");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      if (key == "source_sheet") {
        spec.source_sheet = value;
      } else if (key == "header_row") {
        spec.header_row = integer(value);
      } else if (key == "rows") {
        const auto colon = value.find(':');
        if (colon == std::string::npos) fail("rows must be lo:hi");
        spec.data_rows = Bounds{integer(strip(value.substr(0, colon))), integer(strip(value.substr(colon + 1)))};
        have_rows = true;
      } else if (key == "dims") {
        spec.dim_columns.clear();
        std::istringstream parts(value);
        std::string part;
        while (std::getline(parts, part, ',')) {
          const std::int64_t col = column_number(strip(part));
          if (col == 0) fail("'" + strip(part) + "' is not a column letter");
          spec.dim_columns.push_back(col);
        }
      } else if (key == "result_anchor") {
        const CellRef r = a1_parse(value);
        if (r.sheet.empty()) fail("result_anchor needs a sheet name");
        spec.result_anchor = r.addr();
      } else if (key == "combiner_sheet") {
        spec.combiner_sheet = value;
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.line() == lineno) throw;
      throw Error(ErrorKind::Crosstab, e.detail(), lineno, 1);
    }
  }
  if (!have_rows) throw Error(ErrorKind::Crosstab, "spec has no rows=lo:hi line");
  if (spec.dim_columns.size() != 2) {
    throw Error(ErrorKind::Crosstab, "exactly two dims are supported, got " + std::to_string(spec.dim_columns.size()));
  }
  if (spec.dim_columns[0] == spec.dim_columns[1]) throw Error(ErrorKind::Crosstab, "dims must name two different columns");
  if (spec.data_rows.lo < 1) throw Error(ErrorKind::Crosstab, "rows must start at 1 or later");
  if (spec.combiner_sheet == spec.result_anchor.sheet || spec.combiner_sheet == spec.source_sheet ||
      spec.result_anchor.sheet == spec.source_sheet) {
    throw Error(ErrorKind::Crosstab, "source, combiner and result sheets must differ");
  }
  return spec;
}

/// Distinct literal values of one column, ascending. Blank cells are skipped.
inline std::vector<std::string> unique_sorted_values(const Workbook& w, const std::string& sheet, std::int64_t column,
                                                     const Bounds& rows) {
  std::set<std::string> seen;
  for (std::int64_t r = rows.lo; r <= rows.hi; ++r) {
    const Cell* c = w.find(CellAddr{sheet, column, r});
    if (!c) continue;
    if (std::holds_alternative<Formula>(*c)) {
      throw Error(ErrorKind::Crosstab, a1_format(CellAddr{sheet, column, r}) + " holds a formula; only literal data can be tabulated");
    }
    seen.insert(cell_text(*c));
  }
  return {seen.begin(), seen.end()};
}

namespace detail {

inline void check_source(const Workbook& w, const CrosstabSpec& spec) {
  const Sheet* s = w.find_sheet(spec.source_sheet);
  if (!s) throw Error(ErrorKind::Crosstab, "no sheet named '" + spec.source_sheet + "'");
  for (std::int64_t col : spec.dim_columns) {
    bool any = false;
    for (std::int64_t r = spec.data_rows.lo; r <= spec.data_rows.hi && !any; ++r) any = s->find(col, r) != nullptr;
    if (!any) {
      throw Error(ErrorKind::Crosstab, "column " + column_letters(col) + " of " + spec.source_sheet + " has no data in rows " +
                                           std::to_string(spec.data_rows.lo) + ":" + std::to_string(spec.data_rows.hi));
    }
  }
}

inline Formula absolute_cell(const std::string& sheet, std::int64_t col, std::int64_t row) {
  return Formula::cell(CellRef{sheet, col, row, true, true});
}

}  // namespace detail

/// One concatenation per data row, `src!$A$r & "_" & src!$C$r & "_"`, in a
/// single column from row 1 of the combiner sheet.
inline Model build_combiner(const Workbook& w, const CrosstabSpec& spec) {
  detail::check_source(w, spec);
  Model m;
  const std::int64_t n = spec.data_rows.hi - spec.data_rows.lo + 1;
  if (n <= 0) return m;
  m.object.declare(TableDecl{"Combine", {Bounds{1, n}}});
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t row = spec.data_rows.lo + k - 1;
    std::optional<Formula> f;
    for (std::int64_t col : spec.dim_columns) {
      Formula cell = detail::absolute_cell(spec.source_sheet, col, row);
      f = Formula::binary(BinaryOp::Concat, f ? Formula::binary(BinaryOp::Concat, *f, cell) : cell, Formula::text("_"));
    }
    m.object.add_equation(Equation{"Combine", {LhsIndex::fixed(k)}, *f});
  }
  m.mapping.entries.push_back(MappingEntry{"Combine", CellAddr{spec.combiner_sheet, 1, 1}, Orientation::Y});
  return m;
}

/// Counts[i, j] = COUNTIF(range, "<values1[j]>_<values2[i]>_"), with the
/// second dimension's values down and the first's across; header tables
/// Across and Down carry the values as text.
inline Object build_crosstab(const std::vector<std::string>& values1, const std::vector<std::string>& values2,
                             const CellRef& range_first, const CellRef& range_last) {
  if (values1.empty() || values2.empty()) throw Error(ErrorKind::Crosstab, "nothing to tabulate: a dimension has no values");
  const auto n1 = static_cast<std::int64_t>(values1.size());
  const auto n2 = static_cast<std::int64_t>(values2.size());
  Object o;
  o.declare(TableDecl{"Counts", {Bounds{1, n2}, Bounds{1, n1}}});
  o.declare(TableDecl{"Across", {Bounds{1, n1}}});
  o.declare(TableDecl{"Down", {Bounds{1, n2}}});
  for (std::int64_t j = 1; j <= n1; ++j) {
    o.add_equation(Equation{"Across", {LhsIndex::fixed(j)}, Formula::text(values1[static_cast<std::size_t>(j - 1)])});
  }
  for (std::int64_t i = 1; i <= n2; ++i) {
    o.add_equation(Equation{"Down", {LhsIndex::fixed(i)}, Formula::text(values2[static_cast<std::size_t>(i - 1)])});
    for (std::int64_t j = 1; j <= n1; ++j) {
      const std::string key = values1[static_cast<std::size_t>(j - 1)] + "_" + values2[static_cast<std::size_t>(i - 1)] + "_";
      o.add_equation(Equation{"Counts", {LhsIndex::fixed(i), LhsIndex::fixed(j)},
                              Formula::call("COUNTIF", {Formula::cell_range(range_first, range_last), Formula::text(key)})});
    }
  }
  return o;
}

struct CrosstabResult {
  Workbook workbook;
  std::vector<std::string> values1;
  std::vector<std::string> values2;
  std::vector<std::string> headers;  // header-row captions of the two columns
  std::string result_sheet;
};

/// S plus the combiner sheet and the result sheet. Refuses when either
/// target sheet already holds cells.
inline CrosstabResult insert_crosstab(const Workbook& s, const CrosstabSpec& spec) {
  for (const auto& name : {spec.combiner_sheet, spec.result_anchor.sheet}) {
    if (const Sheet* t = s.find_sheet(name); t && !t->cells.empty()) {
      throw Error(ErrorKind::Crosstab, "sheet '" + name + "' already has cells; choose another target sheet");
    }
  }
  CrosstabResult out;
  out.result_sheet = spec.result_anchor.sheet;
  const Model combiner = build_combiner(s, spec);
  out.values1 = unique_sorted_values(s, spec.source_sheet, spec.dim_columns[0], spec.data_rows);
  out.values2 = unique_sorted_values(s, spec.source_sheet, spec.dim_columns[1], spec.data_rows);
  for (std::int64_t col : spec.dim_columns) {
    const Cell* h = s.find(CellAddr{spec.source_sheet, col, spec.header_row});
    out.headers.push_back(h ? cell_text(*h) : column_letters(col));
  }
  const std::int64_t n = spec.data_rows.hi - spec.data_rows.lo + 1;
  const CellRef first{spec.combiner_sheet, 1, 1, true, true};
  const CellRef last{spec.combiner_sheet, 1, n, true, true};
  const Object table = build_crosstab(out.values1, out.values2, first, last);
  const CellAddr& a = spec.result_anchor;
  Model t{table, {}};
  t.mapping.entries.push_back(MappingEntry{"Across", addr_add(a, Vec2{1, 0}), Orientation::X});
  t.mapping.entries.push_back(MappingEntry{"Down", addr_add(a, Vec2{0, 1}), Orientation::Y});
  t.mapping.entries.push_back(MappingEntry{"Counts", addr_add(a, Vec2{1, 1}), Orientation::YX});
  Workbook added = merge_workbooks(map_table(combiner.object, combiner.mapping), map_table(t.object, t.mapping));
  out.workbook = merge_workbooks(s, added);
  return out;
}

}  // namespace shf
