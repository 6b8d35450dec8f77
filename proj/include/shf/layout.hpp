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

// Grid formats: rows of items (tables, text, skips) aligned into columns,
// compiled to a mapping plus literal caption cells.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shf/address.hpp"
#include "shf/algebra.hpp"
#include "shf/ast.hpp"
#include "shf/error.hpp"
#include "shf/model.hpp"

namespace shf {

struct Item {
  enum class Kind { Table, Text, Skip };
  Kind kind = Kind::Skip;
  std::string name;  // table name or text
  Orientation orientation = Orientation::Scalar;
  std::int64_t w = 0;
  std::int64_t h = 0;

  static Item table(std::string name, Orientation o) { return {Kind::Table, std::move(name), o, 0, 0}; }
  static Item text(std::string s) { return {Kind::Text, std::move(s), Orientation::Scalar, 0, 0}; }
  static Item skip(std::int64_t w = 1, std::int64_t h = 0) { return {Kind::Skip, {}, Orientation::Scalar, w, h}; }

  friend bool operator==(const Item&, const Item&) = default;
};

struct GridFormat {
  std::vector<std::vector<Item>> rows;
  CellAddr anchor;
};

struct Placement {
  Item item;
  CellAddr origin;
  std::int64_t width = 0;
  std::int64_t height = 0;
};

/// Width and height of an item in cells.
inline std::pair<std::int64_t, std::int64_t> measure(const Item& it, const Object& tables) {
  switch (it.kind) {
    case Item::Kind::Text: return {1, 1};
    case Item::Kind::Skip:
      if (it.w < 0 || it.h < 0) throw Error(ErrorKind::Layout, "skip size must not be negative");
      return {it.w, it.h};
    case Item::Kind::Table: break;
  }
  const TableDecl* t = tables.find_table(it.name);
  if (!t) throw Error(ErrorKind::CrossCheck, "layout places '" + it.name + "', which the model does not declare");
  check_entry(MappingEntry{it.name, CellAddr{"_", 1, 1}, it.orientation}, *t);
  switch (t->rank()) {
    case 0: return {1, 1};
    case 1: {
      const std::int64_t n = t->dims[0].extent();
      return it.orientation == Orientation::Y ? std::pair{std::int64_t{1}, n} : std::pair{n, std::int64_t{1}};
    }
    default:
      if (it.orientation == Orientation::YX) return {t->dims[1].extent(), t->dims[0].extent()};
      return {t->dims[0].extent(), t->dims[1].extent()};
  }
}

/// Column c is as wide as its widest item, row r as deep as its deepest;
/// each item starts at the anchor plus the sizes of the columns and rows
/// before it.
inline std::vector<Placement> layout_grid(const GridFormat& g, const Object& tables) {
  std::size_t ncols = 0;
  for (const auto& r : g.rows) ncols = std::max(ncols, r.size());
  std::vector<std::int64_t> widths(ncols, 0);
  std::vector<std::int64_t> heights(g.rows.size(), 0);
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> sizes(g.rows.size());
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    for (std::size_t c = 0; c < g.rows[r].size(); ++c) {
      auto s = measure(g.rows[r][c], tables);
      sizes[r].push_back(s);
      widths[c] = std::max(widths[c], s.first);
      heights[r] = std::max(heights[r], s.second);
    }
  }
  std::vector<Placement> out;
  std::int64_t dy = 0;
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    std::int64_t dx = 0;
    for (std::size_t c = 0; c < g.rows[r].size(); ++c) {
      out.push_back(Placement{g.rows[r][c], addr_add(g.anchor, Vec2{dx, dy}), sizes[r][c].first, sizes[r][c].second});
      dx += widths[c];
    }
    dy += heights[r];
  }
  return out;
}

inline GridFormat evaluate_grid(const GridTemplate& t, const IntEnv& env) {
  GridFormat g;
  try {
    g.anchor = eval_addr(t.anchor, env);
    for (const auto& row : t.rows) {
      std::vector<Item> items;
      for (const auto& it : row) {
        switch (it.kind) {
          case ItemTemplate::Kind::Table: items.push_back(Item::table(it.name, it.orientation)); break;
          case ItemTemplate::Kind::Text: items.push_back(Item::text(it.name)); break;
          case ItemTemplate::Kind::Skip:
            items.push_back(Item::skip(eval_int(*it.width, env), eval_int(*it.height, env)));
            break;
        }
      }
      g.rows.push_back(std::move(items));
    }
  } catch (const Error& e) {
    if (e.line() > 0) throw;
    throw Error(e.kind(), e.detail(), t.pos.line, t.pos.column);
  }
  if (g.anchor.sheet.empty()) throw Error(ErrorKind::Layout, "layout anchor needs a sheet name", t.pos.line, t.pos.column);
  return g;
}

// ---------------------------------------------------------------------------
// Layout spreadsheets.

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

inline std::optional<Item> parse_skip(std::string_view s) {
  std::string t;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (t == "skip") return Item::skip();
  if (t.rfind("skip(", 0) != 0 || t.back() != ')') return std::nullopt;
  const std::string inner = t.substr(5, t.size() - 6);
  const auto comma = inner.find(',');
  if (comma == std::string::npos) return std::nullopt;
  auto num = [](const std::string& x) -> std::optional<std::int64_t> {
    if (x.empty() || !std::all_of(x.begin(), x.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::nullopt;
    }
    return std::stoll(x);
  };
  auto w = num(inner.substr(0, comma));
  auto h = num(inner.substr(comma + 1));
  if (!w || !h) return std::nullopt;
  return Item::skip(*w, *h);
}

}  // namespace detail

/// Classifies one layout-sheet cell. A leading apostrophe is Excel's text
/// marker and is dropped; text wrapped in quotes on both ends is a caption.
inline Item classify_layout_cell(std::string_view raw, const Object& tables, int row = 0, int col = 0) {
  std::string s = detail::trim(raw);
  if (s.empty()) return Item::skip(1, 1);
  if (s[0] == '\'') {
    s.erase(0, 1);
    if (!s.empty() && s.back() == '\'') {
      s.pop_back();
      return Item::text(s);
    }
    s = detail::trim(s);
  }
  if (auto skip = detail::parse_skip(s)) return *skip;
  if (s.rfind("skip(", 0) == 0 || s.rfind("skip (", 0) == 0) {
    throw Error(ErrorKind::Layout, "malformed '" + s + "'; expected skip(columns,rows) (a CSV cell holding a comma must be quoted)",
                row, col);
  }
  const auto w = detail::words(s);
  std::optional<Orientation> o;
  if (w.size() == 2) o = parse_orientation(w[1]);
  if (w.size() == 3 && w[1] == "by") o = parse_orientation(w[2]);
  if (o && detail::is_identifier(w[0])) {
    if (!tables.find_table(w[0])) {
      throw Error(ErrorKind::CrossCheck, "layout places '" + w[0] + "', which the model does not declare", row, col);
    }
    return Item::table(w[0], *o);
  }
  if (w.size() == 1 && detail::is_identifier(w[0])) {
    if (const TableDecl* t = tables.find_table(w[0]); t && t->rank() == 0) return Item::table(w[0], Orientation::Scalar);
  }
  return Item::text(s);
}

/// One grid row per sheet row, one item per cell, anchored at `sheet`!A1.
inline GridFormat parse_layout_sheet(const std::vector<std::vector<std::string>>& cells, const Object& tables,
                                     const std::string& sheet) {
  GridFormat g;
  g.anchor = CellAddr{sheet, 1, 1};
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (!detail::trim(cells[r][c]).empty()) {
        nrows = std::max(nrows, r + 1);
        ncols = std::max(ncols, c + 1);
      }
    }
  }
  for (std::size_t r = 0; r < nrows; ++r) {
    std::vector<Item> row;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c < cells[r].size()) {
        row.push_back(classify_layout_cell(cells[r][c], tables, static_cast<int>(r + 1), static_cast<int>(c + 1)));
      } else {
        row.push_back(Item::skip(0, 0));
      }
    }
    g.rows.push_back(std::move(row));
  }
  return g;
}

/// Each declared table placed exactly once across all formats.
inline void cross_check(const std::vector<GridFormat>& formats, const Object& o, const MappingSpec& extra = {}) {
  std::map<std::string, std::string> placed;
  auto note = [&](const std::string& name, const std::string& sheet) {
    if (!o.find_table(name)) throw Error(ErrorKind::CrossCheck, "layout places '" + name + "', which the model does not declare");
    auto [it, inserted] = placed.emplace(name, sheet);
    if (!inserted) {
      throw Error(ErrorKind::CrossCheck, "table '" + name + "' is placed twice (sheets " + it->second + " and " + sheet + ")");
    }
  };
  for (const auto& e : extra.entries) note(e.table, e.origin.sheet);
  for (const auto& g : formats) {
    for (const auto& row : g.rows) {
      for (const auto& it : row) {
        if (it.kind == Item::Kind::Table) note(it.name, g.anchor.sheet);
      }
    }
  }
  for (const auto& [name, t] : o.tables()) {
    if (!placed.contains(name)) throw Error(ErrorKind::CrossCheck, "table '" + name + "' is declared but appears in no layout");
  }
}

struct LayoutResult {
  MappingSpec mapping;
  std::vector<std::pair<CellAddr, std::string>> texts;
};

inline LayoutResult placements_to_mapping(const std::vector<Placement>& ps) {
  LayoutResult out;
  for (const auto& p : ps) {
    if (p.item.kind == Item::Kind::Table) {
      out.mapping.entries.push_back(MappingEntry{p.item.name, p.origin, p.item.orientation});
    } else if (p.item.kind == Item::Kind::Text) {
      out.texts.emplace_back(p.origin, p.item.name);
    }
  }
  return out;
}

/// `Lets.layout.csv` -> `Lets`.
inline std::string layout_sheet_name(std::string_view filename) {
  const auto slash = filename.find_last_of("/\\");
  if (slash != std::string_view::npos) filename.remove_prefix(slash + 1);
  constexpr std::string_view suffix = ".layout.csv";
  if (filename.size() > suffix.size() && filename.substr(filename.size() - suffix.size()) == suffix) {
    filename.remove_suffix(suffix.size());
  } else if (auto dot = filename.find('.'); dot != std::string_view::npos) {
    filename = filename.substr(0, dot);
  }
  return std::string(filename);
}

}  // namespace shf
