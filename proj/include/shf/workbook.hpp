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

// Concrete spreadsheets: ordered sheets of addressed cells.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "shf/address.hpp"
#include "shf/error.hpp"
#include "shf/formula.hpp"

namespace shf {

/// Literal number, literal text, or a sheet-space formula. Cell references
/// with an empty sheet point into the sheet holding the formula.
using Cell = std::variant<double, std::string, Formula>;

/// (row, col) so that map order is the row-major order the writer needs.
using GridKey = std::pair<std::int64_t, std::int64_t>;

struct Sheet {
  std::string name;
  std::map<GridKey, Cell> cells;

  const Cell* find(std::int64_t col, std::int64_t row) const {
    auto it = cells.find({row, col});
    return it == cells.end() ? nullptr : &it->second;
  }

  friend bool operator==(const Sheet&, const Sheet&) = default;
};

class Workbook {
 public:
  const std::vector<Sheet>& sheets() const { return sheets_; }

  const Sheet* find_sheet(std::string_view name) const {
    for (const auto& s : sheets_) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  Sheet& sheet(std::string_view name) {
    for (auto& s : sheets_) {
      if (s.name == name) return s;
    }
    sheets_.push_back(Sheet{std::string(name), {}});
    return sheets_.back();
  }

  /// Stores a cell; an occupied address is an overlap error.
  void put(const CellAddr& a, Cell c) {
    if (a.sheet.empty()) throw Error(ErrorKind::Semantic, "cell address without a sheet");
    Sheet& s = sheet(a.sheet);
    auto [it, inserted] = s.cells.try_emplace({a.row, a.col}, std::move(c));
    if (!inserted) throw Error(ErrorKind::Overlap, "two values mapped to " + a1_format(a));
  }

  /// Stores or replaces.
  void set(const CellAddr& a, Cell c) { sheet(a.sheet).cells[{a.row, a.col}] = std::move(c); }

  const Cell* find(const CellAddr& a) const {
    const Sheet* s = find_sheet(a.sheet);
    return s ? s->find(a.col, a.row) : nullptr;
  }

  std::size_t cell_count() const {
    std::size_t n = 0;
    for (const auto& s : sheets_) n += s.cells.size();
    return n;
  }

  friend bool operator==(const Workbook&, const Workbook&) = default;

 private:
  std::vector<Sheet> sheets_;
};

/// Adds every cell of `b` to `a`; any shared address is an overlap error.
inline Workbook merge_workbooks(const Workbook& a, const Workbook& b) {
  Workbook out = a;
  for (const auto& s : b.sheets()) {
    Sheet& dst = out.sheet(s.name);
    for (const auto& [key, cell] : s.cells) {
      if (!dst.cells.try_emplace(key, cell).second) {
        throw Error(ErrorKind::Overlap, "two values mapped to " + a1_format(CellAddr{s.name, key.second, key.first}));
      }
    }
  }
  return out;
}

}  // namespace shf
