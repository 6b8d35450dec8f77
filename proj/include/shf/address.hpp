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

// Cell addresses, A1 notation and vector arithmetic on addresses.

#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "shf/error.hpp"

namespace shf {

struct Vec2 {
  std::int64_t dx = 0;
  std::int64_t dy = 0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.dx + b.dx, a.dy + b.dy}; }
  friend Vec2 operator-(Vec2 a) { return {-a.dx, -a.dy}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// A concrete cell. An empty sheet means "the sheet of the formula that
/// mentions it" when used inside a workbook formula.
struct CellAddr {
  std::string sheet;
  std::int64_t col = 1;
  std::int64_t row = 1;

  friend bool operator==(const CellAddr&, const CellAddr&) = default;
  friend auto operator<=>(const CellAddr&, const CellAddr&) = default;
};

/// A cell reference as written: address plus `$` markers.
struct CellRef {
  std::string sheet;
  std::int64_t col = 1;
  std::int64_t row = 1;
  bool col_abs = false;
  bool row_abs = false;

  CellAddr addr() const { return {sheet, col, row}; }
  friend bool operator==(const CellRef&, const CellRef&) = default;
};

inline constexpr std::int64_t kMaxRow = std::int64_t{1} << 40;
inline constexpr std::int64_t kMaxCol = std::int64_t{1} << 30;

/// Translates `a` by `v`; fails when the result leaves the grid.
inline CellAddr addr_add(const CellAddr& a, Vec2 v) {
  const std::int64_t col = a.col + v.dx;
  const std::int64_t row = a.row + v.dy;
  if (col < 1 || row < 1) {
    throw Error(ErrorKind::AddressUnderflow,
                "address " + std::to_string(col) + "," + std::to_string(row) + " is off the sheet");
  }
  return {a.sheet, col, row};
}

/// Bijective base-26 column letters: 1 -> A, 26 -> Z, 27 -> AA.
inline std::string column_letters(std::int64_t col) {
  std::string out;
  while (col > 0) {
    const std::int64_t rem = (col - 1) % 26;
    out.insert(out.begin(), static_cast<char>('A' + rem));
    col = (col - 1) / 26;
  }
  return out;
}

/// Inverse of column_letters; case-insensitive. Returns 0 on bad input.
inline std::int64_t column_number(std::string_view letters) {
  if (letters.empty() || letters.size() > 6) return 0;
  std::int64_t n = 0;
  for (char c : letters) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u < 'A' || u > 'Z') return 0;
    n = n * 26 + (u - 'A' + 1);
  }
  return n;
}

inline bool is_plain_sheet_name(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

/// Sheet prefix including the `!`, quoted when the name needs it.
inline std::string sheet_prefix(std::string_view sheet) {
  if (sheet.empty()) return {};
  if (is_plain_sheet_name(sheet)) return std::string(sheet) + "!";
  std::string out = "'";
  for (char c : sheet) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'!";
}

inline std::string a1_format(const CellRef& r) {
  std::string out = sheet_prefix(r.sheet);
  if (r.col_abs) out += '$';
  out += column_letters(r.col);
  if (r.row_abs) out += '$';
  out += std::to_string(r.row);
  return out;
}

inline std::string a1_format(const CellAddr& a) {
  return a1_format(CellRef{a.sheet, a.col, a.row, false, false});
}

namespace detail {

// Parses the part after any sheet prefix: $?COL$?ROW. `offset` is the
// position of `s` within the whole reference, for diagnostics.
inline CellRef parse_a1_cell(std::string_view s, std::size_t offset) {
  CellRef r;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) -> CellRef {
    throw Error(ErrorKind::Parse, what + " in cell reference", 1, static_cast<int>(offset + i + 1));
  };
  if (i < s.size() && s[i] == '$') {
    r.col_abs = true;
    ++i;
  }
  const std::size_t letters_begin = i;
  while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
  if (i == letters_begin) return fail("expected column letters");
  if (i - letters_begin > 3) {
    i = letters_begin;
    return fail("column has more than three letters");
  }
  r.col = column_number(s.substr(letters_begin, i - letters_begin));
  if (i < s.size() && s[i] == '$') {
    r.row_abs = true;
    ++i;
  }
  const std::size_t digits_begin = i;
  std::int64_t row = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    row = row * 10 + (s[i] - '0');
    if (row > kMaxRow) return fail("row number too large");
    ++i;
  }
  if (i == digits_begin) return fail("expected row number");
  if (row < 1) {
    i = digits_begin;
    return fail("row number must be at least 1");
  }
  if (i != s.size()) return fail("unexpected character");
  r.row = row;
  return r;
}

}  // namespace detail

/// Parses `[Sheet!]$?COL$?ROW` (sheet optionally single-quoted).
inline CellRef a1_parse(std::string_view text) {
  std::string sheet;
  std::size_t cell_begin = 0;
  if (!text.empty() && text[0] == '\'') {
    std::size_t i = 1;
    for (;;) {
      if (i >= text.size()) throw Error(ErrorKind::Parse, "unterminated sheet name", 1, static_cast<int>(i + 1));
      if (text[i] == '\'') {
        if (i + 1 < text.size() && text[i + 1] == '\'') {
          sheet += '\'';
          i += 2;
          continue;
        }
        break;
      }
      sheet += text[i++];
    }
    if (i + 1 >= text.size() || text[i + 1] != '!') {
      throw Error(ErrorKind::Parse, "expected '!' after quoted sheet name", 1, static_cast<int>(i + 2));
    }
    cell_begin = i + 2;
  } else if (auto bang = text.find('!'); bang != std::string_view::npos) {
    sheet = std::string(text.substr(0, bang));
    if (!is_plain_sheet_name(sheet)) throw Error(ErrorKind::Parse, "invalid sheet name '" + sheet + "'", 1, 1);
    cell_begin = bang + 1;
  }
  CellRef r = detail::parse_a1_cell(text.substr(cell_begin), cell_begin);
  r.sheet = std::move(sheet);
  return r;
}

}  // namespace shf
