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

// Byte-level check of emitted XML ordering, independent of the reader.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace shf::testing {

inline std::int64_t index_after(std::string_view xml, std::size_t at) {
  const std::size_t q = xml.find("ss:Index=\"", at);
  if (q == std::string_view::npos) return -1;
  std::int64_t v = 0;
  for (std::size_t i = q + 10; i < xml.size() && xml[i] != '"'; ++i) v = v * 10 + (xml[i] - '0');
  return v;
}

/// Empty when every sheet's rows ascend and every row's cells ascend;
/// otherwise a description of the first violation.
inline std::string sorted_order_violation(std::string_view xml) {
  std::int64_t last_row = 0;
  std::int64_t last_col = 0;
  std::size_t i = 0;
  while ((i = xml.find('<', i)) != std::string_view::npos) {
    if (xml.compare(i, 10, "<Worksheet") == 0) {
      last_row = 0;
    } else if (xml.compare(i, 5, "<Row ") == 0) {
      const std::int64_t r = index_after(xml, i);
      if (r <= last_row) return "row " + std::to_string(r) + " after row " + std::to_string(last_row);
      last_row = r;
      last_col = 0;
    } else if (xml.compare(i, 6, "<Cell ") == 0) {
      const std::int64_t c = index_after(xml, i);
      if (c <= last_col) {
        return "cell " + std::to_string(c) + " after cell " + std::to_string(last_col) + " in row " + std::to_string(last_row);
      }
      last_col = c;
    }
    ++i;
  }
  return {};
}

}  // namespace shf::testing
