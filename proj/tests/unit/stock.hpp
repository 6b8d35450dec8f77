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

// Loads the stock model fixture under one of its layout directories.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shf/pipeline.hpp"

namespace shf::testing {

inline std::string fixture_path(const std::string& rel) { return std::string(SHF_FIXTURES) + "/" + rel; }

inline std::vector<SourceFile> layout_files(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& e : std::filesystem::directory_iterator(fixture_path(dir))) {
    if (e.path().extension() == ".csv") paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<SourceFile> out;
  for (const auto& p : paths) out.push_back(load(p));
  return out;
}

inline const std::vector<std::string>& stock_layouts() {
  static const std::vector<std::string> dirs = {"stock/original", "stock/flipped", "stock/moved", "stock/merged"};
  return dirs;
}

inline Compiled compile_stock(const std::string& layout_dir, std::int64_t start, std::int64_t end, std::int64_t types) {
  CompileRequest req;
  req.model = load(fixture_path("stock/stock.shf"));
  req.layouts = layout_files(layout_dir);
  req.args = {start, end, types};
  return compile_model(req);
}

}  // namespace shf::testing
