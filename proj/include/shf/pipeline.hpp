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

// The command pipelines behind the CLI: compile, verify, discover and
// crosstab, plus file helpers. Everything here works on in-memory text so
// tests can drive it without touching the file system.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shf/algebra.hpp"
#include "shf/crosstab.hpp"
#include "shf/discovery.hpp"
#include "shf/emitter.hpp"
#include "shf/error.hpp"
#include "shf/evaluator.hpp"
#include "shf/layout.hpp"
#include "shf/notation.hpp"
#include "shf/workbook.hpp"

namespace shf {

struct SourceFile {
  std::string path;
  std::string text;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline SourceFile load(const std::string& path) { return {path, read_file(path)}; }

/// Writes through a sibling temporary and renames it into place, so a
/// failure never leaves a partial file at `path`.
inline void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::random_device rd;
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot replace '" + path + "'");
  }
}

template <typename Fn>
auto in_file(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.in_file(path);
  }
}

// ---------------------------------------------------------------------------
// compile

struct CompileRequest {
  SourceFile model;
  std::vector<SourceFile> with;     // further models, unioned in
  std::vector<SourceFile> layouts;  // layout spreadsheets (.csv or .xml)
  std::optional<std::string> entry;
  std::vector<std::int64_t> args;
};

struct Compiled {
  Model model;  // object plus the complete mapping
  std::vector<std::pair<CellAddr, std::string>> texts;
  Workbook workbook;
};

namespace detail {

struct Resolved {
  Model model;
  IntEnv env;
  std::vector<GridTemplate> grids;
};

/// With size arguments (or an explicit entry), applies a function: the
/// named one, else the last defined. Otherwise evaluates the program's
/// trailing object expression.
inline Resolved resolve_program(const Program& p, const std::optional<std::string>& entry,
                                const std::vector<std::int64_t>& args) {
  Resolved r;
  r.grids = p.layouts;
  if (entry || (!args.empty() && !p.definitions.empty())) {
    const FunctionDef* f = entry ? p.find(*entry) : &p.definitions.back();
    if (!f) throw Error(ErrorKind::Semantic, "no function named '" + *entry + "'");
    if (f->params.size() != args.size()) {
      throw Error(ErrorKind::Semantic, "'" + f->name + "' takes " + std::to_string(f->params.size()) +
                                           " size argument(s) but " + std::to_string(args.size()) + " were given");
    }
    for (std::size_t i = 0; i < args.size(); ++i) r.env[f->params[i]] = args[i];
    r.model = apply_function(p, *f, args);
    return r;
  }
  if (!args.empty()) throw Error(ErrorKind::Semantic, "size arguments given but the model defines no function");
  if (!p.top) throw Error(ErrorKind::Semantic, "nothing to compile: no object expression and no size arguments");
  r.model = evaluate_expr(p, *p.top, {});
  return r;
}

inline std::vector<std::vector<std::string>> sheet_texts(const Sheet& s) {
  std::vector<std::vector<std::string>> out;
  for (const auto& [pos, cell] : s.cells) {
    const auto r = static_cast<std::size_t>(pos.first - 1);
    const auto c = static_cast<std::size_t>(pos.second - 1);
    if (out.size() <= r) out.resize(r + 1);
    if (out[r].size() <= c) out[r].resize(c + 1);
    out[r][c] = std::holds_alternative<Formula>(cell) ? "=" + to_a1_string(std::get<Formula>(cell)) : cell_text(cell);
  }
  return out;
}

inline bool has_suffix(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

/// One grid per layout sheet. A `.xml` file may hold several sheets; any
/// other file is read as CSV and names its sheet after the file.
inline std::vector<GridFormat> read_layouts(const std::vector<SourceFile>& files, const Object& tables) {
  std::vector<GridFormat> out;
  for (const auto& f : files) {
    in_file(f.path, [&] {
      if (detail::has_suffix(f.path, ".xml")) {
        const Workbook w = read_xml(f.text);
        for (const auto& s : w.sheets()) {
          if (!s.cells.empty()) out.push_back(parse_layout_sheet(detail::sheet_texts(s), tables, s.name));
        }
      } else {
        out.push_back(parse_layout_sheet(read_csv_records(f.text), tables, layout_sheet_name(f.path)));
      }
    });
  }
  return out;
}

/// Grid formats written in the model file are used only when no layout
/// files are given.
inline Compiled compile_model(const CompileRequest& req) {
  Compiled out;
  std::vector<GridTemplate> grids;
  IntEnv env;
  in_file(req.model.path, [&] {
    const Program p = parse_program(req.model.text);
    detail::Resolved r = detail::resolve_program(p, req.entry, req.args);
    out.model = std::move(r.model);
    grids = std::move(r.grids);
    env = std::move(r.env);
  });
  for (const auto& extra : req.with) {
    in_file(extra.path, [&] {
      const Program p = parse_program(extra.text);
      const bool takes_args = !p.definitions.empty() && (!req.entry || p.find(*req.entry) != nullptr);
      detail::Resolved r = detail::resolve_program(p, takes_args ? req.entry : std::nullopt,
                                                   takes_args ? req.args : std::vector<std::int64_t>{});
      out.model = union_models(out.model, r.model);
    });
  }

  std::vector<GridFormat> formats;
  if (!req.layouts.empty()) {
    formats = read_layouts(req.layouts, out.model.object);
  } else {
    in_file(req.model.path, [&] {
      for (const auto& g : grids) formats.push_back(evaluate_grid(g, env));
    });
  }
  const std::string where = req.layouts.empty() ? req.model.path : "layout";
  in_file(where, [&] { cross_check(formats, out.model.object, out.model.mapping); });

  for (const auto& g : formats) {
    LayoutResult lr = placements_to_mapping(layout_grid(g, out.model.object));
    for (auto& e : lr.mapping.entries) out.model.mapping.entries.push_back(std::move(e));
    for (auto& t : lr.texts) out.texts.push_back(std::move(t));
  }
  out.workbook = map_table(out.model.object, out.model.mapping);
  for (const auto& [at, text] : out.texts) {
    if (out.workbook.find(at)) {
      throw Error(ErrorKind::Overlap, "layout text '" + text + "' lands on " + a1_format(at) + ", which a table occupies");
    }
    out.workbook.put(at, text);
  }
  for (const auto& g : formats) out.workbook.sheet(g.anchor.sheet);
  return out;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyReport {
  std::size_t compared = 0;
  std::vector<std::string> mismatches;
  bool identical() const { return mismatches.empty(); }
};

inline bool same_value(const Value& a, const Value& b) { return a == b; }

/// Compares every table element of `o` as evaluated in two workbooks, each
/// read through its own mapping.
inline VerifyReport compare_elements(const Object& o, const Workbook& wa, const MappingSpec& ma, const Workbook& wb,
                                     const MappingSpec& mb, std::size_t max_listed = 50) {
  VerifyReport rep;
  const Evaluation ea = evaluate(wa);
  const Evaluation eb = evaluate(wb);
  const ExpandedObject shape = declare_expanded(o);
  std::size_t differing = 0;
  for (const auto& [name, t] : shape.tables) {
    const MappingEntry* pa = ma.find(name);
    const MappingEntry* pb = mb.find(name);
    if (!pa || !pb) {
      rep.mismatches.push_back(name + ": not placed in " + (pa ? "B" : "A"));
      continue;
    }
    for (std::size_t off = 0; off < t.cells.size(); ++off) {
      const auto idx = t.index_of(off);
      const Value va = ea.at(place_element(*pa, t.decl, idx));
      const Value vb = eb.at(place_element(*pb, t.decl, idx));
      ++rep.compared;
      if (same_value(va, vb)) continue;
      if (++differing <= max_listed) {
        rep.mismatches.push_back(element_name(name, idx) + ": A=" + to_string(va) + " B=" + to_string(vb));
      }
    }
  }
  if (differing > max_listed) rep.mismatches.push_back("... and " + std::to_string(differing - max_listed) + " more");
  return rep;
}

// ---------------------------------------------------------------------------
// discover

struct DiscoverOutput {
  Discovery result;
  std::map<std::string, std::string> files;  // relative file name -> content
};

inline DiscoverOutput discover_workbook(const SourceFile& xml, const std::optional<SourceFile>& overrides) {
  const Workbook w = in_file(xml.path, [&] { return read_xml(xml.text); });
  std::vector<RangeOverride> ranges;
  if (overrides) ranges = in_file(overrides->path, [&] { return parse_overrides(overrides->text); });
  DiscoverOutput out;
  out.result = discover(w, ranges);
  out.files["model.shf"] = show_object(out.result.calculations) + "\n";
  out.files["annotations.shf"] = show_object(out.result.annotations) + "\n";
  for (const auto& [sheet, csv] : out.result.layouts) {
    if (sheet.find_first_of("/\\") != std::string::npos || sheet.empty() || sheet[0] == '.') {
      throw Error(ErrorKind::Io, "sheet name '" + sheet + "' cannot be used as a file name");
    }
    out.files[sheet + ".layout.csv"] = csv;
  }
  return out;
}

// ---------------------------------------------------------------------------
// crosstab

/// `.csv` input is read as the spec's source sheet.
inline CrosstabResult crosstab_workbook(const SourceFile& data, const SourceFile& spec_file) {
  const CrosstabSpec spec = in_file(spec_file.path, [&] { return parse_crosstab_spec(spec_file.text); });
  const Workbook w = in_file(data.path, [&] {
    return detail::has_suffix(data.path, ".csv") ? read_csv(data.text, spec.source_sheet) : read_xml(data.text);
  });
  return in_file(data.path, [&] { return insert_crosstab(w, spec); });
}

}  // namespace shf
