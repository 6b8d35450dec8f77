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

// shf: compile, verify, discover and crosstab spreadsheet models.
//
// Exit status: 0 success, 1 diagnostics, 2 usage.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shf/grammar.hpp"
#include "shf/pipeline.hpp"

namespace {

constexpr int kDiagnostics = 1;
constexpr int kUsage = 2;

struct UsageError {
  std::string message;
};

std::vector<std::int64_t> size_args(const std::vector<std::string>& raw) {
  std::vector<std::int64_t> out;
  for (const auto& s : raw) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw UsageError{"size argument '" + s + "' is not an integer"};
    out.push_back(v);
  }
  return out;
}

std::vector<shf::SourceFile> load_all(const std::vector<std::string>& paths) {
  std::vector<shf::SourceFile> out;
  for (const auto& p : paths) out.push_back(shf::load(p));
  return out;
}

struct ModelOptions {
  std::string model;
  std::vector<std::string> with;
  std::optional<std::string> entry;
  std::vector<std::string> sizes;

  void add_to(CLI::App* cmd) {
    cmd->add_option("model", model, "Model file")->required();
    cmd->add_option("sizes", sizes, "Size arguments for the model function (after --)");
    cmd->add_option("--with", with, "Further model file to union in (repeatable)");
    cmd->add_option("--entry", entry, "Function to apply to the size arguments");
  }

  shf::CompileRequest request(const std::vector<std::string>& layouts) const {
    shf::CompileRequest req;
    req.model = shf::load(model);
    req.with = load_all(with);
    req.layouts = load_all(layouts);
    req.entry = entry;
    req.args = size_args(sizes);
    return req;
  }
};

bool is_model_file(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext != ".xml" && ext != ".csv";
}

void print_grid(const shf::Workbook& w, bool values, const std::string& only = {}) {
  std::optional<shf::Evaluation> ev;
  if (values) ev = shf::evaluate(w);
  for (const auto& s : w.sheets()) {
    if (!only.empty() && s.name != only) continue;
    std::cout << "== " << s.name << " ==\n";
    if (!values) {
      const std::string g = shf::dump_grid(w, s.name);
      if (!g.empty()) std::cout << g << "\n";
      continue;
    }
    std::int64_t row = 0;
    std::int64_t col = 1;
    for (const auto& [pos, cell] : s.cells) {
      for (; row < pos.first; ++row) {
        if (row) std::cout << "\n";
        col = 1;
      }
      for (; col < pos.second; ++col) std::cout << "\t";
      std::cout << shf::to_string(ev->at(shf::CellAddr{s.name, pos.second, pos.first}));
    }
    if (row) std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile, verify, discover and cross-tabulate spreadsheet models"};
  app.require_subcommand(0, 1);
  bool grammar = false;
  app.add_flag("--grammar", grammar, "Print the model-file grammar and exit");

  // compile
  ModelOptions compile_opts;
  std::vector<std::string> compile_layouts;
  std::string compile_out;
  auto* compile = app.add_subcommand("compile", "Compile a model and layouts to a SpreadsheetML workbook");
  compile_opts.add_to(compile);
  compile->add_option("--layout", compile_layouts, "Layout spreadsheet, .csv or .xml (repeatable)");
  compile->add_option("-o,--output", compile_out, "Output workbook (.xml)")->required();

  // verify
  ModelOptions verify_opts;
  std::vector<std::string> layouts_a;
  std::vector<std::string> layouts_b;
  std::string b_workbook;
  auto* verify = app.add_subcommand("verify", "Check that two layouts of a model compute the same values");
  verify_opts.add_to(verify);
  verify->add_option("--layout", layouts_a, "Layout A (repeatable)");
  verify->add_option("--layout-b", layouts_b, "Layout B (repeatable; defaults to layout A)");
  verify->add_option("--b-workbook", b_workbook, "Compare this workbook as B instead of compiling B");

  // discover
  std::string discover_in;
  std::string discover_overrides;
  std::string discover_dir;
  auto* discover = app.add_subcommand("discover", "Recover a model and layouts from a workbook");
  discover->add_option("workbook", discover_in, "Input workbook (.xml)")->required();
  discover->add_option("--overrides", discover_overrides, "Range and name overrides");
  discover->add_option("-o,--output-dir", discover_dir, "Directory for model.shf, annotations.shf and layouts")->required();

  // crosstab
  std::string crosstab_in;
  std::string crosstab_spec;
  std::string crosstab_out;
  auto* crosstab = app.add_subcommand("crosstab", "Add a cross-tabulation of two data columns");
  crosstab->add_option("data", crosstab_in, "Data workbook (.xml) or sheet (.csv)")->required();
  crosstab->add_option("spec", crosstab_spec, "Crosstab spec file")->required();
  crosstab->add_option("-o,--output", crosstab_out, "Output workbook (.xml)")->required();

  // show
  ModelOptions show_opts;
  bool show_values = false;
  auto* show = app.add_subcommand("show", "Print a model object or a workbook grid");
  show_opts.add_to(show);
  show->add_flag("--values", show_values, "Print evaluated values instead of formulas");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (grammar) {
      std::cout << shf::kGrammar;
      return 0;
    }
    if (compile->parsed()) {
      const shf::Compiled c = shf::compile_model(compile_opts.request(compile_layouts));
      shf::write_file_atomic(compile_out, shf::emit_xml(c.workbook));
      std::cout << "wrote " << compile_out << ": " << c.model.object.tables().size() << " tables, "
                << c.workbook.cell_count() << " cells\n";
      return 0;
    }
    if (verify->parsed()) {
      const shf::Compiled a = shf::compile_model(verify_opts.request(layouts_a));
      shf::Workbook wb;
      shf::MappingSpec mb;
      if (!b_workbook.empty()) {
        const shf::SourceFile f = shf::load(b_workbook);
        wb = shf::in_file(f.path, [&] { return shf::read_xml(f.text); });
        mb = layouts_b.empty() ? a.model.mapping : shf::compile_model(verify_opts.request(layouts_b)).model.mapping;
      } else {
        const shf::Compiled b = shf::compile_model(verify_opts.request(layouts_b.empty() ? layouts_a : layouts_b));
        wb = b.workbook;
        mb = b.model.mapping;
      }
      const shf::VerifyReport rep = shf::compare_elements(a.model.object, a.workbook, a.model.mapping, wb, mb);
      if (rep.identical()) {
        std::cout << "IDENTICAL (" << rep.compared << " elements)\n";
        return 0;
      }
      std::cout << "MISMATCH\n";
      for (const auto& m : rep.mismatches) std::cout << "  " << m << "\n";
      return kDiagnostics;
    }
    if (discover->parsed()) {
      std::optional<shf::SourceFile> overrides;
      if (!discover_overrides.empty()) overrides = shf::load(discover_overrides);
      const shf::DiscoverOutput d = shf::discover_workbook(shf::load(discover_in), overrides);
      std::filesystem::create_directories(discover_dir);
      for (const auto& [name, content] : d.files) {
        shf::write_file_atomic((std::filesystem::path(discover_dir) / name).string(), content);
      }
      for (const auto& w : d.result.warnings) std::cerr << "warning: " << w << "\n";
      const auto& r = d.result;
      std::cout << r.cells << " cells, " << r.runs.size() << " formula runs, " << r.mapping.entries.size() << " regions\n"
                << r.calculations.equations().size() << " calculation equations, " << r.annotations.equations().size()
                << " annotation equations\n";
      for (const auto& [name, content] : d.files) std::cout << "wrote " << (std::filesystem::path(discover_dir) / name).string() << "\n";
      return 0;
    }
    if (crosstab->parsed()) {
      const shf::CrosstabResult r = shf::crosstab_workbook(shf::load(crosstab_in), shf::load(crosstab_spec));
      shf::write_file_atomic(crosstab_out, shf::emit_xml(r.workbook));
      std::cout << r.headers[0] << " x " << r.headers[1] << ": " << r.values1.size() << " x " << r.values2.size()
                << " values\n";
      print_grid(r.workbook, true, r.result_sheet);
      return 0;
    }
    if (show->parsed()) {
      if (is_model_file(show_opts.model)) {
        shf::CompileRequest req = show_opts.request({});
        const shf::Program p = shf::in_file(req.model.path, [&] { return shf::parse_program(req.model.text); });
        const shf::detail::Resolved r = shf::in_file(req.model.path, [&] {
          return shf::detail::resolve_program(p, req.entry, req.args);
        });
        std::cout << shf::show_object(r.model.object) << "\n";
        for (const auto& e : r.model.mapping.entries) {
          std::cout << e.table << " to " << shf::a1_format(e.origin);
          if (e.orientation != shf::Orientation::Scalar) std::cout << " by " << shf::to_string(e.orientation);
          std::cout << "\n";
        }
        return 0;
      }
      const shf::SourceFile f = shf::load(show_opts.model);
      const shf::Workbook w = shf::in_file(f.path, [&] {
        return f.path.ends_with(".csv") ? shf::read_csv(f.text, shf::layout_sheet_name(f.path)) : shf::read_xml(f.text);
      });
      print_grid(w, show_values);
      return 0;
    }
    std::cerr << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "shf: " << e.message << "\n";
    return kUsage;
  } catch (const shf::Error& e) {
    std::cerr << "shf: " << e.what() << "\n";
    return kDiagnostics;
  } catch (const std::exception& e) {
    std::cerr << "shf: " << e.what() << "\n";
    return kDiagnostics;
  }
}
