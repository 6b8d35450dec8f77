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

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "shf/evaluator.hpp"
#include "shf/pipeline.hpp"
#include "stock.hpp"

namespace shf {
namespace {

using testing::compile_stock;
using testing::fixture_path;

// Stock values computed directly from the recurrence.
struct StockOracle {
  std::int64_t a, b, n;
  double builds(std::int64_t y, std::int64_t t) const { return static_cast<double>(10 * t + y - a); }
  double demolitions(std::int64_t y, std::int64_t t) const { return builds(y, t) / 4 + static_cast<double>(t); }
  double stock(std::int64_t y, std::int64_t t) const {
    double s = 0;
    for (std::int64_t k = a; k <= y; ++k) s += builds(k, t) - demolitions(k, t);
    return s;
  }
};

Value element(const Compiled& c, const Evaluation& e, const std::string& table, std::vector<std::int64_t> idx) {
  return e.at(place_element(*c.model.mapping.find(table), *c.model.object.find_table(table), idx));
}

TEST(Pipeline, CompiledStockMatchesOracle) {
  const Compiled c = compile_stock("stock/original", 2000, 2010, 5);
  const StockOracle o{2000, 2010, 5};
  const Evaluation e = evaluate(c.workbook);
  double grand = 0;
  for (std::int64_t y = 2000; y <= 2010; ++y) {
    double row = 0;
    for (std::int64_t t = 1; t <= 5; ++t) {
      EXPECT_EQ(element(c, e, "Builds", {y, t}), Value{o.builds(y, t)});
      EXPECT_DOUBLE_EQ(std::get<double>(element(c, e, "NewStock", {y, t})), o.stock(y, t));
      row += o.stock(y, t);
    }
    EXPECT_DOUBLE_EQ(std::get<double>(element(c, e, "TotalNewStock", {y})), row);
    grand += row;
  }
  double cols = 0;
  for (std::int64_t t = 1; t <= 5; ++t) cols += std::get<double>(element(c, e, "TypeTotals", {t}));
  EXPECT_DOUBLE_EQ(cols, grand);
  EXPECT_EQ(to_string(e.at({"Inputs", 1, 1})), "STOCK MODEL");
}

TEST(Pipeline, EmptyDimensionNamesTheFile) {
  try {
    compile_stock("stock/original", 2010, 2000, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDimension);
    EXPECT_NE(std::string(e.what()).find("stock.shf:"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, ArgumentErrors) {
  CompileRequest req;
  req.model = load(fixture_path("stock/stock.shf"));
  req.layouts = testing::layout_files("stock/original");
  req.args = {2000, 2010};
  EXPECT_THROW(compile_model(req), Error);
  req.args = {2000, 2010, 5};
  req.entry = "nope";
  EXPECT_THROW(compile_model(req), Error);
  req.entry = "model";
  EXPECT_NO_THROW(compile_model(req));
}

TEST(Pipeline, LayoutMustPlaceEveryTable) {
  CompileRequest req;
  req.model = load(fixture_path("stock/stock.shf"));
  req.layouts = testing::layout_files("stock/original");
  req.layouts.pop_back();  // drop Results
  req.args = {2000, 2010, 5};
  try {
    compile_model(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CrossCheck);
  }
  req.layouts = testing::layout_files("stock/original");
  req.layouts.push_back({"Extra.layout.csv", "Builds yx\n"});
  try {
    compile_model(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CrossCheck);
  }
}

TEST(Pipeline, TextOnTableIsOverlap) {
  CompileRequest req;
  req.model = {"m.shf", "{# a[1:2] | a[all i] = i #} mapping a to S!A1 by x\n"};
  req.layouts = {{"S.layout.csv", ",,'note'\n"}};
  EXPECT_NO_THROW(compile_model(req));
  req.layouts = {{"S.layout.csv", "'title'\n"}};
  try {
    compile_model(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Overlap);
  }
}

TEST(Pipeline, VerifyDetectsCorruption) {
  const Compiled a = compile_stock("stock/original", 2000, 2010, 5);
  const Compiled b = compile_stock("stock/moved", 2000, 2010, 5);
  const VerifyReport same = compare_elements(a.model.object, a.workbook, a.model.mapping, b.workbook, b.model.mapping);
  EXPECT_TRUE(same.identical());
  EXPECT_EQ(same.compared, 181u);
  Workbook bad = b.workbook;
  const CellAddr at = place_element(*b.model.mapping.find("Builds"), *b.model.object.find_table("Builds"), {2003, 2});
  bad.set(at, 999.0);
  const VerifyReport diff = compare_elements(a.model.object, a.workbook, a.model.mapping, bad, b.model.mapping);
  EXPECT_FALSE(diff.identical());
  // Builds[2003, 2] itself, plus everything downstream of it.
  EXPECT_EQ(diff.mismatches.front().rfind("Builds[2003, 2]", 0), 0u) << diff.mismatches.front();
  EXPECT_EQ(diff.mismatches.size(), 1u + 1u + 8u + 8u + 1u);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("shf_pipeline_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

TEST(Pipeline, DiscoverRoundTrip) {
  const Compiled c = compile_stock("stock/original", 2000, 2010, 5);
  const std::string xml = emit_xml(c.workbook);
  const DiscoverOutput d = discover_workbook({"stock.xml", xml}, std::nullopt);
  ASSERT_TRUE(d.files.contains("model.shf"));
  ASSERT_TRUE(d.files.contains("Inputs.layout.csv"));
  ASSERT_TRUE(d.files.contains("Results.layout.csv"));
  EXPECT_TRUE(d.result.warnings.empty());

  CompileRequest req;
  req.model = {"model.shf", d.files.at("model.shf")};
  for (const auto& [name, text] : d.files) {
    if (name.ends_with(".layout.csv")) req.layouts.push_back({name, text});
  }
  const Compiled back = compile_model(req);
  EXPECT_EQ(emit_xml(back.workbook), xml) << "recompiling discovered output reproduces the workbook";

  const DiscoverOutput again = discover_workbook({"again.xml", emit_xml(back.workbook)}, std::nullopt);
  EXPECT_EQ(again.files, d.files);
}

TEST(Pipeline, DiscoverWithOverrides) {
  const Compiled c = compile_stock("stock/original", 2000, 2010, 5);
  const DiscoverOutput d = discover_workbook({"stock.xml", emit_xml(c.workbook)},
                                             SourceFile{"names.txt", "range Results!A4:E14 name=Net\n"});
  EXPECT_TRUE(d.result.calculations.find_table("Net")) << d.files.at("model.shf");
  EXPECT_THROW(discover_workbook({"stock.xml", emit_xml(c.workbook)}, SourceFile{"names.txt", "range nowhere\n"}), Error);
}

TEST(Pipeline, AtomicWrite) {
  const auto dir = scratch("atomic");
  const std::string path = (dir / "out.xml").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u) << "no temporaries left behind";
  try {
    write_file_atomic((dir / "missing" / "x.xml").string(), "z");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
  EXPECT_THROW(read_file((dir / "missing.shf").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ErrorsCarryFileAndPosition) {
  CompileRequest req;
  req.model = {"broken.shf", "let f(n) be {# u[1:n] |\n  u[all i] = i +\n#}\n"};
  req.args = {3};
  try {
    compile_model(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.file(), "broken.shf");
    EXPECT_EQ(std::string(e.what()).rfind("broken.shf:3:1: parse error", 0), 0u) << e.what();
  }
}

TEST(Pipeline, WithUnionsFeatureModels) {
  CompileRequest req;
  req.model = {"core.shf", "let core(n) be {# u[1:n] | u[all i] = i #}\n"};
  req.with = {{"feature.shf", "let core(n) be {# w[1:n] | w[all i] = u[i] * 10 #}\n"}};
  req.layouts = {{"S.layout.csv", "u y,w y\n"}};
  req.args = {3};
  const Compiled c = compile_model(req);
  const Evaluation e = evaluate(c.workbook);
  EXPECT_EQ(e.at({"S", 2, 3}), Value{30.0});
}

}  // namespace
}  // namespace shf
