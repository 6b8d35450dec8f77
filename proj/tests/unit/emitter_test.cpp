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

#include <string>

#include "generators.hpp"
#include "shf/emitter.hpp"
#include "xml_scan.hpp"

namespace shf {
namespace {

using testing::Gen;

TEST(Emitter, XmlRoundTripRandomWorkbooks) {
  Gen g(41);
  for (int i = 0; i < 500; ++i) {
    const Workbook w = testing::random_workbook(g);
    const std::string xml = emit_xml(w);
    ASSERT_EQ(testing::sorted_order_violation(xml), "");
    Workbook back;
    ASSERT_NO_THROW(back = read_xml(xml)) << xml;
    ASSERT_EQ(back, w) << xml;
    ASSERT_EQ(emit_xml(back), xml);
  }
}

TEST(Emitter, WritesSortedRowsAndCells) {
  Workbook w;
  w.put({"S", 3, 9}, 1.0);
  w.put({"S", 1, 9}, 2.0);
  w.put({"S", 2, 1}, std::string("x"));
  w.put({"T", 1, 1}, Formula::cell(CellRef{"S", 3, 9, false, false}));
  const std::string xml = emit_xml(w);
  EXPECT_EQ(testing::sorted_order_violation(xml), "");
  EXPECT_LT(xml.find("<Row ss:Index=\"1\">"), xml.find("<Row ss:Index=\"9\">"));
  EXPECT_LT(xml.find("<Cell ss:Index=\"1\"><Data ss:Type=\"Number\">2"), xml.find("<Cell ss:Index=\"3\"><Data ss:Type=\"Number\">1"));
  EXPECT_NE(xml.find("ss:Formula=\"=S!R[8]C[2]\""), std::string::npos);
  EXPECT_EQ(testing::sorted_order_violation("<Row ss:Index=\"2\"><Cell ss:Index=\"2\"/><Cell ss:Index=\"1\"/>"),
            "cell 1 after cell 2 in row 2");
}

TEST(Emitter, Escaping) {
  Workbook w;
  w.put({"Q&A <1>", 1, 1}, std::string("a < b & \"c\"\nd"));
  w.put({"Q&A <1>", 2, 1}, Formula::binary(BinaryOp::Concat, Formula::text("<\"&\">"), Formula::text("")));
  const std::string xml = emit_xml(w);
  EXPECT_NE(xml.find("ss:Name=\"Q&amp;A &lt;1&gt;\""), std::string::npos);
  EXPECT_NE(xml.find("a &lt; b &amp; \"c\"\nd"), std::string::npos);
  EXPECT_NE(xml.find("&quot;&lt;&quot;&quot;&amp;&quot;&quot;&gt;&quot;"), std::string::npos);
  EXPECT_EQ(read_xml(xml), w);
}

TEST(Emitter, ReadsUnindexedAndTypedCells) {
  const std::string xml =
      "<?xml version=\"1.0\"?>\n"
      "<Workbook xmlns=\"urn:schemas-microsoft-com:office:spreadsheet\" "
      "xmlns:ss=\"urn:schemas-microsoft-com:office:spreadsheet\">"
      "<Worksheet ss:Name=\"S\"><Table>"
      "<Row><Cell><Data ss:Type=\"Number\">1.5</Data></Cell><Cell ss:Index=\"4\"><Data ss:Type=\"String\">x</Data></Cell>"
      "<Cell ss:Formula=\"=RC[-4]*2\"/></Row>"
      "<Row ss:Index=\"3\"><Cell><Data ss:Type=\"String\">y</Data></Cell></Row>"
      "</Table></Worksheet></Workbook>";
  const Workbook w = read_xml(xml);
  EXPECT_EQ(std::get<double>(*w.find({"S", 1, 1})), 1.5);
  EXPECT_EQ(std::get<std::string>(*w.find({"S", 4, 1})), "x");
  EXPECT_EQ(to_a1_string(std::get<Formula>(*w.find({"S", 5, 1}))), "A1 * 2");
  EXPECT_EQ(std::get<std::string>(*w.find({"S", 1, 3})), "y");
  EXPECT_EQ(w.cell_count(), 4u);
}

TEST(Emitter, MalformedXml) {
  auto fails = [](const std::string& xml) {
    try {
      read_xml(xml);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Xml && e.line() >= 1;
    }
    return false;
  };
  EXPECT_TRUE(fails(""));
  EXPECT_TRUE(fails("<Workbook"));
  EXPECT_TRUE(fails("<NotAWorkbook/>"));
  EXPECT_TRUE(fails("<Workbook xmlns=\"urn:schemas-microsoft-com:office:spreadsheet\"><Worksheet ss:Name=\"S\"></Workbook>"));
  const std::string ns =
      "<Workbook xmlns=\"urn:schemas-microsoft-com:office:spreadsheet\" "
      "xmlns:ss=\"urn:schemas-microsoft-com:office:spreadsheet\"><Worksheet ss:Name=\"S\"><Table>";
  EXPECT_TRUE(fails(ns + "<Row ss:Index=\"0\"/></Table></Worksheet></Workbook>"));
  EXPECT_TRUE(fails(ns + "<Row><Cell ss:Formula=\"=RC[-1\"/></Row></Table></Worksheet></Workbook>"));
  EXPECT_TRUE(fails(ns + "<Row><Cell><Data ss:Type=\"Number\">abc</Data></Cell></Row></Table></Worksheet></Workbook>"));
}

TEST(Emitter, MutatedXmlOnlyRaisesErrors) {
  Gen g(42);
  for (int i = 0; i < 300; ++i) {
    std::string xml = emit_xml(testing::random_workbook(g));
    for (int k = 0; k < 3; ++k) {
      const auto pos = static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(xml.size()) - 1));
      xml[pos] = "<>\"=/ax1&"[g.range(0, 8)];
    }
    try {
      read_xml(xml);
    } catch (const Error&) {
    }
  }
}

TEST(Emitter, CsvRoundTrip) {
  Gen g(43);
  for (int i = 0; i < 300; ++i) {
    const Workbook w = testing::random_workbook(g);
    for (const auto& s : w.sheets()) {
      Workbook one;
      one.sheet(s.name).cells = s.cells;
      // Formulas keep their sheet-qualified references; plain ones are host-sheet.
      const std::string csv = write_csv(one, s.name);
      Workbook back;
      ASSERT_NO_THROW(back = read_csv(csv, s.name)) << csv;
      ASSERT_EQ(back, one) << csv;
    }
  }
}

TEST(Emitter, CsvRecords) {
  const auto r = read_csv_records("a,\"b,c\",\"d\"\"e\"\r\n,\n\"multi\nline\"");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(r[1], (std::vector<std::string>{"", ""}));
  EXPECT_EQ(r[2], (std::vector<std::string>{"multi\nline"}));
  try {
    read_csv_records("a,\"b");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Csv);
    EXPECT_EQ(e.column(), 3);
  }
  EXPECT_THROW(read_csv_records("a,b\"c"), Error);
  EXPECT_THROW(read_csv("=SUM(", "S"), Error);
}

TEST(Emitter, DumpGrid) {
  Workbook w;
  w.put({"S", 2, 1}, 3.0);
  w.put({"S", 1, 3}, Formula::binary(BinaryOp::Add, Formula::cell(CellRef{"", 2, 1, false, false}), Formula::number(1)));
  EXPECT_EQ(dump_grid(w, "S"), "\t3\n\n=B1 + 1");
  EXPECT_EQ(dump_grid(w, "missing"), "");
}

}  // namespace
}  // namespace shf
