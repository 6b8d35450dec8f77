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

// Workbook I/O: SpreadsheetML 2003 XML (formulas in R1C1), CSV, and a
// tab-separated dump for diffing.
//
// The XML reader needs libexpat.

#pragma once

#include <expat.h>

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "shf/error.hpp"
#include "shf/formula.hpp"
#include "shf/parser.hpp"
#include "shf/workbook.hpp"

namespace shf {

inline constexpr std::string_view kSpreadsheetNs = "urn:schemas-microsoft-com:office:spreadsheet";

namespace detail {

inline void xml_escape(std::string& out, std::string_view s, bool attribute) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
        } else {
          out += c;
        }
        break;
      case '\r': out += "&#13;"; break;
      case '\n': out += attribute ? "&#10;" : "\n"; break;
      case '\t': out += attribute ? "&#9;" : "\t"; break;
      default: out += c;
    }
  }
}

}  // namespace detail

/// Rows ascend within each sheet, cells ascend within each row, and every
/// Row and Cell carries an explicit ss:Index.
inline std::string emit_xml(const Workbook& w) {
  std::string out;
  out += "<?xml version=\"1.0\"?>\n";
  out += "<?mso-application progid=\"Excel.Sheet\"?>\n";
  out += "<Workbook xmlns=\"";
  out += kSpreadsheetNs;
  out += "\"\n xmlns:ss=\"";
  out += kSpreadsheetNs;
  out += "\">\n";
  for (const auto& s : w.sheets()) {
    out += " <Worksheet ss:Name=\"";
    detail::xml_escape(out, s.name, true);
    out += "\">\n  <Table>\n";
    std::int64_t row = 0;
    for (const auto& [key, cell] : s.cells) {
      if (key.first != row) {
        if (row) out += "   </Row>\n";
        row = key.first;
        out += "   <Row ss:Index=\"" + std::to_string(row) + "\">\n";
      }
      out += "    <Cell ss:Index=\"" + std::to_string(key.second) + "\"";
      if (const auto* f = std::get_if<Formula>(&cell)) {
        out += " ss:Formula=\"=";
        detail::xml_escape(out, to_r1c1_string(*f, CellAddr{s.name, key.second, key.first}), true);
        out += "\"/>\n";
      } else if (const auto* d = std::get_if<double>(&cell)) {
        out += "><Data ss:Type=\"Number\">" + format_number(*d) + "</Data></Cell>\n";
      } else {
        out += "><Data ss:Type=\"String\">";
        detail::xml_escape(out, std::get<std::string>(cell), false);
        out += "</Data></Cell>\n";
      }
    }
    if (row) out += "   </Row>\n";
    out += "  </Table>\n </Worksheet>\n";
  }
  out += "</Workbook>\n";
  return out;
}

namespace detail {

class XmlReader {
 public:
  Workbook read(std::string_view bytes) {
    XML_Parser p = XML_ParserCreate("UTF-8");
    if (!p) throw Error(ErrorKind::Xml, "cannot create XML parser");
    parser_ = p;
    XML_SetUserData(p, this);
    XML_SetElementHandler(p, &XmlReader::on_start, &XmlReader::on_end);
    XML_SetCharacterDataHandler(p, &XmlReader::on_text);
    const XML_Status st = XML_Parse(p, bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
    if (st != XML_STATUS_OK && !failed_) {
      fail(XML_ErrorString(XML_GetErrorCode(p)), static_cast<int>(XML_GetCurrentLineNumber(p)),
           static_cast<int>(XML_GetCurrentColumnNumber(p)) + 1);
    }
    XML_ParserFree(p);
    if (failed_) throw Error(ErrorKind::Xml, message_, line_, column_);
    if (!saw_root_) throw Error(ErrorKind::Xml, "no Workbook element");
    return std::move(wb_);
  }

 private:
  static std::string_view local(const XML_Char* name) {
    std::string_view s(name);
    const auto colon = s.find(':');
    return colon == std::string_view::npos ? s : s.substr(colon + 1);
  }

  static const XML_Char* attr(const XML_Char** atts, std::string_view name) {
    for (std::size_t i = 0; atts[i]; i += 2) {
      std::string_view key(atts[i]);
      if (key.starts_with("xmlns")) continue;
      if (local(atts[i]) == name) return atts[i + 1];
    }
    return nullptr;
  }

  void fail(const std::string& msg, int line = 0, int col = 0) {
    if (failed_) return;
    failed_ = true;
    message_ = msg;
    line_ = line ? line : static_cast<int>(XML_GetCurrentLineNumber(parser_));
    column_ = col ? col : static_cast<int>(XML_GetCurrentColumnNumber(parser_)) + 1;
    XML_StopParser(parser_, XML_FALSE);
  }

  bool parse_index(const XML_Char** atts, std::int64_t& out) {
    const XML_Char* v = attr(atts, "Index");
    if (!v) return false;
    std::string_view s(v);
    std::int64_t n = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || n < 1) {
      fail("bad ss:Index '" + std::string(s) + "'");
      return false;
    }
    out = n;
    return true;
  }

  std::string_view parent() const { return stack_.empty() ? std::string_view{} : std::string_view(stack_.back()); }

  void start(const XML_Char* name, const XML_Char** atts) {
    if (failed_) return;
    const std::string_view n = local(name);
    const std::string_view up = parent();
    if (stack_.empty()) {
      if (n != "Workbook") return fail("root element is '" + std::string(n) + "', expected Workbook");
      saw_root_ = true;
    } else if (n == "Worksheet" && up == "Workbook") {
      const XML_Char* nm = attr(atts, "Name");
      if (!nm) return fail("Worksheet without ss:Name");
      if (wb_.find_sheet(nm)) return fail("duplicate worksheet '" + std::string(nm) + "'");
      sheet_ = &wb_.sheet(nm);
      row_ = 0;
    } else if (n == "Row" && up == "Table") {
      std::int64_t idx = row_ + 1;
      parse_index(atts, idx);
      if (idx <= row_) return fail("row " + std::to_string(idx) + " out of order");
      row_ = idx;
      col_ = 0;
    } else if (n == "Cell" && up == "Row") {
      std::int64_t idx = col_ + 1;
      parse_index(atts, idx);
      if (idx <= col_) return fail("cell " + std::to_string(idx) + " out of order");
      col_ = idx;
      if (const XML_Char* merge = attr(atts, "MergeAcross")) {
        std::string_view m(merge);
        std::int64_t k = 0;
        auto res = std::from_chars(m.data(), m.data() + m.size(), k);
        if (res.ec != std::errc() || res.ptr != m.data() + m.size() || k < 0) return fail("bad ss:MergeAcross '" + std::string(m) + "'");
        col_ += k;
      }
      cell_col_ = idx;
      const XML_Char* f = attr(atts, "Formula");
      formula_ = f ? std::string(f) : std::string();
      has_formula_ = f != nullptr;
      has_data_ = false;
      cell_line_ = static_cast<int>(XML_GetCurrentLineNumber(parser_));
      cell_column_ = static_cast<int>(XML_GetCurrentColumnNumber(parser_)) + 1;
    } else if (n == "Data" && up == "Cell") {
      const XML_Char* t = attr(atts, "Type");
      data_type_ = t ? std::string(t) : std::string("String");
      data_.clear();
      has_data_ = true;
      in_data_ = true;
    }
    stack_.emplace_back(n);
  }

  void end(const XML_Char* name) {
    // Expat may still report the end of an element whose start failed.
    if (failed_ || stack_.empty()) return;
    const std::string_view n = local(name);
    stack_.pop_back();
    if (n == "Data" && parent() == "Cell") {
      in_data_ = false;
    } else if (n == "Cell" && parent() == "Row") {
      finish_cell();
    } else if (n == "Worksheet" && parent() == "Workbook") {
      sheet_ = nullptr;
    }
  }

  void finish_cell() {
    if (!sheet_) return;
    const CellAddr host{sheet_->name, cell_col_, row_};
    Cell cell;
    if (has_formula_) {
      try {
        cell = parse_sheet_formula(formula_, Dialect::R1C1, host);
      } catch (const Error& e) {
        return fail("formula '" + formula_ + "': " + e.detail(), cell_line_, cell_column_);
      }
    } else if (!has_data_) {
      return;  // styled empty cell
    } else if (data_type_ == "Number" || data_type_ == "Boolean") {
      double v = 0;
      const std::string t = trim_copy(data_);
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        return fail("bad number '" + data_ + "'", cell_line_, cell_column_);
      }
      cell = v;
    } else {
      cell = data_;
    }
    sheet_->cells[{row_, cell_col_}] = std::move(cell);
  }

  static std::string trim_copy(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** atts) {
    static_cast<XmlReader*>(self)->start(name, atts);
  }
  static void XMLCALL on_end(void* self, const XML_Char* name) { static_cast<XmlReader*>(self)->end(name); }
  static void XMLCALL on_text(void* self, const XML_Char* s, int len) {
    auto* r = static_cast<XmlReader*>(self);
    if (r->in_data_) r->data_.append(s, static_cast<std::size_t>(len));
  }

  XML_Parser parser_ = nullptr;
  Workbook wb_;
  Sheet* sheet_ = nullptr;
  std::vector<std::string> stack_;
  std::int64_t row_ = 0;
  std::int64_t col_ = 0;
  std::int64_t cell_col_ = 0;
  std::string formula_;
  bool has_formula_ = false;
  bool has_data_ = false;
  bool in_data_ = false;
  std::string data_type_;
  std::string data_;
  int cell_line_ = 0;
  int cell_column_ = 0;
  bool saw_root_ = false;
  bool failed_ = false;
  std::string message_;
  int line_ = 0;
  int column_ = 0;
};

}  // namespace detail

/// Styles and unknown elements are skipped. Either the whole workbook is
/// returned or an error is thrown.
inline Workbook read_xml(std::string_view bytes) { return detail::XmlReader().read(bytes); }

// ---------------------------------------------------------------------------
// Text forms.

inline std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return "=" + to_a1_string(std::get<Formula>(c));
}

/// Rows 1..last, cells tab-separated, formulas shown as `=A1...`.
inline std::string dump_grid(const Workbook& w, std::string_view sheet) {
  const Sheet* s = w.find_sheet(sheet);
  if (!s || s->cells.empty()) return {};
  std::string out;
  std::int64_t row = 1;
  std::int64_t col = 1;
  for (const auto& [key, cell] : s->cells) {
    while (row < key.first) {
      out += '\n';
      ++row;
      col = 1;
    }
    while (col < key.second) {
      out += '\t';
      ++col;
    }
    out += cell_text(cell);
  }
  return out;
}

/// RFC 4180 fields, one vector per record.
inline std::vector<std::vector<std::string>> read_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> record;
  std::string field;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  bool at_field_start = true;
  bool any = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    at_field_start = true;
  };
  auto end_record = [&] {
    end_field();
    out.push_back(std::move(record));
    record.clear();
    any = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (at_field_start && c == '"') {
      const int qline = line;
      const int qcol = col;
      ++i;
      ++col;
      for (;;) {
        if (i >= text.size()) throw Error(ErrorKind::Csv, "unterminated quoted field", qline, qcol);
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            col += 2;
            continue;
          }
          ++i;
          ++col;
          break;
        }
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        field += text[i++];
      }
      at_field_start = false;
      any = true;
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw Error(ErrorKind::Csv, "unexpected character after closing quote", line, col);
      }
      continue;
    }
    if (c == ',') {
      end_field();
      any = true;
      ++i;
      ++col;
    } else if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      ++line;
      col = 1;
    } else {
      if (c == '"') throw Error(ErrorKind::Csv, "quote inside unquoted field", line, col);
      field += c;
      at_field_start = false;
      any = true;
      ++i;
      ++col;
    }
  }
  if (any || !field.empty()) end_record();
  return out;
}

/// Numbers become numbers, `'text` becomes text, `=...` an A1 formula,
/// anything else text. Empty fields are blank.
inline Workbook read_csv(std::string_view text, const std::string& sheet) {
  Workbook w;
  w.sheet(sheet);
  const auto records = read_csv_records(text);
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t c = 0; c < records[r].size(); ++c) {
      const std::string& f = records[r][c];
      if (f.empty()) continue;
      const CellAddr a{sheet, static_cast<std::int64_t>(c + 1), static_cast<std::int64_t>(r + 1)};
      if (f[0] == '\'') {
        w.set(a, f.substr(1));
      } else if (f[0] == '=') {
        try {
          w.set(a, parse_sheet_formula(f, Dialect::A1, a));
        } catch (const Error& e) {
          throw Error(ErrorKind::Csv, "cell " + a1_format(CellAddr{"", a.col, a.row}) + ": " + e.detail(),
                      static_cast<int>(r + 1), static_cast<int>(c + 1));
        }
      } else {
        double v = 0;
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec == std::errc() && res.ptr == f.data() + f.size()) {
          w.set(a, v);
        } else {
          w.set(a, f);
        }
      }
    }
  }
  return w;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

}  // namespace detail

/// Inverse of read_csv for one sheet.
inline std::string write_csv(const Workbook& w, std::string_view sheet) {
  const Sheet* s = w.find_sheet(sheet);
  if (!s) return {};
  std::string out;
  std::int64_t row = 1;
  std::int64_t col = 1;
  for (const auto& [key, cell] : s->cells) {
    while (row < key.first) {
      out += '\n';
      ++row;
      col = 1;
    }
    while (col < key.second) {
      out += ',';
      ++col;
    }
    std::string text;
    if (const auto* str = std::get_if<std::string>(&cell)) {
      double v = 0;
      auto res = std::from_chars(str->data(), str->data() + str->size(), v);
      const bool numeric = !str->empty() && res.ec == std::errc() && res.ptr == str->data() + str->size();
      const bool marker = str->empty() || (*str)[0] == '\'' || (*str)[0] == '=';
      text = numeric || marker ? "'" + *str : *str;
    } else {
      text = cell_text(cell);
    }
    out += detail::csv_field(text);
  }
  if (!s->cells.empty()) out += '\n';
  return out;
}

}  // namespace shf
