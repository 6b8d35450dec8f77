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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shf {

enum class ErrorKind {
  Parse,
  Semantic,
  AddressUnderflow,
  UnionIncompatible,
  EmptyDimension,
  MultipleDefinition,
  OutOfBounds,
  MappingIncomplete,
  Overlap,
  Layout,
  CrossCheck,
  Xml,
  Csv,
  Crosstab,
  Io,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Semantic: return "semantic error";
    case ErrorKind::AddressUnderflow: return "address underflow";
    case ErrorKind::UnionIncompatible: return "union incompatibility";
    case ErrorKind::EmptyDimension: return "empty dimension";
    case ErrorKind::MultipleDefinition: return "multiple definition";
    case ErrorKind::OutOfBounds: return "out of bounds";
    case ErrorKind::MappingIncomplete: return "mapping incomplete";
    case ErrorKind::Overlap: return "overlap";
    case ErrorKind::Layout: return "layout error";
    case ErrorKind::CrossCheck: return "cross-check error";
    case ErrorKind::Xml: return "xml error";
    case ErrorKind::Csv: return "csv error";
    case ErrorKind::Crosstab: return "crosstab error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

/// Every failure raised by the library. Positioned errors (parsers) carry a
/// 1-based line and column; others leave them at 0.
class Error : public std::exception {
 public:
  Error(ErrorKind kind, const std::string& message, int line = 0, int column = 0)
      : kind_(kind), detail_(message), line_(line), column_(column), what_(format()) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& file() const noexcept { return file_; }
  const char* what() const noexcept override { return what_.c_str(); }

  /// The same error attributed to `file`; an existing attribution wins.
  Error in_file(const std::string& file) const {
    Error e = *this;
    if (e.file_.empty()) {
      e.file_ = file;
      e.what_ = e.format();
    }
    return e;
  }

 private:
  std::string format() const {
    std::string out;
    if (!file_.empty()) {
      out += file_;
      if (line_ > 0) out += ":" + std::to_string(line_) + ":" + std::to_string(column_);
      out += ": ";
    }
    out += to_string(kind_);
    if (file_.empty() && line_ > 0) out += " at " + std::to_string(line_) + ":" + std::to_string(column_);
    out += ": ";
    out += detail_;
    return out;
  }

  ErrorKind kind_;
  std::string detail_;
  int line_;
  int column_;
  std::string file_;
  std::string what_;
};

}  // namespace shf
