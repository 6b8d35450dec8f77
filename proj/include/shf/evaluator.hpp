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

// Workbook evaluation. Formula cells are ordered by strongly connected
// component of the reference graph; every cell of a cyclic component gets
// #CYCLE!. Errors are values and never thrown.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "shf/address.hpp"
#include "shf/formula.hpp"
#include "shf/workbook.hpp"

namespace shf {

struct Blank {
  friend bool operator==(const Blank&, const Blank&) = default;
};

struct ErrorValue {
  std::string code;  // "#CYCLE!", "#DIV/0!", "#VALUE!", "#REF!"
  friend bool operator==(const ErrorValue&, const ErrorValue&) = default;
};

using Value = std::variant<Blank, double, std::string, bool, ErrorValue>;

inline std::string to_string(const Value& v) {
  if (std::holds_alternative<Blank>(v)) return "";
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "TRUE" : "FALSE";
  return std::get<ErrorValue>(v).code;
}

namespace detail {

inline Value error_value(std::string_view code) { return ErrorValue{std::string(code)}; }

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Number as spreadsheet text: at most 15 significant digits.
inline std::string display_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Returns the number, or sets `err`.
inline double to_number(const Value& v, Value& err) {
  if (std::holds_alternative<Blank>(v)) return 0;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? 1 : 0;
  if (const auto* s = std::get_if<std::string>(&v)) {
    if (auto n = parse_number(*s)) return *n;
    err = error_value("#VALUE!");
    return 0;
  }
  err = v;
  return 0;
}

inline std::string to_text(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return display_number(*d);
  return to_string(v);
}

inline bool is_error(const Value& v) { return std::holds_alternative<ErrorValue>(v); }

// -1, 0, 1. Numbers < text < booleans; blank adopts the other side's type.
inline int compare_values(Value a, Value b) {
  auto blank_as = [](const Value& other) -> Value {
    if (std::holds_alternative<std::string>(other)) return std::string();
    if (std::holds_alternative<bool>(other)) return false;
    return 0.0;
  };
  if (std::holds_alternative<Blank>(a)) a = blank_as(b);
  if (std::holds_alternative<Blank>(b)) b = blank_as(a);
  auto rank = [](const Value& v) { return std::holds_alternative<double>(v) ? 0 : std::holds_alternative<std::string>(v) ? 1 : 2; };
  if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return *x < y ? -1 : *x > y ? 1 : 0;
  }
  if (const auto* x = std::get_if<std::string>(&a)) {
    const int c = x->compare(std::get<std::string>(b));
    return c < 0 ? -1 : c > 0 ? 1 : 0;
  }
  const bool x = std::get<bool>(a);
  const bool y = std::get<bool>(b);
  return x == y ? 0 : (x ? 1 : -1);
}

}  // namespace detail

/// Exact-match COUNTIF. A numeric condition matches numbers (and numeric
/// text) by value; otherwise text must match exactly. Blank cells match "".
inline double eval_countif(std::span<const Value> range, const Value& cond) {
  std::optional<double> num;
  std::string text;
  if (const auto* d = std::get_if<double>(&cond)) {
    num = *d;
  } else if (const auto* b = std::get_if<bool>(&cond)) {
    text = *b ? "TRUE" : "FALSE";
  } else if (const auto* s = std::get_if<std::string>(&cond)) {
    num = detail::parse_number(*s);
    text = *s;
  }
  double n = 0;
  for (const auto& v : range) {
    if (num) {
      if (const auto* d = std::get_if<double>(&v)) {
        n += *d == *num;
      } else if (const auto* s = std::get_if<std::string>(&v)) {
        auto p = detail::parse_number(*s);
        n += p && *p == *num;
      }
    } else if (std::holds_alternative<Blank>(v)) {
      n += text.empty();
    } else if (const auto* s = std::get_if<std::string>(&v)) {
      n += *s == text;
    } else if (const auto* b = std::get_if<bool>(&v)) {
      n += text == (*b ? "TRUE" : "FALSE");
    }
  }
  return n;
}

/// Values of every non-blank cell after evaluation.
class Evaluation {
 public:
  Value at(const CellAddr& a) const {
    auto s = sheets_.find(a.sheet);
    if (s == sheets_.end()) return Blank{};
    auto c = s->second.find({a.row, a.col});
    return c == s->second.end() ? Value{Blank{}} : c->second;
  }

  const std::map<std::string, std::map<GridKey, Value>>& sheets() const { return sheets_; }
  std::map<std::string, std::map<GridKey, Value>>& mutable_sheets() { return sheets_; }

 private:
  std::map<std::string, std::map<GridKey, Value>> sheets_;
};

namespace detail {

class Evaluator {
 public:
  explicit Evaluator(const Workbook& w) : w_(w) {
    for (std::size_t s = 0; s < w.sheets().size(); ++s) {
      const Sheet& sheet = w.sheets()[s];
      sheet_index_[sheet.name] = s;
      for (const auto& [key, cell] : sheet.cells) {
        if (const auto* f = std::get_if<Formula>(&cell)) {
          ids_[s][key] = nodes_.size();
          nodes_.push_back(Node{s, key, f});
        }
      }
    }
  }

  Evaluation run() {
    Evaluation out;
    auto& sheets = out.mutable_sheets();
    for (const auto& sheet : w_.sheets()) {
      auto& dst = sheets[sheet.name];
      for (const auto& [key, cell] : sheet.cells) {
        if (const auto* d = std::get_if<double>(&cell)) {
          dst.emplace(key, *d);
        } else if (const auto* s = std::get_if<std::string>(&cell)) {
          dst.emplace(key, *s);
        }
      }
    }
    build_edges();
    results_.assign(nodes_.size(), Blank{});
    done_.assign(nodes_.size(), false);
    for (const auto& comp : components()) {
      const bool cyclic = comp.size() > 1 || std::find(edges_[comp[0]].begin(), edges_[comp[0]].end(), comp[0]) != edges_[comp[0]].end();
      for (std::size_t id : comp) {
        results_[id] = cyclic ? error_value("#CYCLE!") : eval(*nodes_[id].formula, host(id));
        done_[id] = true;
      }
    }
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      sheets[w_.sheets()[nodes_[id].sheet].name][nodes_[id].key] = results_[id];
    }
    return out;
  }

 private:
  struct Node {
    std::size_t sheet;
    GridKey key;
    const Formula* formula;
  };

  CellAddr host(std::size_t id) const {
    const Node& n = nodes_[id];
    return CellAddr{w_.sheets()[n.sheet].name, n.key.second, n.key.first};
  }

  // Sheet index for a reference made from `host`; npos when missing.
  std::size_t sheet_of(const std::string& ref_sheet, const CellAddr& host) const {
    auto it = sheet_index_.find(ref_sheet.empty() ? host.sheet : ref_sheet);
    return it == sheet_index_.end() ? std::string::npos : it->second;
  }

  template <typename Fn>
  void formula_cells_in(std::size_t sheet, std::int64_t r1, std::int64_t c1, std::int64_t r2, std::int64_t c2, Fn&& fn) const {
    auto it = ids_.find(sheet);
    if (it == ids_.end()) return;
    const auto& m = it->second;
    for (auto p = m.lower_bound({r1, c1}); p != m.end() && p->first.first <= r2;) {
      if (p->first.second < c1) {
        p = m.lower_bound({p->first.first, c1});
        continue;
      }
      if (p->first.second > c2) {
        p = m.lower_bound({p->first.first + 1, c1});
        continue;
      }
      fn(p->second);
      ++p;
    }
  }

  void build_edges() {
    edges_.assign(nodes_.size(), {});
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      const CellAddr h = host(id);
      for_each_leaf(*nodes_[id].formula, [&](const FormulaNode& n) {
        if (const auto* r = std::get_if<CellRef>(&n.v)) {
          const std::size_t s = sheet_of(r->sheet, h);
          if (s == std::string::npos) return;
          formula_cells_in(s, r->row, r->col, r->row, r->col, [&](std::size_t t) { edges_[id].push_back(t); });
        } else if (const auto* r = std::get_if<CellRangeRef>(&n.v)) {
          const std::size_t s = sheet_of(r->first.sheet, h);
          if (s == std::string::npos) return;
          formula_cells_in(s, std::min(r->first.row, r->last.row), std::min(r->first.col, r->last.col),
                           std::max(r->first.row, r->last.row), std::max(r->first.col, r->last.col),
                           [&](std::size_t t) { edges_[id].push_back(t); });
        }
      });
    }
  }

  // Iterative Tarjan; components come out dependencies-first.
  std::vector<std::vector<std::size_t>> components() const {
    const std::size_t n = nodes_.size();
    constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next edge)
    std::vector<std::vector<std::size_t>> out;
    std::size_t counter = 0;
    for (std::size_t root = 0; root < n; ++root) {
      if (index[root] != kUnset) continue;
      call.emplace_back(root, 0);
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!call.empty()) {
        auto& [v, e] = call.back();
        if (e < edges_[v].size()) {
          const std::size_t w = edges_[v][e++];
          if (index[w] == kUnset) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            call.emplace_back(w, 0);
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], index[w]);
          }
          continue;
        }
        const std::size_t node = v;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[node]);
        if (low[node] == index[node]) {
          std::vector<std::size_t> comp;
          std::size_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
          } while (w != node);
          out.push_back(std::move(comp));
        }
      }
    }
    return out;
  }

  Value cell_value(std::size_t sheet, std::int64_t row, std::int64_t col) const {
    if (auto it = ids_.find(sheet); it != ids_.end()) {
      if (auto f = it->second.find({row, col}); f != it->second.end()) {
        return done_[f->second] ? results_[f->second] : error_value("#CYCLE!");
      }
    }
    const Cell* c = w_.sheets()[sheet].find(col, row);
    if (!c) return Blank{};
    if (const auto* d = std::get_if<double>(c)) return *d;
    return std::get<std::string>(*c);
  }

  std::vector<Value> range_values(const CellRangeRef& r, const CellAddr& h) const {
    const std::size_t s = sheet_of(r.first.sheet, h);
    if (s == std::string::npos) return {error_value("#REF!")};
    const std::int64_t r1 = std::min(r.first.row, r.last.row), r2 = std::max(r.first.row, r.last.row);
    const std::int64_t c1 = std::min(r.first.col, r.last.col), c2 = std::max(r.first.col, r.last.col);
    std::vector<Value> out;
    out.reserve(static_cast<std::size_t>((r2 - r1 + 1) * (c2 - c1 + 1)));
    for (std::int64_t row = r1; row <= r2; ++row) {
      for (std::int64_t col = c1; col <= c2; ++col) out.push_back(cell_value(s, row, col));
    }
    return out;
  }

  // Arguments of aggregate functions: ranges contribute their cells.
  std::vector<Value> flatten(const Formula& f, const CellAddr& h, bool& from_range) const {
    if (const auto* r = std::get_if<CellRangeRef>(&f.node().v)) {
      from_range = true;
      return range_values(*r, h);
    }
    from_range = false;
    return {eval(f, h)};
  }

  Value aggregate(const Call& c, const CellAddr& h) const {
    double acc = c.name == "MIN" ? std::numeric_limits<double>::infinity()
                 : c.name == "MAX" ? -std::numeric_limits<double>::infinity()
                                   : 0;
    bool any = false;
    for (const auto& a : c.args) {
      bool from_range = false;
      for (const auto& v : flatten(a, h, from_range)) {
        if (is_error(v)) return v;
        double x = 0;
        if (from_range) {
          if (!std::holds_alternative<double>(v)) continue;
          x = std::get<double>(v);
        } else {
          Value err = Blank{};
          x = to_number(v, err);
          if (is_error(err)) return err;
        }
        any = true;
        if (c.name == "SUM") {
          acc += x;
        } else if (c.name == "MIN") {
          acc = std::min(acc, x);
        } else {
          acc = std::max(acc, x);
        }
      }
    }
    if (!any && c.name != "SUM") return 0.0;
    return acc;
  }

  Value eval(const Formula& f, const CellAddr& h) const {
    return std::visit(
        [&](const auto& n) -> Value {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NumberLit>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, TextLit>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, CellRef>) {
            const std::size_t s = sheet_of(n.sheet, h);
            if (s == std::string::npos) return error_value("#REF!");
            return cell_value(s, n.row, n.col);
          } else if constexpr (std::is_same_v<T, CellRangeRef>) {
            return error_value("#VALUE!");
          } else if constexpr (std::is_same_v<T, Negate>) {
            Value err = Blank{};
            const double x = to_number(eval(n.operand, h), err);
            if (is_error(err)) return err;
            return -x;
          } else if constexpr (std::is_same_v<T, Binary>) {
            return binary(n, h);
          } else if constexpr (std::is_same_v<T, Call>) {
            return call(n, h);
          } else {
            return error_value("#REF!");  // model-space leaf in a sheet
          }
        },
        f.node().v);
  }

  Value binary(const Binary& b, const CellAddr& h) const {
    const Value l = eval(b.lhs, h);
    const Value r = eval(b.rhs, h);
    if (is_error(l)) return l;
    if (is_error(r)) return r;
    switch (b.op) {
      case BinaryOp::Concat: return to_text(l) + to_text(r);
      case BinaryOp::Eq: return compare_values(l, r) == 0;
      case BinaryOp::Ne: return compare_values(l, r) != 0;
      case BinaryOp::Lt: return compare_values(l, r) < 0;
      case BinaryOp::Le: return compare_values(l, r) <= 0;
      case BinaryOp::Gt: return compare_values(l, r) > 0;
      case BinaryOp::Ge: return compare_values(l, r) >= 0;
      default: break;
    }
    Value err = Blank{};
    const double x = to_number(l, err);
    const double y = to_number(r, err);
    if (is_error(err)) return err;
    switch (b.op) {
      case BinaryOp::Add: return x + y;
      case BinaryOp::Sub: return x - y;
      case BinaryOp::Mul: return x * y;
      case BinaryOp::Div:
        if (y == 0) return error_value("#DIV/0!");
        return x / y;
      default: return error_value("#VALUE!");
    }
  }

  Value call(const Call& c, const CellAddr& h) const {
    if (c.name == "SUM" || c.name == "MIN" || c.name == "MAX") return aggregate(c, h);
    if (c.name == "IF") {
      const Value cond = eval(c.args[0], h);
      if (is_error(cond)) return cond;
      Value err = Blank{};
      const double x = to_number(cond, err);
      if (is_error(err)) return err;
      if (x != 0) return eval(c.args[1], h);
      return c.args.size() > 2 ? eval(c.args[2], h) : Value{false};
    }
    if (c.name == "COUNTIF") {
      bool from_range = false;
      std::vector<Value> vals = flatten(c.args[0], h, from_range);
      const Value cond = eval(c.args[1], h);
      if (is_error(cond)) return cond;
      return eval_countif(vals, cond);
    }
    return error_value("#NAME?");
  }

  const Workbook& w_;
  std::map<std::string, std::size_t, std::less<>> sheet_index_;
  std::map<std::size_t, std::map<GridKey, std::size_t>> ids_;
  std::vector<Node> nodes_;
  std::vector<std::vector<std::size_t>> edges_;
  std::vector<Value> results_;
  std::vector<bool> done_;
};

}  // namespace detail

inline Evaluation evaluate(const Workbook& w) { return detail::Evaluator(w).run(); }

}  // namespace shf
