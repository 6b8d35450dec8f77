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

// Tokenizer and recursive-descent formula parser. The same machinery reads
// model files (element references, `--` comments), A1 cell formulas (CSV
// fixtures, dumps) and R1C1 formulas (workbook XML).

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "shf/address.hpp"
#include "shf/error.hpp"
#include "shf/formula.hpp"

namespace shf {

enum class Dialect { Model, A1, R1C1 };

enum class Tok {
  End,
  Ident,
  Number,
  String,  // "..."
  Quoted,  // '...'
  Cell,    // [sheet!]cell, text kept raw
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Colon,
  Bar,
  Plus,
  Minus,
  Star,
  Slash,
  Amp,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  At,
  OpenObject,   // {#
  CloseObject,  // #}
  UnionOp,      // \/
};

inline std::string_view describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::Quoted: return "quoted text";
    case Tok::Cell: return "cell reference";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Bar: return "'|'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Amp: return "'&'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'<>'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::At: return "'@'";
    case Tok::OpenObject: return "'{#'";
    case Tok::CloseObject: return "'#}'";
    case Tok::UnionOp: return "'\\/'";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;   // identifier / string contents / cell text
  std::string sheet;  // Cell only
  bool has_sheet = false;
  bool r1c1 = false;  // Cell only
  double number = 0;
  bool integral = false;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  Lexer(std::string_view src, Dialect dialect) : src_(src), dialect_(dialect) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      out.push_back(next());
      if (out.back().kind == Tok::End) return out;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorKind::Parse, msg, line_, col_); }

  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  void skip_space() {
    for (;;) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (dialect_ == Dialect::Model && c == '-' && peek(1) == '-') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  // Length of an R1C1 reference starting at pos_+k, or 0.
  std::size_t match_r1c1(std::size_t k) const {
    std::size_t i = k;
    auto part = [&](char axis) -> bool {
      if (peek(i) != axis) return false;
      ++i;
      if (peek(i) == '[') {
        std::size_t j = i + 1;
        if (peek(j) == '-') ++j;
        const std::size_t digits = j;
        while (std::isdigit(static_cast<unsigned char>(peek(j)))) ++j;
        if (j == digits || peek(j) != ']') return false;
        i = j + 1;
      } else {
        while (std::isdigit(static_cast<unsigned char>(peek(i)))) ++i;
      }
      return true;
    };
    if (!part('R')) return 0;
    if (!part('C')) return 0;
    if (ident_char(peek(i)) || peek(i) == '(' || peek(i) == '[' || peek(i) == '!') return 0;
    return i - k;
  }

  // Length of an A1 reference `$?L{1,3}$?D+` starting at pos_+k, or 0.
  std::size_t match_a1(std::size_t k) const {
    std::size_t i = k;
    if (peek(i) == '$') ++i;
    const std::size_t letters = i;
    while (std::isalpha(static_cast<unsigned char>(peek(i)))) ++i;
    if (i == letters || i - letters > 3) return 0;
    if (peek(i) == '$') ++i;
    const std::size_t digits = i;
    while (std::isdigit(static_cast<unsigned char>(peek(i)))) ++i;
    if (i == digits) return 0;
    if (ident_char(peek(i)) || peek(i) == '(' || peek(i) == '[' || peek(i) == '$' || peek(i) == '!') return 0;
    return i - k;
  }

  // Sets `r1c1` when the match used R1C1 syntax.
  std::size_t match_cell(std::size_t k, bool qualified, bool& r1c1) const {
    r1c1 = false;
    if (dialect_ == Dialect::R1C1) {
      if (std::size_t n = match_r1c1(k)) {
        r1c1 = true;
        return n;
      }
      // XML written by other tools may still carry A1 inside a qualified ref.
      return qualified ? match_a1(k) : 0;
    }
    return match_a1(k);
  }

  Token make(Tok kind) const {
    Token t;
    t.kind = kind;
    t.line = line_;
    t.column = col_;
    return t;
  }

  Token cell_after_sheet(Token t, std::string sheet) {
    advance();  // '!'
    const std::size_t n = match_cell(0, true, t.r1c1);
    if (n == 0) fail("expected a cell reference after '" + sheet + "!'");
    t.kind = Tok::Cell;
    t.sheet = std::move(sheet);
    t.has_sheet = true;
    t.text = std::string(src_.substr(pos_, n));
    advance(n);
    return t;
  }

  Token next() {
    skip_space();
    Token t = make(Tok::End);
    if (pos_ >= src_.size()) return t;
    const char c = peek();

    if (dialect_ != Dialect::Model && (c == '$' || ident_start(c))) {
      if (std::size_t n = match_cell(0, false, t.r1c1)) {
        t.kind = Tok::Cell;
        t.text = std::string(src_.substr(pos_, n));
        advance(n);
        return t;
      }
    }
    if (ident_start(c)) {
      std::size_t n = 0;
      while (ident_char(peek(n)) || (dialect_ != Dialect::Model && peek(n) == '.')) ++n;
      std::string word(src_.substr(pos_, n));
      if (peek(n) == '!') {
        advance(n);
        return cell_after_sheet(t, std::move(word));
      }
      advance(n);
      t.kind = Tok::Ident;
      t.text = std::move(word);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      std::size_t n = 0;
      bool integral = true;
      while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
      if (peek(n) == '.') {
        integral = false;
        ++n;
        while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
      }
      if (peek(n) == 'e' || peek(n) == 'E') {
        std::size_t m = n + 1;
        if (peek(m) == '+' || peek(m) == '-') ++m;
        if (std::isdigit(static_cast<unsigned char>(peek(m)))) {
          integral = false;
          while (std::isdigit(static_cast<unsigned char>(peek(m)))) ++m;
          n = m;
        }
      }
      const std::string_view digits = src_.substr(pos_, n);
      double v = 0;
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) fail("malformed number");
      t.kind = Tok::Number;
      t.number = v;
      t.integral = integral && v < 9.0e15;
      t.text = std::string(digits);
      advance(n);
      return t;
    }
    if (c == '"' || c == '\'') {
      const char q = c;
      advance();
      std::string body;
      for (;;) {
        if (pos_ >= src_.size()) fail(q == '"' ? "unterminated string" : "unterminated quoted text");
        if (peek() == q) {
          if (peek(1) == q) {
            body += q;
            advance(2);
            continue;
          }
          advance();
          break;
        }
        body += peek();
        advance();
      }
      if (q == '\'' && peek() == '!') return cell_after_sheet(t, std::move(body));
      t.kind = q == '"' ? Tok::String : Tok::Quoted;
      t.text = std::move(body);
      return t;
    }
    auto single = [&](Tok k, std::size_t n = 1) {
      t.kind = k;
      advance(n);
      return t;
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case ',': return single(Tok::Comma);
      case ':': return single(Tok::Colon);
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '&': return single(Tok::Amp);
      case '=': return single(Tok::Eq);
      case '@': return single(Tok::At);
      case '|': return single(Tok::Bar);
      case '<':
        if (peek(1) == '>') return single(Tok::Ne, 2);
        if (peek(1) == '=') return single(Tok::Le, 2);
        return single(Tok::Lt);
      case '>':
        if (peek(1) == '=') return single(Tok::Ge, 2);
        return single(Tok::Gt);
      case '{':
        if (peek(1) == '#') return single(Tok::OpenObject, 2);
        break;
      case '#':
        if (peek(1) == '}') return single(Tok::CloseObject, 2);
        break;
      case '\\':
        if (peek(1) == '/') return single(Tok::UnionOp, 2);
        break;
      default: break;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  Dialect dialect_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline const std::set<std::string, std::less<>>& known_functions() {
  static const std::set<std::string, std::less<>> names{"SUM", "COUNTIF", "IF", "MIN", "MAX"};
  return names;
}

/// Shared recursive-descent machinery over a token vector.
class ParserBase {
 public:
  ParserBase(std::string_view src, Dialect dialect, CellAddr host = {})
      : tokens_(Lexer(src, dialect).tokenize()), dialect_(dialect), host_(std::move(host)) {}

 protected:
  static constexpr int kMaxDepth = 200;

  const Token& peek(std::size_t k = 0) const { return tokens_[std::min(pos_ + k, tokens_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_ident(std::string_view word) const { return at(Tok::Ident) && peek().text == word; }

  Token take() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  bool accept(Tok k) {
    if (!at(k)) return false;
    take();
    return true;
  }

  bool accept_ident(std::string_view word) {
    if (!at_ident(word)) return false;
    take();
    return true;
  }

  [[noreturn]] void fail_expected(std::initializer_list<std::string_view> expected) const {
    std::string msg = "expected ";
    std::size_t i = 0;
    for (auto e : expected) {
      if (i++) msg += i == expected.size() ? " or " : ", ";
      msg += e;
    }
    msg += " but found ";
    const Token& t = peek();
    msg += describe(t.kind);
    if (t.kind == Tok::Ident || t.kind == Tok::Number) msg += " '" + t.text + "'";
    throw Error(ErrorKind::Parse, msg, t.line, t.column);
  }

  [[noreturn]] void fail_here(const std::string& msg) const {
    throw Error(ErrorKind::Parse, msg, peek().line, peek().column);
  }

  Token expect(Tok k) {
    if (!at(k)) fail_expected({describe(k)});
    return take();
  }

  Token expect_ident(std::string_view word) {
    if (!at_ident(word)) {
      std::string quoted = "'" + std::string(word) + "'";
      fail_expected({quoted});
    }
    return take();
  }

  struct DepthGuard {
    explicit DepthGuard(ParserBase& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) p_.fail_here("expression nested too deeply");
    }
    ~DepthGuard() { --p_.depth_; }
    ParserBase& p_;
  };

  // ---- integer expressions ----

  IntExprPtr parse_int_expr() {
    DepthGuard g(*this);
    IntExprPtr lhs = parse_int_term();
    for (;;) {
      if (accept(Tok::Plus)) {
        lhs = int_node(IntExpr::Kind::Add, lhs, parse_int_term());
      } else if (accept(Tok::Minus)) {
        lhs = int_node(IntExpr::Kind::Sub, lhs, parse_int_term());
      } else {
        return lhs;
      }
    }
  }

  IntExprPtr parse_int_term() {
    IntExprPtr lhs = parse_int_factor();
    while (accept(Tok::Star)) lhs = int_node(IntExpr::Kind::Mul, lhs, parse_int_factor());
    return lhs;
  }

  IntExprPtr parse_int_factor() {
    DepthGuard g(*this);
    if (at(Tok::Number)) {
      if (!peek().integral) fail_here("expected an integer");
      return int_literal(static_cast<std::int64_t>(take().number));
    }
    if (at(Tok::Ident)) return int_name(take().text);
    if (accept(Tok::Minus)) return int_node(IntExpr::Kind::Neg, parse_int_factor());
    if (accept(Tok::LParen)) {
      IntExprPtr e = parse_int_expr();
      expect(Tok::RParen);
      return e;
    }
    fail_expected({"integer", "identifier", "'('"});
  }

  // ---- cell references ----

  CellRef resolve_cell(const Token& t) const {
    CellRef r;
    if (t.r1c1) {
      r = parse_r1c1(t);
    } else {
      try {
        r = a1_parse(t.text);
      } catch (const Error& e) {
        throw Error(ErrorKind::Parse, e.detail(), t.line, t.column);
      }
    }
    r.sheet = t.has_sheet ? t.sheet : std::string{};
    return r;
  }

  CellRef parse_r1c1(const Token& t) const {
    CellRef r;
    std::size_t i = 0;
    const std::string& s = t.text;
    auto part = [&](std::int64_t host, bool& absolute) -> std::int64_t {
      ++i;  // axis letter
      if (i < s.size() && s[i] == '[') {
        const std::size_t close = s.find(']', i);
        std::int64_t d = 0;
        std::from_chars(s.data() + i + 1, s.data() + close, d);
        i = close + 1;
        absolute = false;
        return host + d;
      }
      const std::size_t begin = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i == begin) {
        absolute = false;
        return host;
      }
      std::int64_t v = 0;
      std::from_chars(s.data() + begin, s.data() + i, v);
      absolute = true;
      return v;
    };
    r.row = part(host_.row, r.row_abs);
    r.col = part(host_.col, r.col_abs);
    if (r.row < 1 || r.col < 1) throw Error(ErrorKind::Parse, "reference " + s + " points off the sheet", t.line, t.column);
    return r;
  }

  // ---- formulas ----

  Formula parse_formula() {
    DepthGuard g(*this);
    Formula lhs = parse_concat();
    for (;;) {
      BinaryOp op;
      switch (peek().kind) {
        case Tok::Eq: op = BinaryOp::Eq; break;
        case Tok::Ne: op = BinaryOp::Ne; break;
        case Tok::Lt: op = BinaryOp::Lt; break;
        case Tok::Le: op = BinaryOp::Le; break;
        case Tok::Gt: op = BinaryOp::Gt; break;
        case Tok::Ge: op = BinaryOp::Ge; break;
        default: return lhs;
      }
      take();
      lhs = Formula::binary(op, lhs, parse_concat());
    }
  }

  Formula parse_concat() {
    Formula lhs = parse_additive();
    while (accept(Tok::Amp)) lhs = Formula::binary(BinaryOp::Concat, lhs, parse_additive());
    return lhs;
  }

  Formula parse_additive() {
    Formula lhs = parse_multiplicative();
    for (;;) {
      if (accept(Tok::Plus)) {
        lhs = Formula::binary(BinaryOp::Add, lhs, parse_multiplicative());
      } else if (accept(Tok::Minus)) {
        lhs = Formula::binary(BinaryOp::Sub, lhs, parse_multiplicative());
      } else {
        return lhs;
      }
    }
  }

  Formula parse_multiplicative() {
    Formula lhs = parse_unary();
    for (;;) {
      if (accept(Tok::Star)) {
        lhs = Formula::binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (accept(Tok::Slash)) {
        lhs = Formula::binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Formula parse_unary() {
    DepthGuard g(*this);
    if (accept(Tok::Minus)) {
      if (at(Tok::Number)) return Formula::number(-take().number);
      return Formula::negate(parse_unary());
    }
    return parse_primary();
  }

  std::vector<IndexExpr> parse_index_list() {
    expect(Tok::LBracket);
    std::vector<IndexExpr> out;
    if (!at(Tok::RBracket)) {
      do {
        IndexExpr ix;
        ix.symbolic = parse_int_expr();
        out.push_back(std::move(ix));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBracket);
    return out;
  }

  Formula parse_primary() {
    DepthGuard g(*this);
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: return Formula::number(take().number);
      case Tok::String: return Formula::text(take().text);
      case Tok::Cell: {
        Token first = take();
        CellRef a = resolve_cell(first);
        if (accept(Tok::Colon)) {
          if (!at(Tok::Cell)) fail_expected({"cell reference"});
          Token second = take();
          if (second.has_sheet && second.sheet != first.sheet) {
            throw Error(ErrorKind::Parse, "range corners on different sheets", second.line, second.column);
          }
          CellRef b = resolve_cell(second);
          return Formula::cell_range(a, b);
        }
        return Formula::cell(a);
      }
      case Tok::LParen: {
        take();
        Formula f = parse_formula();
        expect(Tok::RParen);
        return f;
      }
      case Tok::Ident: {
        Token name = take();
        if (at(Tok::LParen)) return parse_call(name);
        if (dialect_ == Dialect::Model && at(Tok::LBracket)) {
          std::vector<IndexExpr> first = parse_index_list();
          if (accept(Tok::Colon)) {
            Token second = expect(Tok::Ident);
            if (second.text != name.text) {
              throw Error(ErrorKind::Parse, "element range must stay within table '" + name.text + "'", second.line,
                          second.column);
            }
            std::vector<IndexExpr> last = parse_index_list();
            return Formula::element_range(name.text, std::move(first), std::move(last));
          }
          return Formula::element(name.text, std::move(first));
        }
        if (dialect_ == Dialect::Model) return Formula::var(name.text);
        throw Error(ErrorKind::Parse, "unknown name '" + name.text + "'", name.line, name.column);
      }
      default: break;
    }
    fail_expected({"number", "string", "reference", "function call", "'('"});
  }

  Formula parse_call(const Token& name) {
    std::string upper = name.text;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (!known_functions().contains(upper)) {
      throw Error(ErrorKind::Parse, "unsupported function '" + name.text + "' (supported: SUM, COUNTIF, IF, MIN, MAX)",
                  name.line, name.column);
    }
    expect(Tok::LParen);
    std::vector<Formula> args;
    if (!at(Tok::RParen)) {
      do {
        args.push_back(parse_formula());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    const std::size_t n = args.size();
    const bool ok = (upper == "COUNTIF" && n == 2) || (upper == "IF" && (n == 2 || n == 3)) ||
                    ((upper == "SUM" || upper == "MIN" || upper == "MAX") && n >= 1);
    if (!ok) {
      throw Error(ErrorKind::Parse, upper + " called with " + std::to_string(n) + " argument(s)", name.line, name.column);
    }
    return Formula::call(upper, std::move(args));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Dialect dialect_;
  CellAddr host_;
  int depth_ = 0;
};

/// Parses a sheet formula (with or without leading '=') in A1 or R1C1
/// dialect. `host` anchors relative R1C1 references.
inline Formula parse_sheet_formula(std::string_view text, Dialect dialect, const CellAddr& host = {}) {
  if (!text.empty() && text[0] == '=') text.remove_prefix(1);
  struct P : ParserBase {
    using ParserBase::ParserBase;
    Formula run() {
      Formula f = parse_formula();
      if (!at(Tok::End)) fail_expected({"operator", "end of formula"});
      return f;
    }
  };
  return P(text, dialect, host).run();
}

}  // namespace shf
