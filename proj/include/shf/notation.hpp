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

// Model notation: object literals, function definitions, calls, union,
// mapping clauses and grid/row layout formats.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "shf/ast.hpp"
#include "shf/model.hpp"
#include "shf/parser.hpp"

namespace shf {

inline const std::set<std::string, std::less<>>& reserved_words() {
  static const std::set<std::string, std::less<>> words{"let", "be",   "union", "mapping", "to",   "by",
                                                        "all", "grid", "row",   "skip",    "vector"};
  return words;
}

namespace detail {

class ProgramParser : public ParserBase {
 public:
  explicit ProgramParser(std::string_view src) : ParserBase(src, Dialect::Model) {}

  Program parse_program() {
    Program p;
    while (at_ident("let")) {
      FunctionDef def = parse_def();
      if (p.find(def.name)) {
        throw Error(ErrorKind::Semantic, "function '" + def.name + "' defined twice", def.pos.line, def.pos.column);
      }
      p.definitions.push_back(std::move(def));
      defs_ = &p.definitions;
    }
    defs_ = &p.definitions;
    if (!at(Tok::End) && !at_ident("grid") && !at_ident("row")) p.top = parse_objexpr({});
    while (at_ident("grid") || at_ident("row")) p.layouts.push_back(parse_layout());
    if (!at(Tok::End)) fail_expected({"'grid'", "'row'", "end of input"});
    return p;
  }

  ObjectTemplate parse_single_object() {
    ObjectTemplate t = parse_object_literal();
    if (!at(Tok::End)) fail_expected({"end of input"});
    return t;
  }

 private:
  SourcePos here() const { return {peek().line, peek().column}; }

  std::string expect_name(std::string_view what) {
    if (!at(Tok::Ident)) fail_expected({what});
    if (reserved_words().contains(peek().text)) fail_here("'" + peek().text + "' is a reserved word");
    return take().text;
  }

  FunctionDef parse_def() {
    FunctionDef def;
    def.pos = here();
    expect_ident("let");
    def.name = expect_name("function name");
    std::set<std::string> seen;
    if (accept(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          const SourcePos pos = here();
          std::string param = expect_name("parameter name");
          if (!seen.insert(param).second) {
            throw Error(ErrorKind::Semantic, "parameter '" + param + "' repeated", pos.line, pos.column);
          }
          def.params.push_back(std::move(param));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
    }
    expect_ident("be");
    def.body = parse_objexpr(seen);
    return def;
  }

  // Table names an expression may contain, for checking mapping clauses.
  std::set<std::string> tables_of(const ObjectExpr& e) const {
    switch (e.kind) {
      case ObjectExpr::Kind::Literal: {
        std::set<std::string> out;
        for (const auto& d : e.literal.decls) out.insert(d.name);
        return out;
      }
      case ObjectExpr::Kind::Call: {
        for (const auto& d : *defs_) {
          if (d.name == e.callee) return tables_of(*d.body);
        }
        return {};
      }
      case ObjectExpr::Kind::Union: {
        auto out = tables_of(*e.lhs);
        out.merge(tables_of(*e.rhs));
        return out;
      }
      case ObjectExpr::Kind::Mapping: return tables_of(*e.lhs);
    }
    return {};
  }

  ObjectExprPtr parse_objexpr(const std::set<std::string>& params) {
    DepthGuard g(*this);
    ObjectExprPtr lhs = parse_objterm(params);
    for (;;) {
      const SourcePos pos = here();
      if (!accept(Tok::UnionOp) && !accept_ident("union")) return lhs;
      auto u = std::make_shared<ObjectExpr>();
      u->kind = ObjectExpr::Kind::Union;
      u->pos = pos;
      u->lhs = lhs;
      u->rhs = parse_objterm(params);
      lhs = u;
    }
  }

  ObjectExprPtr parse_objterm(const std::set<std::string>& params) {
    ObjectExprPtr base = parse_objprimary(params);
    while (at_ident("mapping")) {
      auto m = std::make_shared<ObjectExpr>();
      m->kind = ObjectExpr::Kind::Mapping;
      m->pos = here();
      take();
      m->lhs = base;
      const std::set<std::string> known = tables_of(*base);
      do {
        MappingClause c;
        c.pos = here();
        c.table = expect_name("table name");
        if (!known.contains(c.table)) {
          throw Error(ErrorKind::Semantic, "mapping names unknown table '" + c.table + "'", c.pos.line, c.pos.column);
        }
        expect_ident("to");
        c.origin = parse_addr();
        c.orientation = parse_by();
        m->clauses.push_back(std::move(c));
      } while (accept(Tok::Comma));
      base = m;
    }
    return base;
  }

  ObjectExprPtr parse_objprimary(const std::set<std::string>& params) {
    DepthGuard g(*this);
    const SourcePos pos = here();
    if (at(Tok::OpenObject)) {
      auto e = std::make_shared<ObjectExpr>();
      e->kind = ObjectExpr::Kind::Literal;
      e->pos = pos;
      e->literal = parse_object_literal();
      return e;
    }
    if (accept(Tok::LParen)) {
      ObjectExprPtr e = parse_objexpr(params);
      expect(Tok::RParen);
      return e;
    }
    if (at(Tok::Ident) && !reserved_words().contains(peek().text)) {
      auto e = std::make_shared<ObjectExpr>();
      e->kind = ObjectExpr::Kind::Call;
      e->pos = pos;
      e->callee = take().text;
      const FunctionDef* def = nullptr;
      for (const auto& d : *defs_) {
        if (d.name == e->callee) def = &d;
      }
      if (!def) throw Error(ErrorKind::Semantic, "unknown function '" + e->callee + "'", pos.line, pos.column);
      if (accept(Tok::LParen)) {
        if (!at(Tok::RParen)) {
          do {
            e->args.push_back(parse_int_expr());
          } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
      }
      if (e->args.size() != def->params.size()) {
        throw Error(ErrorKind::Semantic,
                    "'" + e->callee + "' takes " + std::to_string(def->params.size()) + " argument(s) but " +
                        std::to_string(e->args.size()) + " were given",
                    pos.line, pos.column);
      }
      return e;
    }
    fail_expected({"'{#'", "function call", "'('"});
  }

  Orientation parse_by() {
    if (!accept_ident("by")) return Orientation::Scalar;
    if (at(Tok::Ident)) {
      if (auto o = parse_orientation(peek().text)) {
        take();
        return *o;
      }
    }
    fail_expected({"'yx'", "'xy'", "'y'", "'x'"});
  }

  AddrExpr parse_addr() {
    AddrExpr a;
    if (accept(Tok::LParen)) {
      a = parse_addr();
      expect(Tok::RParen);
    } else if (at(Tok::Cell)) {
      CellRef r = resolve_cell(take());
      a.base = r.addr();
    } else if (at(Tok::Ident)) {
      const Token t = peek();
      try {
        a.base = a1_parse(t.text).addr();
      } catch (const Error&) {
        fail_expected({"cell address"});
      }
      take();
    } else {
      fail_expected({"cell address"});
    }
    for (;;) {
      bool negate = false;
      if (at(Tok::Minus) && peek(1).kind == Tok::Ident && peek(1).text == "vector") {
        negate = true;
      } else if (!(at(Tok::Plus) && peek(1).kind == Tok::Ident && peek(1).text == "vector")) {
        return a;
      }
      take();
      take();
      expect(Tok::LParen);
      IntExprPtr dx = parse_int_expr();
      expect(Tok::Comma);
      IntExprPtr dy = parse_int_expr();
      expect(Tok::RParen);
      if (negate) {
        dx = int_node(IntExpr::Kind::Neg, dx);
        dy = int_node(IntExpr::Kind::Neg, dy);
      }
      a.shifts.emplace_back(std::move(dx), std::move(dy));
    }
  }

  ObjectTemplate parse_object_literal() {
    ObjectTemplate t;
    expect(Tok::OpenObject);
    if (!at(Tok::Bar)) {
      do {
        t.decls.push_back(parse_decl());
      } while (accept(Tok::Comma));
    }
    expect(Tok::Bar);
    if (!at(Tok::CloseObject)) {
      do {
        t.equations.push_back(parse_equation());
      } while (accept(Tok::Comma));
    }
    expect(Tok::CloseObject);
    return t;
  }

  DeclTemplate parse_decl() {
    DeclTemplate d;
    d.pos = here();
    d.name = expect_name("table name");
    expect(Tok::LBracket);
    if (!at(Tok::RBracket)) {
      do {
        IntExprPtr lo = parse_int_expr();
        expect(Tok::Colon);
        IntExprPtr hi = parse_int_expr();
        d.dims.emplace_back(std::move(lo), std::move(hi));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBracket);
    return d;
  }

  LhsIndex parse_lhs_index() {
    if (accept_ident("all")) return LhsIndex::all(expect_name("variable name"));
    if (at(Tok::Ident)) {
      Quantifier::Kind kind;
      bool constrained = true;
      switch (peek(1).kind) {
        case Tok::Gt: kind = Quantifier::Kind::Gt; break;
        case Tok::Lt: kind = Quantifier::Kind::Lt; break;
        case Tok::Eq: kind = Quantifier::Kind::Eq; break;
        case Tok::Ge: kind = Quantifier::Kind::Ge; break;
        case Tok::Le: kind = Quantifier::Kind::Le; break;
        default: constrained = false; break;
      }
      if (constrained) {
        std::string var = expect_name("variable name");
        take();
        LhsIndex ix = LhsIndex::constrained(std::move(var), kind, 0);
        ix.quantifier->symbolic_k = parse_int_expr();
        return ix;
      }
    }
    LhsIndex ix;
    ix.symbolic = parse_int_expr();
    return ix;
  }

  EquationTemplate parse_equation() {
    EquationTemplate e;
    e.pos = here();
    e.eq.table = expect_name("table name");
    expect(Tok::LBracket);
    if (!at(Tok::RBracket)) {
      do {
        e.eq.lhs.push_back(parse_lhs_index());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBracket);
    expect(Tok::Eq);
    e.eq.rhs = parse_formula();
    return e;
  }

  ItemTemplate parse_item() {
    ItemTemplate it;
    it.pos = here();
    if (at(Tok::Quoted)) {
      it.kind = ItemTemplate::Kind::Text;
      it.name = take().text;
      return it;
    }
    if (accept_ident("skip")) {
      it.kind = ItemTemplate::Kind::Skip;
      if (accept(Tok::LParen)) {
        it.width = parse_int_expr();
        expect(Tok::Comma);
        it.height = parse_int_expr();
        expect(Tok::RParen);
      } else {
        it.width = int_literal(1);
        it.height = int_literal(0);
      }
      return it;
    }
    it.kind = ItemTemplate::Kind::Table;
    it.name = expect_name("table name, quoted text or 'skip'");
    it.orientation = parse_by();
    return it;
  }

  std::vector<ItemTemplate> parse_item_list() {
    std::vector<ItemTemplate> out;
    expect(Tok::LBracket);
    if (!at(Tok::RBracket)) {
      do {
        out.push_back(parse_item());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBracket);
    return out;
  }

  GridTemplate parse_layout() {
    GridTemplate g;
    g.pos = here();
    if (accept_ident("row")) {
      expect(Tok::LParen);
      g.rows.push_back(parse_item_list());
      expect(Tok::RParen);
    } else {
      expect_ident("grid");
      expect(Tok::LParen);
      expect(Tok::LBracket);
      if (!at(Tok::RBracket)) {
        do {
          g.rows.push_back(parse_item_list());
        } while (accept(Tok::Comma));
      }
      expect(Tok::RBracket);
      expect(Tok::RParen);
    }
    expect(Tok::At);
    g.anchor = parse_addr();
    return g;
  }

  const std::vector<FunctionDef>* defs_ = &empty_defs_;
  std::vector<FunctionDef> empty_defs_;
};

}  // namespace detail

inline Program parse_program(std::string_view text) { return detail::ProgramParser(text).parse_program(); }

/// Parses one `{# ... #}` literal without size parameters.
inline Object parse_object(std::string_view text) {
  Object o = instantiate_object(detail::ProgramParser(text).parse_single_object(), IntEnv{});
  try {
    validate(o);
  } catch (const Error& e) {
    throw Error(e.kind(), e.detail(), 1, 1);
  }
  return o;
}

inline std::string to_string(const TableDecl& t) {
  std::string out = t.name + "[";
  for (std::size_t i = 0; i < t.dims.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(t.dims[i].lo) + ":" + std::to_string(t.dims[i].hi);
  }
  return out + "]";
}

/// Canonical listing: tables by name, equations by their printed form.
inline std::string show_object(const Object& o) {
  if (o.empty()) return "{# | #}";
  std::vector<std::string> eqs;
  eqs.reserve(o.equations().size());
  for (const auto& e : o.equations()) eqs.push_back(to_string(e));
  std::sort(eqs.begin(), eqs.end());
  std::string out = "{#\n";
  std::size_t i = 0;
  for (const auto& [name, t] : o.tables()) {
    out += "  " + to_string(t);
    out += ++i < o.tables().size() ? ",\n" : "\n";
  }
  out += "|\n";
  for (std::size_t k = 0; k < eqs.size(); ++k) {
    out += "  " + eqs[k];
    out += k + 1 < eqs.size() ? ",\n" : "\n";
  }
  return out + "#}";
}

}  // namespace shf
