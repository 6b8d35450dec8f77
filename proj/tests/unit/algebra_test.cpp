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
#include <vector>

#include "generators.hpp"
#include "shf/algebra.hpp"
#include "shf/evaluator.hpp"
#include "shf/notation.hpp"

namespace shf {
namespace {

using testing::Gen;

// Does `eq` cover element `idx`? Decided per position from the written
// relation, without going through the bounds arithmetic.
bool covers(const Equation& eq, const std::vector<std::int64_t>& idx) {
  for (std::size_t d = 0; d < idx.size(); ++d) {
    const LhsIndex& ix = eq.lhs[d];
    const std::int64_t v = idx[d];
    if (!ix.quantifier) {
      if (v != ix.literal) return false;
      continue;
    }
    const std::int64_t k = ix.quantifier->k;
    bool ok = true;
    switch (ix.quantifier->kind) {
      case Quantifier::Kind::All: break;
      case Quantifier::Kind::Gt: ok = v > k; break;
      case Quantifier::Kind::Ge: ok = v >= k; break;
      case Quantifier::Kind::Lt: ok = v < k; break;
      case Quantifier::Kind::Le: ok = v <= k; break;
      case Quantifier::Kind::Eq: ok = v == k; break;
    }
    if (!ok) return false;
  }
  return true;
}

// Every index tuple of `t`, by nested counting.
std::vector<std::vector<std::int64_t>> all_indices(const TableDecl& t) {
  std::vector<std::vector<std::int64_t>> out = {{}};
  for (const auto& b : t.dims) {
    std::vector<std::vector<std::int64_t>> next;
    for (const auto& prefix : out) {
      for (std::int64_t v = b.lo; v <= b.hi; ++v) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

TEST(Algebra, ExpansionMatchesCoverageOracle) {
  Gen g(21);
  int expanded = 0, multiple = 0;
  for (int i = 0; i < 2000; ++i) {
    const Object o = testing::random_object(g);
    std::map<std::string, std::map<std::vector<std::int64_t>, int>> cover;
    bool clash = false;
    for (const auto& [name, t] : o.tables()) {
      for (const auto& idx : all_indices(t)) {
        int n = 0;
        for (const auto& eq : o.equations()) n += eq.table == name && covers(eq, idx);
        cover[name][idx] = n;
        clash |= n > 1;
      }
    }
    try {
      const ExpandedObject e = expand(o);
      ASSERT_FALSE(clash) << show_object(o);
      for (const auto& [name, t] : e.tables) {
        ASSERT_EQ(static_cast<std::int64_t>(t.cells.size()), o.find_table(name)->element_count());
        for (std::size_t off = 0; off < t.cells.size(); ++off) {
          ASSERT_EQ(t.cells[off].has_value(), cover[name][t.index_of(off)] == 1) << show_object(o);
        }
      }
      ++expanded;
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::MultipleDefinition) {
        ASSERT_TRUE(clash) << show_object(o);
        ++multiple;
      } else {
        ASSERT_EQ(err.kind(), ErrorKind::OutOfBounds) << err.what();
      }
    }
  }
  EXPECT_GT(expanded, 500);
  EXPECT_GT(multiple, 50);
}

TEST(Algebra, InstantiatedRightHandSides) {
  const Object o = parse_object(
      "{# p[2000:2002, 1:2], s[] | p[2000, all t] = t, p[y > 2000, all t] = p[y - 1, t] * 2 + y, "
      "s[] = SUM(p[2000, 1]:p[2002, 2]) #}");
  const ExpandedObject e = expand(o);
  const ExpandedTable& p = e.tables.at("p");
  EXPECT_EQ(to_model_string(*p.cells[p.offset({2000, 2})]), "2");
  EXPECT_EQ(to_model_string(*p.cells[p.offset({2002, 1})]), "p[2001, 1] * 2 + 2002");
  EXPECT_EQ(to_model_string(*e.tables.at("s").cells[0]), "SUM(p[2000, 1]:p[2002, 2])");
  EXPECT_EQ(e.defined_count(), 7u);
}

TEST(Algebra, ExpansionErrors) {
  auto kind_of = [](const char* text) {
    try {
      expand(parse_object(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind_of("{# a[1:3] | a[all i] = 1, a[2] = 0 #}"), ErrorKind::MultipleDefinition);
  EXPECT_EQ(kind_of("{# a[1:3] | a[i > 1] = a[i + 1] #}"), ErrorKind::OutOfBounds);
  EXPECT_EQ(kind_of("{# a[1:3] | a[4] = 1 #}"), ErrorKind::OutOfBounds);
  EXPECT_EQ(kind_of("{# a[1:3] | a[i > 1] = a[i - 1], a[1] = 0 #}"), ErrorKind::Io);
  // A constraint that selects nothing is allowed.
  EXPECT_EQ(kind_of("{# a[1:3] | a[i > 7] = 1 #}"), ErrorKind::Io);
}

TEST(Algebra, PlaceElementOrientations) {
  const TableDecl t2{"t", {Bounds{2000, 2009}, Bounds{1, 5}}};
  const TableDecl t1{"u", {Bounds{-3, 3}}};
  const TableDecl t0{"s", {}};
  const CellAddr o{"S", 3, 4};
  for (std::int64_t y = 2000; y <= 2009; ++y) {
    for (std::int64_t k = 1; k <= 5; ++k) {
      EXPECT_EQ(place_element({"t", o, Orientation::YX}, t2, {y, k}), (CellAddr{"S", 3 + (k - 1), 4 + (y - 2000)}));
      EXPECT_EQ(place_element({"t", o, Orientation::XY}, t2, {y, k}), (CellAddr{"S", 3 + (y - 2000), 4 + (k - 1)}));
    }
  }
  EXPECT_EQ(place_element({"u", o, Orientation::Y}, t1, {0}), (CellAddr{"S", 3, 7}));
  EXPECT_EQ(place_element({"u", o, Orientation::X}, t1, {0}), (CellAddr{"S", 6, 4}));
  EXPECT_EQ(place_element({"s", o, Orientation::Scalar}, t0, {}), o);
}

TEST(Algebra, MapWritesRelativeReferences) {
  const Object o = parse_object("{# u[1:3], s[], r[] | u[all i] = i, s[] = SUM(u[1]:u[3]), r[] = s[] * u[2] #}");
  MappingSpec m;
  m.entries = {{"u", {"S", 2, 2}, Orientation::Y}, {"s", {"S", 2, 5}, Orientation::Scalar}, {"r", {"T", 1, 1}, Orientation::Scalar}};
  const Workbook w = map_table(o, m);
  EXPECT_EQ(w.cell_count(), 5u);
  EXPECT_EQ(std::get<double>(*w.find({"S", 2, 3})), 2.0);
  EXPECT_EQ(to_a1_string(std::get<Formula>(*w.find({"S", 2, 5}))), "SUM(B2:B4)");
  EXPECT_EQ(to_a1_string(std::get<Formula>(*w.find({"T", 1, 1}))), "S!B5 * S!B3");
  const Evaluation v = evaluate(w);
  EXPECT_EQ(std::get<double>(v.at({"T", 1, 1})), 12.0);
}

TEST(Algebra, TransposedLayoutsAgree) {
  const Object o = parse_object(
      "{# b[1:4, 1:3], c[1:4] | b[1, all t] = t, b[y > 1, all t] = b[y - 1, t] + y * t, "
      "c[all y] = SUM(b[y, 1]:b[y, 3]) #}");
  MappingSpec yx, xy;
  yx.entries = {{"b", {"M", 1, 1}, Orientation::YX}, {"c", {"M", 5, 1}, Orientation::Y}};
  xy.entries = {{"b", {"N", 2, 2}, Orientation::XY}, {"c", {"N", 2, 6}, Orientation::X}};
  const Evaluation a = evaluate(map_table(o, yx));
  const Evaluation b = evaluate(map_table(o, xy));
  const ExpandedObject e = expand(o);
  for (const auto& [name, t] : e.tables) {
    for (std::size_t off = 0; off < t.cells.size(); ++off) {
      const auto idx = t.index_of(off);
      EXPECT_EQ(a.at(place_element(*yx.find(name), t.decl, idx)), b.at(place_element(*xy.find(name), t.decl, idx)));
    }
  }
  // b[y, t] = t * y(y+1)/2, so c[y] = 6 * y(y+1)/2.
  for (std::int64_t y = 1; y <= 4; ++y) EXPECT_EQ(std::get<double>(a.at({"M", 5, y})), 3.0 * static_cast<double>(y * (y + 1)));
}

TEST(Algebra, MappingErrors) {
  const Object o = parse_object("{# u[1:3], s[], q[1:2, 1:2] | u[all i] = i, s[] = 1 #}");
  auto kind_of = [&](MappingSpec m) {
    try {
      map_table(o, m);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  MappingSpec ok;
  ok.entries = {{"u", {"S", 1, 1}, Orientation::Y}, {"s", {"S", 2, 1}, Orientation::Scalar}};
  EXPECT_EQ(kind_of(ok), ErrorKind::Io) << "q has no equations, so it needs no place";
  MappingSpec missing;
  missing.entries = {{"u", {"S", 1, 1}, Orientation::Y}};
  EXPECT_EQ(kind_of(missing), ErrorKind::MappingIncomplete);
  MappingSpec overlap;
  overlap.entries = {{"u", {"S", 1, 1}, Orientation::Y}, {"s", {"S", 1, 3}, Orientation::Scalar}};
  EXPECT_EQ(kind_of(overlap), ErrorKind::Overlap);
  MappingSpec wrong_rank;
  wrong_rank.entries = {{"u", {"S", 1, 1}, Orientation::YX}, {"s", {"S", 2, 1}, Orientation::Scalar}};
  EXPECT_EQ(kind_of(wrong_rank), ErrorKind::Layout);
  MappingSpec twice = ok;
  twice.entries.push_back({"u", {"S", 5, 1}, Orientation::X});
  EXPECT_EQ(kind_of(twice), ErrorKind::Layout);
  MappingSpec unknown = ok;
  unknown.entries.push_back({"zz", {"S", 9, 9}, Orientation::Scalar});
  EXPECT_EQ(kind_of(unknown), ErrorKind::MappingIncomplete);
}

TEST(Algebra, AddressUnderflow) {
  EXPECT_THROW(addr_add({"S", 1, 1}, Vec2{-1, 0}), Error);
  const Program p = parse_program("let f(n) be {# s[] | s[] = 1 #} mapping s to S!A1 - vector(n, 0)\nf(1)");
  try {
    evaluate_expr(p, *p.top, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AddressUnderflow);
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(Algebra, UnionModelsKeepsMappings) {
  Model a{parse_object("{# u[1:2] | #}"), {}};
  a.mapping.entries.push_back({"u", {"S", 1, 1}, Orientation::Y});
  Model b{parse_object("{# u[2:4] | u[all i] = i #}"), {}};
  b.mapping.entries.push_back({"u", {"S", 1, 1}, Orientation::Y});
  const Model u = union_models(a, b);
  EXPECT_EQ(u.mapping.entries.size(), 1u);
  EXPECT_EQ(u.object.find_table("u")->dims[0], (Bounds{1, 4}));
}

}  // namespace
}  // namespace shf
