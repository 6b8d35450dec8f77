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

#include <random>
#include <string>

#include "generators.hpp"
#include "shf/algebra.hpp"
#include "shf/notation.hpp"

namespace shf {
namespace {

using testing::Gen;
using testing::random_object;

TEST(Notation, UnionWorkedExample) {
  const Object a = parse_object("{# a[1:1], b[1:1] | a[1]=b[1] #}");
  const Object b = parse_object("{# a[1:2], b[2:3], c[] | c[]=a[2], a[2]=a[1] #}");
  const Object want = parse_object("{# a[1:2], b[1:3], c[] | a[1]=b[1], c[]=a[2], a[2]=a[1] #}");
  const Object u = union_objects(a, b);
  EXPECT_EQ(u, want);
  EXPECT_EQ(u.equations().size(), 3u);
  EXPECT_EQ(u.find_table("b")->dims[0], (Bounds{1, 3}));
  EXPECT_EQ(u.find_table("c")->rank(), 0u);
}

TEST(Notation, ShowIsCanonical) {
  const Object o = parse_object("{# b[1:2], a[] | b[all i] = a[] * i, a[] = 3 #}");
  EXPECT_EQ(show_object(o), "{#\n  a[],\n  b[1:2]\n|\n  a[] = 3,\n  b[all i] = a[] * i\n#}");
  EXPECT_EQ(show_object(Object{}), "{# | #}");
}

TEST(Notation, QuantifierForms) {
  const Object o = parse_object(
      "{# t[1:9, 1:3] | t[1, all j] = j, t[i > 1, all j] = t[i - 1, j] + 1, t[i < 3, 2] = 0 #}");
  ASSERT_EQ(o.equations().size(), 3u);
  EXPECT_EQ(parse_object(show_object(o)), o);
}

TEST(Notation, ParseShowRoundTripOnRandomObjects) {
  Gen g(11);
  for (int i = 0; i < 1000; ++i) {
    const Object o = random_object(g);
    const std::string shown = show_object(o);
    Object back;
    ASSERT_NO_THROW(back = parse_object(shown)) << shown;
    ASSERT_EQ(back, o) << shown;
    ASSERT_EQ(show_object(back), shown);
  }
}

// Union is only defined when ranks agree; draw pairs until they do.
bool try_union(const Object& a, const Object& b, Object& out) {
  try {
    out = union_objects(a, b);
    return true;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnionIncompatible);
    return false;
  }
}

TEST(Notation, UnionLaws) {
  Gen g(12);
  int checked = 0;
  for (int i = 0; i < 1500; ++i) {
    const Object a = random_object(g);
    const Object b = random_object(g);
    const Object c = random_object(g);
    EXPECT_EQ(union_objects(a, a), a);
    EXPECT_EQ(union_objects(a, Object{}), a);
    Object ab, ba, ab_c, bc, a_bc;
    if (!try_union(a, b, ab)) continue;
    ASSERT_TRUE(try_union(b, a, ba));
    EXPECT_EQ(ab, ba) << show_object(a) << "\n" << show_object(b);
    if (!try_union(ab, c, ab_c)) continue;
    ASSERT_TRUE(try_union(b, c, bc));
    ASSERT_TRUE(try_union(a, bc, a_bc));
    EXPECT_EQ(ab_c, a_bc);
    EXPECT_EQ(union_objects(ab, a), ab);
    ++checked;
  }
  EXPECT_GT(checked, 300);
}

TEST(Notation, UnionRankMismatch) {
  const Object a = parse_object("{# t[1:2] | #}");
  const Object b = parse_object("{# t[1:2, 1:2] | #}");
  try {
    union_objects(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnionIncompatible);
  }
}

TEST(Notation, FunctionApplication) {
  const Program p = parse_program(
      "-- two tables\n"
      "let f(n) be {# u[1:n], s[] | u[all i] = i, s[] = SUM(u[1]:u[n]) #}\n"
      "let g(n, m) be f(n) \\/ {# v[1:m] | v[all k] = s[] + k #}\n"
      "g(4, 2)\n");
  ASSERT_EQ(p.definitions.size(), 2u);
  ASSERT_TRUE(p.top);
  const Model m = evaluate_expr(p, *p.top, {});
  EXPECT_EQ(m.object.find_table("u")->dims[0], (Bounds{1, 4}));
  EXPECT_EQ(m.object.find_table("v")->dims[0], (Bounds{1, 2}));
  EXPECT_EQ(m.object.equations().size(), 3u);
  const Model direct = apply_function(p, *p.find("g"), {4, 2});
  EXPECT_EQ(direct.object, m.object);
  EXPECT_EQ(to_model_string(*expand(m.object).tables.at("v").cells[1]), "s[] + 2");
}

TEST(Notation, UnionOperandsMayShareTables) {
  const Program p = parse_program(
      "let core(n) be {# u[1:n] | u[all i] = i #}\n"
      "let feature(n) be {# w[1:n] | w[all i] = u[i] * 2, u[1] = 0 #}\n"
      "core(3) \\/ feature(3)");
  const Model m = evaluate_expr(p, *p.top, {});
  EXPECT_EQ(m.object.equations().size(), 3u);
  const Program alone = parse_program("let feature(n) be {# w[1:n] | w[all i] = u[i] #}\nfeature(3)");
  try {
    expand(evaluate_expr(alone, *alone.top, {}).object);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Semantic);
  }
}

TEST(Notation, WrongArity) {
  try {
    parse_program("let f(n) be {# u[1:n] | #}\nf(1, 2)");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 2);
  }
  const Program p = parse_program("let f(n) be {# u[1:n] | #}");
  EXPECT_THROW(apply_function(p, p.definitions[0], {}), Error);
}

TEST(Notation, EmptyDimensionIsAnError) {
  const Program p = parse_program("let f(a, b) be {# u[a:b] | #}");
  try {
    apply_function(p, p.definitions[0], {2010, 2000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDimension);
    EXPECT_NE(e.detail().find("u"), std::string::npos);
  }
  EXPECT_NO_THROW(apply_function(p, p.definitions[0], {2000, 2000}));
}

TEST(Notation, MappingClauses) {
  const Program p = parse_program(
      "let f(n) be {# u[1:n, 1:2], s[] | u[all i, all j] = i * j, s[] = 1 #}\n"
      "  mapping u to Out!B2 + vector(n, 0) by xy, s to Out!A1\n"
      "f(3)");
  const Model m = evaluate_expr(p, *p.top, {});
  ASSERT_EQ(m.mapping.entries.size(), 2u);
  const MappingEntry* u = m.mapping.find("u");
  ASSERT_NE(u, nullptr);
  EXPECT_EQ(u->origin, (CellAddr{"Out", 5, 2}));
  EXPECT_EQ(u->orientation, Orientation::XY);
  EXPECT_EQ(m.mapping.find("s")->orientation, Orientation::Scalar);
}

TEST(Notation, SemanticErrors) {
  auto kind_of = [](const char* text) {
    try {
      parse_object(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind_of("{# a[1:2] | b[1] = 1 #}"), ErrorKind::Semantic);
  EXPECT_EQ(kind_of("{# a[1:2] | a[1, 2] = 1 #}"), ErrorKind::Semantic);
  EXPECT_EQ(kind_of("{# a[1:2] | a[all i] = j #}"), ErrorKind::Semantic);
  EXPECT_EQ(kind_of("{# a[1:2] | a[1] = a[1, 1] #}"), ErrorKind::Semantic);
  EXPECT_EQ(kind_of("{# a[1:2] | a[1] = 1 "), ErrorKind::Parse);
  EXPECT_EQ(kind_of("{# a[1:2] | a[1] = FOO(1) #}"), ErrorKind::Parse);
}

TEST(Notation, ParseErrorPositions) {
  try {
    parse_program("let f(n) be {# u[1:n] |\n  u[all i] = i +\n#}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 1);
  }
}

TEST(Notation, RandomBytesOnlyRaiseErrors) {
  Gen g(13);
  const std::string alphabet = "{}#|[]:,=()+-*/&<>!$'\" \nabcxyzAB019_letbeallmappingtovectorby\\/";
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const auto n = g.range(0, 60);
    for (std::int64_t k = 0; k < n; ++k) {
      s += g.chance(0.05) ? static_cast<char>(g.range(0, 255))
                          : alphabet[static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(alphabet.size()) - 1))];
    }
    try {
      parse_program(s);
    } catch (const Error&) {
    }
  }
}

TEST(Notation, MutatedObjectsOnlyRaiseErrors) {
  Gen g(14);
  for (int i = 0; i < 2000; ++i) {
    std::string s = show_object(random_object(g));
    const auto pos = static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(s.size()) - 1));
    if (g.chance(0.5)) {
      s.erase(pos, 1);
    } else {
      s.insert(pos, 1, "[]{}#|,:"[g.range(0, 7)]);
    }
    try {
      parse_object(s);
    } catch (const Error&) {
    }
  }
}

}  // namespace
}  // namespace shf
