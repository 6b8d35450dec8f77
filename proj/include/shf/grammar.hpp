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

#include <string_view>

namespace shf {

/// EBNF of model files, as printed by `shf --grammar`.
inline constexpr std::string_view kGrammar = R"ebnf(program    = { definition } [ objexpr ] { layout } ;
definition = "let" name [ "(" [ name { "," name } ] ")" ] "be" objexpr ;

objexpr    = objterm { ( "\/" | "union" ) objterm } ;
objterm    = objprim { "mapping" clause { "," clause } } ;
objprim    = object | "(" objexpr ")" | name [ "(" [ intexpr { "," intexpr } ] ")" ] ;
clause     = name "to" address [ "by" orient ] ;
orient     = "yx" | "xy" | "y" | "x" ;

object     = "{#" [ decl { "," decl } ] "|" [ equation { "," equation } ] "#}" ;
decl       = name "[" [ intexpr ":" intexpr { "," intexpr ":" intexpr } ] "]" ;
equation   = name "[" [ lhsindex { "," lhsindex } ] "]" "=" formula ;
lhsindex   = "all" name | name relop intexpr | intexpr ;
relop      = ">" | "<" | "=" | ">=" | "<=" ;

formula    = concat { ( "=" | "<>" | "<" | "<=" | ">" | ">=" ) concat } ;
concat     = sum { "&" sum } ;
sum        = product { ( "+" | "-" ) product } ;
product    = unary { ( "*" | "/" ) unary } ;
unary      = "-" unary | primary ;
primary    = number | string | cellref [ ":" cellref ]
           | name "[" indices "]" [ ":" name "[" indices "]" ]
           | name "(" [ formula { "," formula } ] ")"
           | name | "(" formula ")" ;
indices    = [ intexpr { "," intexpr } ] ;
cellref    = sheet "!" [ "$" ] letters [ "$" ] digits ;

intexpr    = intterm { ( "+" | "-" ) intterm } ;
intterm    = intfactor { "*" intfactor } ;
intfactor  = integer | name | "-" intfactor | "(" intexpr ")" ;

layout     = ( "grid" "(" "[" [ items { "," items } ] "]" ")"
             | "row" "(" items ")" ) "@" address ;
items      = "[" [ item { "," item } ] "]" ;
item       = quoted | "skip" [ "(" intexpr "," intexpr ")" ] | name [ "by" orient ] ;
address    = ( cellref | letters digits | "(" address ")" )
             { ( "+" | "-" ) "vector" "(" intexpr "," intexpr ")" } ;

string     = '"' { char | '""' } '"' ;
quoted     = "'" { char | "''" } "'" ;
comment    = "--" { char } newline ;
)ebnf";

}  // namespace shf
