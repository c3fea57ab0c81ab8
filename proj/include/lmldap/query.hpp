// Copyright 2026 The LML-DAP Authors
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

// Row-filter expressions in the dataframe-query dialect.
//
// Grammar (lowest to highest precedence):
//
//   expr       := and_expr  (("or"  | "|") and_expr)*
//   and_expr   := not_expr  (("and" | "&") not_expr)*
//   not_expr   := ("not" | "~") not_expr | primary
//   primary    := "(" expr ")" | predicate
//   predicate  := column cmp literal
//               | literal cmp column            (operator is mirrored)
//               | column ["not"] "in" list
//   list       := "[" [literal ("," literal)*] "]"
//   cmp        := "==" | "!=" | "<" | "<=" | ">" | ">="
//   literal    := number | 'string' | "string" | True | False
//   column     := `backticked name` | bare-word (bare-word)*
//
// Keywords are case-insensitive. A run of adjacent bare words names one
// column: it is matched against the schema joined by single spaces, then
// with underscores in place of the spaces. Chained comparisons, arithmetic,
// @variables and method calls are rejected.
//
// Evaluation uses three-valued logic: a predicate over a missing cell is
// unknown, `not unknown` stays unknown, and only rows that evaluate to true
// are selected.

#ifndef LMLDAP_QUERY_HPP_
#define LMLDAP_QUERY_HPP_

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lmldap/table.hpp"

namespace lmldap {

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };
enum class LogicalOp { kAnd, kOr };

std::string_view to_string(CompareOp op);

using Literal = std::variant<double, std::string, bool>;

struct ColumnRef {
  std::string name;
  std::size_t index = 0;
  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct QueryNode;
using QueryNodePtr = std::shared_ptr<const QueryNode>;

struct Comparison {
  ColumnRef column;
  CompareOp op = CompareOp::kEq;
  Literal value;
};

struct Membership {
  ColumnRef column;
  bool negated = false;
  std::vector<Literal> values;
};

struct Logical {
  LogicalOp op = LogicalOp::kAnd;
  QueryNodePtr left;
  QueryNodePtr right;
};

struct Not {
  QueryNodePtr child;
};

struct QueryNode {
  std::variant<Comparison, Membership, Logical, Not> node;
};

// Immutable expression tree; copies share nodes.
class QueryAst {
 public:
  QueryAst() = default;
  explicit QueryAst(QueryNodePtr root) : root_(std::move(root)) {}

  const QueryNode& root() const { return *root_; }
  const QueryNodePtr& root_ptr() const { return root_; }
  bool empty() const { return root_ == nullptr; }

 private:
  QueryNodePtr root_;
};

bool operator==(const QueryNode& a, const QueryNode& b);
bool operator==(const QueryAst& a, const QueryAst& b);

// Builders, mostly for tests and the oracle backend.
QueryAst make_comparison(ColumnRef column, CompareOp op, Literal value);
QueryAst make_membership(ColumnRef column, bool negated, std::vector<Literal> values);
QueryAst make_logical(LogicalOp op, const QueryAst& left, const QueryAst& right);
QueryAst make_not(const QueryAst& child);

class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    kUnexpectedToken,
    kUnknownColumn,
    kTypeMismatch,
    kUnbalancedParen,
    kEmptyQuery,
  };

  ParseError(Kind kind, std::size_t position, std::string detail);

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }
  const std::string& detail() const { return detail_; }

 private:
  Kind kind_;
  std::size_t position_;
  std::string detail_;
};

std::string_view to_string(ParseError::Kind kind);

QueryAst parse_query(std::string_view text, const Schema& schema);

// Ascending indices of rows where the expression is true.
std::vector<std::size_t> evaluate_query(const QueryAst& ast, const Table& table);

// Canonical text: backticked identifiers, every binary node parenthesized.
std::string render_query(const QueryAst& ast);

}  // namespace lmldap

#endif  // LMLDAP_QUERY_HPP_
