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

#include "lmldap/query.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>

namespace lmldap {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "==";
    case CompareOp::kNe: return "!=";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "?";
}

std::string_view to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::kUnexpectedToken: return "UnexpectedToken";
    case ParseError::Kind::kUnknownColumn: return "UnknownColumn";
    case ParseError::Kind::kTypeMismatch: return "TypeMismatch";
    case ParseError::Kind::kUnbalancedParen: return "UnbalancedParen";
    case ParseError::Kind::kEmptyQuery: return "EmptyQuery";
  }
  return "?";
}

ParseError::ParseError(Kind kind, std::size_t position, std::string detail)
    : std::runtime_error(std::string(to_string(kind)) + " at " +
                         std::to_string(position) + ": " + detail),
      kind_(kind),
      position_(position),
      detail_(std::move(detail)) {}

bool operator==(const QueryNode& a, const QueryNode& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Comparison>) {
          return x.column == y.column && x.op == y.op && x.value == y.value;
        } else if constexpr (std::is_same_v<T, Membership>) {
          return x.column == y.column && x.negated == y.negated &&
                 x.values == y.values;
        } else if constexpr (std::is_same_v<T, Logical>) {
          return x.op == y.op && *x.left == *y.left && *x.right == *y.right;
        } else {
          return *x.child == *y.child;
        }
      },
      a.node);
}

bool operator==(const QueryAst& a, const QueryAst& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return a.root() == b.root();
}

QueryAst make_comparison(ColumnRef column, CompareOp op, Literal value) {
  return QueryAst(std::make_shared<const QueryNode>(
      QueryNode{Comparison{std::move(column), op, std::move(value)}}));
}

QueryAst make_membership(ColumnRef column, bool negated,
                         std::vector<Literal> values) {
  return QueryAst(std::make_shared<const QueryNode>(
      QueryNode{Membership{std::move(column), negated, std::move(values)}}));
}

QueryAst make_logical(LogicalOp op, const QueryAst& left, const QueryAst& right) {
  return QueryAst(std::make_shared<const QueryNode>(
      QueryNode{Logical{op, left.root_ptr(), right.root_ptr()}}));
}

QueryAst make_not(const QueryAst& child) {
  return QueryAst(
      std::make_shared<const QueryNode>(QueryNode{Not{child.root_ptr()}}));
}

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok {
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kComma,
  kCompare,
  kAnd,
  kOr,
  kNot,
  kIn,
  kNumber,
  kString,
  kBool,
  kWord,
  kQuotedIdent,
  kEnd,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::size_t pos = 0;
  std::string text;  // word, identifier or string payload
  double number = 0.0;
  bool boolean = false;
  CompareOp op = CompareOp::kEq;
};

bool is_word_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool is_word_char(unsigned char c) {
  return is_word_start(c) || (c >= '0' && c <= '9');
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (i_ >= src_.size()) {
        out.push_back(Token{Tok::kEnd, src_.size(), {}});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  [[noreturn]] void fail(std::size_t pos, std::string detail) const {
    throw ParseError(ParseError::Kind::kUnexpectedToken, pos, std::move(detail));
  }

  void skip_space() {
    while (i_ < src_.size() &&
           (src_[i_] == ' ' || src_[i_] == '\t' || src_[i_] == '\n' ||
            src_[i_] == '\r')) {
      ++i_;
    }
  }

  char peek(std::size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }

  bool number_ahead(std::size_t from) const {
    char c = from < src_.size() ? src_[from] : '\0';
    char d = from + 1 < src_.size() ? src_[from + 1] : '\0';
    return is_digit(c) || (c == '.' && is_digit(d));
  }

  Token next() {
    const std::size_t start = i_;
    const char c = src_[i_];
    auto single = [&](Tok k) {
      ++i_;
      return Token{k, start, {}};
    };
    switch (c) {
      case '(': return single(Tok::kLParen);
      case ')': return single(Tok::kRParen);
      case '[': return single(Tok::kLBracket);
      case ']': return single(Tok::kRBracket);
      case ',': return single(Tok::kComma);
      case '&': return single(Tok::kAnd);
      case '|': return single(Tok::kOr);
      case '~': return single(Tok::kNot);
      case '=':
        if (peek(1) == '=') return compare(CompareOp::kEq, 2);
        fail(start, "assignment '=' is not a comparison; use '=='");
      case '!':
        if (peek(1) == '=') return compare(CompareOp::kNe, 2);
        fail(start, "unexpected '!'");
      case '<':
        return peek(1) == '=' ? compare(CompareOp::kLe, 2) : compare(CompareOp::kLt, 1);
      case '>':
        return peek(1) == '=' ? compare(CompareOp::kGe, 2) : compare(CompareOp::kGt, 1);
      case '\'':
      case '"': return string_literal(c);
      case '`': return quoted_ident();
      case '@': fail(start, "variable references are not supported");
      case '+':
      case '-':
        if (number_ahead(i_ + 1)) return number();
        fail(start, "arithmetic is not supported");
      case '*':
      case '/':
      case '%':
        fail(start, "arithmetic is not supported");
      default: break;
    }
    if (number_ahead(i_)) return number();
    if (c == '.') fail(start, "method calls and attribute access are not supported");
    if (is_word_start(static_cast<unsigned char>(c))) return word();
    fail(start, std::string("unexpected character '") + c + "'");
  }

  Token compare(CompareOp op, std::size_t len) {
    Token t{Tok::kCompare, i_, {}};
    t.op = op;
    i_ += len;
    return t;
  }

  Token number() {
    const std::size_t start = i_;
    if (peek() == '+' || peek() == '-') ++i_;
    while (is_digit(peek())) ++i_;
    if (peek() == '.') {
      ++i_;
      while (is_digit(peek())) ++i_;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(peek(1)) ||
         ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
      i_ += 2;
      while (is_digit(peek())) ++i_;
    }
    if (is_word_char(static_cast<unsigned char>(peek())) || peek() == '.') {
      fail(i_, "malformed number");
    }
    auto v = parse_decimal(src_.substr(start, i_ - start));
    if (!v) fail(start, "malformed number");
    Token t{Tok::kNumber, start, {}};
    t.number = *v;
    return t;
  }

  Token string_literal(char quote) {
    const std::size_t start = i_++;
    std::string payload;
    while (i_ < src_.size() && src_[i_] != quote) {
      if (src_[i_] == '\\' && i_ + 1 < src_.size()) {
        payload += src_[i_ + 1];
        i_ += 2;
        continue;
      }
      payload += src_[i_++];
    }
    if (i_ >= src_.size()) fail(start, "unterminated string literal");
    ++i_;
    Token t{Tok::kString, start, {}};
    t.text = std::move(payload);
    return t;
  }

  Token quoted_ident() {
    const std::size_t start = i_++;
    std::string name;
    for (;;) {
      if (i_ >= src_.size()) fail(start, "unterminated backtick identifier");
      if (src_[i_] == '`') {
        if (peek(1) == '`') {
          name += '`';
          i_ += 2;
          continue;
        }
        ++i_;
        break;
      }
      name += src_[i_++];
    }
    Token t{Tok::kQuotedIdent, start, {}};
    t.text = std::move(name);
    return t;
  }

  Token word() {
    const std::size_t start = i_;
    while (is_word_char(static_cast<unsigned char>(peek()))) ++i_;
    std::string_view w = src_.substr(start, i_ - start);
    const std::string lw = lower(w);
    Token t{Tok::kWord, start, {}};
    if (lw == "and") t.kind = Tok::kAnd;
    else if (lw == "or") t.kind = Tok::kOr;
    else if (lw == "not") t.kind = Tok::kNot;
    else if (lw == "in") t.kind = Tok::kIn;
    else if (lw == "true" || lw == "false") {
      t.kind = Tok::kBool;
      t.boolean = lw == "true";
    } else {
      t.text = std::string(w);
    }
    if (peek() == '.' && !number_ahead(i_)) {
      fail(i_, "method calls and attribute access are not supported");
    }
    if (peek() == '@') fail(i_, "variable references are not supported");
    return t;
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

// ---------------------------------------------------------------- parser

CompareOp mirror(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return CompareOp::kGt;
    case CompareOp::kLe: return CompareOp::kGe;
    case CompareOp::kGt: return CompareOp::kLt;
    case CompareOp::kGe: return CompareOp::kLe;
    default: return op;
  }
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Schema& schema)
      : toks_(std::move(tokens)), schema_(schema) {}

  QueryAst parse() {
    QueryAst ast = parse_or();
    const Token& t = cur();
    if (t.kind == Tok::kRParen) {
      throw ParseError(ParseError::Kind::kUnbalancedParen, t.pos,
                       "unmatched ')'");
    }
    if (t.kind != Tok::kEnd) unexpected(t, "expected end of query");
    return ast;
  }

 private:
  const Token& cur() const { return toks_[k_]; }
  const Token& advance() { return toks_[k_++]; }

  [[noreturn]] void unexpected(const Token& t, const std::string& detail) const {
    throw ParseError(ParseError::Kind::kUnexpectedToken, t.pos, detail);
  }

  QueryAst parse_or() {
    QueryAst left = parse_and();
    while (cur().kind == Tok::kOr) {
      advance();
      left = make_logical(LogicalOp::kOr, left, parse_and());
    }
    return left;
  }

  QueryAst parse_and() {
    QueryAst left = parse_not();
    while (cur().kind == Tok::kAnd) {
      advance();
      left = make_logical(LogicalOp::kAnd, left, parse_not());
    }
    return left;
  }

  QueryAst parse_not() {
    if (cur().kind == Tok::kNot) {
      advance();
      return make_not(parse_not());
    }
    return parse_primary();
  }

  QueryAst parse_primary() {
    const Token& t = cur();
    if (t.kind == Tok::kLParen) {
      advance();
      QueryAst inner = parse_or();
      if (cur().kind != Tok::kRParen) {
        if (cur().kind == Tok::kEnd) {
          throw ParseError(ParseError::Kind::kUnbalancedParen, t.pos,
                           "'(' is never closed");
        }
        unexpected(cur(), "expected ')'");
      }
      advance();
      return inner;
    }
    if (t.kind == Tok::kWord || t.kind == Tok::kQuotedIdent) {
      return column_first();
    }
    if (t.kind == Tok::kNumber || t.kind == Tok::kString || t.kind == Tok::kBool) {
      return literal_first();
    }
    if (t.kind == Tok::kRParen) {
      throw ParseError(ParseError::Kind::kUnbalancedParen, t.pos, "unmatched ')'");
    }
    if (t.kind == Tok::kEnd) unexpected(t, "unexpected end of query");
    unexpected(t, "expected a column, literal or '('");
  }

  ColumnRef column() {
    const Token& first = cur();
    if (first.kind == Tok::kQuotedIdent) {
      advance();
      auto idx = schema_.find(first.text);
      if (!idx) {
        throw ParseError(ParseError::Kind::kUnknownColumn, first.pos,
                         "no column named '" + first.text + "'");
      }
      return ColumnRef{first.text, *idx};
    }
    std::string spaced = advance().text;
    while (cur().kind == Tok::kWord) {
      spaced += ' ';
      spaced += advance().text;
    }
    if (auto idx = schema_.find(spaced)) return ColumnRef{spaced, *idx};
    std::string underscored = spaced;
    std::replace(underscored.begin(), underscored.end(), ' ', '_');
    if (auto idx = schema_.find(underscored)) return ColumnRef{underscored, *idx};
    throw ParseError(ParseError::Kind::kUnknownColumn, first.pos,
                     "no column named '" + spaced + "'");
  }

  Literal literal() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::kNumber: advance(); return t.number;
      case Tok::kString: advance(); return t.text;
      case Tok::kBool: advance(); return t.boolean;
      default: unexpected(t, "expected a literal");
    }
  }

  void check_type(const ColumnRef& col, const Literal& value, std::size_t pos,
                  bool ordering) const {
    const auto kind = schema_.column(col.index).kind;
    const bool ok = kind == ColumnKind::kNumeric
                        ? std::holds_alternative<double>(value)
                        : std::holds_alternative<std::string>(value) ||
                              (std::holds_alternative<bool>(value) && !ordering);
    if (!ok) {
      throw ParseError(ParseError::Kind::kTypeMismatch, pos,
                       "column '" + col.name + "' is " +
                           std::string(to_string(kind)) +
                           " and cannot be compared with this literal");
    }
  }

  void reject_chain() const {
    if (cur().kind == Tok::kCompare) {
      unexpected(cur(), "chained comparisons are not supported");
    }
  }

  QueryAst column_first() {
    ColumnRef col = column();
    const Token& t = cur();
    if (t.kind == Tok::kCompare) {
      const CompareOp op = advance().op;
      const std::size_t pos = cur().pos;
      Literal value = literal();
      check_type(col, value, pos, op != CompareOp::kEq && op != CompareOp::kNe);
      reject_chain();
      return make_comparison(std::move(col), op, std::move(value));
    }
    bool negated = false;
    if (t.kind == Tok::kNot) {
      advance();
      negated = true;
      if (cur().kind != Tok::kIn) unexpected(cur(), "expected 'in' after 'not'");
    }
    if (cur().kind == Tok::kIn) {
      advance();
      return make_membership(std::move(col), negated, list(col));
    }
    unexpected(t, "expected a comparison operator or 'in' after column '" +
                      col.name + "'");
  }

  std::vector<Literal> list(const ColumnRef& col) {
    if (cur().kind != Tok::kLBracket) unexpected(cur(), "expected '['");
    advance();
    std::vector<Literal> values;
    if (cur().kind == Tok::kRBracket) {
      advance();
      return values;
    }
    for (;;) {
      const std::size_t pos = cur().pos;
      Literal v = literal();
      check_type(col, v, pos, false);
      values.push_back(std::move(v));
      if (cur().kind == Tok::kComma) {
        advance();
        continue;
      }
      if (cur().kind == Tok::kRBracket) {
        advance();
        return values;
      }
      unexpected(cur(), "expected ',' or ']'");
    }
  }

  QueryAst literal_first() {
    const std::size_t pos = cur().pos;
    Literal value = literal();
    if (cur().kind != Tok::kCompare) unexpected(cur(), "expected a comparison operator");
    const CompareOp op = mirror(advance().op);
    if (cur().kind != Tok::kWord && cur().kind != Tok::kQuotedIdent) {
      unexpected(cur(), "expected a column");
    }
    ColumnRef col = column();
    check_type(col, value, pos, op != CompareOp::kEq && op != CompareOp::kNe);
    reject_chain();
    return make_comparison(std::move(col), op, std::move(value));
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
  const Schema& schema_;
};

// ------------------------------------------------------------- evaluator

// Per-row truth in three-valued logic: true, false or unknown.
struct Mask {
  std::vector<std::uint8_t> is_true;
  std::vector<std::uint8_t> is_unknown;
};

template <typename T>
bool compare(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::kEq: return a == b;
    case CompareOp::kNe: return a != b;
    case CompareOp::kLt: return a < b;
    case CompareOp::kLe: return a <= b;
    case CompareOp::kGt: return a > b;
    case CompareOp::kGe: return a >= b;
  }
  return false;
}

bool bool_text_matches(std::string_view cell, bool value) {
  return lower(cell) == (value ? "true" : "false");
}

bool literal_matches(const Table& table, std::size_t row, std::size_t col,
                     CompareOp op, const Literal& lit) {
  if (const auto* d = std::get_if<double>(&lit)) {
    return compare(table.number(row, col), op, *d);
  }
  if (const auto* s = std::get_if<std::string>(&lit)) {
    return compare(std::string_view(table.cell(row, col)), op, std::string_view(*s));
  }
  const bool eq = bool_text_matches(table.cell(row, col), std::get<bool>(lit));
  return op == CompareOp::kEq ? eq : !eq;
}

Mask eval(const QueryNode& node, const Table& table) {
  const std::size_t n = table.row_count();
  Mask m{std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0)};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          const auto& text = table.column_text(x.column.index);
          for (std::size_t r = 0; r < n; ++r) {
            if (text[r].empty()) {
              m.is_unknown[r] = 1;
            } else {
              m.is_true[r] = literal_matches(table, r, x.column.index, x.op, x.value);
            }
          }
        } else if constexpr (std::is_same_v<T, Membership>) {
          const auto& text = table.column_text(x.column.index);
          for (std::size_t r = 0; r < n; ++r) {
            if (text[r].empty()) {
              m.is_unknown[r] = 1;
              continue;
            }
            bool hit = std::any_of(x.values.begin(), x.values.end(), [&](const Literal& v) {
              return literal_matches(table, r, x.column.index, CompareOp::kEq, v);
            });
            m.is_true[r] = hit != x.negated;
          }
        } else if constexpr (std::is_same_v<T, Logical>) {
          Mask a = eval(*x.left, table);
          Mask b = eval(*x.right, table);
          for (std::size_t r = 0; r < n; ++r) {
            const bool a_false = !a.is_true[r] && !a.is_unknown[r];
            const bool b_false = !b.is_true[r] && !b.is_unknown[r];
            bool t, f;
            if (x.op == LogicalOp::kAnd) {
              t = a.is_true[r] && b.is_true[r];
              f = a_false || b_false;
            } else {
              t = a.is_true[r] || b.is_true[r];
              f = a_false && b_false;
            }
            m.is_true[r] = t;
            m.is_unknown[r] = !t && !f;
          }
        } else {
          Mask c = eval(*x.child, table);
          for (std::size_t r = 0; r < n; ++r) {
            m.is_unknown[r] = c.is_unknown[r];
            m.is_true[r] = !c.is_true[r] && !c.is_unknown[r];
          }
        }
      },
      node.node);
  return m;
}

// -------------------------------------------------------------- renderer

std::string render_literal(const Literal& lit) {
  if (const auto* d = std::get_if<double>(&lit)) return format_decimal(*d);
  if (const auto* b = std::get_if<bool>(&lit)) return *b ? "True" : "False";
  std::string out = "'";
  for (char c : std::get<std::string>(lit)) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string render_column(const ColumnRef& col) {
  std::string out = "`";
  for (char c : col.name) {
    if (c == '`') out += '`';
    out += c;
  }
  out += '`';
  return out;
}

std::string render_node(const QueryNode& node) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          return render_column(x.column) + " " + std::string(to_string(x.op)) + " " +
                 render_literal(x.value);
        } else if constexpr (std::is_same_v<T, Membership>) {
          std::string out = render_column(x.column) + (x.negated ? " not in [" : " in [");
          for (std::size_t i = 0; i < x.values.size(); ++i) {
            if (i) out += ", ";
            out += render_literal(x.values[i]);
          }
          return out + "]";
        } else if constexpr (std::is_same_v<T, Logical>) {
          return "(" + render_node(*x.left) +
                 (x.op == LogicalOp::kAnd ? " and " : " or ") +
                 render_node(*x.right) + ")";
        } else {
          return "not (" + render_node(*x.child) + ")";
        }
      },
      node.node);
}

}  // namespace

QueryAst parse_query(std::string_view text, const Schema& schema) {
  const bool blank = std::all_of(text.begin(), text.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
  if (blank) throw ParseError(ParseError::Kind::kEmptyQuery, 0, "query is empty");
  Parser parser(Lexer(text).run(), schema);
  return parser.parse();
}

std::vector<std::size_t> evaluate_query(const QueryAst& ast, const Table& table) {
  std::vector<std::size_t> out;
  if (ast.empty()) return out;
  Mask m = eval(ast.root(), table);
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    if (m.is_true[r]) out.push_back(r);
  }
  return out;
}

std::string render_query(const QueryAst& ast) {
  return ast.empty() ? std::string() : render_node(ast.root());
}

}  // namespace lmldap
