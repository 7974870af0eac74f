// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/sql.hpp"

#include <algorithm>
#include <cctype>

#include "hedb/error.hpp"

namespace hedb {

namespace {

enum class Tok {
  Ident,
  Number,
  String,
  Star,
  LParen,
  RParen,
  Comma,
  Eq,
  Lt,
  Gt,
  End,
};

struct Token {
  Tok type = Tok::End;
  std::string text;     // ident name / string body / digits
  uint64_t number = 0;  // Tok::Number
  size_t offset = 0;
};

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    cur_ = Token{};
    cur_.offset = pos_;
    if (pos_ >= text_.size()) {
      cur_.type = Tok::End;
      return;
    }
    const char c = text_[pos_];
    switch (c) {
      case '*': cur_.type = Tok::Star; ++pos_; return;
      case '(': cur_.type = Tok::LParen; ++pos_; return;
      case ')': cur_.type = Tok::RParen; ++pos_; return;
      case ',': cur_.type = Tok::Comma; ++pos_; return;
      case '=': cur_.type = Tok::Eq; ++pos_; return;
      case '<': cur_.type = Tok::Lt; ++pos_; return;
      case '>': cur_.type = Tok::Gt; ++pos_; return;
      case '\'': {
        size_t end = text_.find('\'', pos_ + 1);
        if (end == std::string::npos)
          throw Error(ErrorCode::SyntaxError, "unterminated string literal",
                      pos_);
        cur_.type = Tok::String;
        cur_.text = text_.substr(pos_ + 1, end - pos_ - 1);
        pos_ = end + 1;
        return;
      }
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur_.type = Tok::Number;
      uint64_t v = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        const uint64_t d = static_cast<uint64_t>(text_[pos_] - '0');
        if (v > (UINT64_MAX - d) / 10)
          throw Error(ErrorCode::ValueOverflow,
                      "numeric literal does not fit in 64 bits", cur_.offset);
        v = v * 10 + d;
        cur_.text.push_back(text_[pos_]);
        ++pos_;
      }
      cur_.number = v;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      cur_.type = Tok::Ident;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        cur_.text.push_back(text_[pos_++]);
      return;
    }
    throw Error(ErrorCode::SyntaxError,
                std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& text_;
  size_t pos_ = 0;
  Token cur_;
};

bool is_keyword(const Token& t, const char* kw) {
  return t.type == Tok::Ident && upper(t.text) == kw;
}

[[noreturn]] void syntax_error(const Token& t, const std::string& expected) {
  std::string got;
  switch (t.type) {
    case Tok::End: got = "end of input"; break;
    case Tok::String: got = "'" + t.text + "'"; break;
    default: got = "'" + t.text + "'"; break;
  }
  if (t.text.empty() && t.type != Tok::End) got = "symbol";
  throw Error(ErrorCode::SyntaxError, "expected " + expected + ", got " + got,
              t.offset);
}

Token expect_keyword(Lexer& lx, const char* kw) {
  Token t = lx.take();
  if (!is_keyword(t, kw)) syntax_error(t, std::string("'") + kw + "'");
  return t;
}

Token expect_ident(Lexer& lx, const char* what) {
  Token t = lx.take();
  if (t.type != Tok::Ident) syntax_error(t, what);
  // Reserved words can't double as identifiers here.
  static const char* kReserved[] = {"SELECT", "UPDATE", "DELETE", "FROM",
                                    "WHERE",  "SET",    "COUNT",  "AVG"};
  const std::string u = upper(t.text);
  for (const char* kw : kReserved)
    if (u == kw) syntax_error(t, what);
  return t;
}

void expect(Lexer& lx, Tok type, const char* what) {
  Token t = lx.take();
  if (t.type != type) syntax_error(t, what);
}

PlainValue literal_of(const Token& t) {
  if (t.type == Tok::Number) return PlainValue::of_uint(t.number);
  return PlainValue::of_string(t.text);
}

SqlPredicate parse_predicate(Lexer& lx) {
  SqlPredicate pred;
  Token col = expect_ident(lx, "a column name");
  pred.column = col.text;
  pred.column_offset = col.offset;
  Token op = lx.take();
  switch (op.type) {
    case Tok::Eq: pred.op = '='; break;
    case Tok::Lt: pred.op = '<'; break;
    case Tok::Gt: pred.op = '>'; break;
    default: syntax_error(op, "an operator (=, < or >)");
  }
  Token lit = lx.take();
  if (lit.type != Tok::Number && lit.type != Tok::String)
    syntax_error(lit, "a literal");
  pred.literal = literal_of(lit);
  pred.literal_offset = lit.offset;
  return pred;
}

void finish(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.type == Tok::End) return;
  static const char* kOutside[] = {"AND", "OR",    "JOIN",  "ORDER",
                                   "GROUP", "LIMIT", "HAVING", "LIKE",
                                   "NOT", "IN",    "UNION"};
  if (t.type == Tok::Ident) {
    const std::string u = upper(t.text);
    for (const char* kw : kOutside)
      if (u == kw)
        throw Error(ErrorCode::UnsupportedFeature,
                    "'" + t.text +
                        "' is outside the supported subset: a query has "
                        "exactly one predicate",
                    t.offset);
  }
  throw Error(ErrorCode::SyntaxError, "unexpected trailing input", t.offset);
}

}  // namespace

QueryAst parse_query(const std::string& text) {
  Lexer lx(text);
  QueryAst ast;

  Token head = lx.take();
  if (is_keyword(head, "SELECT")) {
    const Token& next = lx.peek();
    if (next.type == Tok::Star) {
      lx.take();
      ast.kind = StatementKind::Select;
    } else if (is_keyword(next, "COUNT")) {
      lx.take();
      expect(lx, Tok::LParen, "'('");
      expect(lx, Tok::Star, "'*'");
      expect(lx, Tok::RParen, "')'");
      ast.kind = StatementKind::Count;
    } else if (is_keyword(next, "AVG")) {
      lx.take();
      expect(lx, Tok::LParen, "'('");
      Token target = expect_ident(lx, "a column name");
      expect(lx, Tok::RParen, "')'");
      ast.kind = StatementKind::Avg;
      ast.target_column = target.text;
    } else if (next.type == Tok::Ident) {
      throw Error(ErrorCode::UnsupportedFeature,
                  "column projections are outside the supported subset; "
                  "use SELECT *",
                  next.offset);
    } else {
      syntax_error(next, "'*', COUNT(*) or AVG(column)");
    }
    Token from = expect_keyword(lx, "FROM");
    (void)from;
    Token table = expect_ident(lx, "a table name");
    ast.table = table.text;
    ast.table_offset = table.offset;
  } else if (is_keyword(head, "UPDATE")) {
    ast.kind = StatementKind::Update;
    Token table = expect_ident(lx, "a table name");
    ast.table = table.text;
    ast.table_offset = table.offset;
    expect_keyword(lx, "SET");
    while (true) {
      SqlAssignment a;
      Token col = expect_ident(lx, "a column name");
      a.column = col.text;
      a.column_offset = col.offset;
      expect(lx, Tok::Eq, "'='");
      Token lit = lx.take();
      if (lit.type != Tok::Number && lit.type != Tok::String)
        syntax_error(lit, "a literal");
      a.literal = literal_of(lit);
      a.literal_offset = lit.offset;
      ast.assignments.push_back(std::move(a));
      if (lx.peek().type != Tok::Comma) break;
      lx.take();
    }
  } else if (is_keyword(head, "DELETE")) {
    ast.kind = StatementKind::Delete;
    expect_keyword(lx, "FROM");
    Token table = expect_ident(lx, "a table name");
    ast.table = table.text;
    ast.table_offset = table.offset;
  } else if (head.type == Tok::Ident &&
             (upper(head.text) == "INSERT" || upper(head.text) == "CREATE" ||
              upper(head.text) == "DROP" || upper(head.text) == "JOIN")) {
    throw Error(ErrorCode::UnsupportedFeature,
                "'" + head.text + "' is outside the supported subset",
                head.offset);
  } else {
    syntax_error(head, "SELECT, UPDATE or DELETE");
  }

  expect_keyword(lx, "WHERE");
  ast.pred = parse_predicate(lx);
  finish(lx);
  return ast;
}

namespace {

std::string render_literal(const PlainValue& v) {
  if (v.kind == ColumnKind::Uint) return std::to_string(v.uint_value);
  return "'" + v.string_value + "'";
}

}  // namespace

std::string render_query(const QueryAst& ast) {
  std::string out;
  switch (ast.kind) {
    case StatementKind::Select: out = "SELECT * FROM " + ast.table; break;
    case StatementKind::Count:
      out = "SELECT COUNT(*) FROM " + ast.table;
      break;
    case StatementKind::Avg:
      out = "SELECT AVG(" + ast.target_column + ") FROM " + ast.table;
      break;
    case StatementKind::Update: {
      out = "UPDATE " + ast.table + " SET ";
      for (size_t i = 0; i < ast.assignments.size(); ++i) {
        if (i) out += ", ";
        out += ast.assignments[i].column + " = " +
               render_literal(ast.assignments[i].literal);
      }
      break;
    }
    case StatementKind::Delete: out = "DELETE FROM " + ast.table; break;
  }
  out += " WHERE " + ast.pred.column + " " + ast.pred.op + " " +
         render_literal(ast.pred.literal);
  return out;
}

namespace {

bool has_wildcards(const std::string& s) {
  return s.find('*') != std::string::npos ||
         s.find('?') != std::string::npos;
}

// Fits a plain (non-pattern) literal to a column, with positioned errors.
void check_literal(const PlainValue& v, const ColumnSpec& col, size_t offset) {
  if (v.kind != col.kind)
    throw Error(ErrorCode::TypeMismatch,
                std::string(column_kind_name(v.kind)) + " literal for " +
                    column_kind_name(col.kind) + " column '" + col.name + "'",
                offset);
  if (col.kind == ColumnKind::Uint) {
    if (col.bit_width < 64 && (v.uint_value >> col.bit_width))
      throw Error(ErrorCode::ValueOverflow,
                  std::to_string(v.uint_value) + " does not fit column '" +
                      col.name + "' (" + std::to_string(col.bit_width) +
                      " bits)",
                  offset);
  } else {
    if (v.string_value.size() > col.char_count())
      throw Error(ErrorCode::ValueOverflow,
                  "string does not fit column '" + col.name + "' (" +
                      std::to_string(col.char_count()) + " characters)",
                  offset);
  }
}

}  // namespace

ValidatedQuery validate_query(const QueryAst& ast, const TableSchema& schema) {
  if (ast.table != schema.table_name)
    throw Error(ErrorCode::UnknownTable, "unknown table '" + ast.table + "'",
                ast.table_offset);

  ValidatedQuery q;
  q.ast = ast;

  const int ci = schema.column_index(ast.pred.column);
  if (ci < 0)
    throw Error(ErrorCode::UnknownColumn,
                "unknown column '" + ast.pred.column + "'",
                ast.pred.column_offset);
  q.column_index = static_cast<size_t>(ci);
  const ColumnSpec& col = schema.columns[q.column_index];

  const PlainValue& lit = ast.pred.literal;
  const bool wild = lit.kind == ColumnKind::String &&
                    has_wildcards(lit.string_value);
  if (wild) {
    if (col.kind != ColumnKind::String)
      throw Error(ErrorCode::TypeMismatch,
                  "string literal for uint column '" + col.name + "'",
                  ast.pred.literal_offset);
    if (ast.pred.op != '=')
      throw Error(ErrorCode::BadPattern,
                  "wildcards are only supported with '='",
                  ast.pred.literal_offset);
    std::string body = lit.string_value;
    q.pattern.prefix_only = !body.empty() && body.back() == '*';
    if (q.pattern.prefix_only) body.pop_back();
    if (body.find('*') != std::string::npos)
      throw Error(ErrorCode::BadPattern,
                  "'*' is only allowed as the final character",
                  ast.pred.literal_offset);
    if (body.size() > col.char_count())
      throw Error(ErrorCode::PatternTooLong,
                  "pattern longer than column '" + col.name + "' (" +
                      std::to_string(col.char_count()) + " characters)",
                  ast.pred.literal_offset);
    q.op = PredOp::Pattern;
    q.pattern.mask.reserve(body.size());
    q.pattern_literals.reserve(body.size());
    for (char c : body) {
      q.pattern.mask.push_back(c == '?' ? 0 : 1);
      q.pattern_literals.push_back(c == '?' ? '\0' : c);
    }
  } else {
    check_literal(lit, col, ast.pred.literal_offset);
    switch (ast.pred.op) {
      case '=': q.op = PredOp::Eq; break;
      case '<': q.op = PredOp::Lt; break;
      case '>': q.op = PredOp::Gt; break;
      default:
        throw Error(ErrorCode::SyntaxError, "unknown operator",
                    ast.pred.column_offset);
    }
  }

  switch (ast.kind) {
    case StatementKind::Update: {
      std::vector<const SqlAssignment*> by_column(schema.columns.size(),
                                                  nullptr);
      for (const SqlAssignment& a : ast.assignments) {
        const int idx = schema.column_index(a.column);
        if (idx < 0)
          throw Error(ErrorCode::UnknownColumn,
                      "unknown column '" + a.column + "'", a.column_offset);
        if (by_column[idx])
          throw Error(ErrorCode::PartialUpdateUnsupported,
                      "column '" + a.column + "' assigned more than once",
                      a.column_offset);
        check_literal(a.literal, schema.columns[idx], a.literal_offset);
        by_column[idx] = &a;
      }
      for (size_t i = 0; i < schema.columns.size(); ++i)
        if (!by_column[i])
          throw Error(ErrorCode::PartialUpdateUnsupported,
                      "UPDATE must assign every column; missing '" +
                          schema.columns[i].name + "'");
      q.update_values.reserve(schema.columns.size());
      for (size_t i = 0; i < schema.columns.size(); ++i)
        q.update_values.push_back(by_column[i]->literal);
      break;
    }
    case StatementKind::Avg: {
      const int ti = schema.column_index(ast.target_column);
      if (ti < 0)
        throw Error(ErrorCode::UnknownColumn,
                    "unknown column '" + ast.target_column + "'");
      const ColumnSpec& target = schema.columns[ti];
      if (target.kind != ColumnKind::Uint)
        throw Error(ErrorCode::TypeMismatch,
                    "AVG needs a uint column; '" + target.name + "' is " +
                        column_kind_name(target.kind));
      if (target.bit_width > 32)
        throw Error(ErrorCode::UnsupportedFeature,
                    "AVG over columns wider than 32 bits is not supported");
      q.avg_column_index = static_cast<size_t>(ti);
      break;
    }
    default:
      break;
  }
  return q;
}

}  // namespace hedb
