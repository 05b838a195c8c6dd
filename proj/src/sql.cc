#include "dersens/sql.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "dersens/format.h"

namespace dersens {

namespace {

struct Tok {
  enum Type { kIdent, kNumber, kString, kSymbol, kEnd } type = kEnd;
  std::string text;  // identifiers keep their case; `lower` is for keywords
  std::string lower;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::string Lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Tok> Lex(std::string_view src) {
  std::vector<Tok> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (true) {
    while (i < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[i]))) {
        advance(1);
      } else if (src.substr(i, 2) == "--") {
        while (i < src.size() && src[i] != '\n') advance(1);
      } else {
        break;
      }
    }
    Tok t;
    t.line = line;
    t.column = col;
    if (i >= src.size()) {
      out.push_back(t);
      return out;
    }
    char c = src[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_' || src[j] == '#')) {
        ++j;
      }
      t.type = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
      t.lower = Lower(t.text);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) ||
                                src[j] == '.')) {
        ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.type = Tok::kNumber;
      t.text = std::string(src.substr(i, j - i));
      char* end = nullptr;
      t.number = std::strtod(t.text.c_str(), &end);
      if (end != t.text.c_str() + t.text.size()) {
        throw ParseError("malformed number '" + t.text + "'", line, col);
      }
      advance(j - i);
    } else if (c == '\'') {
      std::string s;
      advance(1);
      while (true) {
        if (i >= src.size()) {
          throw ParseError("unterminated string literal", t.line, t.column);
        }
        if (src[i] == '\'') {
          if (i + 1 < src.size() && src[i + 1] == '\'') {
            s += '\'';
            advance(2);
            continue;
          }
          advance(1);
          break;
        }
        s += src[i];
        advance(1);
      }
      t.type = Tok::kString;
      t.text = s;
    } else {
      static const char* kTwo[] = {"<=", ">=", "<>", "!="};
      std::string sym(1, c);
      for (const char* two : kTwo) {
        if (src.substr(i, 2) == two) sym = two;
      }
      if (sym.size() == 1 &&
          std::string("+-*/(),.;<>=").find(c) == std::string::npos) {
        throw ParseError(std::string("unexpected character '") + c + "'", line,
                         col);
      }
      t.type = Tok::kSymbol;
      t.text = sym == "!=" ? "<>" : sym;
      advance(sym.size());
    }
    out.push_back(t);
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  QuerySpec Query() {
    QuerySpec q;
    ExpectKeyword("select");
    Tok agg = Peek();
    if (agg.type != Tok::kIdent) Fail("expected an aggregate function");
    if (agg.lower == "distinct") Fail("DISTINCT is not supported");
    static const std::pair<const char*, Aggregator> kAggs[] = {
        {"sum", Aggregator::kSum},         {"count", Aggregator::kCount},
        {"product", Aggregator::kProduct}, {"min", Aggregator::kMin},
        {"max", Aggregator::kMax}};
    bool found = false;
    for (const auto& [name, a] : kAggs) {
      if (agg.lower == name) {
        q.aggregator = a;
        found = true;
      }
    }
    if (!found) {
      if (Peek(1).text == "(") Fail("unsupported aggregator '" + agg.text + "'");
      Fail("the select list must be a single aggregate");
    }
    Next();
    ExpectSymbol("(");
    if (IsKeyword("distinct")) Fail("DISTINCT is not supported");
    if (IsSymbol("*")) {
      if (q.aggregator != Aggregator::kCount) Fail("'*' is only valid in count(*)");
      Next();
    } else {
      q.select = Expr();
    }
    ExpectSymbol(")");
    if (IsSymbol(",")) Fail("only one aggregate is supported");
    ExpectKeyword("from");
    do {
      if (IsSymbol("(")) Fail("subqueries are not supported");
      TableRef t;
      t.table = Ident("table name");
      t.alias = t.table;
      if (IsKeyword("as")) {
        Next();
        t.alias = Ident("alias");
      } else if (Peek().type == Tok::kIdent && !IsReserved(Peek().lower)) {
        t.alias = Ident("alias");
      }
      q.tables.push_back(t);
    } while (Accept(","));
    if (IsKeyword("where")) {
      Next();
      q.where = Pred();
    }
    if (IsKeyword("group")) Fail("GROUP BY is not supported");
    if (IsKeyword("order") || IsKeyword("having") || IsKeyword("limit")) {
      Fail("'" + Peek().text + "' is not supported");
    }
    Accept(";");
    if (Peek().type != Tok::kEnd) Fail("unexpected '" + Peek().text + "'");
    return q;
  }

 private:
  static bool IsReserved(const std::string& w) {
    static const char* kWords[] = {"where", "group", "order", "having",
                                   "limit", "and", "or", "not", "from",
                                   "on", "join", "as"};
    return std::any_of(std::begin(kWords), std::end(kWords),
                       [&](const char* k) { return w == k; });
  }

  const Tok& Peek(size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Tok Next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool IsKeyword(const char* k) const {
    return Peek().type == Tok::kIdent && Peek().lower == k;
  }
  bool IsSymbol(const char* s) const {
    return Peek().type == Tok::kSymbol && Peek().text == s;
  }
  bool Accept(const char* s) {
    if (!IsSymbol(s)) return false;
    Next();
    return true;
  }
  [[noreturn]] void Fail(const std::string& msg) const {
    throw ParseError(msg, Peek().line, Peek().column);
  }
  void ExpectKeyword(const char* k) {
    if (!IsKeyword(k)) Fail(std::string("expected '") + k + "'");
    Next();
  }
  void ExpectSymbol(const char* s) {
    if (!IsSymbol(s)) {
      Fail(std::string("expected '") + s + "'" +
           (Peek().type == Tok::kEnd ? " before end of input"
                                     : ", found '" + Peek().text + "'"));
    }
    Next();
  }
  std::string Ident(const char* what) {
    if (Peek().type != Tok::kIdent) Fail(std::string("expected ") + what);
    return Next().text;
  }

  template <typename T>
  std::shared_ptr<T> At(const Tok& t) {
    auto n = std::make_shared<T>();
    n->line = t.line;
    n->column = t.column;
    return n;
  }

  // Predicates -------------------------------------------------------------

  SqlPredPtr Pred() { return OrPred(); }

  SqlPredPtr Chain(SqlPred::Kind kind, const char* word,
                   SqlPredPtr (Parser::*sub)()) {
    Tok start = Peek();
    SqlPredPtr first = (this->*sub)();
    if (!IsKeyword(word)) return first;
    auto n = At<SqlPred>(start);
    n->kind = kind;
    n->children.push_back(first);
    while (IsKeyword(word)) {
      Next();
      n->children.push_back((this->*sub)());
    }
    return n;
  }

  SqlPredPtr OrPred() { return Chain(SqlPred::Kind::kOr, "or", &Parser::XorPred); }
  SqlPredPtr XorPred() { return Chain(SqlPred::Kind::kXor, "xor", &Parser::AndPred); }
  SqlPredPtr AndPred() { return Chain(SqlPred::Kind::kAnd, "and", &Parser::NotPred); }

  SqlPredPtr NotPred() {
    if (IsKeyword("not")) {
      Tok t = Next();
      auto n = At<SqlPred>(t);
      n->kind = SqlPred::Kind::kNot;
      n->children.push_back(NotPred());
      return n;
    }
    return Atom();
  }

  static bool IsComparison(const Tok& t) {
    return t.type == Tok::kSymbol &&
           (t.text == "<" || t.text == "<=" || t.text == ">" ||
            t.text == ">=" || t.text == "=" || t.text == "<>");
  }

  SqlPredPtr Atom() {
    if (IsSymbol("(")) {
      size_t save = pos_;
      try {
        Next();
        SqlPredPtr inner = Pred();
        ExpectSymbol(")");
        const Tok& after = Peek();
        bool continues_expr =
            IsComparison(after) ||
            (after.type == Tok::kSymbol &&
             std::string("+-*/").find(after.text) != std::string::npos) ||
            (after.type == Tok::kIdent &&
             (after.lower == "in" || after.lower == "between" ||
              after.lower == "like"));
        if (!continues_expr) return inner;
      } catch (const ParseError&) {
      }
      pos_ = save;
    }
    return Comparison();
  }

  SqlPredPtr Comparison() {
    Tok start = Peek();
    SqlExprPtr lhs = Expr();
    auto n = At<SqlPred>(start);
    if (IsComparison(Peek())) {
      n->kind = SqlPred::Kind::kCompare;
      n->op = Next().text;
      n->exprs = {lhs, Expr()};
      return n;
    }
    if (IsKeyword("not")) {
      Next();
      n->negated = true;
    }
    if (IsKeyword("in")) {
      Next();
      n->kind = SqlPred::Kind::kIn;
      n->exprs.push_back(lhs);
      ExpectSymbol("(");
      if (IsKeyword("select")) Fail("subqueries are not supported");
      do {
        n->exprs.push_back(Expr());
      } while (Accept(","));
      ExpectSymbol(")");
      return n;
    }
    if (IsKeyword("between")) {
      Next();
      n->kind = SqlPred::Kind::kBetween;
      SqlExprPtr lo = Expr();
      ExpectKeyword("and");
      n->exprs = {lhs, lo, Expr()};
      return n;
    }
    if (IsKeyword("like")) {
      Next();
      n->kind = SqlPred::Kind::kLike;
      if (Peek().type != Tok::kString) Fail("LIKE needs a string pattern");
      n->exprs = {lhs, Primary()};
      return n;
    }
    Fail("expected a comparison operator");
  }

  // Expressions ------------------------------------------------------------

  SqlExprPtr Binary(const Tok& at, std::string op, SqlExprPtr a, SqlExprPtr b) {
    auto n = At<SqlExpr>(at);
    n->kind = SqlExpr::Kind::kBinary;
    n->text = std::move(op);
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  SqlExprPtr Expr() {
    SqlExprPtr e = Term();
    while (IsSymbol("+") || IsSymbol("-")) {
      Tok op = Next();
      e = Binary(op, op.text, e, Term());
    }
    return e;
  }

  SqlExprPtr Term() {
    SqlExprPtr e = Unary();
    while (IsSymbol("*") || IsSymbol("/")) {
      Tok op = Next();
      e = Binary(op, op.text, e, Unary());
    }
    return e;
  }

  SqlExprPtr Unary() {
    if (IsSymbol("-")) {
      Tok t = Next();
      auto n = At<SqlExpr>(t);
      n->kind = SqlExpr::Kind::kNegate;
      n->args.push_back(Unary());
      return n;
    }
    if (IsSymbol("+")) Next();
    return Primary();
  }

  SqlExprPtr Primary() {
    Tok t = Peek();
    if (t.type == Tok::kNumber) {
      Next();
      auto n = At<SqlExpr>(t);
      n->kind = SqlExpr::Kind::kNumber;
      n->number = t.number;
      return n;
    }
    if (t.type == Tok::kString) {
      Next();
      auto n = At<SqlExpr>(t);
      n->kind = SqlExpr::Kind::kString;
      n->text = t.text;
      return n;
    }
    if (t.type == Tok::kSymbol && t.text == "(") {
      Next();
      if (IsKeyword("select")) Fail("subqueries are not supported");
      SqlExprPtr e = Expr();
      ExpectSymbol(")");
      return e;
    }
    if (t.type == Tok::kIdent) {
      if (IsReserved(t.lower) || t.lower == "select") {
        Fail("unexpected keyword '" + t.text + "'");
      }
      Next();
      if (IsSymbol("(")) {
        static const char* kFuncs[] = {"abs", "exp", "ln", "sqrt", "power",
                                       "least", "greatest"};
        if (std::none_of(std::begin(kFuncs), std::end(kFuncs),
                         [&](const char* f) { return t.lower == f; })) {
          throw ParseError("unsupported function '" + t.text + "'", t.line,
                           t.column);
        }
        Next();
        auto n = At<SqlExpr>(t);
        n->kind = SqlExpr::Kind::kCall;
        n->text = t.lower;
        do {
          n->args.push_back(Expr());
        } while (Accept(","));
        ExpectSymbol(")");
        size_t want = t.lower == "power" ? 2 : 1;
        bool variadic = t.lower == "least" || t.lower == "greatest";
        if (variadic ? n->args.empty() : n->args.size() != want) {
          throw ParseError("wrong number of arguments to '" + t.text + "'",
                           t.line, t.column);
        }
        return n;
      }
      auto n = At<SqlExpr>(t);
      n->kind = SqlExpr::Kind::kColumn;
      n->text = t.text;
      if (Accept(".")) n->text += "." + Ident("column name");
      return n;
    }
    Fail(t.type == Tok::kEnd ? "unexpected end of query"
                             : "unexpected '" + t.text + "'");
  }

  std::vector<Tok> toks_;
  size_t pos_ = 0;
};

std::string QuoteString(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string JoinPreds(const std::vector<SqlPredPtr>& ps, const char* sep) {
  std::string s;
  for (size_t i = 0; i < ps.size(); ++i) {
    if (i) s += sep;
    s += ToSql(*ps[i]);
  }
  return s;
}

}  // namespace

QuerySpec ParseQuery(std::string_view sql) { return Parser(Lex(sql)).Query(); }

std::string ToString(Aggregator a) {
  switch (a) {
    case Aggregator::kSum:
      return "sum";
    case Aggregator::kCount:
      return "count";
    case Aggregator::kProduct:
      return "product";
    case Aggregator::kMin:
      return "min";
    case Aggregator::kMax:
      return "max";
  }
  return "";
}

std::string ToSql(const SqlExpr& e) {
  switch (e.kind) {
    case SqlExpr::Kind::kNumber:
      return FormatDouble(e.number);
    case SqlExpr::Kind::kString:
      return QuoteString(e.text);
    case SqlExpr::Kind::kColumn:
      return e.text;
    case SqlExpr::Kind::kNegate:
      return "(-" + ToSql(*e.args[0]) + ")";
    case SqlExpr::Kind::kBinary:
      return "(" + ToSql(*e.args[0]) + " " + e.text + " " + ToSql(*e.args[1]) +
             ")";
    case SqlExpr::Kind::kCall: {
      std::string s = e.text + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += ToSql(*e.args[i]);
      }
      return s + ")";
    }
  }
  return "";
}

std::string ToSql(const SqlPred& p) {
  std::string neg = p.negated ? " NOT" : "";
  switch (p.kind) {
    case SqlPred::Kind::kCompare:
      return "(" + ToSql(*p.exprs[0]) + " " + p.op + " " + ToSql(*p.exprs[1]) +
             ")";
    case SqlPred::Kind::kAnd:
      return "(" + JoinPreds(p.children, " AND ") + ")";
    case SqlPred::Kind::kOr:
      return "(" + JoinPreds(p.children, " OR ") + ")";
    case SqlPred::Kind::kXor:
      return "(" + JoinPreds(p.children, " XOR ") + ")";
    case SqlPred::Kind::kNot:
      return "not(" + ToSql(*p.children[0]) + ")";
    case SqlPred::Kind::kIn: {
      std::string s = "(" + ToSql(*p.exprs[0]) + neg + " IN (";
      for (size_t i = 1; i < p.exprs.size(); ++i) {
        if (i > 1) s += ", ";
        s += ToSql(*p.exprs[i]);
      }
      return s + "))";
    }
    case SqlPred::Kind::kBetween:
      return "(" + ToSql(*p.exprs[0]) + neg + " BETWEEN " + ToSql(*p.exprs[1]) +
             " AND " + ToSql(*p.exprs[2]) + ")";
    case SqlPred::Kind::kLike:
      return "(" + ToSql(*p.exprs[0]) + neg + " LIKE " + ToSql(*p.exprs[1]) +
             ")";
  }
  return "";
}

std::string ToSql(const QuerySpec& q) {
  std::string s = "SELECT " + ToString(q.aggregator) + "(" +
                  (q.select ? ToSql(*q.select) : std::string("*")) + ") FROM ";
  for (size_t i = 0; i < q.tables.size(); ++i) {
    if (i) s += ", ";
    s += q.tables[i].table;
    if (q.tables[i].alias != q.tables[i].table) s += " " + q.tables[i].alias;
  }
  if (q.where) s += " WHERE " + ToSql(*q.where);
  return s + ";";
}

bool Equal(const SqlExpr& a, const SqlExpr& b) {
  if (a.kind != b.kind || a.text != b.text || a.args.size() != b.args.size()) {
    return false;
  }
  if (a.kind == SqlExpr::Kind::kNumber && a.number != b.number) return false;
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (!Equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool Equal(const SqlPred& a, const SqlPred& b) {
  if (a.kind != b.kind || a.op != b.op || a.negated != b.negated ||
      a.exprs.size() != b.exprs.size() ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (size_t i = 0; i < a.exprs.size(); ++i) {
    if (!Equal(*a.exprs[i], *b.exprs[i])) return false;
  }
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!Equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

bool Equal(const QuerySpec& a, const QuerySpec& b) {
  if (a.aggregator != b.aggregator || a.tables.size() != b.tables.size()) {
    return false;
  }
  for (size_t i = 0; i < a.tables.size(); ++i) {
    if (a.tables[i].table != b.tables[i].table ||
        a.tables[i].alias != b.tables[i].alias) {
      return false;
    }
  }
  if (!a.select != !b.select || (a.select && !Equal(*a.select, *b.select))) {
    return false;
  }
  if (!a.where != !b.where || (a.where && !Equal(*a.where, *b.where))) {
    return false;
  }
  return true;
}

bool LikeMatch(std::string_view text, std::string_view pattern) {
  // Iterative wildcard match with backtracking to the last '%'.
  size_t t = 0, p = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t])) {
      ++t;
      ++p;
    } else if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

}  // namespace dersens
