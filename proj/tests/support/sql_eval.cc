#include "sql_eval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <regex>
#include <stdexcept>

namespace dersens::testing {

namespace {

// ---------------------------------------------------------------------------
// Tokens.

struct Tok {
  enum class Kind { kNumber, kString, kWord, kSymbol, kEnd };
  Kind kind;
  std::string text;
};

std::vector<Tok> Tokenize(std::string_view s) {
  std::vector<Tok> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      out.push_back({Tok::Kind::kNumber, std::string(s.substr(i, j - i))});
      i = j;
    } else if (c == '\'') {
      std::string v;
      size_t j = i + 1;
      while (true) {
        if (j >= s.size()) throw std::runtime_error("unterminated string");
        if (s[j] == '\'') {
          if (j + 1 < s.size() && s[j + 1] == '\'') {
            v += '\'';
            j += 2;
            continue;
          }
          break;
        }
        v += s[j++];
      }
      out.push_back({Tok::Kind::kString, v});
      i = j + 1;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Kind::kWord, std::string(s.substr(i, j - i))});
      i = j;
    } else {
      std::string two(s.substr(i, 2));
      if (two == "<=" || two == ">=" || two == "<>" || two == "!=") {
        out.push_back({Tok::Kind::kSymbol, two == "!=" ? "<>" : two});
        i += 2;
      } else {
        out.push_back({Tok::Kind::kSymbol, std::string(1, c)});
        ++i;
      }
    }
  }
  out.push_back({Tok::Kind::kEnd, ""});
  return out;
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

SqlNodePtr MakeOp(std::string op, std::vector<SqlNodePtr> args) {
  auto n = std::make_shared<SqlNode>();
  n->kind = SqlNode::Kind::kOp;
  n->text = std::move(op);
  n->args = std::move(args);
  return n;
}

SqlNodePtr MakeNumber(double v, int decimals) {
  auto n = std::make_shared<SqlNode>();
  n->kind = SqlNode::Kind::kNumber;
  n->number = v;
  n->decimals = decimals;
  return n;
}

// ---------------------------------------------------------------------------
// Parser.

class Parser {
 public:
  explicit Parser(std::string_view s) : toks_(Tokenize(s)) {}

  SelectStmt Statement() {
    SelectStmt s = Select();
    Accept(";");
    if (Peek().kind != Tok::Kind::kEnd) Fail("trailing input");
    return s;
  }

 private:
  const Tok& Peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool IsWord(const char* w, size_t k = 0) const {
    return Peek(k).kind == Tok::Kind::kWord && Lower(Peek(k).text) == w;
  }
  bool IsSym(const char* s, size_t k = 0) const {
    return Peek(k).kind == Tok::Kind::kSymbol && Peek(k).text == s;
  }
  bool Accept(const char* s) {
    if (IsSym(s) || IsWord(s)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void Expect(const char* s) {
    if (!Accept(s)) Fail(std::string("expected '") + s + "'");
  }
  [[noreturn]] void Fail(const std::string& m) const {
    throw std::runtime_error("sql oracle: " + m + " near '" + Peek().text + "'");
  }

  SelectStmt Select() {
    SelectStmt s;
    Expect("select");
    s.expr = Or();
    if (Accept("as")) s.expr_alias = Peek().text, ++pos_;
    if (Accept("from")) {
      do {
        FromItem f;
        if (Accept("(")) {
          f.sub = std::make_shared<SelectStmt>(Select());
          Expect(")");
        } else {
          f.table = Peek().text;
          ++pos_;
        }
        Accept("as");
        if (Peek().kind == Tok::Kind::kWord && !IsWord("where") && !IsWord("group")) {
          f.alias = Peek().text;
          ++pos_;
        } else {
          f.alias = f.table;
        }
        s.from.push_back(std::move(f));
      } while (Accept(","));
    }
    if (Accept("where")) s.where = Or();
    if (Accept("group")) {
      Expect("by");
      s.group_by = Additive();
    }
    return s;
  }

  SqlNodePtr Or() {
    SqlNodePtr a = And();
    while (Accept("or")) a = MakeOp("or", {a, And()});
    return a;
  }
  SqlNodePtr And() {
    SqlNodePtr a = Not();
    while (Accept("and")) a = MakeOp("and", {a, Not()});
    return a;
  }
  SqlNodePtr Not() {
    if (Accept("not")) return MakeOp("not", {Not()});
    return Comparison();
  }
  SqlNodePtr Comparison() {
    SqlNodePtr a = Additive();
    for (const char* op : {"=", "<>", "<=", ">=", "<", ">"}) {
      if (Accept(op)) return MakeOp(op, {a, Additive()});
    }
    if (Accept("like")) return MakeOp("like", {a, Additive()});
    return a;
  }
  SqlNodePtr Additive() {
    SqlNodePtr a = Multiplicative();
    while (true) {
      if (Accept("+")) {
        a = MakeOp("+", {a, Multiplicative()});
      } else if (Accept("-")) {
        a = MakeOp("-", {a, Multiplicative()});
      } else {
        return a;
      }
    }
  }
  SqlNodePtr Multiplicative() {
    SqlNodePtr a = Power();
    while (true) {
      if (Accept("*")) {
        a = MakeOp("*", {a, Power()});
      } else if (Accept("/")) {
        a = MakeOp("/", {a, Power()});
      } else {
        return a;
      }
    }
  }
  SqlNodePtr Power() {
    SqlNodePtr a = Unary();
    while (Accept("^")) a = MakeOp("^", {a, Unary()});
    return a;
  }
  SqlNodePtr Unary() {
    if (Accept("-")) return MakeOp("neg", {Unary()});
    if (Accept("+")) return Unary();
    return Primary();
  }
  SqlNodePtr Primary() {
    const Tok& t = Peek();
    if (t.kind == Tok::Kind::kNumber) {
      ++pos_;
      size_t dot = t.text.find('.');
      bool exp = t.text.find_first_of("eE") != std::string::npos;
      int decimals = exp ? -1 : dot == std::string::npos ? 0 : static_cast<int>(t.text.size() - dot - 1);
      return MakeNumber(std::stod(t.text), decimals);
    }
    if (t.kind == Tok::Kind::kString) {
      ++pos_;
      auto n = std::make_shared<SqlNode>();
      n->kind = SqlNode::Kind::kString;
      n->text = t.text;
      return n;
    }
    if (Accept("(")) {
      if (IsWord("select")) {
        auto n = std::make_shared<SqlNode>();
        n->kind = SqlNode::Kind::kSubquery;
        n->sub = std::make_shared<SelectStmt>(Select());
        Expect(")");
        return n;
      }
      SqlNodePtr e = Or();
      Expect(")");
      return e;
    }
    if (Accept("case")) {
      auto n = std::make_shared<SqlNode>();
      n->kind = SqlNode::Kind::kCase;
      while (Accept("when")) {
        n->args.push_back(Or());
        Expect("then");
        n->args.push_back(Or());
      }
      Expect("else");
      n->args.push_back(Or());
      Expect("end");
      return n;
    }
    if (t.kind == Tok::Kind::kWord) {
      std::string name = t.text;
      ++pos_;
      if (Accept("(")) {
        auto n = std::make_shared<SqlNode>();
        n->kind = SqlNode::Kind::kCall;
        n->text = Lower(name);
        if (!Accept(")")) {
          do n->args.push_back(Or());
          while (Accept(","));
          Expect(")");
        }
        return n;
      }
      while (Accept(".")) {
        name += "." + Peek().text;
        ++pos_;
      }
      auto n = std::make_shared<SqlNode>();
      n->kind = SqlNode::Kind::kColumn;
      n->text = name;
      return n;
    }
    Fail("unexpected token");
  }

  std::vector<Tok> toks_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Interpreter.

struct Value {
  enum class Kind { kNull, kNumber, kString };
  Kind kind = Kind::kNull;
  double number = 0.0;
  std::string text;
  static Value Num(double v) { return Value{Kind::kNumber, v, {}}; }
  static Value Str(std::string s) { return Value{Kind::kString, 0.0, std::move(s)}; }
  bool null() const { return kind == Kind::kNull; }
};

struct Relation {
  std::vector<std::string> columns;  // qualified "alias.column"
  std::vector<std::vector<Value>> rows;
};

bool IsAggregate(const std::string& f) {
  return f == "sum" || f == "max" || f == "min" || f == "count";
}

bool LikeOracle(const std::string& text, const std::string& pattern) {
  std::string re;
  for (char c : pattern) {
    if (c == '%') {
      re += ".*";
    } else if (c == '_') {
      re += '.';
    } else if (std::string("\\^$.|?*+()[]{}").find(c) != std::string::npos) {
      re += '\\';
      re += c;
    } else {
      re += c;
    }
  }
  return std::regex_match(text, std::regex(re));
}

class Interpreter {
 public:
  explicit Interpreter(const Database& db) : db_(db) {}

  Relation Run(const SelectStmt& s) {
    Relation in = From(s);
    std::vector<const std::vector<Value>*> kept;
    for (const auto& r : in.rows) {
      if (!s.where || Truthy(Eval(s.where, in, &r, nullptr))) kept.push_back(&r);
    }
    Relation out;
    out.columns.push_back(s.expr_alias.empty() ? "?column?" : s.expr_alias);
    if (s.group_by) {
      std::map<std::string, std::vector<const std::vector<Value>*>> groups;
      for (const auto* r : kept) groups[Key(Eval(s.group_by, in, r, nullptr))].push_back(r);
      for (auto& [k, rows] : groups) {
        out.rows.push_back({Eval(s.expr, in, rows.front(), &rows)});
      }
    } else if (HasAggregate(s.expr)) {
      out.rows.push_back({Eval(s.expr, in, kept.empty() ? nullptr : kept.front(), &kept)});
    } else {
      for (const auto* r : kept) out.rows.push_back({Eval(s.expr, in, r, nullptr)});
    }
    return out;
  }

 private:
  using Group = std::vector<const std::vector<Value>*>;

  static std::string Key(const Value& v) {
    return v.kind == Value::Kind::kString ? "s" + v.text : "n" + std::to_string(v.number);
  }

  static bool HasAggregate(const SqlNodePtr& n) {
    if (n->kind == SqlNode::Kind::kCall && IsAggregate(n->text)) return true;
    return std::any_of(n->args.begin(), n->args.end(), HasAggregate);
  }

  Relation Scan(const std::string& name, const std::string& alias) {
    Relation r;
    const std::string suffix = "_sensRows";
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      const Table& t = db_.tables.at(name.substr(0, name.size() - suffix.size()));
      r.columns = {alias + ".ID", alias + ".sensitive"};
      for (size_t i = 0; i < t.size(); ++i) {
        r.rows.push_back({Value::Str(t.ids[i]), Value::Num(t.sensitive[i] ? 1.0 : 0.0)});
      }
      return r;
    }
    const Table& t = db_.tables.at(name);
    const TableSchema* ts = db_.schema.Find(name);
    r.columns.push_back(alias + ".ID");
    for (const auto& c : ts->columns) r.columns.push_back(alias + "." + c.name);
    for (size_t i = 0; i < t.size(); ++i) {
      std::vector<Value> row{Value::Str(t.ids[i])};
      for (size_t c = 0; c < ts->columns.size(); ++c) {
        row.push_back(ts->columns[c].type == ColumnType::kText ? Value::Str(t.texts[c][i])
                                                               : Value::Num(t.numbers[c][i]));
      }
      r.rows.push_back(std::move(row));
    }
    return r;
  }

  Relation From(const SelectStmt& s) {
    Relation acc;
    acc.rows.push_back({});
    for (const auto& f : s.from) {
      Relation part;
      if (f.sub) {
        part = Run(*f.sub);
        for (auto& c : part.columns) c = f.alias + "." + c;
      } else {
        part = Scan(f.table, f.alias);
      }
      Relation next;
      next.columns = acc.columns;
      next.columns.insert(next.columns.end(), part.columns.begin(), part.columns.end());
      for (const auto& a : acc.rows) {
        for (const auto& b : part.rows) {
          std::vector<Value> row = a;
          row.insert(row.end(), b.begin(), b.end());
          next.rows.push_back(std::move(row));
        }
      }
      acc = std::move(next);
    }
    return acc;
  }

  static size_t Column(const Relation& rel, const std::string& name) {
    size_t found = rel.columns.size();
    for (size_t i = 0; i < rel.columns.size(); ++i) {
      const std::string& c = rel.columns[i];
      bool hit = c == name || (name.find('.') == std::string::npos && c.size() > name.size() &&
                               c.ends_with("." + name));
      if (hit) {
        if (found != rel.columns.size()) throw std::runtime_error("ambiguous column " + name);
        found = i;
      }
    }
    if (found == rel.columns.size()) throw std::runtime_error("unknown column " + name);
    return found;
  }

  static bool Truthy(const Value& v) { return v.kind == Value::Kind::kNumber && v.number != 0; }

  Value Eval(const SqlNodePtr& n, const Relation& rel, const std::vector<Value>* row,
             const Group* group) {
    switch (n->kind) {
      case SqlNode::Kind::kNumber:
        return Value::Num(n->number);
      case SqlNode::Kind::kString:
        return Value::Str(n->text);
      case SqlNode::Kind::kColumn:
        if (!row) return Value{};
        return (*row)[Column(rel, n->text)];
      case SqlNode::Kind::kSubquery: {
        Relation r = Run(*n->sub);
        return r.rows.empty() ? Value{} : r.rows[0][0];
      }
      case SqlNode::Kind::kCase:
        for (size_t i = 0; i + 1 < n->args.size(); i += 2) {
          if (Truthy(Eval(n->args[i], rel, row, group))) return Eval(n->args[i + 1], rel, row, group);
        }
        return Eval(n->args.back(), rel, row, group);
      case SqlNode::Kind::kCall:
        return Call(n, rel, row, group);
      case SqlNode::Kind::kOp:
        return Operator(n, rel, row, group);
    }
    return Value{};
  }

  Value Call(const SqlNodePtr& n, const Relation& rel, const std::vector<Value>* row,
             const Group* group) {
    const std::string& f = n->text;
    if (IsAggregate(f)) {
      if (!group) throw std::runtime_error("aggregate outside a group");
      std::vector<double> xs;
      for (const auto* r : *group) {
        Value v = Eval(n->args[0], rel, r, nullptr);
        if (!v.null()) xs.push_back(v.number);
      }
      if (f == "count") return Value::Num(static_cast<double>(xs.size()));
      if (xs.empty()) return Value{};
      if (f == "sum") {
        double s = 0.0;
        for (double x : xs) s += x;
        return Value::Num(s);
      }
      return Value::Num(f == "max" ? *std::max_element(xs.begin(), xs.end())
                                   : *std::min_element(xs.begin(), xs.end()));
    }
    std::vector<Value> a;
    for (const auto& x : n->args) a.push_back(Eval(x, rel, row, group));
    if (f == "greatest" || f == "least") {
      Value best;
      for (const auto& v : a) {
        if (v.null()) continue;
        if (best.null() || (f == "greatest" ? v.number > best.number : v.number < best.number)) best = v;
      }
      return best;
    }
    for (const auto& v : a) {
      if (v.null()) return Value{};
    }
    if (f == "abs") return Value::Num(std::abs(a[0].number));
    if (f == "exp") return Value::Num(std::exp(a[0].number));
    if (f == "ln") return Value::Num(std::log(a[0].number));
    if (f == "sqrt") return Value::Num(std::sqrt(a[0].number));
    if (f == "power") return Value::Num(std::pow(a[0].number, a[1].number));
    if (f == "mod") return Value::Num(std::fmod(a[0].number, a[1].number));
    if (f == "not") return Value::Num(Truthy(a[0]) ? 0.0 : 1.0);
    throw std::runtime_error("unknown function " + f);
  }

  Value Operator(const SqlNodePtr& n, const Relation& rel, const std::vector<Value>* row,
                 const Group* group) {
    const std::string& op = n->text;
    if (op == "and") {
      for (const auto& x : n->args) {
        if (!Truthy(Eval(x, rel, row, group))) return Value::Num(0.0);
      }
      return Value::Num(1.0);
    }
    if (op == "or") {
      for (const auto& x : n->args) {
        if (Truthy(Eval(x, rel, row, group))) return Value::Num(1.0);
      }
      return Value::Num(0.0);
    }
    std::vector<Value> a;
    for (const auto& x : n->args) a.push_back(Eval(x, rel, row, group));
    for (const auto& v : a) {
      if (v.null()) return Value{};
    }
    if (op == "not") return Value::Num(Truthy(a[0]) ? 0.0 : 1.0);
    if (op == "neg") return Value::Num(-a[0].number);
    if (op == "like") return Value::Num(LikeOracle(a[0].text, a[1].text) ? 1.0 : 0.0);
    if (op == "=" || op == "<>" || op == "<" || op == "<=" || op == ">" || op == ">=") {
      int c;
      if (a[0].kind == Value::Kind::kString || a[1].kind == Value::Kind::kString) {
        c = a[0].text.compare(a[1].text);
      } else {
        c = a[0].number < a[1].number ? -1 : a[0].number > a[1].number ? 1 : 0;
      }
      bool r = op == "=" ? c == 0 : op == "<>" ? c != 0 : op == "<" ? c < 0
             : op == "<=" ? c <= 0 : op == ">" ? c > 0 : c >= 0;
      return Value::Num(r ? 1.0 : 0.0);
    }
    double x = a[0].number, y = a.size() > 1 ? a[1].number : 0.0;
    if (op == "+") {
      double s = 0.0;
      for (const auto& v : a) s += v.number;
      return Value::Num(s);
    }
    if (op == "*") {
      double p = 1.0;
      for (const auto& v : a) p *= v.number;
      return Value::Num(p);
    }
    if (op == "-") return Value::Num(x - y);
    if (op == "/") return Value::Num(x / y);
    if (op == "^") return Value::Num(std::pow(x, y));
    throw std::runtime_error("unknown operator " + op);
  }

  const Database& db_;
};

bool Commutative(const SqlNodePtr& n) {
  if (n->kind == SqlNode::Kind::kOp) {
    return n->text == "+" || n->text == "*" || n->text == "and" || n->text == "or";
  }
  return n->kind == SqlNode::Kind::kCall && (n->text == "greatest" || n->text == "least");
}

bool NumberMatch(const SqlNode& g, const SqlNode& c) {
  double tol = g.decimals >= 0 ? 0.5 * std::pow(10.0, -g.decimals) * (1 + 1e-9)
                               : 1e-9 * std::max(std::abs(g.number), 1e-300);
  return std::abs(g.number - c.number) <= tol;
}

}  // namespace

SelectStmt ParseSelect(std::string_view sql) { return Parser(sql).Statement(); }

double RunScalarSql(std::string_view sql, const Database& db) {
  Interpreter it(db);
  Relation r = it.Run(ParseSelect(sql));
  if (r.rows.empty() || r.rows[0][0].kind != Value::Kind::kNumber) return std::nan("");
  return r.rows[0][0].number;
}

SqlNodePtr Canonical(const SqlNodePtr& n) {
  auto out = std::make_shared<SqlNode>(*n);
  if (out->sub) {
    SelectStmt s = *out->sub;
    s.expr = Canonical(s.expr);
    if (s.where) s.where = Canonical(s.where);
    out->sub = std::make_shared<SelectStmt>(s);
  }
  for (auto& a : out->args) a = Canonical(a);
  if (out->kind != SqlNode::Kind::kOp) return out;
  const std::string op = out->text;
  if (op == "neg") {
    const SqlNodePtr& x = out->args[0];
    if (x->kind == SqlNode::Kind::kNumber) return MakeNumber(-x->number, x->decimals);
    return Canonical(MakeOp("*", {MakeNumber(-1.0, -1), x}));
  }
  if (op == "-") {
    return Canonical(MakeOp("+", {out->args[0], MakeOp("neg", {out->args[1]})}));
  }
  if (op == "/" && out->args[1]->kind == SqlNode::Kind::kNumber) {
    return Canonical(MakeOp("*", {out->args[0], MakeNumber(1.0 / out->args[1]->number, -1)}));
  }
  if (op == "+" || op == "*" || op == "and" || op == "or") {
    std::vector<SqlNodePtr> flat;
    for (const auto& a : out->args) {
      if (a->kind == SqlNode::Kind::kOp && a->text == op) {
        flat.insert(flat.end(), a->args.begin(), a->args.end());
      } else {
        flat.push_back(a);
      }
    }
    out->args = std::move(flat);
  }
  if (op == "+" || op == "*") {
    // Fold numeric operands into one constant; drop it when it is the unit.
    const double unit = op == "+" ? 0.0 : 1.0;
    double folded = unit;
    int count = 0, decimals = -1;
    std::vector<SqlNodePtr> rest;
    for (const auto& a : out->args) {
      if (a->kind != SqlNode::Kind::kNumber) {
        rest.push_back(a);
        continue;
      }
      folded = op == "+" ? folded + a->number : folded * a->number;
      decimals = a->decimals;
      ++count;
    }
    if (count > 1) decimals = -1;
    if (count > 0 && (folded != unit || rest.empty())) {
      rest.push_back(MakeNumber(folded, decimals));
    }
    if (rest.size() == 1) return rest[0];
    out->args = std::move(rest);
  }
  return out;
}

bool GoldenMatch(const SqlNodePtr& g, const SqlNodePtr& c) {
  if (g->kind != c->kind) return false;
  switch (g->kind) {
    case SqlNode::Kind::kNumber:
      return NumberMatch(*g, *c);
    case SqlNode::Kind::kString:
    case SqlNode::Kind::kColumn:
      return g->text == c->text;
    case SqlNode::Kind::kSubquery:
      return GoldenMatch(*g->sub, *c->sub);
    default:
      break;
  }
  if (g->text != c->text || g->args.size() != c->args.size()) return false;
  if (!Commutative(g)) {
    for (size_t i = 0; i < g->args.size(); ++i) {
      if (!GoldenMatch(g->args[i], c->args[i])) return false;
    }
    return true;
  }
  std::vector<bool> used(c->args.size(), false);
  std::function<bool(size_t)> assign = [&](size_t i) {
    if (i == g->args.size()) return true;
    for (size_t j = 0; j < c->args.size(); ++j) {
      if (used[j] || !GoldenMatch(g->args[i], c->args[j])) continue;
      used[j] = true;
      if (assign(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return assign(0);
}

bool GoldenMatch(const SelectStmt& g, const SelectStmt& c) {
  auto same = [](const SqlNodePtr& a, const SqlNodePtr& b) {
    if (!a || !b) return !a && !b;
    return GoldenMatch(Canonical(a), Canonical(b));
  };
  if (!same(g.expr, c.expr) || g.expr_alias != c.expr_alias) return false;
  if (!same(g.where, c.where) || !same(g.group_by, c.group_by)) return false;
  if (g.from.size() != c.from.size()) return false;
  std::vector<bool> used(c.from.size(), false);
  for (const auto& f : g.from) {
    bool hit = false;
    for (size_t j = 0; j < c.from.size() && !hit; ++j) {
      const auto& h = c.from[j];
      if (used[j] || f.alias != h.alias || f.table != h.table) continue;
      if (f.sub && !(h.sub && GoldenMatch(*f.sub, *h.sub))) continue;
      used[j] = hit = true;
    }
    if (!hit) return false;
  }
  return true;
}

std::string Dump(const SqlNodePtr& n) {
  switch (n->kind) {
    case SqlNode::Kind::kNumber:
      return std::to_string(n->number);
    case SqlNode::Kind::kString:
      return "'" + n->text + "'";
    case SqlNode::Kind::kColumn:
      return n->text;
    case SqlNode::Kind::kSubquery:
      return "(subquery)";
    default:
      break;
  }
  std::string s = (n->kind == SqlNode::Kind::kCase ? "case" : n->text) + "(";
  for (size_t i = 0; i < n->args.size(); ++i) s += (i ? ", " : "") + Dump(n->args[i]);
  return s + ")";
}

}  // namespace dersens::testing
