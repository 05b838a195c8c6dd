#include "dersens/norm.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>

#include "dersens/format.h"
#include "dersens/matching.h"

namespace dersens {

constexpr double kTol = 1e-12;

NormPtr NormExpr::Var(std::string name) {
  if (name.empty()) throw InputError("norm variable name is empty");
  return NormPtr(new NormExpr(Kind::kVar, std::move(name), 1.0, {}));
}

NormPtr NormExpr::Scale(double a, NormPtr child) {
  if (!(a > 0) || !std::isfinite(a)) {
    throw InputError("norm scale factor must be positive and finite, got " +
                     FormatDouble(a));
  }
  return NormPtr(new NormExpr(Kind::kScale, "", a, {std::move(child)}));
}

NormPtr NormExpr::Combine(double p, std::vector<NormPtr> children) {
  if (!(p >= 1.0)) {
    throw InputError("norm exponent must be >= 1, got " + FormatDouble(p));
  }
  if (children.empty()) throw InputError("norm combinator has no children");
  return NormPtr(new NormExpr(Kind::kCombine, "", p, std::move(children)));
}

double DualExponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double LpCombine(const std::vector<double>& values, double p) {
  double mx = 0.0;
  for (double v : values) mx = std::max(mx, std::fabs(v));
  if (std::isinf(p)) return mx;
  if (p == 1.0) {
    double s = 0.0;
    for (double v : values) s += std::fabs(v);
    return s;
  }
  if (mx == 0.0 || std::isinf(mx)) return mx;
  double s = 0.0;
  for (double v : values) s += std::pow(std::fabs(v) / mx, p);
  return mx * std::pow(s, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Parsing and printing.

namespace {

struct Token {
  enum Type { kWord, kNumber, kOpen, kClose, kEnd } type;
  std::string text;
  double number = 0;
  int line = 1;
  int column = 1;
};

class NormLexer {
 public:
  explicit NormLexer(std::string_view text) : text_(text) {}

  std::vector<Token> Tokenize() {
    std::vector<Token> out;
    while (true) {
      SkipSpace();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        t.type = Token::kEnd;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (c == '(' || c == ')') {
        t.type = c == '(' ? Token::kOpen : Token::kClose;
        t.text = std::string(1, c);
        Advance();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
                 c == '+' || c == '.') {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '.' || text_[pos_] == '-' ||
                text_[pos_] == '+')) {
          Advance();
        }
        t.type = Token::kNumber;
        t.text = std::string(text_.substr(start, pos_ - start));
        char* end = nullptr;
        t.number = std::strtod(t.text.c_str(), &end);
        if (end != t.text.c_str() + t.text.size()) {
          throw ParseError("malformed number '" + t.text + "'", t.line,
                           t.column);
        }
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_' || text_[pos_] == '.' ||
                text_[pos_] == '#')) {
          Advance();
        }
        t.type = Token::kWord;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line_, column_);
      }
      out.push_back(t);
    }
  }

 private:
  void Advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }
  void SkipSpace() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        Advance();
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') Advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool IsKeyword(const std::string& w) {
  return w == "lp" || w == "linf" || w == "scaled";
}

class NormParser {
 public:
  explicit NormParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  NormPtr ParseAll() {
    NormPtr n = ParseNorm();
    if (Peek().type != Token::kEnd) Fail("unexpected '" + Peek().text + "'");
    return n;
  }

 private:
  const Token& Peek() const { return tokens_[pos_]; }
  Token Next() { return tokens_[pos_++]; }
  [[noreturn]] void Fail(const std::string& msg) const {
    throw ParseError(msg, Peek().line, Peek().column);
  }

  double Number() {
    if (Peek().type != Token::kNumber) Fail("expected a number");
    return Next().number;
  }

  NormPtr Checked(const Token& at, auto&& make) {
    try {
      return make();
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(e.what(), at.line, at.column);
    }
  }

  NormPtr ParseNorm() {
    const Token& t = Peek();
    if (t.type == Token::kWord && t.text == "lp") {
      Token at = Next();
      double p = Number();
      auto items = ParseItems();
      return Checked(at, [&] { return NormExpr::Combine(p, items); });
    }
    if (t.type == Token::kWord && t.text == "linf") {
      Token at = Next();
      auto items = ParseItems();
      return Checked(at, [&] { return NormExpr::Combine(kInf, items); });
    }
    if (t.type == Token::kWord && t.text == "scaled") {
      Token at = Next();
      Token num = Peek();
      double a = Number();
      NormPtr child = ParseNorm();
      return Checked(num, [&] { return NormExpr::Scale(a, child); });
    }
    return ParseItem();
  }

  std::vector<NormPtr> ParseItems() {
    std::vector<NormPtr> items;
    while ((Peek().type == Token::kWord && !IsKeyword(Peek().text)) ||
           Peek().type == Token::kOpen) {
      items.push_back(ParseItem());
    }
    if (items.empty()) Fail("expected at least one variable or '('");
    return items;
  }

  NormPtr ParseItem() {
    const Token& t = Peek();
    if (t.type == Token::kOpen) {
      Next();
      NormPtr n = ParseNorm();
      if (Peek().type != Token::kClose) Fail("expected ')'");
      Next();
      return n;
    }
    if (t.type == Token::kWord && !IsKeyword(t.text)) {
      return NormExpr::Var(Next().text);
    }
    Fail(t.type == Token::kEnd ? "unexpected end of norm"
                               : "unexpected '" + t.text + "'");
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

std::string ItemString(const NormPtr& n) {
  if (n->kind() == NormExpr::Kind::kVar) return n->name();
  return "(" + ToString(n) + ")";
}

}  // namespace

NormPtr ParseNorm(std::string_view text) {
  return NormParser(NormLexer(text).Tokenize()).ParseAll();
}

std::string ToString(const NormPtr& n) {
  switch (n->kind()) {
    case NormExpr::Kind::kVar:
      return n->name();
    case NormExpr::Kind::kScale:
      return "scaled " + FormatDouble(n->factor()) + " " +
             ItemString(n->children()[0]);
    case NormExpr::Kind::kCombine: {
      std::string s =
          std::isinf(n->p()) ? "linf" : "lp " + FormatDouble(n->p());
      for (const auto& c : n->children()) s += " " + ItemString(c);
      return s;
    }
  }
  return "";
}

bool StructurallyEqual(const NormPtr& a, const NormPtr& b) {
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case NormExpr::Kind::kVar:
      return a->name() == b->name();
    case NormExpr::Kind::kScale:
    case NormExpr::Kind::kCombine:
      if (a->factor() != b->factor()) return false;
      if (a->children().size() != b->children().size()) return false;
      for (size_t i = 0; i < a->children().size(); ++i) {
        if (!StructurallyEqual(a->children()[i], b->children()[i])) {
          return false;
        }
      }
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Evaluation and simple traversals.

double EvalNorm(const NormPtr& n, const Assignment& x) {
  switch (n->kind()) {
    case NormExpr::Kind::kVar: {
      auto it = x.find(n->name());
      if (it == x.end()) {
        throw InputError("no value bound for norm variable '" + n->name() +
                         "'");
      }
      return std::fabs(it->second);
    }
    case NormExpr::Kind::kScale:
      return n->factor() * EvalNorm(n->children()[0], x);
    case NormExpr::Kind::kCombine: {
      std::vector<double> vals;
      vals.reserve(n->children().size());
      for (const auto& c : n->children()) vals.push_back(EvalNorm(c, x));
      return LpCombine(vals, n->p());
    }
  }
  return 0.0;
}

namespace {

void CollectVars(const NormPtr& n, std::set<std::string>& out) {
  if (n->kind() == NormExpr::Kind::kVar) {
    out.insert(n->name());
    return;
  }
  for (const auto& c : n->children()) CollectVars(c, out);
}

}  // namespace

std::set<std::string> Variables(const NormPtr& n) {
  std::set<std::string> out;
  if (n) CollectVars(n, out);
  return out;
}

NormPtr RenameVariables(const NormPtr& n,
                        const std::map<std::string, std::string>& rename) {
  switch (n->kind()) {
    case NormExpr::Kind::kVar: {
      auto it = rename.find(n->name());
      return it == rename.end() ? n : NormExpr::Var(it->second);
    }
    case NormExpr::Kind::kScale:
      return NormExpr::Scale(n->factor(),
                             RenameVariables(n->children()[0], rename));
    case NormExpr::Kind::kCombine: {
      std::vector<NormPtr> ch;
      for (const auto& c : n->children()) {
        ch.push_back(RenameVariables(c, rename));
      }
      return NormExpr::Combine(n->p(), std::move(ch));
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Normalization.

namespace {

// Leaf view of a normalized node: Var or Scale(Var).
std::optional<std::pair<std::string, double>> AsLeaf(const NormPtr& n) {
  if (n->kind() == NormExpr::Kind::kVar) return std::make_pair(n->name(), 1.0);
  if (n->kind() == NormExpr::Kind::kScale &&
      n->children()[0]->kind() == NormExpr::Kind::kVar) {
    return std::make_pair(n->children()[0]->name(), n->factor());
  }
  return std::nullopt;
}

NormPtr MakeLeaf(const std::string& name, double coef) {
  NormPtr v = NormExpr::Var(name);
  return coef == 1.0 ? v : NormExpr::Scale(coef, v);
}

double MergeCoefficients(const std::vector<double>& coefs, double p) {
  return LpCombine(coefs, p);
}

// Combine node from already-normalized children: flatten same exponent,
// merge repeated leaves, collapse a single child.
NormPtr Assemble(double p, const std::vector<NormPtr>& children) {
  std::vector<NormPtr> flat;
  for (const auto& c : children) {
    if (c->kind() == NormExpr::Kind::kCombine && c->p() == p) {
      flat.insert(flat.end(), c->children().begin(), c->children().end());
    } else {
      flat.push_back(c);
    }
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> coefs;
  std::vector<NormPtr> out;
  std::vector<int> slot;  // -1 for non-leaf, else index into order
  for (const auto& c : flat) {
    if (auto leaf = AsLeaf(c)) {
      auto [it, fresh] = coefs.try_emplace(leaf->first);
      if (fresh) {
        order.push_back(leaf->first);
        out.push_back(nullptr);
        slot.push_back(static_cast<int>(order.size()) - 1);
      }
      it->second.push_back(leaf->second);
    } else {
      out.push_back(c);
      slot.push_back(-1);
    }
  }
  for (size_t i = 0; i < out.size(); ++i) {
    if (slot[i] >= 0) {
      const std::string& name = order[slot[i]];
      out[i] = MakeLeaf(name, MergeCoefficients(coefs[name], p));
    }
  }
  if (out.size() == 1) return out[0];
  return NormExpr::Combine(p, std::move(out));
}

NormPtr Push(const NormPtr& n, double scale) {
  switch (n->kind()) {
    case NormExpr::Kind::kVar:
      return MakeLeaf(n->name(), scale);
    case NormExpr::Kind::kScale:
      return Push(n->children()[0], scale * n->factor());
    case NormExpr::Kind::kCombine: {
      std::vector<NormPtr> ch;
      for (const auto& c : n->children()) ch.push_back(Push(c, scale));
      return Assemble(n->p(), ch);
    }
  }
  return n;
}

}  // namespace

NormPtr Normalize(const NormPtr& n) { return Push(n, 1.0); }

// ---------------------------------------------------------------------------
// Hammer bounds.

namespace {

void CollectLeaves(const NormPtr& n,
                   std::vector<std::pair<std::string, double>>& leaves,
                   std::set<double>& exponents) {
  if (auto leaf = AsLeaf(n)) {
    leaves.push_back(*leaf);
    return;
  }
  if (n->kind() == NormExpr::Kind::kCombine) exponents.insert(n->p());
  if (n->kind() == NormExpr::Kind::kScale) {
    // Only reachable for non-normalized input; fold the factor in.
    std::vector<std::pair<std::string, double>> inner;
    CollectLeaves(n->children()[0], inner, exponents);
    for (auto& [name, c] : inner) leaves.emplace_back(name, c * n->factor());
    return;
  }
  for (const auto& c : n->children()) CollectLeaves(c, leaves, exponents);
}

HammerBound Flatten(const std::vector<std::pair<std::string, double>>& leaves,
                    double p) {
  HammerBound b;
  b.exponent = p;
  std::map<std::string, std::vector<double>> by_var;
  for (const auto& [name, c] : leaves) by_var[name].push_back(c);
  for (const auto& [name, cs] : by_var) b.coefficient[name] = LpCombine(cs, p);
  return b;
}

}  // namespace

HammerBounds ComputeHammerBounds(const NormPtr& n) {
  std::vector<std::pair<std::string, double>> leaves;
  std::set<double> exponents;
  CollectLeaves(n, leaves, exponents);
  if (exponents.empty()) exponents.insert(1.0);
  HammerBounds hb;
  hb.lower = Flatten(leaves, *exponents.rbegin());
  hb.upper = Flatten(leaves, *exponents.begin());
  return hb;
}

// ---------------------------------------------------------------------------
// Structural matching shared by Compare (proof mode) and ScaleElaborate.

namespace {

struct Match {
  std::vector<std::pair<std::string, double>> leaves;  // per query leaf
  double weight = 0.0;                                 // sum of -log(mult)
  std::vector<std::string> steps;
};

class Matcher {
 public:
  explicit Matcher(bool proof_mode) : proof_(proof_mode) {}

  std::optional<Match> Run(const NormPtr& v, const NormPtr& w,
                           std::string* reason) {
    return MatchNodes(v, w, reason);
  }

 private:
  static std::string Describe(const NormPtr& n) { return "[" + ToString(n) + "]"; }

  static bool Better(const std::optional<Match>& a,
                     const std::optional<Match>& b) {
    if (!a) return false;
    if (!b) return true;
    return a->weight < b->weight - kTol;
  }

  std::optional<Match> MatchNodes(const NormPtr& v, const NormPtr& w,
                                  std::string* reason) {
    auto vl = AsLeaf(v);
    auto wl = AsLeaf(w);
    if (vl) {
      if (wl) return MatchLeaves(*vl, *wl, reason);
      std::optional<Match> best;
      std::string sub;
      for (const auto& wc : w->children()) {
        auto m = MatchNodes(v, wc, &sub);
        if (Better(m, best)) best = m;
      }
      if (best) {
        best->steps.push_back(Describe(v) + " embeds in a component of " +
                              Describe(w));
      } else if (reason) {
        *reason = Describe(v) + " matches no component of " + Describe(w);
      }
      return best;
    }
    if (wl) {
      if (reason) {
        *reason = Describe(v) + " is a combination but " + Describe(w) +
                  " is a single variable";
      }
      return std::nullopt;
    }
    return MatchCombines(v, w, reason);
  }

  std::optional<Match> MatchLeaves(const std::pair<std::string, double>& a,
                                   const std::pair<std::string, double>& b,
                                   std::string* reason) {
    if (a.first != b.first) {
      if (reason) *reason = "variables " + a.first + " and " + b.first + " differ";
      return std::nullopt;
    }
    Match m;
    if (proof_) {
      if (a.second > b.second * (1 + kTol) + kTol) {
        if (reason) {
          *reason = "coefficient of " + a.first + " is " +
                    FormatDouble(a.second) + " > " + FormatDouble(b.second);
        }
        return std::nullopt;
      }
      m.leaves.emplace_back(a.first, 1.0);
      m.steps.push_back(FormatDouble(a.second) + "*" + a.first + " <= " +
                        FormatDouble(b.second) + "*" + b.first);
      return m;
    }
    double mult = b.second / a.second;
    m.leaves.emplace_back(a.first, mult);
    m.weight = -std::log(mult);
    return m;
  }

  std::optional<Match> MatchCombines(const NormPtr& v, const NormPtr& w,
                                     std::string* reason) {
    std::optional<Match> best;
    std::string direct_reason;

    // Injective matching of v's children into w's children.
    const auto& vs = v->children();
    const auto& ws = w->children();
    double p = v->p(), q = w->p();
    bool exponent_ok = p >= q;
    if (!exponent_ok && proof_) {
      direct_reason = "exponent " + FormatDouble(p) + " < " +
                      (std::isinf(q) ? std::string("inf") : FormatDouble(q)) +
                      " needs scaling";
    } else if (vs.size() > ws.size()) {
      direct_reason = "more components in " + Describe(v) + " than in " +
                      Describe(w);
    } else {
      double f = 1.0;
      if (!exponent_ok) {
        double m = static_cast<double>(vs.size());
        double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
        f = std::pow(m, inv_q - 1.0 / p);
      }
      std::vector<std::vector<double>> cost(vs.size(),
                                            std::vector<double>(ws.size()));
      std::vector<std::vector<std::optional<Match>>> sub(
          vs.size(), std::vector<std::optional<Match>>(ws.size()));
      for (size_t i = 0; i < vs.size(); ++i) {
        for (size_t j = 0; j < ws.size(); ++j) {
          sub[i][j] = MatchNodes(vs[i], ws[j], nullptr);
          cost[i][j] = sub[i][j] ? sub[i][j]->weight : kInf;
        }
      }
      if (auto assign = MinCostAssignment(cost)) {
        Match m;
        for (size_t i = 0; i < vs.size(); ++i) {
          const Match& s = *sub[i][(*assign)[i]];
          for (const auto& [name, mult] : s.leaves) {
            m.leaves.emplace_back(name, mult * f);
            m.weight += -std::log(mult * f);
          }
          m.steps.insert(m.steps.end(), s.steps.begin(), s.steps.end());
        }
        m.steps.push_back(
            Describe(v) + " <= " + Describe(w) +
            (exponent_ok ? " by injective matching"
                         : " by injective matching with factor " +
                               FormatDouble(f)));
        best = m;
      } else {
        direct_reason =
            "no injective matching of the components of " + Describe(v) +
            " into " + Describe(w);
      }
    }

    // v as a whole inside one component of w.
    for (const auto& wc : ws) {
      if (AsLeaf(wc)) continue;
      auto m = MatchNodes(v, wc, nullptr);
      if (m) {
        m->steps.push_back(Describe(v) + " embeds in a component of " +
                           Describe(w));
      }
      if (Better(m, best)) best = m;
    }

    // Ungrouping: splitting a query component with exponent >= p can only
    // grow the query norm; splitting a db component with exponent <= q can
    // only shrink the db norm.
    std::vector<NormPtr> vs2, ws2;
    bool changed = false;
    for (const auto& c : vs) {
      if (c->kind() == NormExpr::Kind::kCombine && c->p() >= p) {
        vs2.insert(vs2.end(), c->children().begin(), c->children().end());
        changed = true;
      } else {
        vs2.push_back(c);
      }
    }
    for (const auto& c : ws) {
      if (c->kind() == NormExpr::Kind::kCombine && c->p() <= q) {
        ws2.insert(ws2.end(), c->children().begin(), c->children().end());
        changed = true;
      } else {
        ws2.push_back(c);
      }
    }
    if (changed) {
      NormPtr v2 = Normalize(NormExpr::Combine(p, vs2));
      NormPtr w2 = Normalize(NormExpr::Combine(q, ws2));
      auto m = MatchNodes(v2, w2, nullptr);
      if (m) {
        m->steps.push_back("ungroup " + Describe(v) + " as " + Describe(v2) +
                           " and " + Describe(w) + " as " + Describe(w2));
      }
      if (Better(m, best)) best = m;
    }

    if (!best && reason) *reason = direct_reason;
    return best;
  }

  bool proof_;
};

void CheckCovered(const NormPtr& nq, const NormPtr& ndb) {
  auto dbv = Variables(ndb);
  for (const auto& v : Variables(nq)) {
    if (!dbv.count(v)) {
      throw InputError("variable '" + v +
                       "' of the query norm is absent from the database norm");
    }
  }
}

}  // namespace

CompareResult Compare(const NormPtr& nq, const NormPtr& ndb) {
  CheckCovered(nq, ndb);
  NormPtr q = Normalize(nq), d = Normalize(ndb);
  std::string reason;
  CompareResult r;
  auto m = Matcher(true).Run(q, d, &reason);
  if (m) {
    r.proved = true;
    r.derivation = m->steps;
  } else {
    r.hint = "cannot show [" + ToString(q) + "] <= [" + ToString(d) +
             "]: " + reason;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Scaling witnesses.

double ScalingWitness::Effective(const std::string& var) const {
  auto it = factor.find(var);
  return (it == factor.end() ? 1.0 : it->second) * global;
}

std::string ToString(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::kIdentity:
      return "identity";
    case ScalingMethod::kStraightforward:
      return "straightforward";
    case ScalingMethod::kElaborate:
      return "elaborate";
  }
  return "";
}

NormPtr ApplyScaling(const NormPtr& nq, const ScalingWitness& w) {
  std::function<NormPtr(const NormPtr&)> rec = [&](const NormPtr& n) -> NormPtr {
    switch (n->kind()) {
      case NormExpr::Kind::kVar: {
        auto it = w.factor.find(n->name());
        if (it == w.factor.end() || it->second == 1.0) return n;
        return NormExpr::Scale(it->second, n);
      }
      case NormExpr::Kind::kScale:
        return NormExpr::Scale(n->factor(), rec(n->children()[0]));
      case NormExpr::Kind::kCombine: {
        std::vector<NormPtr> ch;
        for (const auto& c : n->children()) ch.push_back(rec(c));
        return NormExpr::Combine(n->p(), std::move(ch));
      }
    }
    return n;
  };
  NormPtr out = rec(nq);
  return w.global == 1.0 ? out : NormExpr::Scale(w.global, out);
}

ScalingWitness ScaleStraightforward(const NormPtr& nq, const NormPtr& ndb) {
  CheckCovered(nq, ndb);
  HammerBound up = ComputeHammerBounds(Normalize(nq)).upper;
  HammerBound lo = ComputeHammerBounds(Normalize(ndb)).lower;
  ScalingWitness w;
  w.method = ScalingMethod::kStraightforward;
  for (const auto& [var, alpha] : up.coefficient) {
    double gamma_i = std::min(alpha, lo.coefficient.at(var));
    w.factor[var] = gamma_i / alpha;
  }
  double qe = up.exponent, pe = lo.exponent;
  if (qe <= pe) {
    double m = static_cast<double>(up.coefficient.size());
    double inv_p = std::isinf(pe) ? 0.0 : 1.0 / pe;
    double inv_q = std::isinf(qe) ? 0.0 : 1.0 / qe;
    w.global = std::pow(m, inv_p - inv_q);
  }
  return w;
}

namespace {

double TotalWeight(const ScalingWitness& w) {
  double s = 0.0;
  for (const auto& [var, f] : w.factor) s += -std::log(w.Effective(var));
  return s;
}

}  // namespace

ScalingWitness ScaleElaborate(const NormPtr& nq, const NormPtr& ndb) {
  ScalingWitness fallback = ScaleStraightforward(nq, ndb);
  auto m = Matcher(false).Run(Normalize(nq), Normalize(ndb), nullptr);
  if (!m) return fallback;
  ScalingWitness w;
  w.method = ScalingMethod::kElaborate;
  for (const auto& [var, mult] : m->leaves) {
    auto [it, fresh] = w.factor.try_emplace(var, mult);
    if (!fresh) it->second = std::min(it->second, mult);
  }
  bool dominates = true;
  for (const auto& [var, f] : fallback.factor) {
    if (w.Effective(var) < fallback.Effective(var) * (1 - 1e-12)) {
      dominates = false;
    }
  }
  if (dominates) return w;
  return TotalWeight(w) <= TotalWeight(fallback) ? w : fallback;
}

}  // namespace dersens
