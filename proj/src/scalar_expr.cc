#include "dersens/scalar_expr.h"

#include <algorithm>
#include <cmath>

#include "dersens/format.h"

namespace dersens {

double MapSource::Number(const std::string& ref) const {
  auto it = values_.find(ref);
  if (it == values_.end()) {
    throw InputError("no value bound for column '" + ref + "'");
  }
  return it->second;
}

std::string MapSource::Text(const std::string& ref) const {
  throw InputError("no text value bound for column '" + ref + "'");
}

ExprPtr ScalarExpr::Make(Op op, double value, std::string name,
                         std::vector<ExprPtr> children, PredPtr predicate) {
  auto e = std::shared_ptr<ScalarExpr>(new ScalarExpr());
  e->op_ = op;
  e->value_ = value;
  e->name_ = std::move(name);
  e->children_ = std::move(children);
  e->predicate_ = std::move(predicate);
  return e;
}

namespace {

ExprPtr Node(Op op, double value, std::vector<ExprPtr> children) {
  return ScalarExpr::Make(op, value, "", std::move(children), nullptr);
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double SigmoidSlope(double x) {
  double e = std::exp(-std::fabs(x));
  return e / ((1.0 + e) * (1.0 + e));
}

double InverseCosh(double x) {
  double e = std::exp(-std::fabs(x));
  return 2.0 * e / (1.0 + e * e);
}

double EvalPower(double g, double r) {
  if (g < 0 && r != std::floor(r)) {
    throw InputError("power " + FormatDouble(r) + " of negative base " +
                     FormatDouble(g));
  }
  return std::pow(g, r);
}

// Sum of constant children folded into the position of the first one.
std::vector<ExprPtr> FoldConstants(std::vector<ExprPtr> xs, bool product,
                                   double* folded, bool* any) {
  double acc = product ? 1.0 : 0.0;
  *any = false;
  int first = -1;
  std::vector<ExprPtr> rest;
  for (auto& x : xs) {
    if (x->is_const()) {
      acc = product ? acc * x->value() : acc + x->value();
      if (!*any) first = static_cast<int>(rest.size());
      *any = true;
    } else {
      rest.push_back(std::move(x));
    }
  }
  *folded = acc;
  if (*any) rest.insert(rest.begin() + first, nullptr);
  return rest;
}

}  // namespace

ExprPtr Const(double c) { return ScalarExpr::Make(Op::kConst, c, "", {}, nullptr); }

ExprPtr Col(std::string ref) {
  return ScalarExpr::Make(Op::kCol, 0.0, std::move(ref), {}, nullptr);
}

ExprPtr Fixed(std::string ref) {
  return ScalarExpr::Make(Op::kFixed, 0.0, std::move(ref), {}, nullptr);
}

ExprPtr Power(ExprPtr g, double r) {
  if (!std::isfinite(r)) throw InputError("power exponent must be finite");
  if (r < 0) return Exp(r, Ln(std::move(g)));
  if (r == 0) return Const(1.0);
  if (r == 1) return g;
  if (g->is_const()) return Const(EvalPower(g->value(), r));
  return Node(Op::kPower, r, {std::move(g)});
}

ExprPtr Exp(double r, ExprPtr g) {
  if (r == 0) return Const(1.0);
  if (g->is_const()) return Const(std::exp(r * g->value()));
  if (g->op() == Op::kProd && g->children().size() >= 2 &&
      g->children()[0]->is_const()) {
    std::vector<ExprPtr> rest(g->children().begin() + 1, g->children().end());
    return Exp(r * g->children()[0]->value(), Prod(std::move(rest)));
  }
  return Node(Op::kExp, r, {std::move(g)});
}

ExprPtr Ln(ExprPtr g) {
  if (g->is_const()) return Const(std::log(std::fabs(g->value())));
  return Node(Op::kLn, 0.0, {std::move(g)});
}

namespace {

void CheckAlpha(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw InputError("precision alpha must be positive, got " +
                     FormatDouble(alpha));
  }
}

}  // namespace

ExprPtr Sigmoid(double alpha, ExprPtr g) {
  CheckAlpha(alpha);
  if (g->is_const()) return Const(StableSigmoid(alpha * g->value()));
  return Node(Op::kSigmoid, alpha, {std::move(g)});
}

ExprPtr SigmoidDeriv(double alpha, ExprPtr g) {
  CheckAlpha(alpha);
  if (g->is_const()) return Const(alpha * SigmoidSlope(alpha * g->value()));
  return Node(Op::kSigmoidDeriv, alpha, {std::move(g)});
}

ExprPtr Tauoid(double alpha, ExprPtr g) {
  CheckAlpha(alpha);
  if (g->is_const()) return Const(InverseCosh(alpha * g->value()));
  return Node(Op::kTauoid, alpha, {std::move(g)});
}

ExprPtr Sum(std::vector<ExprPtr> terms) {
  double c;
  bool any;
  auto rest = FoldConstants(std::move(terms), false, &c, &any);
  if (any) {
    auto pos = std::find(rest.begin(), rest.end(), nullptr);
    if (c == 0.0 && rest.size() > 1) {
      rest.erase(pos);
    } else {
      *pos = Const(c);
    }
  }
  if (rest.empty()) return Const(0.0);
  if (rest.size() == 1) return rest[0];
  return Node(Op::kSum, 0.0, std::move(rest));
}

ExprPtr Prod(std::vector<ExprPtr> factors) {
  double c;
  bool any;
  auto rest = FoldConstants(std::move(factors), true, &c, &any);
  if (any) {
    if (c == 0.0) return Const(0.0);
    auto pos = std::find(rest.begin(), rest.end(), nullptr);
    if (c == 1.0 && rest.size() > 1) {
      rest.erase(pos);
    } else {
      *pos = Const(c);
    }
  }
  if (rest.empty()) return Const(1.0);
  if (rest.size() == 1) return rest[0];
  return Node(Op::kProd, 0.0, std::move(rest));
}

namespace {

ExprPtr Extremum(Op op, std::vector<ExprPtr> args) {
  if (args.empty()) throw InputError("min/max needs at least one argument");
  std::vector<ExprPtr> rest;
  bool any = false;
  double c = 0.0;
  int first = -1;
  for (auto& a : args) {
    if (a->is_const()) {
      double v = a->value();
      c = !any ? v : (op == Op::kMax ? std::max(c, v) : std::min(c, v));
      if (!any) first = static_cast<int>(rest.size());
      any = true;
    } else {
      rest.push_back(std::move(a));
    }
  }
  if (any) rest.insert(rest.begin() + first, Const(c));
  if (rest.size() == 1) return rest[0];
  return Node(op, 0.0, std::move(rest));
}

}  // namespace

ExprPtr Min(std::vector<ExprPtr> args) { return Extremum(Op::kMin, std::move(args)); }
ExprPtr Max(std::vector<ExprPtr> args) { return Extremum(Op::kMax, std::move(args)); }

ExprPtr LpNorm(double p, std::vector<ExprPtr> args) {
  if (!(p >= 1)) throw InputError("norm exponent must be >= 1");
  if (args.empty()) throw InputError("norm needs at least one argument");
  bool all_const = std::all_of(args.begin(), args.end(),
                               [](const ExprPtr& a) { return a->is_const(); });
  if (all_const) {
    std::vector<double> v;
    for (const auto& a : args) v.push_back(a->value());
    return Const(LpCombine(v, p));
  }
  return Node(Op::kLpNorm, p, std::move(args));
}

ExprPtr ScaleNorm(double a, ExprPtr g) {
  if (!(a > 0)) throw InputError("norm scale must be positive");
  if (g->is_const()) return Const(a * std::fabs(g->value()));
  return Node(Op::kScaleNorm, a, {std::move(g)});
}

ExprPtr Abs(ExprPtr g) { return LpNorm(1.0, {std::move(g)}); }

ExprPtr Sign(ExprPtr g) {
  if (g->is_const()) {
    double v = g->value();
    return Const(v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
  }
  return Node(Op::kSign, 0.0, {std::move(g)});
}

ExprPtr Case(ExprPtr lhs, ExprPtr rhs, ExprPtr then_expr, ExprPtr else_expr) {
  if (lhs->is_const() && rhs->is_const()) {
    return lhs->value() >= rhs->value() ? then_expr : else_expr;
  }
  return Node(Op::kCase, 0.0,
              {std::move(lhs), std::move(rhs), std::move(then_expr),
               std::move(else_expr)});
}

ExprPtr Guard(ExprPtr a, ExprPtr b) {
  if (a->is_const() && a->value() == 0.0) return Const(0.0);
  if (a->is_const() || (b->is_const() && std::isfinite(b->value()))) {
    return Prod({std::move(a), std::move(b)});
  }
  return Node(Op::kGuard, 0.0, {std::move(a), std::move(b)});
}

ExprPtr Indicator(PredPtr predicate) {
  return ScalarExpr::Make(Op::kIndicator, 0.0, "", {}, std::move(predicate));
}

ExprPtr Neg(ExprPtr g) { return Prod({Const(-1.0), std::move(g)}); }

ExprPtr Sub(ExprPtr a, ExprPtr b) { return Sum({std::move(a), Neg(std::move(b))}); }

ExprPtr Div(ExprPtr a, ExprPtr b) {
  if (b->is_const()) {
    if (b->value() == 0.0) throw InputError("division by constant zero");
    return Prod({std::move(a), Const(1.0 / b->value())});
  }
  return Prod({std::move(a), Sign(b), Exp(-1.0, Ln(b))});
}

// ---------------------------------------------------------------------------
// Evaluation.

double Eval(const ExprPtr& e, const ValueSource& row) {
  const auto& ch = e->children();
  switch (e->op()) {
    case Op::kConst:
      return e->value();
    case Op::kCol:
    case Op::kFixed:
      return row.Number(e->name());
    case Op::kPower:
      return EvalPower(Eval(ch[0], row), e->value());
    case Op::kExp:
      return std::exp(e->value() * Eval(ch[0], row));
    case Op::kLn:
      return std::log(std::fabs(Eval(ch[0], row)));
    case Op::kSigmoid:
      return StableSigmoid(e->value() * Eval(ch[0], row));
    case Op::kSigmoidDeriv:
      return e->value() * SigmoidSlope(e->value() * Eval(ch[0], row));
    case Op::kTauoid:
      return InverseCosh(e->value() * Eval(ch[0], row));
    case Op::kSum: {
      double s = 0.0;
      for (const auto& c : ch) s += Eval(c, row);
      return s;
    }
    case Op::kProd: {
      double s = 1.0;
      for (const auto& c : ch) s *= Eval(c, row);
      return s;
    }
    case Op::kMin:
    case Op::kMax: {
      double s = Eval(ch[0], row);
      for (size_t i = 1; i < ch.size(); ++i) {
        double v = Eval(ch[i], row);
        s = e->op() == Op::kMin ? std::min(s, v) : std::max(s, v);
      }
      return s;
    }
    case Op::kLpNorm: {
      std::vector<double> v;
      v.reserve(ch.size());
      for (const auto& c : ch) v.push_back(Eval(c, row));
      return LpCombine(v, e->value());
    }
    case Op::kScaleNorm:
      return e->value() * std::fabs(Eval(ch[0], row));
    case Op::kSign: {
      double v = Eval(ch[0], row);
      return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    }
    case Op::kCase:
      return Eval(ch[0], row) >= Eval(ch[1], row) ? Eval(ch[2], row)
                                                  : Eval(ch[3], row);
    case Op::kGuard: {
      double a = Eval(ch[0], row);
      return a == 0.0 ? 0.0 : a * Eval(ch[1], row);
    }
    case Op::kIndicator:
      return e->predicate()->Eval(row) ? 1.0 : 0.0;
  }
  return 0.0;
}

double Eval(const ExprPtr& e, const Assignment& row) {
  return Eval(e, MapSource(row));
}

// ---------------------------------------------------------------------------
// SQL text.

namespace {

std::string ConstSql(double v) {
  if (v < 0) return "(" + FormatDouble(v) + ")";
  return FormatDouble(v);
}

std::string Join(const std::vector<ExprPtr>& xs, const std::string& sep,
                 const std::string& wrap_open = "",
                 const std::string& wrap_close = "") {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += wrap_open + ToSql(xs[i]) + wrap_close;
  }
  return s;
}

}  // namespace

std::string ToSql(const ExprPtr& e) {
  const auto& ch = e->children();
  switch (e->op()) {
    case Op::kConst:
      return ConstSql(e->value());
    case Op::kCol:
    case Op::kFixed:
      return e->name();
    case Op::kPower:
      return "(" + ToSql(ch[0]) + " ^ " + ConstSql(e->value()) + ")";
    case Op::kExp:
      if (e->value() == 1.0) return "exp(" + ToSql(ch[0]) + ")";
      return "exp((" + ConstSql(e->value()) + " * " + ToSql(ch[0]) + "))";
    case Op::kLn:
      return "ln(abs(" + ToSql(ch[0]) + "))";
    case Op::kSigmoid: {
      std::string ex =
          "exp((" + ConstSql(e->value()) + " * " + ToSql(ch[0]) + "))";
      return "(" + ex + " / (" + ex + " + 1.0))";
    }
    case Op::kSigmoidDeriv: {
      std::string a = ConstSql(e->value());
      std::string ex = "exp((" + a + " * " + ToSql(ch[0]) + "))";
      return "((" + a + " * " + ex + ") / ((" + ex + " + 1.0) ^ 2.0))";
    }
    case Op::kTauoid: {
      std::string g = ToSql(ch[0]);
      return "(2.0 / (exp((" + ConstSql(-e->value()) + " * " + g +
             ")) + exp((" + ConstSql(e->value()) + " * " + g + "))))";
    }
    case Op::kSum: {
      std::string s = "(";
      for (size_t i = 0; i < ch.size(); ++i) {
        bool trailing_neg = i + 1 == ch.size() && i > 0 && ch[i]->is_const() &&
                            ch[i]->value() < 0;
        if (trailing_neg) {
          s += " - " + FormatDouble(-ch[i]->value());
        } else {
          s += (i ? " + " : "") + ToSql(ch[i]);
        }
      }
      return s + ")";
    }
    case Op::kProd:
      return "(" + Join(ch, " * ") + ")";
    case Op::kMin:
      return "least(" + Join(ch, ", ") + ")";
    case Op::kMax:
      return "greatest(" + Join(ch, ", ") + ")";
    case Op::kLpNorm: {
      double p = e->value();
      if (ch.size() == 1) return "abs(" + ToSql(ch[0]) + ")";
      if (std::isinf(p)) return "greatest(" + Join(ch, ", ", "abs(", ")") + ")";
      if (p == 1.0) return "(" + Join(ch, " + ", "abs(", ")") + ")";
      std::string pw = " ^ " + FormatDouble(p) + ")";
      return "((" + Join(ch, " + ", "(abs(", ")" + pw) + ") ^ " +
             FormatDouble(1.0 / p) + ")";
    }
    case Op::kScaleNorm:
      return "(" + ConstSql(e->value()) + " * abs(" + ToSql(ch[0]) + "))";
    case Op::kSign:
      return "sign(" + ToSql(ch[0]) + ")";
    case Op::kCase:
      return "case when (" + ToSql(ch[0]) + " >= " + ToSql(ch[1]) + ") then " +
             ToSql(ch[2]) + " else " + ToSql(ch[3]) + " end";
    case Op::kGuard: {
      std::string a = ToSql(ch[0]);
      return "case when (" + a + " = 0.0) then 0.0 else (" + a + " * " +
             ToSql(ch[1]) + ") end";
    }
    case Op::kIndicator:
      return "case when " + e->predicate()->Sql() + " then 1.0 else 0.0 end";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Traversals.

namespace {

void Collect(const ExprPtr& e, std::set<std::string>& out) {
  if (e->op() == Op::kCol) out.insert(e->name());
  for (const auto& c : e->children()) Collect(c, out);
}

ExprPtr Rebuild(const ExprPtr& e, std::vector<ExprPtr> ch) {
  switch (e->op()) {
    case Op::kConst:
    case Op::kCol:
    case Op::kFixed:
    case Op::kIndicator:
      return e;
    case Op::kPower:
      return Power(ch[0], e->value());
    case Op::kExp:
      return Exp(e->value(), ch[0]);
    case Op::kLn:
      return Ln(ch[0]);
    case Op::kSigmoid:
      return Sigmoid(e->value(), ch[0]);
    case Op::kSigmoidDeriv:
      return SigmoidDeriv(e->value(), ch[0]);
    case Op::kTauoid:
      return Tauoid(e->value(), ch[0]);
    case Op::kSum:
      return Sum(std::move(ch));
    case Op::kProd:
      return Prod(std::move(ch));
    case Op::kMin:
      return Min(std::move(ch));
    case Op::kMax:
      return Max(std::move(ch));
    case Op::kLpNorm:
      return LpNorm(e->value(), std::move(ch));
    case Op::kScaleNorm:
      return ScaleNorm(e->value(), ch[0]);
    case Op::kSign:
      return Sign(ch[0]);
    case Op::kCase:
      return Case(ch[0], ch[1], ch[2], ch[3]);
    case Op::kGuard:
      return Guard(ch[0], ch[1]);
  }
  return e;
}

}  // namespace

std::set<std::string> SensitiveColumns(const ExprPtr& e) {
  std::set<std::string> out;
  Collect(e, out);
  return out;
}

bool IsPublic(const ExprPtr& e) { return SensitiveColumns(e).empty(); }

ExprPtr FixColumns(const ExprPtr& e, const std::set<std::string>& fixed) {
  if (e->op() == Op::kCol) return fixed.count(e->name()) ? Fixed(e->name()) : e;
  if (e->children().empty()) return e;
  std::vector<ExprPtr> ch;
  for (const auto& c : e->children()) ch.push_back(FixColumns(c, fixed));
  return Rebuild(e, std::move(ch));
}

namespace {

// d/dx of max(args) as nested cases over the running maximum.
ExprPtr ExtremumDerivative(const ExprPtr& e, const std::string& var,
                           size_t from) {
  const auto& ch = e->children();
  if (from + 1 == ch.size()) return Derivative(ch[from], var);
  std::vector<ExprPtr> rest(ch.begin() + from + 1, ch.end());
  ExprPtr others = e->op() == Op::kMax ? Max(rest) : Min(rest);
  ExprPtr d_first = Derivative(ch[from], var);
  ExprPtr d_rest = ExtremumDerivative(e, var, from + 1);
  if (e->op() == Op::kMax) return Case(ch[from], others, d_first, d_rest);
  return Case(others, ch[from], d_first, d_rest);
}

}  // namespace

ExprPtr Derivative(const ExprPtr& e, const std::string& var) {
  const auto& ch = e->children();
  if (!SensitiveColumns(e).count(var)) return Const(0.0);
  switch (e->op()) {
    case Op::kConst:
    case Op::kFixed:
    case Op::kIndicator:
    case Op::kSign:
      return Const(0.0);
    case Op::kCol:
      return Const(1.0);
    case Op::kPower: {
      double r = e->value();
      return Prod({Const(r), Power(ch[0], r - 1.0), Derivative(ch[0], var)});
    }
    case Op::kExp:
      return Prod({Const(e->value()), e, Derivative(ch[0], var)});
    case Op::kLn:
      return Prod({Derivative(ch[0], var), Sign(ch[0]), Exp(-1.0, Ln(ch[0]))});
    case Op::kSigmoid:
      return Prod({SigmoidDeriv(e->value(), ch[0]), Derivative(ch[0], var)});
    case Op::kSigmoidDeriv: {
      double a = e->value();
      ExprPtr s = Sigmoid(a, ch[0]);
      return Prod({Const(a), e, Sum({Const(1.0), Prod({Const(-2.0), s})}),
                   Derivative(ch[0], var)});
    }
    case Op::kTauoid: {
      double a = e->value();
      ExprPtr tanh =
          Sum({Prod({Const(2.0), Sigmoid(2.0 * a, ch[0])}), Const(-1.0)});
      return Prod({Const(-a), e, tanh, Derivative(ch[0], var)});
    }
    case Op::kSum: {
      std::vector<ExprPtr> terms;
      for (const auto& c : ch) terms.push_back(Derivative(c, var));
      return Sum(std::move(terms));
    }
    case Op::kProd: {
      std::vector<ExprPtr> terms;
      for (size_t i = 0; i < ch.size(); ++i) {
        std::vector<ExprPtr> f{Derivative(ch[i], var)};
        for (size_t j = 0; j < ch.size(); ++j) {
          if (j != i) f.push_back(ch[j]);
        }
        terms.push_back(Prod(std::move(f)));
      }
      return Sum(std::move(terms));
    }
    case Op::kMin:
    case Op::kMax:
      return ExtremumDerivative(e, var, 0);
    case Op::kLpNorm: {
      double p = e->value();
      if (std::isinf(p)) {
        std::vector<ExprPtr> abs_ch, d_ch;
        for (const auto& c : ch) {
          abs_ch.push_back(Abs(c));
          d_ch.push_back(Prod({Sign(c), Derivative(c, var)}));
        }
        ExprPtr sel = d_ch.back();
        for (size_t i = ch.size() - 1; i-- > 0;) {
          std::vector<ExprPtr> rest(abs_ch.begin() + i + 1, abs_ch.end());
          sel = Case(abs_ch[i], Max(rest), d_ch[i], sel);
        }
        return sel;
      }
      std::vector<ExprPtr> terms;
      for (const auto& c : ch) {
        ExprPtr term = Prod({Sign(c), Derivative(c, var)});
        if (p != 1.0) {
          ExprPtr ratio = Prod({Abs(c), Exp(-1.0, Ln(e))});
          term = Prod({Power(ratio, p - 1.0), term});
        }
        terms.push_back(term);
      }
      return Sum(std::move(terms));
    }
    case Op::kScaleNorm:
      return Prod({Const(e->value()), Sign(ch[0]), Derivative(ch[0], var)});
    case Op::kCase:
      return Case(ch[0], ch[1], Derivative(ch[2], var), Derivative(ch[3], var));
    case Op::kGuard:
      return Sum({Guard(Derivative(ch[0], var), ch[1]),
                  Guard(ch[0], Derivative(ch[1], var))});
  }
  return Const(0.0);
}

}  // namespace dersens
