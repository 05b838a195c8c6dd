#include "dersens/analyzer.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "dersens/format.h"
#include "dersens/smooth.h"

namespace dersens {

namespace {

// ---------------------------------------------------------------------------
// Name resolution.

class Resolver {
 public:
  explicit Resolver(BoundQuery& ctx) : ctx_(ctx) {}

  std::string Column(const std::string& ref, int line, int col) const {
    size_t dot = ref.find('.');
    if (dot != std::string::npos) {
      if (!ctx_.aliases.count(ref.substr(0, dot))) {
        throw ParseError("unknown table or alias '" + ref.substr(0, dot) + "'",
                         line, col);
      }
      if (!ctx_.columns.count(ref)) {
        throw ParseError("unknown column '" + ref + "'", line, col);
      }
      return ref;
    }
    std::string found;
    for (const auto& [alias, ts] : ctx_.aliases) {
      std::string q = alias + "." + ref;
      if (ctx_.columns.count(q)) {
        if (!found.empty()) {
          throw ParseError("ambiguous column '" + ref + "'", line, col);
        }
        found = q;
      }
    }
    if (found.empty()) throw ParseError("unknown column '" + ref + "'", line, col);
    return found;
  }

  SqlExprPtr Expr(const SqlExprPtr& e) const {
    auto out = std::make_shared<SqlExpr>(*e);
    if (e->kind == SqlExpr::Kind::kColumn) {
      out->text = Column(e->text, e->line, e->column);
    }
    for (auto& a : out->args) a = Expr(a);
    return out;
  }

  SqlPredPtr Pred(const SqlPredPtr& p) const {
    auto out = std::make_shared<SqlPred>(*p);
    for (auto& e : out->exprs) e = Expr(e);
    for (auto& c : out->children) c = Pred(c);
    return out;
  }

 private:
  BoundQuery& ctx_;
};

void CollectColumns(const SqlExprPtr& e, std::set<std::string>& out) {
  if (e->kind == SqlExpr::Kind::kColumn) out.insert(e->text);
  for (const auto& a : e->args) CollectColumns(a, out);
}

void CollectColumns(const SqlPredPtr& p, std::set<std::string>& out) {
  for (const auto& e : p->exprs) CollectColumns(e, out);
  for (const auto& c : p->children) CollectColumns(c, out);
}

bool PredIsPublic(const SqlPredPtr& p, const BoundQuery& ctx) {
  std::set<std::string> cols;
  CollectColumns(p, cols);
  return std::none_of(cols.begin(), cols.end(), [&](const std::string& c) {
    return ctx.columns.at(c).sensitive;
  });
}

void Conjuncts(const SqlPredPtr& p, std::vector<SqlPredPtr>& out) {
  if (p->kind == SqlPred::Kind::kAnd) {
    for (const auto& c : p->children) Conjuncts(c, out);
  } else {
    out.push_back(p);
  }
}

bool IsText(const SqlExprPtr& e, const BoundQuery& ctx) {
  if (e->kind == SqlExpr::Kind::kString) return true;
  return e->kind == SqlExpr::Kind::kColumn &&
         ctx.columns.at(e->text).type == ColumnType::kText;
}

[[noreturn]] void FailAt(const std::string& msg, int line, int col) {
  throw ParseError(msg, line, col);
}

// ---------------------------------------------------------------------------
// Exact predicates.

struct TextOperand {
  bool is_column = false;
  std::string value;
  std::string Get(const ValueSource& row) const {
    return is_column ? row.Text(value) : value;
  }
};

class ExactPred : public Predicate {
 public:
  enum class Kind { kNumber, kText, kAnd, kOr, kXor, kNot, kLike };

  bool Eval(const ValueSource& row) const override {
    switch (kind) {
      case Kind::kNumber:
        return Compare(dersens::Eval(a, row), dersens::Eval(b, row));
      case Kind::kText: {
        std::string x = ta.Get(row), y = tb.Get(row);
        int c = x.compare(y);
        return CompareSign(c);
      }
      case Kind::kAnd:
        return std::all_of(children.begin(), children.end(),
                           [&](const PredPtr& p) { return p->Eval(row); });
      case Kind::kOr:
        return std::any_of(children.begin(), children.end(),
                           [&](const PredPtr& p) { return p->Eval(row); });
      case Kind::kXor: {
        int n = 0;
        for (const auto& p : children) n += p->Eval(row);
        return n % 2 == 1;
      }
      case Kind::kNot:
        return !children[0]->Eval(row);
      case Kind::kLike:
        return LikeMatch(ta.Get(row), pattern) != negated;
    }
    return false;
  }

  std::string Sql() const override { return sql; }

  Kind kind = Kind::kAnd;
  std::string op;
  ExprPtr a, b;
  TextOperand ta, tb;
  std::vector<PredPtr> children;
  std::string pattern;
  bool negated = false;
  std::string sql;

 private:
  bool Compare(double x, double y) const {
    return CompareSign(x < y ? -1 : (x > y ? 1 : 0)) && !std::isnan(x) &&
           !std::isnan(y);
  }
  bool CompareSign(int c) const {
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    if (op == ">=") return c >= 0;
    if (op == "=") return c == 0;
    return c != 0;
  }
};

TextOperand Text(const SqlExprPtr& e) {
  TextOperand t;
  t.is_column = e->kind == SqlExpr::Kind::kColumn;
  t.value = e->text;
  return t;
}

PredPtr Atom(const std::string& op, const SqlExprPtr& x, const SqlExprPtr& y,
             const BoundQuery& ctx, const std::string& sql, int line, int col) {
  auto p = std::make_shared<ExactPred>();
  p->op = op;
  p->sql = sql;
  bool tx = IsText(x, ctx), ty = IsText(y, ctx);
  if (tx != ty) FailAt("comparison between text and a number", line, col);
  if (tx) {
    p->kind = ExactPred::Kind::kText;
    p->ta = Text(x);
    p->tb = Text(y);
  } else {
    p->kind = ExactPred::Kind::kNumber;
    p->a = LowerExpr(x, ctx);
    p->b = LowerExpr(y, ctx);
  }
  return p;
}

PredPtr Combine(ExactPred::Kind kind, std::vector<PredPtr> children,
                const std::string& sql) {
  auto p = std::make_shared<ExactPred>();
  p->kind = kind;
  p->children = std::move(children);
  p->sql = sql;
  return p;
}

// ---------------------------------------------------------------------------
// Smooth lowering helpers.

ExprPtr OneMinus(ExprPtr x) { return Sum({Const(1.0), Neg(std::move(x))}); }

ExprPtr Clamp01(ExprPtr x) { return Min({Const(1.0), Max({Const(0.0), std::move(x)})}); }

ExprPtr SmoothAtom(const std::string& op, const ExprPtr& a, const ExprPtr& b,
                   const PlanOptions& o) {
  if (!o.precise) {
    double al = o.alpha;
    if (op == "<" || op == "<=") return Sigmoid(al, Sub(b, a));
    if (op == ">" || op == ">=") return Sigmoid(al, Sub(a, b));
    if (op == "=") return Tauoid(al, Sub(a, b));
    return OneMinus(Tauoid(al, Sub(a, b)));
  }
  const ExprPtr k = Const(o.precision);
  auto diff = [&](const ExprPtr& x, const ExprPtr& y) { return Prod({k, Sub(x, y)}); };
  if (op == ">") return Clamp01(diff(a, b));
  if (op == ">=") return Clamp01(Sum({diff(a, b), Const(1.0)}));
  if (op == "<") return Clamp01(diff(b, a));
  if (op == "<=") return Clamp01(Sum({diff(b, a), Const(1.0)}));
  ExprPtr apart = Min({Const(1.0), Prod({k, Abs(Sub(a, b))})});
  if (op == "=") return OneMinus(apart);
  return apart;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points.

ExprPtr LowerExpr(const SqlExprPtr& e, const BoundQuery& ctx) {
  switch (e->kind) {
    case SqlExpr::Kind::kNumber:
      return Const(e->number);
    case SqlExpr::Kind::kString:
      FailAt("string literal used as a number", e->line, e->column);
    case SqlExpr::Kind::kColumn: {
      const ColumnInfo& c = ctx.columns.at(e->text);
      if (c.type == ColumnType::kText) {
        FailAt("text column '" + e->text + "' used as a number", e->line,
               e->column);
      }
      return c.sensitive ? Col(e->text) : Fixed(e->text);
    }
    case SqlExpr::Kind::kNegate:
      return Neg(LowerExpr(e->args[0], ctx));
    case SqlExpr::Kind::kBinary: {
      ExprPtr a = LowerExpr(e->args[0], ctx), b = LowerExpr(e->args[1], ctx);
      if (e->text == "+") return Sum({a, b});
      if (e->text == "-") return Sub(a, b);
      if (e->text == "*") return Prod({a, b});
      return Div(a, b);
    }
    case SqlExpr::Kind::kCall: {
      std::vector<ExprPtr> args;
      for (const auto& a : e->args) args.push_back(LowerExpr(a, ctx));
      const std::string& f = e->text;
      if (f == "abs") return Abs(args[0]);
      if (f == "exp") return Exp(1.0, args[0]);
      if (f == "ln") return Ln(args[0]);
      if (f == "sqrt") return Power(args[0], 0.5);
      if (f == "least") return Min(args);
      if (f == "greatest") return Max(args);
      if (!args[1]->is_const()) {
        FailAt("power exponent must be a constant", e->line, e->column);
      }
      return Power(args[0], args[1]->value());
    }
  }
  return Const(0.0);
}

PredPtr BindPredicate(const SqlPredPtr& p, const BoundQuery& ctx) {
  std::string sql = ToSql(*p);
  switch (p->kind) {
    case SqlPred::Kind::kCompare:
      return Atom(p->op, p->exprs[0], p->exprs[1], ctx, sql, p->line, p->column);
    case SqlPred::Kind::kAnd:
    case SqlPred::Kind::kOr:
    case SqlPred::Kind::kXor:
    case SqlPred::Kind::kNot: {
      std::vector<PredPtr> ch;
      for (const auto& c : p->children) ch.push_back(BindPredicate(c, ctx));
      auto kind = p->kind == SqlPred::Kind::kAnd   ? ExactPred::Kind::kAnd
                  : p->kind == SqlPred::Kind::kOr  ? ExactPred::Kind::kOr
                  : p->kind == SqlPred::Kind::kXor ? ExactPred::Kind::kXor
                                                   : ExactPred::Kind::kNot;
      return Combine(kind, std::move(ch), sql);
    }
    case SqlPred::Kind::kIn: {
      std::vector<PredPtr> ch;
      for (size_t i = 1; i < p->exprs.size(); ++i) {
        ch.push_back(Atom("=", p->exprs[0], p->exprs[i], ctx, "", p->line, p->column));
      }
      PredPtr any = Combine(ExactPred::Kind::kOr, std::move(ch), sql);
      return p->negated ? Combine(ExactPred::Kind::kNot, {any}, sql) : any;
    }
    case SqlPred::Kind::kBetween: {
      PredPtr both = Combine(
          ExactPred::Kind::kAnd,
          {Atom(">=", p->exprs[0], p->exprs[1], ctx, "", p->line, p->column),
           Atom("<=", p->exprs[0], p->exprs[2], ctx, "", p->line, p->column)},
          sql);
      return p->negated ? Combine(ExactPred::Kind::kNot, {both}, sql) : both;
    }
    case SqlPred::Kind::kLike: {
      const SqlExprPtr& x = p->exprs[0];
      if (!IsText(x, ctx) || x->kind != SqlExpr::Kind::kColumn) {
        FailAt("LIKE needs a text column", p->line, p->column);
      }
      auto out = std::make_shared<ExactPred>();
      out->kind = ExactPred::Kind::kLike;
      out->ta = Text(x);
      out->pattern = p->exprs[1]->text;
      out->negated = p->negated;
      out->sql = sql;
      return out;
    }
  }
  return nullptr;
}

ExprPtr LowerPredicate(const SqlPredPtr& p, const BoundQuery& ctx,
                       const PlanOptions& o) {
  if (PredIsPublic(p, ctx)) return Indicator(BindPredicate(p, ctx));
  switch (p->kind) {
    case SqlPred::Kind::kAnd: {
      std::vector<ExprPtr> f;
      for (const auto& c : p->children) f.push_back(LowerPredicate(c, ctx, o));
      return Prod(std::move(f));
    }
    case SqlPred::Kind::kOr: {
      ExprPtr acc = LowerPredicate(p->children[0], ctx, o);
      for (size_t i = 1; i < p->children.size(); ++i) {
        ExprPtr y = LowerPredicate(p->children[i], ctx, o);
        acc = o.or_as_xor ? Sum({acc, y}) : Sum({acc, y, Neg(Prod({acc, y}))});
      }
      return acc;
    }
    case SqlPred::Kind::kXor: {
      std::vector<ExprPtr> t;
      for (const auto& c : p->children) t.push_back(LowerPredicate(c, ctx, o));
      return Sum(std::move(t));
    }
    case SqlPred::Kind::kNot:
      return OneMinus(LowerPredicate(p->children[0], ctx, o));
    case SqlPred::Kind::kCompare:
      return SmoothAtom(p->op, LowerExpr(p->exprs[0], ctx),
                        LowerExpr(p->exprs[1], ctx), o);
    case SqlPred::Kind::kIn: {
      // List members are distinct values, so at most one atom holds.
      ExprPtr x = LowerExpr(p->exprs[0], ctx);
      std::vector<ExprPtr> t;
      for (size_t i = 1; i < p->exprs.size(); ++i) {
        t.push_back(SmoothAtom("=", x, LowerExpr(p->exprs[i], ctx), o));
      }
      ExprPtr any = Sum(std::move(t));
      return p->negated ? OneMinus(any) : any;
    }
    case SqlPred::Kind::kBetween: {
      ExprPtr x = LowerExpr(p->exprs[0], ctx);
      ExprPtr both = Prod({SmoothAtom(">=", x, LowerExpr(p->exprs[1], ctx), o),
                           SmoothAtom("<=", x, LowerExpr(p->exprs[2], ctx), o)});
      return p->negated ? OneMinus(both) : both;
    }
    case SqlPred::Kind::kLike:
      FailAt("LIKE on sensitive data is not supported", p->line, p->column);
  }
  return Const(1.0);
}

ExprPtr LowerAggregation(Aggregator aggregator, const ExprPtr& f,
                         const ExprPtr& sigma) {
  switch (aggregator) {
    case Aggregator::kSum:
      return Prod({f, sigma});
    case Aggregator::kCount:
      return sigma;
    case Aggregator::kProduct:
      return Sum({Prod({sigma, f}), OneMinus(sigma)});
    case Aggregator::kMin:
      return Sum({f, Prod({OneMinus(sigma), Fixed(kDeltaRef)})});
    case Aggregator::kMax:
      return Sum({f, Neg(Prod({OneMinus(sigma), Fixed(kDeltaRef)}))});
  }
  return f;
}

BoundQuery Validate(const QuerySpec& query, const Schema& schema_in) {
  BoundQuery ctx;
  ctx.schema = std::make_shared<const Schema>(schema_in);
  const Schema& schema = *ctx.schema;
  ctx.database_p = schema.database_p;
  std::map<std::string, int> sensitive_uses;
  for (const auto& t : query.tables) {
    const TableSchema* ts = schema.Find(t.table);
    if (!ts) throw InputError("unknown table '" + t.table + "'");
    if (ctx.aliases.count(t.alias)) {
      throw InputError("duplicate table alias '" + t.alias + "'");
    }
    if (ts->norm && ++sensitive_uses[t.table] > 1) {
      throw InputError("self-join of table '" + t.table +
                       "' with sensitive columns is not supported");
    }
    ctx.aliases[t.alias] = ts;
    ctx.columns[t.alias + ".ID"] =
        ColumnInfo{t.alias, t.table, "ID", ColumnType::kText, false};
    for (const auto& c : ts->columns) {
      ctx.columns[t.alias + "." + c.name] =
          ColumnInfo{t.alias, t.table, c.name, c.type, ts->IsSensitive(c.name)};
    }
  }
  Resolver resolve(ctx);
  ctx.query = query;
  if (query.select) ctx.query.select = resolve.Expr(query.select);
  if (query.where) ctx.query.where = resolve.Pred(query.where);

  if (query.aggregator == Aggregator::kCount) {
    if (ctx.query.select && !IsText(ctx.query.select, ctx)) {
      LowerExpr(ctx.query.select, ctx);
    }
    ctx.value = Const(1.0);
  } else {
    if (!ctx.query.select) throw InputError("only count accepts '*'");
    ctx.value = LowerExpr(ctx.query.select, ctx);
  }

  if (ctx.query.where) {
    ctx.where = BindPredicate(ctx.query.where, ctx);
    std::vector<SqlPredPtr> conj;
    Conjuncts(ctx.query.where, conj);
    for (const auto& c : conj) {
      if (PredIsPublic(c, ctx)) {
        ctx.public_conjuncts.push_back(c);
      } else {
        ctx.sensitive_conjuncts.push_back(c);
      }
    }
  }

  std::vector<NormPtr> parts;
  for (const auto& t : query.tables) {
    const TableSchema* ts = ctx.aliases.at(t.alias);
    if (!ts->norm) continue;
    std::map<std::string, std::string> rename;
    for (const auto& v : Variables(ts->norm)) rename[v] = t.alias + "." + v;
    parts.push_back(RenameVariables(ts->norm, rename));
  }
  if (!parts.empty()) {
    ctx.db_norm = Normalize(parts.size() == 1
                                ? parts[0]
                                : NormExpr::Combine(ctx.database_p, parts));
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Plans.

namespace {

ScalingWitness Align(const NormPtr& nq, const NormPtr& ndb, ScalingMethod m) {
  if (!nq) return ScalingWitness{};
  switch (m) {
    case ScalingMethod::kIdentity: {
      CompareResult r = Compare(nq, ndb);
      if (!r.proved) throw InputError("query norm not below database norm: " + r.hint);
      return ScalingWitness{};
    }
    case ScalingMethod::kStraightforward:
      return ScaleStraightforward(nq, ndb);
    case ScalingMethod::kElaborate:
      return ScaleElaborate(nq, ndb);
  }
  return ScalingWitness{};
}

ExprPtr DivideBy(ExprPtr x, double gamma) {
  return gamma == 1.0 ? x : Prod({std::move(x), Const(1.0 / gamma)});
}

}  // namespace

SensitivityPlan BuildPlan(const BoundQuery& ctx, const PlanOptions& o) {
  if (!(o.beta > 0)) throw InputError("beta must be positive");
  SensitivityPlan plan;
  plan.ctx = ctx;
  plan.aggregator = ctx.query.aggregator;
  plan.beta_requested = o.beta;
  plan.product_row_weight = o.product_row_weight;
  plan.value = ctx.value;
  std::vector<ExprPtr> sig;
  for (const auto& c : ctx.sensitive_conjuncts) sig.push_back(LowerPredicate(c, ctx, o));
  plan.indicator = Prod(std::move(sig));
  plan.row_expr = LowerAggregation(plan.aggregator, plan.value, plan.indicator);

  const bool extremum =
      plan.aggregator == Aggregator::kMin || plan.aggregator == Aggregator::kMax;
  ExprPtr target = extremum ? Sum({plan.value, plan.indicator}) : plan.row_expr;
  std::set<std::string> used = SensitiveColumns(target);
  for (const auto& t : ctx.query.tables) {
    const TableSchema* ts = ctx.aliases.at(t.alias);
    bool referenced = std::any_of(used.begin(), used.end(), [&](const std::string& c) {
      return c.compare(0, t.alias.size() + 1, t.alias + ".") == 0;
    });
    if (referenced) plan.groups.push_back(SensitiveTable{t.alias, t.table, ts->rows_p});
  }
  if (plan.groups.empty()) {
    plan.warnings.push_back("no sensitive column is referenced; sensitivity is 0");
  }

  plan.query_norm = QueryNorm(target);
  plan.witness = Align(plan.query_norm, ctx.db_norm, o.scaling);
  std::map<std::string, double> scale(plan.witness.factor.begin(),
                                      plan.witness.factor.end());
  const double gamma = plan.witness.global;
  const ExprPtr& f = plan.value;
  const ExprPtr& s = plan.indicator;
  const bool public_sigma = IsPublic(s);

  auto need_ds = [](const Analysis& a) {
    if (!a.ubds) throw InputError("no derivative sensitivity bound for the query");
  };
  auto achieved = [&](double b) -> double {
    switch (plan.aggregator) {
      case Aggregator::kSum:
      case Aggregator::kCount: {
        Analysis a = Analyze(plan.row_expr, scale, b);
        need_ds(a);
        return a.beta_ds / gamma;
      }
      case Aggregator::kProduct: {
        Analysis a = Analyze(plan.row_expr, scale, b);
        need_ds(a);
        return (a.beta_f * o.product_row_weight + a.beta_ds + a.beta_f) / gamma;
      }
      case Aggregator::kMin:
      case Aggregator::kMax: {
        Analysis af = Analyze(f, scale, b);
        need_ds(af);
        if (public_sigma) return af.beta_ds / gamma;
        Analysis as = Analyze(s, scale, b);
        need_ds(as);
        return std::max(af.beta_ds, af.beta_f + as.beta_ds) / gamma;
      }
    }
    return 0.0;
  };

  double b;
  if (o.smoothing) {
    b = *o.smoothing;
    if (!(b > 0)) throw InputError("leaf smoothing must be positive");
  } else {
    try {
      b = SolveSmoothing(achieved, o.beta);
    } catch (const InfeasibleError& e) {
      if (!o.auto_beta) {
        throw InfeasibleError(e.what(), e.min_beta(), (o.noise_gamma + 1.0) * e.min_beta());
      }
      b = o.beta;
    }
  }
  plan.smoothing = b;
  plan.beta = achieved(b);
  // A rounding error below the request is rounded up; larger beta stays sound.
  if (plan.beta < o.beta && plan.beta >= o.beta * (1 - 1e-12)) plan.beta = o.beta;
  if (!std::isfinite(plan.beta)) {
    throw InfeasibleError("the query has no finite smooth sensitivity bound",
                          kInf, kInf);
  }
  if (plan.beta > o.beta * (1 + 1e-12) && !o.auto_beta) {
    double floor = achieved(o.beta * 1e-9);
    throw InfeasibleError("leaf smoothing " + FormatDouble(b) +
                              " achieves beta = " + FormatDouble(plan.beta) +
                              " > requested " + FormatDouble(o.beta),
                          floor, (o.noise_gamma + 1.0) * floor);
  }

  switch (plan.aggregator) {
    case Aggregator::kSum:
    case Aggregator::kCount:
      plan.row_ds = DivideBy(Analyze(plan.row_expr, scale, b).ubds, gamma);
      break;
    case Aggregator::kProduct: {
      Analysis a = Analyze(plan.row_expr, scale, b);
      plan.row_bound = a.ubf;
      plan.row_ds = DivideBy(Prod({a.ubds, Exp(-1.0, Ln(a.ubf))}), gamma);
      plan.beta_value = a.beta_f;
      plan.beta_ratio = a.beta_ds + a.beta_f;
      break;
    }
    case Aggregator::kMin:
    case Aggregator::kMax: {
      Analysis af = Analyze(f, scale, b);
      plan.row_bound = af.ubf;
      plan.row_ds = DivideBy(af.ubds, gamma);
      if (!public_sigma) {
        plan.indicator_ds = DivideBy(Analyze(s, scale, b).ubds, gamma);
      }
      break;
    }
  }
  return plan;
}

SensitivityPlan BuildPlan(const QuerySpec& query, const Schema& schema,
                          const PlanOptions& options) {
  return BuildPlan(Validate(query, schema), options);
}

// ---------------------------------------------------------------------------
// SQL emission.

namespace {

std::string Join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + xs[i];
  return s;
}

std::string ReplaceAll(std::string s, const std::string& from, const std::string& to) {
  for (size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size())) {
    s.replace(at, from.size(), to);
  }
  return s;
}

// Combines subquery values in the lq norm, q = DualExponent(p).
std::string DualCombineSql(const std::vector<std::string>& parts, double p) {
  if (parts.size() == 1) return parts[0];
  double q = DualExponent(p);
  std::vector<std::string> wrapped;
  for (const auto& x : parts) wrapped.push_back("(" + x + ")");
  if (std::isinf(q)) return "greatest(" + Join(wrapped, ", ") + ")";
  if (q == 1.0) return "(" + Join(wrapped, " + ") + ")";
  std::vector<std::string> pw;
  for (const auto& x : wrapped) pw.push_back("(" + x + " ^ " + FormatDouble(q) + ")");
  return "((" + Join(pw, " + ") + ") ^ " + FormatDouble(1.0 / q) + ")";
}

}  // namespace

EmittedSql EmitSql(const SensitivityPlan& plan) {
  const BoundQuery& ctx = plan.ctx;
  std::vector<std::string> from_items, pub;
  for (const auto& t : ctx.query.tables) {
    from_items.push_back(t.alias == t.table ? t.table : t.table + " " + t.alias);
  }
  for (const auto& c : ctx.public_conjuncts) pub.push_back(ToSql(*c));
  const std::string from = Join(from_items, ", ");
  const std::string where = pub.empty() ? "" : " WHERE " + Join(pub, " AND ");
  const std::string scan = " FROM " + from + where;

  EmittedSql out;
  const std::string h = ToSql(plan.row_expr);
  switch (plan.aggregator) {
    case Aggregator::kSum:
      out.modified = "SELECT sum(" + h + ")" + scan + ";";
      break;
    case Aggregator::kCount:
      out.modified = "SELECT sum(abs(" + h + "))" + scan + ";";
      break;
    case Aggregator::kProduct:
      out.modified = "SELECT case when (min(abs(" + h +
                     ")) = 0.0) then 0.0 else (exp(sum(ln(abs(" + h +
                     ")))) * (1.0 - (2.0 * mod(sum(case when (" + h +
                     " < 0.0) then 1 else 0 end), 2)))) end" + scan + ";";
      break;
    case Aggregator::kMin:
    case Aggregator::kMax: {
      std::string fv = ToSql(plan.value);
      std::string delta =
          "(SELECT (max(" + fv + ") - min(" + fv + "))" + scan + ")";
      out.modified = "SELECT " + ToString(plan.aggregator) + "(" +
                     ReplaceAll(h, kDeltaRef, delta) + ")" + scan + ";";
      break;
    }
  }

  if (plan.groups.empty()) {
    out.sensitivity = "SELECT 0.0;";
    return out;
  }
  std::string group_value;
  switch (plan.aggregator) {
    case Aggregator::kSum:
    case Aggregator::kCount:
    case Aggregator::kProduct:
      group_value = "sum(abs(" + ToSql(plan.row_ds) + "))";
      break;
    case Aggregator::kMin:
    case Aggregator::kMax:
      group_value = "max(abs(" + ToSql(plan.row_ds) + "))";
      if (plan.indicator_ds) {
        group_value = "((3.0 * " + group_value + ") + ((2.0 * (SELECT max(abs(" +
                      ToSql(plan.row_bound) + "))" + scan + ")) * max(abs(" +
                      ToSql(plan.indicator_ds) + "))))";
      }
      break;
  }
  std::vector<std::string> per_table;
  for (size_t i = 0; i < plan.groups.size(); ++i) {
    const SensitiveTable& g = plan.groups[i];
    std::string mask = g.table + "_sensRows";
    std::vector<std::string> conds = pub;
    conds.push_back(mask + ".ID = " + g.alias + ".ID");
    std::string inner = "SELECT " + group_value + " AS sdsg FROM " + from + ", " +
                        mask + " WHERE (" + Join(conds, " AND ") + ") AND " +
                        mask + ".sensitive GROUP BY " + mask + ".ID";
    double q = DualExponent(g.rows_p);
    std::string outer;
    if (std::isinf(q)) {
      outer = plan.aggregator == Aggregator::kSum ? "max(abs(sdsg))" : "max(sdsg)";
    } else if (q == 1.0) {
      outer = "sum(sdsg)";
    } else {
      outer = "(sum((sdsg ^ " + FormatDouble(q) + ")) ^ " + FormatDouble(1.0 / q) + ")";
    }
    std::string sub = plan.groups.size() == 1 ? "sub" : "sub" + std::to_string(i);
    per_table.push_back("SELECT " + outer + " FROM (" + inner + ") AS " + sub);
  }
  std::string combined;
  if (per_table.size() == 1 && plan.aggregator != Aggregator::kProduct) {
    out.sensitivity = per_table[0] + ";";
    return out;
  }
  combined = per_table.size() == 1 ? "(" + per_table[0] + ")"
                                   : DualCombineSql(per_table, ctx.database_p);
  if (plan.aggregator == Aggregator::kProduct) {
    out.sensitivity = "SELECT ((SELECT exp(sum(ln(abs(" + ToSql(plan.row_bound) +
                      "))))" + scan + ") * " + combined + ");";
  } else {
    out.sensitivity = "SELECT " + combined + ";";
  }
  return out;
}

}  // namespace dersens
