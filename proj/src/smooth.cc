#include "dersens/smooth.h"

#include <algorithm>
#include <cmath>

#include "dersens/format.h"

namespace dersens {

namespace {

bool PairwiseDisjoint(const std::vector<std::set<std::string>>& sets) {
  std::set<std::string> seen;
  for (const auto& s : sets) {
    for (const auto& v : s) {
      if (!seen.insert(v).second) return false;
    }
  }
  return true;
}

std::vector<std::set<std::string>> ChildColumns(const ExprPtr& f) {
  std::vector<std::set<std::string>> out;
  for (const auto& c : f->children()) out.push_back(SensitiveColumns(c));
  return out;
}

}  // namespace

NormPtr QueryNorm(const ExprPtr& f) {
  switch (f->op()) {
    case Op::kConst:
    case Op::kFixed:
    case Op::kIndicator:
      return nullptr;
    case Op::kCol:
      return NormExpr::Var(f->name());
    default:
      break;
  }
  std::vector<NormPtr> parts;
  for (const auto& c : f->children()) {
    if (NormPtr n = QueryNorm(c)) parts.push_back(n);
  }
  if (parts.empty()) return nullptr;
  if (parts.size() == 1) return parts[0];
  double p = 1.0;
  if (f->op() == Op::kLpNorm && PairwiseDisjoint(ChildColumns(f))) {
    p = f->value();
  }
  return Normalize(NormExpr::Combine(p, std::move(parts)));
}

ExprPtr CombineDs(std::vector<ExprPtr> parts, double p) {
  if (parts.empty()) return Const(0.0);
  if (parts.size() == 1) return parts[0];
  double q = DualExponent(p);
  if (std::isinf(q)) {
    for (auto& x : parts) x = Abs(x);
    return Max(std::move(parts));
  }
  return LpNorm(q, std::move(parts));
}

namespace {

template <typename Leaf, typename Combine>
auto DualRecurse(const NormPtr& n, Leaf leaf, Combine combine)
    -> decltype(leaf(std::string())) {
  switch (n->kind()) {
    case NormExpr::Kind::kVar:
      return leaf(n->name());
    case NormExpr::Kind::kScale:
      return combine(1.0 / n->factor(),
                     {DualRecurse(n->children()[0], leaf, combine)}, true);
    case NormExpr::Kind::kCombine: {
      std::vector<decltype(leaf(std::string()))> parts;
      for (const auto& c : n->children()) {
        parts.push_back(DualRecurse(c, leaf, combine));
      }
      return combine(n->p(), std::move(parts), false);
    }
  }
  return leaf(n->name());
}

void CheckNormForDs(const ExprPtr& f, const NormPtr& norm) {
  std::vector<std::pair<std::string, double>> dummy;
  std::map<std::string, int> count;
  std::function<void(const NormPtr&)> walk = [&](const NormPtr& n) {
    if (n->kind() == NormExpr::Kind::kVar) {
      ++count[n->name()];
      return;
    }
    for (const auto& c : n->children()) walk(c);
  };
  walk(norm);
  for (const auto& [v, k] : count) {
    if (k > 1) {
      throw InputError("variable '" + v +
                       "' occurs more than once in the norm; the dual norm "
                       "is not available in closed form");
    }
  }
  for (const auto& col : SensitiveColumns(f)) {
    if (!count.count(col)) {
      throw InputError("column '" + col +
                       "' is not covered by the norm; declare it insensitive");
    }
  }
}

}  // namespace

ExprPtr DsExpr(const ExprPtr& f, const NormPtr& norm) {
  NormPtr n = Normalize(norm);
  CheckNormForDs(f, n);
  return DualRecurse(
      n, [&](const std::string& v) { return Abs(Derivative(f, v)); },
      [](double p, std::vector<ExprPtr> parts, bool scale) -> ExprPtr {
        if (scale) return Prod({std::move(parts[0]), Const(p)});
        return CombineDs(std::move(parts), p);
      });
}

double FiniteDiffDs(const ExprPtr& f, const NormPtr& norm,
                    const Assignment& point, double h) {
  if (!(h > 0)) throw InputError("finite-difference step must be positive");
  NormPtr n = Normalize(norm);
  CheckNormForDs(f, n);
  return DualRecurse(
      n,
      [&](const std::string& v) {
        Assignment hi = point, lo = point;
        hi[v] += h;
        lo[v] -= h;
        return std::fabs((Eval(f, hi) - Eval(f, lo)) / (2.0 * h));
      },
      [](double p, std::vector<double> parts, bool scale) {
        if (scale) return parts[0] * p;
        return LpCombine(parts, DualExponent(p));
      });
}

// ---------------------------------------------------------------------------
// Catalog analysis.

namespace {

// Product of suprema where a factor bounded by 0 vanishes even if another
// is unbounded.
double SupProduct(double a, double b) { return a == 0.0 || b == 0.0 ? 0.0 : a * b; }

class Analyzer {
 public:
  explicit Analyzer(const std::map<std::string, double>& scale)
      : scale_(scale) {}

  Analysis Run(const ExprPtr& f, double b) {
    if (IsPublic(f)) return Public(f);
    switch (f->op()) {
      case Op::kCol:
        return Identity(f, b);
      case Op::kPower:
        return PowerRule(f, b);
      case Op::kExp:
        return ExpRule(f, b);
      case Op::kLn:
        return Infeasible(f);  // logarithm of a sensitive expression
      case Op::kSigmoid:
      case Op::kTauoid:
        return SquashRule(f, b);
      case Op::kSum:
        return SumRule(f, b);
      case Op::kProd:
        return ProdRule(f, b);
      case Op::kMin:
      case Op::kMax:
        return ExtremumRule(f, b);
      case Op::kLpNorm:
        return NormRule(f, b);
      case Op::kScaleNorm: {
        Analysis g = Run(f->child(), b);
        Analysis a = g;
        a.ubf = Prod({Const(f->value()), g.ubf});
        a.ubds = g.ubds ? Prod({Const(f->value()), g.ubds}) : nullptr;
        a.ds_sup = f->value() * g.ds_sup;
        a.value_sup = f->value() * g.value_sup;
        return a;
      }
      case Op::kCase:
        return CaseRule(f, b);
      default:
        throw InputError("no smooth bound rule for sensitive expression " +
                         ToSql(f));
    }
  }

 private:
  double Scale(const std::string& col) const {
    auto it = scale_.find(col);
    return it == scale_.end() ? 1.0 : it->second;
  }

  static Analysis Public(const ExprPtr& f) {
    Analysis a;
    a.ubf = Abs(f);
    a.ubds = Const(0.0);
    a.value_sup = f->is_const() ? std::fabs(f->value())
                  : f->op() == Op::kIndicator ? 1.0
                                              : kInf;
    return a;
  }

  static Analysis Infeasible(const ExprPtr& f) {
    Analysis a;
    a.ubf = Abs(f);
    a.ubds = Const(0.0);
    a.beta_f = a.beta_ds = kInf;
    a.ds_sup = a.value_sup = kInf;
    return a;
  }

  static ExprPtr RequireDs(const Analysis& a, const ExprPtr& f) {
    if (!a.ubds) {
      throw InputError("no derivative sensitivity bound for " + ToSql(f) +
                       " (fractional powers only have value bounds)");
    }
    return a.ubds;
  }

  // |t| smoothed at b: |t| when |t| >= 1/b, e^(b|t| - 1)/b below.
  static ExprPtr SmoothAbs(const ExprPtr& t, double b) {
    ExprPtr abs_t = Abs(t);
    if (!(b > 0)) throw InputError("leaf smoothing must be positive");
    return Case(abs_t, Const(1.0 / b), abs_t,
                Prod({Exp(1.0, Sum({Prod({Const(b), abs_t}), Const(-1.0)})),
                      Const(1.0 / b)}));
  }

  Analysis Identity(const ExprPtr& f, double b) {
    double s = Scale(f->name());
    Analysis a;
    if (s == 1.0) {
      a.ubf = SmoothAbs(f, b);
    } else {
      a.ubf = Prod({Const(1.0 / s), SmoothAbs(Prod({Const(s), f}), b)});
    }
    a.beta_f = b;
    a.ubds = Const(1.0 / s);
    a.beta_ds = 0.0;
    a.ds_sup = 1.0 / s;
    a.value_sup = kInf;
    return a;
  }

  Analysis PowerRule(const ExprPtr& f, double b) {
    double r = f->value();
    const ExprPtr& g = f->child();
    Analysis hi = Run(g, b / r);
    Analysis a;
    a.ubf = Power(hi.ubf, r);
    a.beta_f = r * hi.beta_f;
    a.value_sup = std::pow(hi.value_sup, r);
    if (r < 1.0) {
      a.ubds = nullptr;
      a.ds_sup = kInf;
      return a;
    }
    Analysis base = Run(g, b);
    ExprPtr ds_g = RequireDs(base, g);
    if (r == 1.0) {
      a.ubds = ds_g;
      a.beta_ds = base.beta_ds;
      a.ds_sup = base.ds_sup;
      return a;
    }
    Analysis lo = Run(g, b / (r - 1.0));
    a.ubds = Guard(ds_g, Prod({Const(r), Power(lo.ubf, r - 1.0)}));
    a.beta_ds = (r - 1.0) * lo.beta_f + base.beta_ds;
    a.ds_sup = base.ds_sup == 0 ? 0.0 : kInf;
    return a;
  }

  Analysis ExpRule(const ExprPtr& f, double b) {
    double r = std::fabs(f->value());
    Analysis g = Run(f->child(), b);
    ExprPtr ds_g = RequireDs(g, f->child());
    Analysis a;
    a.ubf = f;
    a.beta_f = r * g.ds_sup;
    a.ubds = Prod({Const(r), f, ds_g});
    a.beta_ds = r * g.ds_sup + g.beta_ds;
    a.ds_sup = kInf;
    a.value_sup = kInf;
    return a;
  }

  Analysis SquashRule(const ExprPtr& f, double b) {
    double alpha = f->value();
    Analysis g = Run(f->child(), b);
    ExprPtr ds_g = RequireDs(g, f->child());
    Analysis a;
    a.ubf = f;
    a.beta_f = alpha * g.ds_sup;
    if (f->op() == Op::kSigmoid) {
      a.ubds = Prod({SigmoidDeriv(alpha, f->child()), ds_g});
      a.ds_sup = alpha / 4.0 * g.ds_sup;
    } else {
      a.ubds = Prod({Prod({Const(alpha), f}), ds_g});
      a.ds_sup = alpha * g.ds_sup;
    }
    a.beta_ds = alpha * g.ds_sup + g.beta_ds;
    a.value_sup = 1.0;
    return a;
  }

  std::vector<Analysis> Children(const ExprPtr& f, double b) {
    std::vector<Analysis> out;
    for (const auto& c : f->children()) out.push_back(Run(c, b));
    return out;
  }

  // Children on one shared variable x with query norms c_i |x| sum to the
  // query norm (sum c_j) |x|, so a child's smoothness shrinks by its share.
  static std::vector<double> NormShares(const ExprPtr& f) {
    const auto& kids = f->children();
    std::vector<double> share(kids.size(), 1.0);
    std::vector<std::pair<std::string, double>> leaf(kids.size());
    std::map<std::string, double> total;
    for (size_t i = 0; i < kids.size(); ++i) {
      NormPtr n = QueryNorm(kids[i]);
      if (!n) continue;
      double c = 1.0;
      if (n->kind() == NormExpr::Kind::kScale) {
        c = n->factor();
        n = n->children()[0];
      }
      if (n->kind() != NormExpr::Kind::kVar) return share;
      leaf[i] = {n->name(), c};
      total[n->name()] += c;
    }
    for (size_t i = 0; i < kids.size(); ++i) {
      if (!leaf[i].first.empty()) share[i] = leaf[i].second / total[leaf[i].first];
    }
    return share;
  }

  Analysis SumRule(const ExprPtr& f, double b) {
    auto ch = Children(f, b);
    bool disjoint = PairwiseDisjoint(ChildColumns(f));
    std::vector<double> share =
        disjoint ? std::vector<double>(ch.size(), 1.0) : NormShares(f);
    Analysis a;
    std::vector<ExprPtr> ubf, ubds;
    for (size_t i = 0; i < ch.size(); ++i) {
      ubf.push_back(ch[i].ubf);
      a.beta_f = std::max(a.beta_f, share[i] * ch[i].beta_f);
      a.value_sup += ch[i].value_sup;
      if (IsPublic(f->children()[i])) continue;
      ubds.push_back(RequireDs(ch[i], f->children()[i]));
      a.beta_ds = std::max(a.beta_ds, share[i] * ch[i].beta_ds);
      a.ds_sup = disjoint ? std::max(a.ds_sup, ch[i].ds_sup)
                          : a.ds_sup + ch[i].ds_sup;
    }
    a.ubf = Sum(std::move(ubf));
    a.ubds = disjoint ? CombineDs(std::move(ubds), 1.0) : Sum(std::move(ubds));
    return a;
  }

  Analysis ProdRule(const ExprPtr& f, double b) {
    auto ch = Children(f, b);
    const auto& kids = f->children();
    bool disjoint = PairwiseDisjoint(ChildColumns(f));
    Analysis a;
    std::vector<ExprPtr> ubf, terms;
    a.value_sup = 1.0;
    double ds_sup = 0.0;
    for (size_t i = 0; i < ch.size(); ++i) {
      ubf.push_back(ch[i].ubf);
      a.beta_f += ch[i].beta_f;
      a.value_sup = SupProduct(a.value_sup, ch[i].value_sup);
    }
    for (size_t i = 0; i < ch.size(); ++i) {
      if (IsPublic(kids[i])) continue;
      std::vector<ExprPtr> others;
      double beta = RequireDs(ch[i], kids[i]) ? ch[i].beta_ds : 0.0;
      double sup = ch[i].ds_sup;
      for (size_t j = 0; j < ch.size(); ++j) {
        if (j == i) continue;
        others.push_back(ch[j].ubf);
        beta += ch[j].beta_f;
        sup = SupProduct(sup, ch[j].value_sup);
      }
      ExprPtr rest = Prod(std::move(others));
      terms.push_back(Guard(ch[i].ubds, rest));
      a.beta_ds = std::max(a.beta_ds, beta);
      ds_sup = disjoint ? std::max(ds_sup, sup) : ds_sup + sup;
    }
    a.ubf = Prod(std::move(ubf));
    a.ubds = disjoint ? CombineDs(std::move(terms), 1.0) : Sum(std::move(terms));
    a.ds_sup = std::isnan(ds_sup) ? kInf : ds_sup;
    return a;
  }

  Analysis ExtremumRule(const ExprPtr& f, double b) {
    auto ch = Children(f, b);
    Analysis a;
    std::vector<ExprPtr> ubf, ubds;
    for (size_t i = 0; i < ch.size(); ++i) {
      ubf.push_back(ch[i].ubf);
      ubds.push_back(RequireDs(ch[i], f->children()[i]));
      a.beta_f = std::max(a.beta_f, ch[i].beta_f);
      a.beta_ds = std::max(a.beta_ds, ch[i].beta_ds);
      a.ds_sup = std::max(a.ds_sup, ch[i].ds_sup);
      a.value_sup = std::max(a.value_sup, ch[i].value_sup);
    }
    a.ubf = Max(std::move(ubf));
    a.ubds = Max(std::move(ubds));
    return a;
  }

  Analysis NormRule(const ExprPtr& f, double b) {
    const auto& kids = f->children();
    double p = f->value();
    bool disjoint = PairwiseDisjoint(ChildColumns(f));
    bool plain = disjoint && std::all_of(kids.begin(), kids.end(),
                                         [&](const ExprPtr& k) {
                                           return k->op() == Op::kCol &&
                                                  Scale(k->name()) ==
                                                      Scale(kids[0]->name());
                                         });
    if (plain) {
      // ||x||_p is 1-Lipschitz in lp; smooth it like an identity leaf.
      double s = Scale(kids[0]->name());
      Analysis a;
      ExprPtr scaled = s == 1.0 ? f : Prod({Const(s), f});
      a.ubf = s == 1.0 ? SmoothAbs(scaled, b)
                       : Prod({Const(1.0 / s), SmoothAbs(scaled, b)});
      a.beta_f = b;
      a.ubds = Const(1.0 / s);
      a.ds_sup = 1.0 / s;
      a.value_sup = kInf;
      return a;
    }
    auto ch = Children(f, b);
    Analysis a;
    std::vector<ExprPtr> ubf, ubds;
    std::vector<double> sups;
    for (size_t i = 0; i < ch.size(); ++i) {
      ubf.push_back(ch[i].ubf);
      sups.push_back(ch[i].value_sup);
      a.beta_f = std::max(a.beta_f, ch[i].beta_f);
      if (IsPublic(kids[i])) continue;
      ubds.push_back(RequireDs(ch[i], kids[i]));
      a.beta_ds = std::max(a.beta_ds, ch[i].beta_ds);
      a.ds_sup = disjoint ? std::max(a.ds_sup, ch[i].ds_sup)
                          : a.ds_sup + ch[i].ds_sup;
    }
    a.ubf = LpNorm(p, std::move(ubf));
    a.ubds = disjoint ? CombineDs(std::move(ubds), 1.0) : Sum(std::move(ubds));
    a.value_sup = LpCombine(sups, p);
    return a;
  }

  Analysis CaseRule(const ExprPtr& f, double b) {
    const auto& k = f->children();
    if (!IsPublic(k[0]) || !IsPublic(k[1])) {
      throw InputError("case condition over sensitive data is not smooth: " +
                       ToSql(f));
    }
    Analysis t = Run(k[2], b), e = Run(k[3], b);
    Analysis a;
    a.ubf = Max({t.ubf, e.ubf});
    a.ubds = Max({RequireDs(t, k[2]), RequireDs(e, k[3])});
    a.beta_f = std::max(t.beta_f, e.beta_f);
    a.beta_ds = std::max(t.beta_ds, e.beta_ds);
    a.ds_sup = std::max(t.ds_sup, e.ds_sup);
    a.value_sup = std::max(t.value_sup, e.value_sup);
    return a;
  }

  const std::map<std::string, double>& scale_;
};

}  // namespace

Analysis Analyze(const ExprPtr& f, const std::map<std::string, double>& scale,
                 double b) {
  return Analyzer(scale).Run(f, b);
}

double SolveSmoothing(const std::function<double(double)>& achieved,
                      double beta) {
  if (!(beta > 0)) throw InputError("requested beta must be positive");
  if (achieved(beta) <= beta) return beta;
  // Grow b while it still fits, then bisect the boundary.
  double floor = achieved(beta * 1e-9);
  if (!(floor <= beta)) {
    throw InfeasibleError("no leaf smoothing reaches beta = " +
                              FormatDouble(beta) + "; smallest achievable is " +
                              FormatDouble(floor),
                          floor, kInf);
  }
  double lo = beta * 1e-9, hi = beta;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    double mid = 0.5 * (lo + hi);
    if (achieved(mid) <= beta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

SmoothBound ComputeSmoothBound(const ExprPtr& f, double beta,
                               const NormPtr& norm) {
  SmoothBound out;
  NormPtr nq = QueryNorm(f);
  if (nq) out.witness = ScaleElaborate(nq, norm);
  std::map<std::string, double> scale;
  for (const auto& [v, k] : out.witness.factor) scale[v] = k;
  double gamma = out.witness.global;
  auto achieved = [&](double b) {
    Analysis a = Analyze(f, scale, b);
    if (!a.ubds) return kInf;
    return std::max(a.beta_f, a.beta_ds) / gamma;
  };
  out.smoothing = SolveSmoothing(achieved, beta);
  Analysis a = Analyze(f, scale, out.smoothing);
  if (!a.ubds) {
    throw InputError("no derivative sensitivity bound for " + ToSql(f));
  }
  out.ubf = a.ubf;
  out.ubds = gamma == 1.0 ? a.ubds : Prod({a.ubds, Const(1.0 / gamma)});
  out.beta = std::max(a.beta_f, a.beta_ds) / gamma;
  return out;
}

}  // namespace dersens
