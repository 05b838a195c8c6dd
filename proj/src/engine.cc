#include "dersens/engine.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "dersens/format.h"

namespace dersens {

double PairwiseSum(const std::vector<double>& xs) {
  std::function<double(size_t, size_t)> rec = [&](size_t lo, size_t hi) {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (size_t i = lo; i < hi; ++i) s += xs[i];
      return s;
    }
    size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return rec(0, xs.size());
}

namespace {

struct Slot {
  int table = 0;
  int column = -1;  // -1: the ID column
};

class JoinedRow : public ValueSource {
 public:
  JoinedRow(const BoundQuery& ctx, const Database& db) {
    for (const auto& t : ctx.query.tables) {
      auto it = db.tables.find(t.table);
      if (it == db.tables.end()) throw InputError("no data for table '" + t.table + "'");
      tables_.push_back(&it->second);
    }
    index_.assign(tables_.size(), 0);
    for (const auto& [ref, info] : ctx.columns) {
      Slot s;
      for (size_t i = 0; i < ctx.query.tables.size(); ++i) {
        if (ctx.query.tables[i].alias == info.alias) s.table = static_cast<int>(i);
      }
      s.column = info.column == "ID" ? -1 : ctx.aliases.at(info.alias)->ColumnIndex(info.column);
      slots_[ref] = s;
    }
  }

  double Number(const std::string& ref) const override {
    auto e = extra_.find(ref);
    if (e != extra_.end()) return e->second;
    const Slot& s = Find(ref);
    if (s.column < 0) return std::stod(tables_[s.table]->ids[index_[s.table]]);
    return tables_[s.table]->numbers[s.column][index_[s.table]];
  }

  std::string Text(const std::string& ref) const override {
    const Slot& s = Find(ref);
    const Table& t = *tables_[s.table];
    if (s.column < 0) return t.ids[index_[s.table]];
    if (!t.texts[s.column].empty()) return t.texts[s.column][index_[s.table]];
    return FormatDouble(t.numbers[s.column][index_[s.table]]);
  }

  void Set(const std::string& ref, double v) { extra_[ref] = v; }
  size_t tables() const { return tables_.size(); }
  const Table& table(size_t i) const { return *tables_[i]; }
  size_t& index(size_t i) { return index_[i]; }
  size_t index(size_t i) const { return index_[i]; }

 private:
  const Slot& Find(const std::string& ref) const {
    auto it = slots_.find(ref);
    if (it == slots_.end()) throw InputError("unbound column '" + ref + "'");
    return it->second;
  }

  std::vector<const Table*> tables_;
  std::vector<size_t> index_;
  std::unordered_map<std::string, Slot> slots_;
  std::unordered_map<std::string, double> extra_;
};

void CollectColumns(const SqlExpr& e, std::set<std::string>& out) {
  if (e.kind == SqlExpr::Kind::kColumn) out.insert(e.text);
  for (const auto& a : e.args) CollectColumns(*a, out);
}

void CollectColumns(const SqlPred& p, std::set<std::string>& out) {
  for (const auto& e : p.exprs) CollectColumns(*e, out);
  for (const auto& c : p.children) CollectColumns(*c, out);
}

// Walks the public-filtered cross product, exposing the reusable row.
void Walk(const BoundQuery& ctx, JoinedRow& row,
          const std::function<void(const JoinedRow&)>& visit) {
  const size_t n = row.tables();
  std::vector<std::vector<PredPtr>> filters(n + 1);
  for (const auto& c : ctx.public_conjuncts) {
    std::set<std::string> cols;
    CollectColumns(*c, cols);
    size_t level = 0;
    for (const auto& ref : cols) {
      const std::string& alias = ctx.columns.at(ref).alias;
      for (size_t i = 0; i < n; ++i) {
        if (ctx.query.tables[i].alias == alias) level = std::max(level, i + 1);
      }
    }
    filters[level].push_back(BindPredicate(c, ctx));
  }
  auto pass = [&](size_t level) {
    return std::all_of(filters[level].begin(), filters[level].end(),
                       [&](const PredPtr& p) { return p->Eval(row); });
  };
  if (!pass(0)) return;
  std::function<void(size_t)> rec = [&](size_t level) {
    if (level == n) {
      visit(row);
      return;
    }
    const size_t rows = row.table(level).size();
    for (size_t i = 0; i < rows; ++i) {
      row.index(level) = i;
      if (pass(level + 1)) rec(level + 1);
    }
  };
  rec(0);
}

double DualCombine(const std::vector<double>& xs, double p) {
  double q = DualExponent(p);
  if (xs.empty()) return 0.0;
  if (std::isinf(q)) return *std::max_element(xs.begin(), xs.end());
  if (q == 1.0) return PairwiseSum(xs);
  std::vector<double> pw;
  for (double x : xs) pw.push_back(std::pow(x, q));
  return std::pow(PairwiseSum(pw), 1.0 / q);
}

}  // namespace

void ForEachJoinedRow(const BoundQuery& ctx, const Database& db,
                      const std::function<void(const ValueSource&)>& visit) {
  JoinedRow row(ctx, db);
  Walk(ctx, row, [&](const JoinedRow& r) { visit(r); });
}

size_t CountJoinedRows(const BoundQuery& ctx, const Database& db) {
  size_t n = 0;
  ForEachJoinedRow(ctx, db, [&](const ValueSource&) { ++n; });
  return n;
}

double RunInitial(const BoundQuery& ctx, const Database& db) {
  std::vector<double> values;
  ForEachJoinedRow(ctx, db, [&](const ValueSource& row) {
    if (ctx.where && !ctx.where->Eval(row)) return;
    values.push_back(Eval(ctx.value, row));
  });
  switch (ctx.query.aggregator) {
    case Aggregator::kSum:
      return PairwiseSum(values);
    case Aggregator::kCount:
      return static_cast<double>(values.size());
    case Aggregator::kProduct: {
      double p = 1.0;
      for (double v : values) p *= v;
      return p;
    }
    case Aggregator::kMin:
      return values.empty() ? std::nan("") : *std::min_element(values.begin(), values.end());
    case Aggregator::kMax:
      return values.empty() ? std::nan("") : *std::max_element(values.begin(), values.end());
  }
  return 0.0;
}

double RunModified(const SensitivityPlan& plan, const Database& db) {
  const BoundQuery& ctx = plan.ctx;
  JoinedRow row(ctx, db);
  const bool extremum =
      plan.aggregator == Aggregator::kMin || plan.aggregator == Aggregator::kMax;
  if (extremum) {
    double lo = kInf, hi = -kInf;
    Walk(ctx, row, [&](const JoinedRow& r) {
      double v = Eval(plan.value, r);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    });
    row.Set(kDeltaRef, hi >= lo ? hi - lo : 0.0);
  }
  std::vector<double> values;
  Walk(ctx, row, [&](const JoinedRow& r) { values.push_back(Eval(plan.row_expr, r)); });
  switch (plan.aggregator) {
    case Aggregator::kSum:
      return PairwiseSum(values);
    case Aggregator::kCount: {
      for (double& v : values) v = std::abs(v);
      return PairwiseSum(values);
    }
    case Aggregator::kProduct: {
      double p = 1.0;
      for (double v : values) p *= v;
      return p;
    }
    case Aggregator::kMin:
      return values.empty() ? std::nan("") : *std::min_element(values.begin(), values.end());
    case Aggregator::kMax:
      return values.empty() ? std::nan("") : *std::max_element(values.begin(), values.end());
  }
  return 0.0;
}

SensitivityResult RunSensitivity(const SensitivityPlan& plan, const Database& db) {
  const BoundQuery& ctx = plan.ctx;
  SensitivityResult out;
  if (plan.groups.empty()) return out;
  JoinedRow row(ctx, db);
  std::vector<size_t> level;
  for (const auto& g : plan.groups) {
    for (size_t i = 0; i < ctx.query.tables.size(); ++i) {
      if (ctx.query.tables[i].alias == g.alias) level.push_back(i);
    }
  }
  const bool extremum =
      plan.aggregator == Aggregator::kMin || plan.aggregator == Aggregator::kMax;

  // Per group table: row index -> accumulated terms.
  struct Acc {
    std::vector<double> terms;  // SUM, COUNT, PRODUCT
    double f = 0.0, s = 0.0;    // MIN, MAX
    size_t joined = 0;
  };
  std::vector<std::map<size_t, Acc>> acc(plan.groups.size());
  std::vector<double> log_bounds;
  double bound_max = 0.0;
  Walk(ctx, row, [&](const JoinedRow& r) {
    double ds = -1.0, ids = 0.0;
    if (plan.aggregator == Aggregator::kProduct) {
      log_bounds.push_back(std::log(std::abs(Eval(plan.row_bound, r))));
    } else if (extremum && plan.indicator_ds) {
      bound_max = std::max(bound_max, std::abs(Eval(plan.row_bound, r)));
    }
    for (size_t g = 0; g < plan.groups.size(); ++g) {
      size_t i = r.index(level[g]);
      if (!r.table(level[g]).sensitive[i]) continue;
      if (ds < 0) {
        ds = std::abs(Eval(plan.row_ds, r));
        if (plan.indicator_ds) ids = std::abs(Eval(plan.indicator_ds, r));
      }
      Acc& a = acc[g][i];
      ++a.joined;
      if (extremum) {
        a.f = std::max(a.f, ds);
        a.s = std::max(a.s, ids);
      } else {
        a.terms.push_back(ds);
      }
    }
  });

  double best = -1.0;
  for (size_t g = 0; g < plan.groups.size(); ++g) {
    const Table& t = row.table(level[g]);
    std::vector<double> values;
    size_t k = 0;
    for (const auto& [i, a] : acc[g]) {
      double v = extremum ? (plan.indicator_ds ? 3.0 * a.f + 2.0 * bound_max * a.s : a.f)
                          : PairwiseSum(a.terms);
      values.push_back(v);
      k = std::max(k, a.joined);
      out.groups.push_back(GroupValue{plan.groups[g].alias, t.ids[i], v});
      if (v > best) {
        best = v;
        out.argmax = out.groups.back();
      }
    }
    out.per_table.push_back(DualCombine(values, plan.groups[g].rows_p));
    if (plan.aggregator == Aggregator::kProduct) {
      size_t n = std::count(t.sensitive.begin(), t.sensitive.end(), true);
      double p = plan.groups[g].rows_p;
      double e = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
      out.product_row_weight += static_cast<double>(k) * std::pow(static_cast<double>(n), e);
    }
  }
  out.value = DualCombine(out.per_table, ctx.database_p);
  if (plan.aggregator == Aggregator::kProduct) {
    if (out.product_row_weight > plan.product_row_weight * (1 + 1e-12)) {
      double min_beta =
          (plan.beta_value * out.product_row_weight + plan.beta_ratio) / plan.witness.global;
      throw InfeasibleError(
          "PRODUCT row weight on the data is " + FormatDouble(out.product_row_weight) +
              ", above the planned " + FormatDouble(plan.product_row_weight),
          min_beta, kInf);
    }
    out.value *= std::exp(PairwiseSum(log_bounds));
  }
  return out;
}

double RelativeError(double initial, double modified, double sensitivity) {
  double diff = std::abs(modified + 10.0 * sensitivity - initial);
  if (initial == 0) return diff == 0 ? 0.0 : kInf;
  return diff / std::abs(initial) * 100.0;
}

}  // namespace dersens
