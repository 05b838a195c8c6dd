// Prints one pass/fail line per acceptance criterion and exits nonzero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dersens/analyzer.h"
#include "dersens/dp.h"
#include "dersens/engine.h"
#include "dersens/format.h"
#include "dersens/norm.h"
#include "dersens/smooth.h"
#include "dersens/tpch_gen.h"
#include "fixtures.h"
#include "suites.h"

namespace dersens {
namespace {

using testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  double limit_seconds;  // 0: no runtime bound
  std::function<Outcome()> check;
};

std::string Fmt(double x) { return FormatDouble(x); }

Outcome ParameterArithmetic() {
  double b = DeriveB(1.0, 0.1, 4.0);
  return {b == 0.1, "b=" + Fmt(b)};
}

Outcome NoiseQuantile() {
  GenCauchy g(4.0);
  SplitMix64 rng(1);
  const int n = 100000;
  int inside = 0;
  for (int i = 0; i < n; ++i) inside += std::abs(Sample(g, rng)) <= 1.0;
  double p = static_cast<double>(inside) / n;
  return {p >= 0.77 && p <= 0.79, "P(|eta|<=1)=" + Fmt(p)};
}

PlanOptions BenchOptions() {
  PlanOptions o;
  o.alpha = 0.1;
  o.beta = 0.1;
  return o;
}

Outcome ScaleInvariantCell() {
  TempDir dir;
  Schema schema = testing::LineitemSchema();
  Database db = testing::BuildDatabase(dir.path(), schema,
                                       {testing::LineitemFixture(100, 50.0, 1)});
  SensitivityPlan plan = BuildPlan(ParseQuery(BenchQueryText()), schema, BenchOptions());
  double s = RunSensitivity(plan, db).value;
  return {std::abs(s - 1.0) <= 1e-3, "sensitivity=" + Fmt(s)};
}

Outcome GoldenQueries() {
  int matched = 0, total = 0;
  std::string failed;
  for (const auto& c : testing::GoldenCases()) {
    EmittedSql sql = testing::EmitGolden(c);
    for (const auto& [kind, text] :
         {std::pair<std::string, std::string>{"sensitivity", sql.sensitivity},
          {"modified", sql.modified}}) {
      ++total;
      std::string golden = testing::TestData("golden/" + c.name + "_" + kind + ".sql");
      if (testing::GoldenSqlMatches(golden, text, c.drop_filters)) {
        ++matched;
      } else {
        failed += " " + c.name + "_" + kind;
      }
    }
  }
  return {matched == total,
          std::to_string(matched) + "/" + std::to_string(total) + " match" + failed};
}

Outcome Exactness() {
  std::mt19937_64 rng(101);
  Schema s = testing::IntegerSchema();
  PlanOptions o = testing::PreciseOptions();
  std::uniform_int_distribution<size_t> size(1, 30);
  int checked = 0, mismatched = 0;
  size_t largest = 0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    TempDir dir;
    Database db = testing::BuildDatabase(
        dir.path(), s, testing::IntegerTables(rng, size(rng), size(rng), -3, 4));
    for (const auto& q : testing::ExactnessQueries()) {
      SensitivityPlan plan = BuildPlan(ParseQuery(q), s, o);
      largest = std::max(largest, CountJoinedRows(plan.ctx, db));
      double init = RunInitial(plan.ctx, db);
      if (std::isnan(init)) continue;
      ++checked;
      mismatched += RunModified(plan, db) != init;
    }
  }
  return {mismatched == 0 && largest <= 1000,
          std::to_string(checked - mismatched) + "/" + std::to_string(checked) +
              " exact, largest join " + std::to_string(largest) + " rows"};
}

Outcome GradientSuite() {
  std::mt19937_64 rng(42);
  double worst = 0.0;
  std::string worst_name;
  auto cases = testing::GradientCases();
  for (const auto& c : cases) {
    ExprPtr ds = DsExpr(c.f, c.norm);
    for (int i = 0; i < 200; ++i) {
      Assignment at = c.point(rng);
      double sym = Eval(ds, at);
      double num = FiniteDiffDs(c.f, c.norm, at, 1e-5);
      double rel = std::abs(sym - num) / std::max(std::abs(sym), 1e-5);
      if (rel > worst) {
        worst = rel;
        worst_name = c.name;
      }
    }
  }
  return {worst <= 1e-4, std::to_string(cases.size()) + " constructors, worst rel err " +
                             Fmt(worst) + " (" + worst_name + ")"};
}

Outcome SmoothnessSuite() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(-3.0, 3.0);
  double worst = 0.0;  // largest observed ratio / e^(beta d)
  int violations = 0;
  auto cases = testing::CatalogCases();
  for (const auto& c : cases) {
    SmoothBound s = ComputeSmoothBound(c.f, c.beta, c.norm);
    ExprPtr ds = DsExpr(c.f, c.norm);
    for (int i = 0; i < 1000; ++i) {
      Assignment a = testing::CatalogPoint(rng, c.range);
      Assignment b = a, diff;
      for (auto& [k, v] : b) {
        double dv = i % 2 ? step(rng) : step(rng) * c.range;
        v += dv;
        diff[k] = dv;
      }
      double bound = std::exp(c.beta * EvalNorm(c.norm, diff));
      double fa = Eval(s.ubf, a), fb = Eval(s.ubf, b);
      double da = Eval(s.ubds, a), db = Eval(s.ubds, b);
      if (fa * (1 + 1e-9) < std::abs(Eval(c.f, a))) ++violations;
      if (da * (1 + 1e-9) + 1e-12 < Eval(ds, a)) ++violations;
      for (auto [x, y] : {std::pair{fa, fb}, {fb, fa}, {da, db}, {db, da}}) {
        if (x == 0.0) continue;
        worst = std::max(worst, y == 0.0 ? kInf : x / (y * bound));
      }
    }
  }
  bool pass = violations == 0 && worst <= 1 + 1e-9;
  return {pass, std::to_string(cases.size()) + " functions, worst slack " + Fmt(worst) +
                    ", bound violations " + std::to_string(violations)};
}

Outcome EndToEndDp() {
  double worst = 0.0;
  int bad = 0;
  auto trials = testing::EndToEndDpTrials(100, 7, 1.0);
  for (const auto& t : trials) {
    if (t.log_ratio > t.budget * (1 + 1e-4)) ++bad;
    if (t.budget > 0) worst = std::max(worst, t.log_ratio / t.budget);
  }
  return {bad == 0, std::to_string(trials.size()) + " pairs, worst ratio/(eps d) " +
                        Fmt(worst)};
}

Outcome NormToolkit() {
  CompareResult r = Compare(Normalize(ParseNorm("lp 1.0 (lp 2.0 x y) z")),
                            Normalize(ParseNorm("lp 1.0 x y z")));
  const std::vector<std::string> vars = {"a", "b", "c", "d", "e"};
  std::mt19937_64 rng(29);
  int valid = 0, total = 0;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> sub(vars.begin(), vars.begin() + 1 + rng() % vars.size());
    NormPtr nq = Normalize(testing::RandomNorm(rng, sub, 2));
    NormPtr ndb = Normalize(testing::RandomNorm(rng, vars, 2));
    for (const ScalingWitness& w : {ScaleStraightforward(nq, ndb), ScaleElaborate(nq, ndb)}) {
      NormPtr scaled = ApplyScaling(nq, w);
      bool ok = true;
      for (int k = 0; k < 1000 && ok; ++k) {
        Assignment x = testing::RandomPoint(rng, vars, 2.0);
        ok = w.global * EvalNorm(scaled, x) <= EvalNorm(ndb, x) * (1 + 1e-9);
      }
      ++total;
      valid += ok;
    }
  }
  return {r.proved && valid == total, std::string("regrouping ") +
                                          (r.proved ? "proved" : "not proved") + ", " +
                                          std::to_string(valid) + "/" +
                                          std::to_string(total) + " witnesses valid"};
}

Outcome BenchRun() {
  TempDir dir;
  GenerateLineitem(dir.path(), 5000, 1);
  Schema schema = ParseSchema(LineitemSchemaText());
  Database db = LoadDatabase(dir.path(), schema);
  SensitivityPlan plan = BuildPlan(ParseQuery(BenchQueryText()), schema, BenchOptions());
  double init = RunInitial(plan.ctx, db);
  double mod = RunModified(plan, db);
  double sens = RunSensitivity(plan, db).value;
  double err = RelativeError(init, mod, sens);
  return {err >= 0.0 && err <= 20.0, "rel_error=" + Fmt(err) + "% at 5000 rows (sensitivity " +
                                         Fmt(sens) + ")"};
}

std::string Seconds(double s) {
  char buf[32];
  if (s < 1.0) {
    std::snprintf(buf, sizeof buf, "%.3g ms", s * 1e3);
  } else {
    std::snprintf(buf, sizeof buf, "%.3g s", s);
  }
  return buf;
}

int Main() {
  const std::vector<Criterion> criteria = {
      {1, 1e-3, ParameterArithmetic}, {2, 2.0, NoiseQuantile},
      {3, 1.0, ScaleInvariantCell},   {4, 1.0, GoldenQueries},
      {5, 5.0, Exactness},            {6, 10.0, GradientSuite},
      {7, 10.0, SmoothnessSuite},     {8, 60.0, EndToEndDp},
      {9, 5.0, NormToolkit},          {10, 0.0, BenchRun},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = Seconds(s);
    if (c.limit_seconds > 0) {
      timing += " < " + Seconds(c.limit_seconds);
      if (s >= c.limit_seconds) {
        o.pass = false;
        timing += " exceeded";
      }
    }
    failures += !o.pass;
    std::printf("criterion %d: %s %s (%s)\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                timing.c_str());
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace dersens

int main() { return dersens::Main(); }
