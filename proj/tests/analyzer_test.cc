#include "dersens/analyzer.h"

#include <cmath>

#include "dersens/smooth.h"
#include "fixtures.h"
#include "gtest/gtest.h"

namespace dersens {
namespace {

Schema ToySchema() {
  return ParseSchema(
      "table t\ncol x int\ncol y int\ncol v real\ncol s text\nrows lp 1.0\n"
      "norm lp 1.0 x y (scaled 0.01 v)\n"
      "table u\ncol k int\ncol w real\ncol name text\n");
}

BoundQuery Bind(const std::string& sql) { return Validate(ParseQuery(sql), ToySchema()); }

double LowerAndEval(const std::string& where, const PlanOptions& o, const Assignment& at) {
  BoundQuery ctx = Bind("select sum(t.v) from t where " + where);
  std::vector<ExprPtr> factors;
  for (const auto& c : ctx.sensitive_conjuncts) factors.push_back(LowerPredicate(c, ctx, o));
  return Eval(Prod(std::move(factors)), at);
}

TEST(LowerPredicateTest, PreciseIntegerComparison) {
  PlanOptions o;
  o.precise = true;
  EXPECT_EQ(LowerAndEval("t.x > t.y", o, {{"t.x", 5}, {"t.y", 3}}), 1.0);
  EXPECT_EQ(LowerAndEval("t.x > t.y", o, {{"t.x", 3}, {"t.y", 3}}), 0.0);
  EXPECT_EQ(LowerAndEval("t.x = t.y", o, {{"t.x", 3}, {"t.y", 3}}), 1.0);
  EXPECT_EQ(LowerAndEval("t.x = t.y", o, {{"t.x", 4}, {"t.y", 3}}), 0.0);
  EXPECT_EQ(LowerAndEval("t.x <= 2", o, {{"t.x", 2}}), 1.0);
  EXPECT_EQ(LowerAndEval("t.x <= 2", o, {{"t.x", 3}}), 0.0);
}

TEST(LowerPredicateTest, PrecisionScalesTheClamp) {
  PlanOptions o;
  o.precise = true;
  o.precision = 10.0;
  EXPECT_EQ(LowerAndEval("t.v > 1", o, {{"t.v", 1.1}}), 1.0);
  EXPECT_NEAR(LowerAndEval("t.v > 1", o, {{"t.v", 1.05}}), 0.5, 1e-12);
  EXPECT_EQ(LowerAndEval("t.v > 1", o, {{"t.v", 1.0}}), 0.0);
}

TEST(LowerPredicateTest, SigmoidAtThreshold) {
  PlanOptions o;
  o.alpha = 0.1;
  EXPECT_DOUBLE_EQ(LowerAndEval("t.v <= 200.3", o, {{"t.v", 200.3}}), 0.5);
  EXPECT_DOUBLE_EQ(LowerAndEval("t.v = 4", o, {{"t.v", 4}}), 1.0);
  double deep = LowerAndEval("t.v <= 200.3", o, {{"t.v", 100.0}});
  EXPECT_GT(deep, 0.9999);
}

TEST(LowerPredicateTest, BooleanConnectives) {
  PlanOptions o;
  o.precise = true;
  Assignment at{{"t.x", 5}, {"t.y", 3}};
  EXPECT_EQ(LowerAndEval("(t.x > 1 and t.y > 1)", o, at), 1.0);
  EXPECT_EQ(LowerAndEval("(t.x > 1 or t.y > 1)", o, at), 1.0);
  EXPECT_EQ(LowerAndEval("(t.x > 1 xor t.y > 9)", o, at), 1.0);
  EXPECT_EQ(LowerAndEval("not (t.x > 1)", o, at), 0.0);
  // OR is x1 + x2 - x1 x2 by default and x1 + x2 as XOR.
  PlanOptions s;
  s.alpha = 1.0;
  Assignment zero{{"t.x", 0}, {"t.y", 0}};
  EXPECT_DOUBLE_EQ(LowerAndEval("(t.x > 0 or t.y > 0)", s, zero), 0.75);
  s.or_as_xor = true;
  EXPECT_DOUBLE_EQ(LowerAndEval("(t.x > 0 or t.y > 0)", s, zero), 1.0);
}

TEST(LowerPredicateTest, InAndBetweenDesugar) {
  PlanOptions o;
  o.precise = true;
  EXPECT_EQ(LowerAndEval("t.x in (1, 4, 9)", o, {{"t.x", 4}}), 1.0);
  EXPECT_EQ(LowerAndEval("t.x in (1, 4, 9)", o, {{"t.x", 5}}), 0.0);
  EXPECT_EQ(LowerAndEval("t.x between 2 and 4", o, {{"t.x", 4}}), 1.0);
  EXPECT_EQ(LowerAndEval("t.x between 2 and 4", o, {{"t.x", 5}}), 0.0);
}

double AggregateRows(Aggregator agg, const std::vector<double>& f,
                     const std::vector<double>& sigma) {
  ExprPtr row = LowerAggregation(agg, Col("f"), Col("s"));
  double lo = *std::min_element(f.begin(), f.end());
  double hi = *std::max_element(f.begin(), f.end());
  double acc = agg == Aggregator::kProduct ? 1.0
               : agg == Aggregator::kMin   ? kInf
               : agg == Aggregator::kMax   ? -kInf
                                           : 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    double v = Eval(row, {{"f", f[i]}, {"s", sigma[i]}, {kDeltaRef, hi - lo}});
    switch (agg) {
      case Aggregator::kProduct:
        acc *= v;
        break;
      case Aggregator::kMin:
        acc = std::min(acc, v);
        break;
      case Aggregator::kMax:
        acc = std::max(acc, v);
        break;
      default:
        acc += v;
    }
  }
  return acc;
}

TEST(LowerAggregationTest, Examples) {
  EXPECT_EQ(AggregateRows(Aggregator::kCount, {7, 8, 9}, {1, 1, 0}), 2.0);
  EXPECT_EQ(AggregateRows(Aggregator::kSum, {7, 8, 9}, {1, 0, 1}), 16.0);
  EXPECT_EQ(AggregateRows(Aggregator::kMin, {10, 20, 30}, {0, 1, 1}), 20.0);
  EXPECT_EQ(AggregateRows(Aggregator::kMax, {10, 20, 30}, {1, 1, 0}), 20.0);
  EXPECT_EQ(AggregateRows(Aggregator::kProduct, {2, 3, 5}, {0, 0, 0}), 1.0);
  EXPECT_EQ(AggregateRows(Aggregator::kProduct, {2, 3, 5}, {1, 0, 1}), 10.0);
}

TEST(ValidateTest, ClassifiesLineitemConjuncts) {
  Schema s = testing::LineitemSchema();
  BoundQuery ctx = Validate(
      ParseQuery(ReadFile(std::string(DERSENS_TEST_DATA) + "/queries/b1_1.sql")), s);
  ASSERT_EQ(ctx.public_conjuncts.size(), 2u);
  ASSERT_EQ(ctx.sensitive_conjuncts.size(), 1u);
  EXPECT_NE(ToSql(*ctx.sensitive_conjuncts[0]).find("l_shipdateG"), std::string::npos);
  for (const auto& c : ctx.public_conjuncts) {
    std::string text = ToSql(*c);
    EXPECT_TRUE(text.find("l_returnflag") != std::string::npos ||
                text.find("l_linestatus") != std::string::npos)
        << text;
  }
}

TEST(ValidateTest, ClassificationIgnoresAndGrouping) {
  const char* a = "select sum(t.v) from t, u where (t.x > 1 and u.k = 2) and (t.s = 'a' and 1 < 2)";
  const char* b = "select sum(t.v) from t, u where t.x > 1 and (u.k = 2 and (t.s = 'a' and 1 < 2))";
  BoundQuery qa = Bind(a), qb = Bind(b);
  EXPECT_EQ(qa.public_conjuncts.size(), 3u);
  EXPECT_EQ(qb.public_conjuncts.size(), 3u);
  ASSERT_EQ(qa.sensitive_conjuncts.size(), 1u);
  ASSERT_EQ(qb.sensitive_conjuncts.size(), 1u);
  EXPECT_TRUE(Equal(*qa.sensitive_conjuncts[0], *qb.sensitive_conjuncts[0]));
}

TEST(ValidateTest, ConstantPredicateIsPublic) {
  BoundQuery ctx = Bind("select sum(t.v) from t where 1 < 2");
  EXPECT_EQ(ctx.public_conjuncts.size(), 1u);
  EXPECT_TRUE(ctx.sensitive_conjuncts.empty());
}

TEST(ValidateTest, Rejections) {
  EXPECT_THROW(Bind("select sum(t.v) from t where t.v like '1%'"), InputError);
  EXPECT_THROW(Bind("select sum(t.v) from t a, t b"), InputError);
  EXPECT_THROW(Bind("select sum(t.nope) from t"), ParseError);
  EXPECT_THROW(Bind("select sum(t.v) from missing"), InputError);
  EXPECT_THROW(Bind("select sum(t.s) from t"), InputError);
  EXPECT_NO_THROW(Bind("select sum(a.w) from u a, u b where a.k = b.k"));
}

TEST(BuildPlanTest, CountRowDsMatchesClosedForm) {
  PlanOptions o;
  o.alpha = 0.1;
  SensitivityPlan plan = BuildPlan(
      ParseQuery(ReadFile(std::string(DERSENS_TEST_DATA) + "/queries/b1_5.sql")),
      testing::LineitemSchema(), o);
  ASSERT_EQ(plan.groups.size(), 1u);
  EXPECT_EQ(plan.groups[0].alias, "lineitem");
  for (double sd : {0.0, 150.0, 200.3, 230.0, 400.0}) {
    double e = std::exp(0.1 * (200.3 - sd));
    double closed = 0.1 * e / ((e + 1) * (e + 1));
    double got = Eval(plan.row_ds, {{"lineitem.l_shipdateG", sd}});
    // The date block is scaled by 30, so the date step per unit is 1/30.
    EXPECT_NEAR(got, closed / 30.0, 1e-15) << sd;
    EXPECT_NEAR(got / closed, 0.03, 0.005);
  }
}

TEST(BuildPlanTest, OnlySensitiveTablesGroup) {
  BoundQuery ctx = Bind("select sum(t.v * u.w) from t, u where t.x = u.k");
  PlanOptions o;
  o.smoothing = 0.01;
  o.auto_beta = true;
  SensitivityPlan plan = BuildPlan(ctx, o);
  ASSERT_EQ(plan.groups.size(), 1u);
  EXPECT_EQ(plan.groups[0].alias, "t");
}

TEST(BuildPlanTest, NoSensitiveColumnWarns) {
  SensitivityPlan plan = BuildPlan(Bind("select count(*) from u where u.k > 3"), PlanOptions{});
  EXPECT_TRUE(plan.groups.empty());
  EXPECT_FALSE(plan.warnings.empty());
  EXPECT_EQ(Eval(plan.row_ds, Assignment{}), 0.0);
}

TEST(BuildPlanTest, AchievedBetaWithinRequest) {
  PlanOptions o;
  o.alpha = 0.1;
  o.beta = 0.1;
  SensitivityPlan plan = BuildPlan(
      ParseQuery(ReadFile(std::string(DERSENS_TEST_DATA) + "/queries/b1_1.sql")),
      testing::LineitemSchema(), o);
  EXPECT_LE(plan.beta, 0.1 * (1 + 1e-12));
  EXPECT_GT(plan.smoothing, 0.0);
}

TEST(BuildPlanTest, InfeasibleReportsMinimalEpsilon) {
  PlanOptions o;
  o.alpha = 5.0;
  o.beta = 0.1;
  try {
    BuildPlan(Bind("select count(*) from t where t.v < 3"), o);
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleError& e) {
    EXPECT_GT(e.min_beta(), 0.1);
    EXPECT_NEAR(e.min_epsilon(), 5.0 * e.min_beta(), 1e-12);
  }
}

TEST(AlignTest, IdenticalNormNeedsNoScaling) {
  BoundQuery ctx = Bind("select sum(t.x + t.y) from t");
  PlanOptions o;
  o.smoothing = 0.1;
  o.auto_beta = true;
  SensitivityPlan plan = BuildPlan(ctx, o);
  EXPECT_EQ(plan.witness.global, 1.0);
  EXPECT_EQ(plan.witness.Effective("t.x"), 1.0);
}

TEST(AlignTest, ScaledColumnDividesDs) {
  // v enters the database norm scaled by 0.01; one unit of distance moves v
  // by 100, so sum(v) has sensitivity 100 per row.
  PlanOptions o;
  o.smoothing = 0.1;
  o.auto_beta = true;
  SensitivityPlan plan = BuildPlan(Bind("select sum(t.v) from t"), o);
  EXPECT_DOUBLE_EQ(plan.witness.factor.at("t.v"), 0.01);
  EXPECT_NEAR(Eval(plan.row_ds, {{"t.v", 5.0}}), 100.0, 1e-9);
  NormPtr scaled = ParseNorm("scaled 0.01 v");
  EXPECT_NEAR(FiniteDiffDs(Col("v"), scaled, {{"v", 5.0}}, 1e-5), 100.0, 1e-6);
}

TEST(AlignTest, IdentityMethodNeedsProof) {
  PlanOptions o;
  o.smoothing = 0.1;
  o.auto_beta = true;
  o.scaling = ScalingMethod::kIdentity;
  EXPECT_NO_THROW(BuildPlan(Bind("select sum(t.x + t.y) from t"), o));
  EXPECT_THROW(BuildPlan(Bind("select sum(t.v) from t"), o), InputError);
}

TEST(EmitSqlTest, NoSensitiveGroupsGivesZero) {
  SensitivityPlan plan = BuildPlan(Bind("select count(*) from u"), PlanOptions{});
  EXPECT_EQ(EmitSql(plan).sensitivity, "SELECT 0.0;");
}

}  // namespace
}  // namespace dersens
