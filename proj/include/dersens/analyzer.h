#ifndef DERSENS_ANALYZER_H_
#define DERSENS_ANALYZER_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dersens/norm.h"
#include "dersens/scalar_expr.h"
#include "dersens/schema.h"
#include "dersens/sql.h"

namespace dersens {

struct PlanOptions {
  double alpha = 5.0;  // sigmoid / tauoid precision
  double beta = 0.1;   // requested smoothness
  // Smoothness of identity leaves. When absent the largest value meeting
  // `beta` is searched for.
  std::optional<double> smoothing;
  // Accept the smoothness achieved with the leaf smoothing instead of
  // failing when it exceeds `beta`.
  bool auto_beta = false;
  // Exact clamped comparisons for integer data; `precision` k assumes values
  // differ by at least 1/k.
  bool precise = false;
  double precision = 1.0;
  bool or_as_xor = false;
  ScalingMethod scaling = ScalingMethod::kElaborate;
  // PRODUCT only: bound on sum_i K_i n_i^(1 - 1/p_i) over sensitive tables,
  // K_i the joined rows per row of table i and n_i its sensitive rows.
  double product_row_weight = 1.0;
  double noise_gamma = 4.0;  // for the minimal-epsilon hint
};

struct ColumnInfo {
  std::string alias;
  std::string table;
  std::string column;
  ColumnType type = ColumnType::kReal;
  bool sensitive = false;
};

// A query resolved against a schema.
struct BoundQuery {
  QuerySpec query;  // column references qualified as alias.column
  std::map<std::string, ColumnInfo> columns;         // by "alias.column"
  std::shared_ptr<const Schema> schema;               // owns the tables below
  std::map<std::string, const TableSchema*> aliases;  // alias -> table
  std::vector<SqlPredPtr> public_conjuncts;
  std::vector<SqlPredPtr> sensitive_conjuncts;
  ExprPtr value;    // lowered select expression; Const(1) for COUNT
  PredPtr where;    // exact WHERE, nullptr when absent
  NormPtr db_norm;  // joined-row norm over "alias.column"; nullptr if none
  double database_p = kInf;
};

// Resolves names, rejects unsupported constructs and splits WHERE into
// public and sensitive top-level conjuncts.
BoundQuery Validate(const QuerySpec& query, const Schema& schema);

// Exact predicate over insensitive or sensitive data.
PredPtr BindPredicate(const SqlPredPtr& pred, const BoundQuery& ctx);

// Numeric lowering of a resolved expression. Sensitive columns become kCol.
ExprPtr LowerExpr(const SqlExprPtr& e, const BoundQuery& ctx);

// Smooth [0,1] relaxation of a predicate; public subtrees become indicators.
ExprPtr LowerPredicate(const SqlPredPtr& pred, const BoundQuery& ctx,
                       const PlanOptions& options);

// Per-row expression aggregated by the modified query. MIN and MAX read the
// spread max f - min f from the column "$delta".
ExprPtr LowerAggregation(Aggregator aggregator, const ExprPtr& value,
                         const ExprPtr& indicator);
inline constexpr const char* kDeltaRef = "$delta";

struct SensitiveTable {
  std::string alias;
  std::string table;
  double rows_p = 1.0;
};

struct SensitivityPlan {
  BoundQuery ctx;
  Aggregator aggregator = Aggregator::kSum;
  ExprPtr value;      // f
  ExprPtr indicator;  // sigma
  ExprPtr row_expr;   // modified per-row expression
  // SUM, COUNT: derivative-sensitivity bound of row_expr.
  // PRODUCT: that bound divided by row_bound.
  // MIN, MAX: bound for f.
  ExprPtr row_ds;
  ExprPtr row_bound;     // PRODUCT: ubf of row_expr. MIN, MAX: ubf of f.
  ExprPtr indicator_ds;  // MIN, MAX: bound for sigma; nullptr if sigma is public
  std::vector<SensitiveTable> groups;
  NormPtr query_norm;
  ScalingWitness witness;
  double beta = 0.0;  // achieved, w.r.t. the database norm
  double beta_requested = 0.0;
  double smoothing = 0.0;
  // PRODUCT: beta = (beta_value * W + beta_ratio) / gamma for row weight W.
  double beta_value = 0.0;
  double beta_ratio = 0.0;
  double product_row_weight = 1.0;
  std::vector<std::string> warnings;
};

SensitivityPlan BuildPlan(const BoundQuery& ctx, const PlanOptions& options);
SensitivityPlan BuildPlan(const QuerySpec& query, const Schema& schema,
                          const PlanOptions& options);

struct EmittedSql {
  std::string modified;
  std::string sensitivity;
};

EmittedSql EmitSql(const SensitivityPlan& plan);

}  // namespace dersens

#endif  // DERSENS_ANALYZER_H_
