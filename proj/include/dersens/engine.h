#ifndef DERSENS_ENGINE_H_
#define DERSENS_ENGINE_H_

#include <functional>
#include <string>
#include <vector>

#include "dersens/analyzer.h"
#include "dersens/schema.h"

namespace dersens {

// Sum with pairwise reduction.
double PairwiseSum(const std::vector<double>& xs);

// Calls `visit` for every row of the cross product of the query tables that
// passes the public conjuncts. Filters run as soon as their tables are bound.
void ForEachJoinedRow(const BoundQuery& ctx, const Database& db,
                      const std::function<void(const ValueSource&)>& visit);

size_t CountJoinedRows(const BoundQuery& ctx, const Database& db);

// Exact query semantics. MIN and MAX over no rows give NaN.
double RunInitial(const BoundQuery& ctx, const Database& db);

// Value of the modified (continuous) query.
double RunModified(const SensitivityPlan& plan, const Database& db);

struct GroupValue {
  std::string alias;
  std::string id;
  double value = 0.0;
};

struct SensitivityResult {
  double value = 0.0;
  std::vector<double> per_table;  // one per plan group table
  std::vector<GroupValue> groups;
  GroupValue argmax;
  // PRODUCT only: sum_i K_i n_i^(1 - 1/p_i) measured on the data.
  double product_row_weight = 0.0;
};

// Smooth sensitivity bound of the modified query. Throws InfeasibleError
// for PRODUCT when the data exceed the plan's row weight.
SensitivityResult RunSensitivity(const SensitivityPlan& plan,
                                 const Database& db);

// Percentage error of the modified result shifted by ten sensitivities
// against the initial result.
double RelativeError(double initial, double modified, double sensitivity);

}  // namespace dersens

#endif  // DERSENS_ENGINE_H_
