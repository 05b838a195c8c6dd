#ifndef DERSENS_MATCHING_H_
#define DERSENS_MATCHING_H_

#include <optional>
#include <vector>

namespace dersens {

// Min-cost assignment of every row to a distinct column (rows <= cols).
// Infinite entries are forbidden edges. Returns the column of each row, or
// nullopt when no finite assignment exists.
std::optional<std::vector<int>> MinCostAssignment(
    const std::vector<std::vector<double>>& cost);

}  // namespace dersens

#endif  // DERSENS_MATCHING_H_
