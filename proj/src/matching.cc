#include "dersens/matching.h"

#include <cmath>
#include <limits>

namespace dersens {

std::optional<std::vector<int>> MinCostAssignment(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return std::vector<int>{};
  const int m = static_cast<int>(cost[0].size());
  if (m < n) return std::nullopt;

  // Forbidden edges get a penalty larger than any finite assignment.
  double finite_span = 1.0;
  for (const auto& row : cost) {
    for (double c : row) {
      if (std::isfinite(c)) finite_span += std::fabs(c);
    }
  }
  const double forbidden = 1e6 * finite_span;
  auto a = [&](int i, int j) {
    double c = cost[i - 1][j - 1];
    return std::isfinite(c) ? c : forbidden;
  };

  // Shortest augmenting path with potentials, 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  for (int i = 0; i < n; ++i) {
    if (assignment[i] < 0 || !std::isfinite(cost[i][assignment[i]])) {
      return std::nullopt;
    }
  }
  return assignment;
}

}  // namespace dersens
