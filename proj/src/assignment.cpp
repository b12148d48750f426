// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/assignment.hpp"

#include <limits>

namespace nftk {

namespace {

// Hungarian method with row/column potentials, 1-based with a dummy
// column 0. Requires rows <= cols.
std::vector<int> solve_wide(const MatD& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment assign_min_cost(const MatD& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return {};
  Assignment out;
  if (cost.rows() <= cost.cols()) {
    out.row_to_col = solve_wide(cost);
  } else {
    const MatD t = cost.transpose();
    const auto col_to_row = solve_wide(t);
    out.row_to_col.assign(cost.rows(), -1);
    for (int j = 0; j < static_cast<int>(col_to_row.size()); ++j)
      if (col_to_row[j] >= 0) out.row_to_col[col_to_row[j]] = j;
  }
  for (int i = 0; i < static_cast<int>(out.row_to_col.size()); ++i)
    if (out.row_to_col[i] >= 0) out.total += cost(i, out.row_to_col[i]);
  return out;
}

Assignment assign_max_score(const MatD& score) {
  Assignment out = assign_min_cost(-score);
  out.total = -out.total;
  return out;
}

}  // namespace nftk
