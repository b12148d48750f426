// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <vector>

#include "nftk/common.hpp"

namespace nftk {

/// Optimal one-to-one assignment for a rectangular cost matrix
/// (Hungarian method with potentials, O(n^2 m)). Every row of the
/// smaller side is assigned; row_to_col[i] = -1 only when rows > cols.
struct Assignment {
  std::vector<int> row_to_col;
  double total = 0.0;
};

Assignment assign_min_cost(const MatD& cost);
Assignment assign_max_score(const MatD& score);

}  // namespace nftk
