/*
 * Copyright 2026 The tabreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "tabreg/common.hpp"
#include "tabreg/table.hpp"

namespace tabreg::detail {

// Row-major copy of the chosen columns for Gower distances: numeric columns
// scaled to [0, 1] by their observed range, nominal columns kept as codes
// (flagged in `categorical`), NaN in missing cells.
struct GowerData {
  Matrix x;
  std::vector<double> categorical;
};

inline GowerData gower_data(const Table& table, const std::vector<std::size_t>& cols) {
  GowerData g{Matrix(table.n_rows(), cols.size()), std::vector<double>(cols.size(), 0.0)};
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const Column& col = table.column(cols[j]);
    const bool nominal = col.meta.kind == Kind::nominal;
    g.categorical[j] = nominal ? 1.0 : 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (!col.present(r)) continue;
      lo = std::min(lo, col.values[r]);
      hi = std::max(hi, col.values[r]);
    }
    const double range = hi - lo;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (col.present(r)) {
        if (nominal) {
          v = col.values[r];
        } else {
          v = range > 0.0 ? (col.values[r] - lo) / range : 0.0;
        }
      }
      g.x(r, j) = v;
    }
  }
  return g;
}

}  // namespace tabreg::detail
