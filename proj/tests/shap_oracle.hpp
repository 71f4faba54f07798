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

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "tabreg/tree.hpp"

namespace tabreg::testing {

// Random tree with cover counts that add up through every split. Features may
// repeat along a path.
inline DecisionTree random_tree(std::size_t n_features, std::size_t max_depth, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> cover(1, 50);
  std::uniform_int_distribution<int> feat(0, static_cast<int>(n_features) - 1);
  std::bernoulli_distribution split(0.75);
  DecisionTree t;
  t.nodes.emplace_back();
  std::vector<std::pair<std::size_t, std::size_t>> open{{0, 0}};
  std::vector<std::size_t> order;
  while (!open.empty()) {
    auto [i, d] = open.back();
    open.pop_back();
    order.push_back(i);
    if (d < max_depth && (d == 0 || split(rng))) {
      const int left = static_cast<int>(t.nodes.size());
      t.nodes.emplace_back();
      t.nodes.emplace_back();
      t.nodes[i].feature = feat(rng);
      t.nodes[i].threshold = u(rng);
      t.nodes[i].left = left;
      t.nodes[i].right = left + 1;
      open.emplace_back(static_cast<std::size_t>(left), d + 1);
      open.emplace_back(static_cast<std::size_t>(left + 1), d + 1);
    } else {
      t.nodes[i].value = 3.0 * u(rng);
      t.nodes[i].cover = cover(rng);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TreeNode& n = t.nodes[*it];
    if (!n.is_leaf()) {
      n.cover = t.nodes[static_cast<std::size_t>(n.left)].cover +
                t.nodes[static_cast<std::size_t>(n.right)].cover;
    }
  }
  return t;
}

// E[f(x) | x_S] under the cover-weighted path distribution.
inline double conditional_value(const DecisionTree& t, std::span<const double> x,
                                unsigned subset, std::size_t node = 0) {
  const TreeNode& n = t.nodes[node];
  if (n.is_leaf()) return n.value;
  const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
  if (subset & (1u << n.feature)) {
    return conditional_value(t, x, subset, x[static_cast<std::size_t>(n.feature)] <= n.threshold ? l : r);
  }
  return (t.nodes[l].cover * conditional_value(t, x, subset, l) +
          t.nodes[r].cover * conditional_value(t, x, subset, r)) /
         n.cover;
}

// Exact Shapley values by enumerating every coalition.
inline std::vector<double> brute_force_shapley(const DecisionTree& t, std::span<const double> x,
                                               std::size_t p) {
  std::vector<double> fact(p + 1, 1.0);
  for (std::size_t i = 1; i <= p; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> v(std::size_t{1} << p);
  for (unsigned s = 0; s < v.size(); ++s) v[s] = conditional_value(t, x, s);
  std::vector<double> phi(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (unsigned s = 0; s < v.size(); ++s) {
      if (s & (1u << j)) continue;
      const auto size = static_cast<std::size_t>(__builtin_popcount(s));
      const double w = fact[size] * fact[p - size - 1] / fact[p];
      phi[j] += w * (v[s | (1u << j)] - v[s]);
    }
  }
  return phi;
}

}  // namespace tabreg::testing
