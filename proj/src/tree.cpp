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

#include "tabreg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabreg {

double DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                     : n.right);
  }
  return nodes[i].value;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return best;
}

double DecisionTree::expected_value() const {
  double total = 0.0, weighted = 0.0;
  for (const auto& n : nodes) {
    if (!n.is_leaf()) continue;
    total += n.cover;
    weighted += n.cover * n.value;
  }
  return total > 0.0 ? weighted / total : 0.0;
}

void DecisionTree::validate(std::size_t n_features) const {
  if (nodes.empty()) throw ValidationError("tree has no nodes");
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf()) {
      if (!std::isfinite(n.value)) throw ValidationError("tree leaf value is not finite");
      continue;
    }
    if (static_cast<std::size_t>(n.feature) >= n_features) {
      throw ValidationError("tree split feature out of range");
    }
    for (int c : {n.left, n.right}) {
      if (c <= 0 || static_cast<std::size_t>(c) >= nodes.size()) {
        throw ValidationError("tree child index out of range");
      }
      if (++parents[static_cast<std::size_t>(c)] > 1) {
        throw ValidationError("tree node has more than one parent");
      }
    }
    if (n.left == n.right) throw ValidationError("tree node children coincide");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (parents[i] != 1) throw ValidationError("tree node is unreachable");
  }
}

double TreeEnsemble::predict_row(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x);
  return base_prediction + learning_rate * s;
}

std::vector<double> TreeEnsemble::predict(const Matrix& x) const {
  if (x.cols() != n_features) throw ValidationError("predict: feature count mismatch");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_row(x.row(i));
  return out;
}

std::vector<double> TreeEnsemble::gain_importance() const {
  std::vector<double> out(n_features, 0.0);
  for (const auto& t : trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf()) out[static_cast<std::size_t>(n.feature)] += n.gain;
    }
  }
  return out;
}

void GbrParams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ValidationError("gbr: learning_rate must be in (0, 1]");
  }
  if (min_leaf == 0) throw ValidationError("gbr: min_leaf must be >= 1");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw ValidationError("gbr: subsample_fraction must be in (0, 1]");
  }
}

namespace {

struct NodeStats {
  double sum = 0.0;
  double sumsq = 0.0;
  std::size_t count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const GbrParams& params)
      : params_(params), n_(x.rows()), p_(x.cols()), columns_(p_), sorted_(p_) {
    for (std::size_t f = 0; f < p_; ++f) {
      columns_[f] = x.column(f);
      sorted_[f].resize(n_);
      std::iota(sorted_[f].begin(), sorted_[f].end(), 0u);
      const auto& col = columns_[f];
      std::stable_sort(sorted_[f].begin(), sorted_[f].end(),
                       [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
    node_of_.resize(n_);
  }

  DecisionTree build(std::span<const double> resid, const std::vector<bool>& in_bag) {
    DecisionTree tree;
    std::vector<NodeStats> stats(1);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!in_bag[i]) {
        node_of_[i] = -1;
        continue;
      }
      node_of_[i] = 0;
      stats[0].sum += resid[i];
      stats[0].sumsq += resid[i] * resid[i];
      stats[0].count += 1;
    }
    tree.nodes.emplace_back();
    std::vector<int> frontier{0};

    for (std::size_t depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      std::vector<int> slot(tree.nodes.size(), -1);
      std::vector<int> active;
      for (int nd : frontier) {
        if (stats[static_cast<std::size_t>(nd)].count >= 2 * params_.min_leaf) {
          slot[static_cast<std::size_t>(nd)] = static_cast<int>(active.size());
          active.push_back(nd);
        }
      }
      if (active.empty()) break;
      const std::size_t k = active.size();
      std::vector<double> best_gain(k, 0.0), best_thr(k, 0.0);
      std::vector<int> best_feat(k, -1);
      std::vector<double> left_sum(k), last_v(k);
      std::vector<std::size_t> left_cnt(k);

      for (std::size_t f = 0; f < p_; ++f) {
        std::fill(left_sum.begin(), left_sum.end(), 0.0);
        std::fill(left_cnt.begin(), left_cnt.end(), 0);
        const auto& col = columns_[f];
        for (std::uint32_t i : sorted_[f]) {
          const int nd = node_of_[i];
          if (nd < 0) continue;
          const int s = slot[static_cast<std::size_t>(nd)];
          if (s < 0) continue;
          const auto si = static_cast<std::size_t>(s);
          const double v = col[i];
          const NodeStats& st = stats[static_cast<std::size_t>(nd)];
          if (left_cnt[si] >= params_.min_leaf && v > last_v[si] &&
              st.count - left_cnt[si] >= params_.min_leaf) {
            const double nl = static_cast<double>(left_cnt[si]);
            const double nr = static_cast<double>(st.count - left_cnt[si]);
            const double sl = left_sum[si];
            const double sr = st.sum - sl;
            const double gain = sl * sl / nl + sr * sr / nr -
                                st.sum * st.sum / static_cast<double>(st.count);
            if (gain > best_gain[si]) {
              best_gain[si] = gain;
              best_feat[si] = static_cast<int>(f);
              double thr = last_v[si] + 0.5 * (v - last_v[si]);
              if (!(thr < v)) thr = last_v[si];
              best_thr[si] = thr;
            }
          }
          left_sum[si] += resid[i];
          left_cnt[si] += 1;
          last_v[si] = v;
        }
      }

      std::vector<int> next;
      std::vector<int> split_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < k; ++s) {
        const auto nd = static_cast<std::size_t>(active[s]);
        const double floor = 1e-12 * stats[nd].sumsq;
        if (best_feat[s] < 0 || !(best_gain[s] > floor)) continue;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stats.resize(tree.nodes.size());
        TreeNode& node = tree.nodes[nd];
        node.feature = best_feat[s];
        node.threshold = best_thr[s];
        node.gain = best_gain[s];
        node.left = left;
        node.right = left + 1;
        split_of[nd] = static_cast<int>(nd);
        next.push_back(left);
        next.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n_; ++i) {
        const int nd = node_of_[i];
        if (nd < 0 || static_cast<std::size_t>(nd) >= split_of.size() ||
            split_of[static_cast<std::size_t>(nd)] < 0) {
          continue;
        }
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
        const int child = columns_[static_cast<std::size_t>(node.feature)][i] <= node.threshold
                              ? node.left
                              : node.right;
        node_of_[i] = child;
        NodeStats& cs = stats[static_cast<std::size_t>(child)];
        cs.sum += resid[i];
        cs.sumsq += resid[i] * resid[i];
        cs.count += 1;
      }
      frontier = std::move(next);
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      TreeNode& node = tree.nodes[i];
      node.cover = static_cast<double>(stats[i].count);
      node.value = stats[i].count > 0 ? stats[i].sum / static_cast<double>(stats[i].count) : 0.0;
    }
    return tree;
  }

 private:
  const GbrParams& params_;
  std::size_t n_;
  std::size_t p_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<int> node_of_;
};

}  // namespace

TreeEnsemble fit_gbr(const Matrix& x, std::span<const double> y, const GbrParams& params) {
  params.validate();
  if (x.rows() != y.size()) throw ValidationError("fit_gbr: X/y row mismatch");
  if (x.rows() < 2 * params.min_leaf) {
    throw ValidationError("fit_gbr: need at least 2 * min_leaf rows");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("fit_gbr: non-finite feature value");
  }
  const std::size_t n = x.rows();
  TreeEnsemble ens;
  ens.n_features = x.cols();
  ens.learning_rate = params.learning_rate;
  ens.base_prediction = mean(y);

  std::vector<double> fitted(n, ens.base_prediction);
  std::vector<double> resid(n);
  std::vector<bool> in_bag(n, true);
  Rng rng(params.seed);
  const auto bag_size = std::max<std::size_t>(
      2 * params.min_leaf,
      static_cast<std::size_t>(std::llround(params.subsample_fraction * static_cast<double>(n))));

  TreeBuilder builder(x, params);
  ens.trees.reserve(params.n_iterations);
  ens.training_loss.reserve(params.n_iterations);
  for (std::size_t it = 0; it < params.n_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - fitted[i];
    if (bag_size < n) {
      std::fill(in_bag.begin(), in_bag.end(), false);
      const auto order = permutation(n, rng);
      for (std::size_t i = 0; i < bag_size; ++i) in_bag[order[i]] = true;
    }
    DecisionTree tree = builder.build(resid, in_bag);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      fitted[i] += params.learning_rate * tree.predict(x.row(i));
      sse += (y[i] - fitted[i]) * (y[i] - fitted[i]);
    }
    ens.training_loss.push_back(sse / static_cast<double>(n));
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

}  // namespace tabreg
