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

#include "tabreg/bart.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

namespace tabreg {

void BartConfig::validate() const {
  if (n_trees == 0) throw ValidationError("bart: n_trees must be >= 1");
  if (thin == 0) throw ValidationError("bart: thin must be >= 1");
  if (burn_in >= n_iterations) throw ValidationError("bart: burn_in must be < n_iterations");
  if (retained_draws() == 0) throw ValidationError("bart: no retained draws");
  if (!(alpha > 0.0 && alpha < 1.0) || beta < 0.0) {
    throw ValidationError("bart: need 0 < alpha < 1 and beta >= 0");
  }
  if (!(k > 0.0) || !(nu > 0.0) || !(q > 0.0 && q < 1.0)) {
    throw ValidationError("bart: need k > 0, nu > 0, 0 < q < 1");
  }
  if (min_leaf == 0 || max_cutpoints == 0) {
    throw ValidationError("bart: min_leaf and max_cutpoints must be >= 1");
  }
  if (p_grow <= 0.0 || p_prune <= 0.0 || p_grow + p_prune > 1.0) {
    throw ValidationError("bart: proposal probabilities must be positive and sum to <= 1");
  }
}

namespace {

struct BNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  int var = -1;
  int cut = -1;
  int depth = 0;
  double mu = 0.0;
  bool alive = true;
  bool is_leaf() const { return left < 0; }
};

struct BTree {
  std::vector<BNode> nodes{BNode{}};
  std::vector<int> free_slots;

  int alloc(int parent, int depth) {
    BNode node;
    node.parent = parent;
    node.depth = depth;
    if (!free_slots.empty()) {
      const int i = free_slots.back();
      free_slots.pop_back();
      nodes[static_cast<std::size_t>(i)] = node;
      return i;
    }
    nodes.push_back(node);
    return static_cast<int>(nodes.size()) - 1;
  }

  void release(int i) {
    nodes[static_cast<std::size_t>(i)].alive = false;
    free_slots.push_back(i);
  }

  const BNode& at(int i) const { return nodes[static_cast<std::size_t>(i)]; }
  BNode& at(int i) { return nodes[static_cast<std::size_t>(i)]; }

  bool is_nog(int i) const {
    const BNode& n = at(i);
    return !n.is_leaf() && at(n.left).is_leaf() && at(n.right).is_leaf();
  }

  void collect(std::vector<int>& leaves, std::vector<int>& nogs) const {
    leaves.clear();
    nogs.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].alive) continue;
      if (nodes[i].is_leaf()) {
        leaves.push_back(static_cast<int>(i));
      } else if (is_nog(static_cast<int>(i))) {
        nogs.push_back(static_cast<int>(i));
      }
    }
  }
};

struct SuffStats {
  std::size_t n = 0;
  double sum = 0.0;
};

class BartSampler {
 public:
  BartSampler(const Matrix& x, std::span<const double> y, const BartConfig& cfg)
      : cfg_(cfg), n_(x.rows()), p_(x.cols()), rng_(cfg.seed) {
    build_cutpoints(x);
    scale_target(y);
    tau2_ = std::pow(0.5 / (cfg_.k * std::sqrt(static_cast<double>(cfg_.n_trees))), 2);
    const double sigma_hat = std::max(initial_sigma(x), kSigmaFloor);
    const double chi = boost::math::quantile(boost::math::chi_squared(cfg_.nu), 1.0 - cfg_.q);
    lambda_ = sigma_hat * sigma_hat * chi / cfg_.nu;
    sigma2_ = sigma_hat * sigma_hat;

    trees_.resize(cfg_.n_trees);
    leaf_of_.assign(cfg_.n_trees, std::vector<int>(n_, 0));
    const double init = mean(ys_) / static_cast<double>(cfg_.n_trees);
    for (auto& t : trees_) t.at(0).mu = init;
    fit_.assign(n_, init * static_cast<double>(cfg_.n_trees));
    resid_.resize(n_);
    tree_fit_.resize(n_);
  }

  BartPosterior run() {
    BartPosterior post;
    post.config = cfg_;
    post.n_features = p_;
    post.draws.reserve(cfg_.retained_draws());
    for (std::size_t it = 0; it < cfg_.n_iterations; ++it) {
      for (std::size_t t = 0; t < cfg_.n_trees; ++t) update_tree(t);
      draw_sigma();
      if (it >= cfg_.burn_in && (it - cfg_.burn_in + 1) % cfg_.thin == 0) {
        post.draws.push_back(snapshot());
        post.sigma_draws.push_back(std::sqrt(sigma2_) * range_);
      }
    }
    post.acceptance_rate =
        proposals_ > 0 ? static_cast<double>(accepted_) / static_cast<double>(proposals_) : 0.0;
    return post;
  }

 private:
  static constexpr double kSigmaFloor = 1e-9;

  void build_cutpoints(const Matrix& x) {
    cuts_.resize(p_);
    bins_.resize(p_);
    for (std::size_t f = 0; f < p_; ++f) {
      std::vector<double> u = x.column(f);
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
      std::vector<double> mids;
      for (std::size_t i = 1; i < u.size(); ++i) mids.push_back(u[i - 1] + 0.5 * (u[i] - u[i - 1]));
      if (mids.size() > cfg_.max_cutpoints) {
        std::vector<double> picked;
        const double m = static_cast<double>(mids.size());
        for (std::size_t k = 0; k < cfg_.max_cutpoints; ++k) {
          const auto idx = static_cast<std::size_t>(
              (static_cast<double>(k) + 0.5) * m / static_cast<double>(cfg_.max_cutpoints));
          picked.push_back(mids[idx]);
        }
        mids = std::move(picked);
      }
      cuts_[f] = std::move(mids);
      bins_[f].resize(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        bins_[f][i] = static_cast<int>(
            std::lower_bound(cuts_[f].begin(), cuts_[f].end(), x(i, f)) - cuts_[f].begin());
      }
    }
  }

  void scale_target(std::span<const double> y) {
    auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    range_ = *hi - *lo;
    center_ = *lo + 0.5 * range_;
    if (!(range_ > 0.0)) range_ = 1.0;
    ys_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) ys_[i] = (y[i] - center_) / range_;
  }

  // Residual sd of an OLS fit on the scaled target when n > p + 1, otherwise
  // the target sd.
  double initial_sigma(const Matrix& x) const {
    if (n_ > p_ + 1) {
      Eigen::MatrixXd a(n_, p_ + 1);
      Eigen::VectorXd b(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (std::size_t j = 0; j < p_; ++j) {
          a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = x(i, j);
        }
        b(static_cast<Eigen::Index>(i)) = ys_[i];
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
      const Eigen::VectorXd coef = qr.solve(b);
      const double sse = (b - a * coef).squaredNorm();
      const auto df = static_cast<double>(n_) - static_cast<double>(qr.rank());
      if (df > 0.0) return std::sqrt(sse / df);
    }
    return std::sqrt(sample_variance(ys_));
  }

  double log_marginal(const SuffStats& s) const {
    if (s.n == 0) return 0.0;
    const double n = static_cast<double>(s.n);
    return -0.5 * std::log1p(n * tau2_ / sigma2_) +
           0.5 * tau2_ * s.sum * s.sum / (sigma2_ * (sigma2_ + n * tau2_));
  }

  double split_prob(int depth) const {
    return cfg_.alpha * std::pow(1.0 + static_cast<double>(depth), -cfg_.beta);
  }

  // Cutpoint index range for `var` that stays reachable below `node`.
  void cut_range(const BTree& t, int node, std::size_t var, int& lo, int& hi) const {
    lo = 0;
    hi = static_cast<int>(cuts_[var].size()) - 1;
    int c = node;
    while (t.at(c).parent >= 0) {
      const BNode& par = t.at(t.at(c).parent);
      if (par.var == static_cast<int>(var)) {
        if (par.left == c) {
          hi = std::min(hi, par.cut - 1);
        } else {
          lo = std::max(lo, par.cut + 1);
        }
      }
      c = t.at(c).parent;
    }
  }

  bool draw_rule(const BTree& t, int node, int& var, int& cut) {
    std::vector<std::size_t> avail;
    std::vector<std::pair<int, int>> ranges;
    for (std::size_t v = 0; v < p_; ++v) {
      int lo = 0, hi = 0;
      cut_range(t, node, v, lo, hi);
      if (lo <= hi) {
        avail.push_back(v);
        ranges.emplace_back(lo, hi);
      }
    }
    if (avail.empty()) return false;
    std::uniform_int_distribution<std::size_t> pick_var(0, avail.size() - 1);
    const std::size_t k = pick_var(rng_);
    std::uniform_int_distribution<int> pick_cut(ranges[k].first, ranges[k].second);
    var = static_cast<int>(avail[k]);
    cut = pick_cut(rng_);
    return true;
  }

  void child_stats(const std::vector<int>& leaf_of, int node, int var, int cut, SuffStats& l,
                   SuffStats& r) const {
    const auto& bins = bins_[static_cast<std::size_t>(var)];
    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] != node) continue;
      SuffStats& s = bins[i] <= cut ? l : r;
      s.n += 1;
      s.sum += resid_[i];
    }
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  template <typename T>
  T pick(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }

  bool grow(BTree& t, std::vector<int>& leaf_of, const std::vector<int>& leaves,
            const std::vector<int>& nogs, double p_grow_here) {
    const int eta = pick(leaves);
    int var = -1, cut = -1;
    if (!draw_rule(t, eta, var, cut)) return false;
    SuffStats l, r;
    child_stats(leaf_of, eta, var, cut, l, r);
    if (l.n < cfg_.min_leaf || r.n < cfg_.min_leaf) return false;
    const SuffStats parent{l.n + r.n, l.sum + r.sum};

    const int d = t.at(eta).depth;
    const double pg = split_prob(d);
    const double pg_child = split_prob(d + 1);
    const int par = t.at(eta).parent;
    const double nogs_after =
        static_cast<double>(nogs.size()) + 1.0 - (par >= 0 && t.is_nog(par) ? 1.0 : 0.0);
    const double log_ratio = std::log(pg) + 2.0 * std::log1p(-pg_child) - std::log1p(-pg) +
                             std::log(cfg_.p_prune) - std::log(p_grow_here) +
                             std::log(static_cast<double>(leaves.size())) - std::log(nogs_after) +
                             log_marginal(l) + log_marginal(r) - log_marginal(parent);
    if (std::log(uniform()) >= log_ratio) return false;

    const int left = t.alloc(eta, d + 1);
    const int right = t.alloc(eta, d + 1);
    BNode& node = t.at(eta);
    node.left = left;
    node.right = right;
    node.var = var;
    node.cut = cut;
    const auto& bins = bins_[static_cast<std::size_t>(var)];
    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] == eta) leaf_of[i] = bins[i] <= cut ? left : right;
    }
    return true;
  }

  bool prune(BTree& t, std::vector<int>& leaf_of, const std::vector<int>& leaves,
             const std::vector<int>& nogs) {
    const int eta = pick(nogs);
    const BNode node = t.at(eta);
    SuffStats l, r;
    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] == node.left) {
        l.n += 1;
        l.sum += resid_[i];
      } else if (leaf_of[i] == node.right) {
        r.n += 1;
        r.sum += resid_[i];
      }
    }
    const SuffStats merged{l.n + r.n, l.sum + r.sum};
    const double pg = split_prob(node.depth);
    const double pg_child = split_prob(node.depth + 1);
    const double leaves_after = static_cast<double>(leaves.size()) - 1.0;
    const double p_grow_after = leaves_after <= 1.0 ? 1.0 : cfg_.p_grow;
    const double log_ratio = std::log1p(-pg) - std::log(pg) - 2.0 * std::log1p(-pg_child) +
                             std::log(p_grow_after) - std::log(cfg_.p_prune) +
                             std::log(static_cast<double>(nogs.size())) - std::log(leaves_after) +
                             log_marginal(merged) - log_marginal(l) - log_marginal(r);
    if (std::log(uniform()) >= log_ratio) return false;

    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] == node.left || leaf_of[i] == node.right) leaf_of[i] = eta;
    }
    t.release(node.left);
    t.release(node.right);
    BNode& n = t.at(eta);
    n.left = n.right = -1;
    n.var = n.cut = -1;
    return true;
  }

  bool change(BTree& t, std::vector<int>& leaf_of, const std::vector<int>& nogs) {
    const int eta = pick(nogs);
    int var = -1, cut = -1;
    if (!draw_rule(t, eta, var, cut)) return false;
    const BNode node = t.at(eta);
    SuffStats l_old, r_old, l_new, r_new;
    const auto& bins = bins_[static_cast<std::size_t>(var)];
    for (std::size_t i = 0; i < n_; ++i) {
      const int li = leaf_of[i];
      if (li != node.left && li != node.right) continue;
      SuffStats& old_side = li == node.left ? l_old : r_old;
      old_side.n += 1;
      old_side.sum += resid_[i];
      SuffStats& new_side = bins[i] <= cut ? l_new : r_new;
      new_side.n += 1;
      new_side.sum += resid_[i];
    }
    if (l_new.n < cfg_.min_leaf || r_new.n < cfg_.min_leaf) return false;
    const double log_ratio =
        log_marginal(l_new) + log_marginal(r_new) - log_marginal(l_old) - log_marginal(r_old);
    if (std::log(uniform()) >= log_ratio) return false;

    BNode& n = t.at(eta);
    n.var = var;
    n.cut = cut;
    for (std::size_t i = 0; i < n_; ++i) {
      const int li = leaf_of[i];
      if (li == node.left || li == node.right) leaf_of[i] = bins[i] <= cut ? node.left : node.right;
    }
    return true;
  }

  void update_tree(std::size_t ti) {
    BTree& t = trees_[ti];
    std::vector<int>& leaf_of = leaf_of_[ti];
    for (std::size_t i = 0; i < n_; ++i) {
      tree_fit_[i] = t.at(leaf_of[i]).mu;
      resid_[i] = ys_[i] - fit_[i] + tree_fit_[i];
    }

    t.collect(leaves_, nogs_);
    ++proposals_;
    bool ok = false;
    if (nogs_.empty()) {
      ok = grow(t, leaf_of, leaves_, nogs_, 1.0);
    } else {
      const double u = uniform();
      if (u < cfg_.p_grow) {
        ok = grow(t, leaf_of, leaves_, nogs_, cfg_.p_grow);
      } else if (u < cfg_.p_grow + cfg_.p_prune) {
        ok = prune(t, leaf_of, leaves_, nogs_);
      } else {
        ok = change(t, leaf_of, nogs_);
      }
    }
    if (ok) ++accepted_;

    // Conjugate leaf draws.
    stats_.assign(t.nodes.size(), SuffStats{});
    for (std::size_t i = 0; i < n_; ++i) {
      SuffStats& s = stats_[static_cast<std::size_t>(leaf_of[i])];
      s.n += 1;
      s.sum += resid_[i];
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < t.nodes.size(); ++j) {
      BNode& node = t.nodes[j];
      if (!node.alive || !node.is_leaf()) continue;
      const double n = static_cast<double>(stats_[j].n);
      const double var = sigma2_ * tau2_ / (sigma2_ + n * tau2_);
      const double m = tau2_ * stats_[j].sum / (sigma2_ + n * tau2_);
      node.mu = m + std::sqrt(var) * normal(rng_);
    }
    for (std::size_t i = 0; i < n_; ++i) fit_[i] += t.at(leaf_of[i]).mu - tree_fit_[i];
  }

  void draw_sigma() {
    double sse = 0.0;
    for (std::size_t i = 0; i < n_; ++i) sse += (ys_[i] - fit_[i]) * (ys_[i] - fit_[i]);
    std::chi_squared_distribution<double> chi(cfg_.nu + static_cast<double>(n_));
    sigma2_ = (cfg_.nu * lambda_ + sse) / chi(rng_);
    sigma2_ = std::max(sigma2_, kSigmaFloor * kSigmaFloor);
  }

  TreeEnsemble snapshot() const {
    TreeEnsemble ens;
    ens.base_prediction = center_;
    ens.learning_rate = 1.0;
    ens.n_features = p_;
    ens.trees.reserve(trees_.size());
    std::vector<double> counts;
    for (std::size_t ti = 0; ti < trees_.size(); ++ti) {
      const BTree& t = trees_[ti];
      counts.assign(t.nodes.size(), 0.0);
      for (int leaf : leaf_of_[ti]) counts[static_cast<std::size_t>(leaf)] += 1.0;

      DecisionTree out;
      std::vector<int> queue{0};
      std::vector<int> new_id(t.nodes.size(), -1);
      new_id[0] = 0;
      out.nodes.emplace_back();
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const int src = queue[qi];
        const BNode& b = t.at(src);
        if (b.is_leaf()) continue;
        for (int c : {b.left, b.right}) {
          new_id[static_cast<std::size_t>(c)] = static_cast<int>(out.nodes.size());
          out.nodes.emplace_back();
          queue.push_back(c);
        }
      }
      // Children appear after parents in BFS order, so a reverse pass
      // accumulates covers bottom-up.
      for (std::size_t qi = queue.size(); qi-- > 0;) {
        const int src = queue[qi];
        const BNode& b = t.at(src);
        TreeNode& dst = out.nodes[static_cast<std::size_t>(new_id[static_cast<std::size_t>(src)])];
        if (b.is_leaf()) {
          dst.value = b.mu * range_;
          dst.cover = counts[static_cast<std::size_t>(src)];
        } else {
          dst.feature = b.var;
          dst.threshold = cuts_[static_cast<std::size_t>(b.var)][static_cast<std::size_t>(b.cut)];
          dst.left = new_id[static_cast<std::size_t>(b.left)];
          dst.right = new_id[static_cast<std::size_t>(b.right)];
          dst.cover = out.nodes[static_cast<std::size_t>(dst.left)].cover +
                      out.nodes[static_cast<std::size_t>(dst.right)].cover;
        }
      }
      ens.trees.push_back(std::move(out));
    }
    return ens;
  }

  const BartConfig& cfg_;
  std::size_t n_;
  std::size_t p_;
  Rng rng_;
  std::vector<std::vector<double>> cuts_;
  std::vector<std::vector<int>> bins_;
  std::vector<double> ys_;
  double center_ = 0.0;
  double range_ = 1.0;
  double tau2_ = 0.0;
  double lambda_ = 0.0;
  double sigma2_ = 1.0;
  std::vector<BTree> trees_;
  std::vector<std::vector<int>> leaf_of_;
  std::vector<double> fit_;
  std::vector<double> resid_;
  std::vector<double> tree_fit_;
  std::vector<int> leaves_;
  std::vector<int> nogs_;
  std::vector<SuffStats> stats_;
  std::size_t proposals_ = 0;
  std::size_t accepted_ = 0;
};

}  // namespace

BartPosterior fit_bart(const Matrix& x, std::span<const double> y, const BartConfig& config) {
  config.validate();
  if (x.rows() != y.size()) throw ValidationError("fit_bart: X/y row mismatch");
  if (x.rows() < 10) throw ValidationError("fit_bart: need at least 10 rows");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("fit_bart: non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("fit_bart: non-finite target value");
  }
  BartSampler sampler(x, y, config);
  return sampler.run();
}

Matrix predict_bart_draws(const BartPosterior& posterior, const Matrix& x) {
  if (x.cols() != posterior.n_features) throw ValidationError("predict: feature count mismatch");
  Matrix out(posterior.draws.size(), x.rows());
  parallel_for(posterior.draws.size(), [&](std::size_t d) {
    const TreeEnsemble& ens = posterior.draws[d];
    for (std::size_t i = 0; i < x.rows(); ++i) out(d, i) = ens.predict_row(x.row(i));
  });
  return out;
}

BartPrediction predict_bart(const BartPosterior& posterior, const Matrix& x) {
  if (posterior.draws.empty()) throw ValidationError("predict: empty posterior");
  const Matrix draws = predict_bart_draws(posterior, x);
  BartPrediction p;
  const std::size_t nd = draws.rows();
  p.mean.resize(x.rows());
  p.sd.resize(x.rows());
  p.lower.resize(x.rows());
  p.upper.resize(x.rows());
  std::vector<double> col(nd);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t d = 0; d < nd; ++d) col[d] = draws(d, i);
    p.mean[i] = mean(col);
    p.sd[i] = std::sqrt(sample_variance(col));
    p.lower[i] = quantile(col, 0.05);
    p.upper[i] = quantile(col, 0.95);
  }
  return p;
}

std::vector<double> inclusion_proportions(const BartPosterior& posterior) {
  std::vector<double> total(posterior.n_features, 0.0);
  std::size_t used = 0;
  std::vector<double> counts(posterior.n_features);
  for (const auto& draw : posterior.draws) {
    std::fill(counts.begin(), counts.end(), 0.0);
    double splits = 0.0;
    for (const auto& t : draw.trees) {
      for (const auto& n : t.nodes) {
        if (n.is_leaf()) continue;
        counts[static_cast<std::size_t>(n.feature)] += 1.0;
        splits += 1.0;
      }
    }
    if (splits == 0.0) continue;
    ++used;
    for (std::size_t f = 0; f < counts.size(); ++f) total[f] += counts[f] / splits;
  }
  if (used > 0) {
    for (double& v : total) v /= static_cast<double>(used);
  }
  return total;
}

SelectorRanking variable_inclusion(const BartPosterior& posterior,
                                   const std::vector<std::string>& feature_names) {
  if (posterior.draws.empty()) throw ValidationError("variable_inclusion: empty posterior");
  if (feature_names.size() != posterior.n_features) {
    throw ValidationError("variable_inclusion: feature name count mismatch");
  }
  return make_ranking("bart_inclusion", feature_names, inclusion_proportions(posterior));
}

}  // namespace tabreg
