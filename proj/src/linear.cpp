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

#include "tabreg/linear.hpp"

#include <algorithm>
#include <cmath>

#include "tabreg/kernels.hpp"

namespace tabreg {

namespace {

// Column-major centered (and scaled) copy of the design.
struct Prepared {
  std::size_t n = 0;
  std::vector<std::vector<double>> z;
  std::vector<double> norms;  // ||z_j||^2
  std::vector<double> means;
  std::vector<double> scales;
  std::vector<double> y_centered;
  double y_mean = 0.0;
};

Prepared prepare(const Matrix& x, std::span<const double> y, bool standardize) {
  if (x.rows() != y.size()) throw ValidationError("fit_linear: X/y row mismatch");
  if (x.rows() < 2) throw ValidationError("fit_linear: need at least two rows");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("fit_linear: non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("fit_linear: non-finite target value");
  }
  Prepared p;
  p.n = x.rows();
  const std::size_t cols = x.cols();
  p.z.resize(cols);
  p.norms.resize(cols);
  p.means.resize(cols);
  p.scales.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<double> col = x.column(j);
    const double m = mean(col);
    double ss = 0.0;
    for (double& v : col) {
      v -= m;
      ss += v * v;
    }
    double scale = 1.0;
    if (standardize) {
      const double sd = std::sqrt(ss / static_cast<double>(p.n));
      scale = sd > 1e-12 * (1.0 + std::fabs(m)) ? sd : 0.0;
    } else if (ss <= 0.0) {
      scale = 0.0;
    }
    if (scale > 0.0) {
      for (double& v : col) v /= scale;
    } else {
      std::fill(col.begin(), col.end(), 0.0);
    }
    p.norms[j] = scale > 0.0 ? kernels::dot(col, col) : 0.0;
    p.means[j] = m;
    p.scales[j] = scale;
    p.z[j] = std::move(col);
  }
  p.y_mean = mean(y);
  p.y_centered.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) p.y_centered[i] = y[i] - p.y_mean;
  return p;
}

// Cyclic coordinate descent from a warm start. `resid` must equal
// y_centered - Z beta on entry and is kept in sync.
std::pair<std::size_t, bool> coordinate_descent(const Prepared& p, double l1, double l2,
                                                std::vector<double>& beta,
                                                std::vector<double>& resid,
                                                const LinearOptions& opt) {
  const std::size_t cols = p.z.size();
  for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double max_step = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (p.norms[j] == 0.0) {
        beta[j] = 0.0;
        continue;
      }
      const double rho = kernels::dot(p.z[j], resid) + p.norms[j] * beta[j];
      const double updated = soft_threshold(rho, l1) / (p.norms[j] + l2);
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        kernels::axpy(-delta, p.z[j], resid);
        beta[j] = updated;
        max_step = std::max(max_step, std::fabs(delta) * p.norms[j]);
      }
    }
    if (max_step < opt.tol) return {sweep, true};
  }
  return {opt.max_sweeps, false};
}

LinearModel finish(const Prepared& p, std::vector<double> beta, std::size_t sweeps,
                   bool converged) {
  LinearModel m;
  m.fitted_coefficients = beta;
  m.coefficients.resize(beta.size());
  m.intercept = p.y_mean;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    m.coefficients[j] = p.scales[j] > 0.0 ? beta[j] / p.scales[j] : 0.0;
    m.intercept -= m.coefficients[j] * p.means[j];
  }
  m.feature_means = p.means;
  m.feature_scales = p.scales;
  m.sweeps = sweeps;
  m.converged = converged;
  return m;
}

}  // namespace

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

LinearModel fit_linear(const Matrix& x, std::span<const double> y, double l1, double l2) {
  LinearOptions opt;
  opt.l1 = l1;
  opt.l2 = l2;
  return fit_linear(x, y, opt);
}

LinearModel fit_linear(const Matrix& x, std::span<const double> y, const LinearOptions& opt) {
  if (opt.l1 < 0.0 || opt.l2 < 0.0 || !std::isfinite(opt.l2) || std::isnan(opt.l1)) {
    throw ValidationError("fit_linear: penalties must be non-negative");
  }
  const Prepared p = prepare(x, y, opt.standardize);
  std::vector<double> beta(x.cols(), 0.0);
  std::vector<double> resid = p.y_centered;
  auto [sweeps, converged] = coordinate_descent(p, opt.l1, opt.l2, beta, resid, opt);
  return finish(p, std::move(beta), sweeps, converged);
}

std::vector<double> predict(const LinearModel& model, const Matrix& x) {
  if (x.cols() != model.coefficients.size()) {
    throw ValidationError("predict: feature count mismatch");
  }
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = model.intercept;
    auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) s += model.coefficients[j] * row[j];
    out[i] = s;
  }
  return out;
}

double max_l1_penalty(const Matrix& x, std::span<const double> y, bool standardize) {
  const Prepared p = prepare(x, y, standardize);
  double best = 0.0;
  for (std::size_t j = 0; j < p.z.size(); ++j) {
    best = std::max(best, std::fabs(kernels::dot(p.z[j], p.y_centered)));
  }
  return best;
}

PenaltySearch cross_validate_penalty(const Matrix& x, std::span<const double> y,
                                     double l1_ratio, std::size_t folds, uint64_t seed,
                                     std::size_t n_penalties) {
  if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) {
    throw ValidationError("cross_validate_penalty: l1_ratio must be in [0, 1]");
  }
  if (folds < 2 || folds > x.rows()) throw ValidationError("cross_validate_penalty: bad folds");
  if (n_penalties < 2) throw ValidationError("cross_validate_penalty: need >= 2 penalties");

  PenaltySearch out;
  const double n = static_cast<double>(x.rows());
  double hi = 0.0, lo = 0.0;
  if (l1_ratio > 0.0) {
    hi = std::max(max_l1_penalty(x, y) / l1_ratio, 1e-12);
    lo = hi * 1e-3;
  } else {
    hi = 1e4 * n;
    lo = 1e-4 * n;
  }
  for (std::size_t i = 0; i < n_penalties; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_penalties - 1);
    out.penalties.push_back(hi * std::pow(lo / hi, t));
  }
  out.cv_mse.assign(n_penalties, 0.0);

  const auto fold = fold_assignment(x.rows(), folds, seed);
  LinearOptions opt;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    const Matrix xtr = x.select_rows(train);
    std::vector<double> ytr;
    for (auto i : train) ytr.push_back(y[i]);
    const Matrix xte = x.select_rows(test);
    const Prepared p = prepare(xtr, ytr, true);
    std::vector<double> beta(x.cols(), 0.0);
    std::vector<double> resid = p.y_centered;
    for (std::size_t k = 0; k < n_penalties; ++k) {
      // The loss is a sum, so the penalty scales with the training size.
      const double a = out.penalties[k] * static_cast<double>(train.size()) / n;
      auto [sweeps, converged] =
          coordinate_descent(p, a * l1_ratio, a * (1.0 - l1_ratio), beta, resid, opt);
      const LinearModel m = finish(p, beta, sweeps, converged);
      const auto pred = predict(m, xte);
      double sse = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        sse += (y[test[i]] - pred[i]) * (y[test[i]] - pred[i]);
      }
      out.cv_mse[k] += sse / n;
    }
  }
  const auto best = std::min_element(out.cv_mse.begin(), out.cv_mse.end());
  out.best_penalty = out.penalties[static_cast<std::size_t>(best - out.cv_mse.begin())];
  return out;
}

}  // namespace tabreg
