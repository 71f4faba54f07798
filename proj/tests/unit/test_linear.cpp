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

#include <gtest/gtest.h>

#include <cmath>

#include "tabreg/linear.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

// Dense solve of A x = b by Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Centered design, target and the ridge normal-equation solution in raw units.
std::vector<double> ridge_oracle(const Matrix& x, const std::vector<double>& y, double l2) {
  const std::size_t n = x.rows(), p = x.cols();
  std::vector<double> mx(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) mx[j] += x(i, j) / n;
  }
  double my = 0;
  for (double v : y) my += v / n;
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      b[j] += (x(i, j) - mx[j]) * (y[i] - my);
      for (std::size_t k = 0; k < p; ++k) a[j][k] += (x(i, j) - mx[j]) * (x(i, k) - mx[k]);
    }
  }
  for (std::size_t j = 0; j < p; ++j) a[j][j] += l2;
  return gauss_solve(a, b);
}

std::vector<double> linear_target(const Matrix& x, uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> e(0, 0.3);
  std::vector<double> y(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    y[i] = 1.5 + 2.0 * x(i, 0) - 1.0 * x(i, 1) + 0.5 * x(i, 2) + e(rng);
  }
  return y;
}

TEST(SoftThreshold, Definition) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(-1.0, 1.0), 0.0);
}

TEST(Linear, OlsMatchesNormalEquations) {
  const Matrix x = testing::random_matrix(120, 5, 1);
  const auto y = linear_target(x, 2);
  LinearOptions opt;
  opt.standardize = false;
  const LinearModel m = fit_linear(x, y, opt);
  const auto beta = ridge_oracle(x, y, 0.0);
  for (std::size_t j = 0; j < beta.size(); ++j) EXPECT_NEAR(m.coefficients[j], beta[j], 1e-8);
  EXPECT_TRUE(m.converged);
}

TEST(Linear, RidgeMatchesClosedForm) {
  const Matrix x = testing::random_matrix(80, 6, 3);
  const auto y = linear_target(x, 4);
  LinearOptions opt;
  opt.standardize = false;
  opt.l2 = 7.5;
  const LinearModel m = fit_linear(x, y, opt);
  const auto beta = ridge_oracle(x, y, 7.5);
  for (std::size_t j = 0; j < beta.size(); ++j) EXPECT_NEAR(m.coefficients[j], beta[j], 1e-8);
}

TEST(Linear, PredictionUsesOriginalUnits) {
  const Matrix x = testing::random_matrix(50, 4, 5, -10, 30);
  const auto y = linear_target(x, 6);
  const LinearModel m = fit_linear(x, y, 0.3, 0.1);
  const auto yhat = predict(m, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double v = m.intercept;
    for (std::size_t j = 0; j < x.cols(); ++j) v += m.coefficients[j] * x(i, j);
    EXPECT_NEAR(yhat[i], v, 1e-9);
  }
}

TEST(Lasso, SubgradientOptimalityOnRandomProblems) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = testing::random_matrix(100, 12, 100 + seed);
    const auto y = linear_target(x, 200 + seed);
    const double l1 = 2.0 + 3.0 * static_cast<double>(seed);
    const double l2 = seed % 2 ? 0.5 : 0.0;
    const LinearModel m = fit_linear(x, y, l1, l2);
    ASSERT_TRUE(m.converged);
    // Rebuild the fitted-space design independently.
    const std::size_t n = x.rows(), p = x.cols();
    std::vector<double> r(n);
    const double my = mean(y);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - my;
    std::vector<std::vector<double>> z(p, std::vector<double>(n));
    for (std::size_t j = 0; j < p; ++j) {
      const auto col = x.column(j);
      const double mu = mean(col);
      double ss = 0;
      for (double v : col) ss += (v - mu) * (v - mu);
      const double sd = std::sqrt(ss / n);
      for (std::size_t i = 0; i < n; ++i) z[j][i] = (col[i] - mu) / sd;
      for (std::size_t i = 0; i < n; ++i) r[i] -= z[j][i] * m.fitted_coefficients[j];
    }
    for (std::size_t j = 0; j < p; ++j) {
      double g = -l2 * m.fitted_coefficients[j];
      for (std::size_t i = 0; i < n; ++i) g += z[j][i] * r[i];
      const double b = m.fitted_coefficients[j];
      if (b != 0.0) {
        EXPECT_NEAR(g, l1 * (b > 0 ? 1.0 : -1.0), 1e-6) << "seed " << seed << " j " << j;
      } else {
        EXPECT_LE(std::fabs(g), l1 + 1e-6) << "seed " << seed << " j " << j;
      }
    }
  }
}

// Orthonormal centered design: lasso reduces to soft-thresholding.
TEST(Lasso, OrthonormalDesignIsSoftThresholding) {
  const std::size_t n = 64, p = 6;
  Matrix raw = testing::random_matrix(n, p, 9);
  std::vector<std::vector<double>> q;
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> v = raw.column(j);
    const double m = mean(v);
    for (double& e : v) e -= m;
    for (const auto& u : q) {
      double d = 0;
      for (std::size_t i = 0; i < n; ++i) d += u[i] * v[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= d * u[i];
    }
    double nn = 0;
    for (double e : v) nn += e * e;
    for (double& e : v) e /= std::sqrt(nn);
    q.push_back(v);
  }
  Matrix x(n, p);
  for (std::size_t j = 0; j < p; ++j) x.set_column(j, q[j]);
  const auto y = testing::random_vector(n, 10, -3, 3);
  const double ym = mean(y);
  for (double l1 : {0.0, 0.2, 0.8, 5.0}) {
    for (double l2 : {0.0, 0.7}) {
      LinearOptions opt;
      opt.standardize = false;
      opt.l1 = l1;
      opt.l2 = l2;
      const LinearModel m = fit_linear(x, y, opt);
      for (std::size_t j = 0; j < p; ++j) {
        double zy = 0;
        for (std::size_t i = 0; i < n; ++i) zy += q[j][i] * (y[i] - ym);
        EXPECT_NEAR(m.coefficients[j], soft_threshold(zy, l1) / (1.0 + l2), 1e-8);
      }
    }
  }
}

TEST(Lasso, MaxPenaltyZeroesEverything) {
  const Matrix x = testing::random_matrix(70, 8, 11);
  const auto y = linear_target(x, 12);
  const double lmax = max_l1_penalty(x, y);
  const LinearModel at = fit_linear(x, y, lmax * (1 + 1e-9), 0.0);
  for (double b : at.coefficients) EXPECT_EQ(b, 0.0);
  const LinearModel below = fit_linear(x, y, lmax * 0.9, 0.0);
  bool any = false;
  for (double b : below.coefficients) any |= b != 0.0;
  EXPECT_TRUE(any);
}

TEST(Lasso, ConstantColumnGetsZeroCoefficient) {
  Matrix x = testing::random_matrix(30, 3, 13);
  for (std::size_t i = 0; i < 30; ++i) x(i, 1) = 4.0;
  const auto y = linear_target(x, 14);
  const LinearModel m = fit_linear(x, y, 0.1, 0.0);
  EXPECT_EQ(m.coefficients[1], 0.0);
  EXPECT_EQ(m.feature_scales[1], 0.0);
}

TEST(PenaltyCv, GridIsDescendingAndBestIsOnIt) {
  const Matrix x = testing::random_matrix(90, 10, 15);
  const auto y = linear_target(x, 16);
  for (double ratio : {1.0, 0.5, 0.0}) {
    const PenaltySearch s = cross_validate_penalty(x, y, ratio, 5, 3, 20);
    ASSERT_EQ(s.penalties.size(), 20u);
    ASSERT_EQ(s.cv_mse.size(), 20u);
    EXPECT_TRUE(std::is_sorted(s.penalties.rbegin(), s.penalties.rend()));
    const auto best = std::min_element(s.cv_mse.begin(), s.cv_mse.end()) - s.cv_mse.begin();
    EXPECT_EQ(s.best_penalty, s.penalties[static_cast<std::size_t>(best)]);
  }
}

TEST(Linear, RejectsBadInput) {
  Matrix x(1, 2);
  EXPECT_THROW(fit_linear(x, std::vector<double>{1.0}, 0.0, 0.0), ValidationError);
  Matrix x2(3, 1);
  EXPECT_THROW(fit_linear(x2, std::vector<double>{1, 2}, 0.0, 0.0), ValidationError);
}

}  // namespace
}  // namespace tabreg
