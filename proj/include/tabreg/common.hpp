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
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabreg {

// Error hierarchy. ValidationError covers bad inputs, configs and violated
// preconditions; ArtifactError covers missing or mismatched on-disk artifacts.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ArtifactError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer; used for all seed fan-out.
uint64_t mix64(uint64_t x);
uint64_t derive_seed(uint64_t parent, std::string_view label);
uint64_t derive_seed(uint64_t parent, uint64_t index);

// 64-bit FNV-1a.
uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t v);

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  Matrix select_rows(std::span<const std::size_t> rows) const;
  Matrix select_columns(std::span<const std::size_t> cols) const;
  // Appends the columns of `other` (same row count) on the right.
  Matrix hstack(const Matrix& other) const;

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Worker cap used by the parallel helpers. Results never depend on it.
void set_max_threads(std::size_t n);
std::size_t max_threads();

// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
// must write into disjoint, index-addressed output slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

double mean(std::span<const double> v);
// Sample variance (n - 1 denominator); 0 when fewer than two values.
double sample_variance(std::span<const double> v);
// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> v, double q);
// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> v);

std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

// Fold id of every row: rows are shuffled with `seed`, then dealt round-robin
// so fold sizes differ by at most one.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k, uint64_t seed);

}  // namespace tabreg
