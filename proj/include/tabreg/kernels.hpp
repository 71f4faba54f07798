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
#include <span>

// Inner-loop arithmetic used by coordinate descent, neighbour search and
// Relief. Each kernel has a scalar reference in kernels/scalar.cpp and an
// AVX2+FMA variant in kernels/avx2.cpp; active() picks one at first use.
// Setting TABREG_SIMD=scalar in the environment pins the reference path.
namespace tabreg::kernels {

struct GowerSum {
  double sum = 0.0;    // accumulated per-column dissimilarity
  double count = 0.0;  // number of mutually observed columns
};

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  // NaN marks a missing cell. Columns with categorical[j] != 0 contribute a
  // 0/1 mismatch, the rest contribute |a - b| (inputs pre-scaled by range).
  GowerSum (*gower)(const double* a, const double* b, const double* categorical,
                    std::size_t n);
};

const KernelTable& scalar();
// nullptr when the variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2();
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  return active().l1_distance(a.data(), b.data(), a.size());
}
inline GowerSum gower(std::span<const double> a, std::span<const double> b,
                      std::span<const double> categorical) {
  return active().gower(a.data(), b.data(), categorical.data(), a.size());
}

}  // namespace tabreg::kernels
