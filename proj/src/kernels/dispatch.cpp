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

#include <cstdlib>
#include <string_view>

#include "tabreg/kernels.hpp"

namespace tabreg::kernels {

#if defined(TABREG_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2() {
#if defined(TABREG_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select_kernels() {
  const char* env = std::getenv("TABREG_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return scalar();
  if (const KernelTable* wide = avx2()) return *wide;
  return scalar();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select_kernels();
  return chosen;
}

}  // namespace tabreg::kernels
