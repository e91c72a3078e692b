//===- oracle.cpp - Independent reference results for tests ----------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "oracle.hpp"

namespace loft_test {

std::vector<int32_t> oracle_matmul(const std::vector<int32_t> &a,
                                   const std::vector<int32_t> &b, int64_t n) {
  std::vector<int32_t> c(static_cast<size_t>(n * n), 0);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j) {
      uint32_t acc = 0;
      for (int64_t k = 0; k < n; ++k) {
        uint32_t lhs = static_cast<uint32_t>(a[i * n + k]);
        uint32_t rhs = static_cast<uint32_t>(b[k * n + j]);
        acc += lhs * rhs;
      }
      c[i * n + j] = static_cast<int32_t>(acc);
    }
  return c;
}

int64_t oracle_cycles_nested(int64_t n) {
  return 3 * n * n * n + 6 * n * n + 4 * n + 2;
}

int64_t oracle_cycles_flattened(int64_t n) {
  return n * n * n + 3 * n * n + 4 * n + 2;
}

} // namespace loft_test
