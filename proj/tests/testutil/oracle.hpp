//===- oracle.hpp - Independent reference results for tests -------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Everything in this file is written directly from the definitions under
// test, NOT by calling the library: matmul as three textbook loops over
// wrap-around int32, and the cycle model as closed forms derived by hand
// from the lowering recipe (counted once on paper, then frozen here).
// Tests compare library behavior against these, never the other way round.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_TESTS_ORACLE_HPP
#define LOFT_TESTS_ORACLE_HPP

#include <cstdint>
#include <vector>

namespace loft_test {

/// C = A * B, all row-major n*n, with two's-complement wrap-around like the
/// i32 arithmetic in the kernel.
std::vector<int32_t> oracle_matmul(const std::vector<int32_t> &a,
                                   const std::vector<int32_t> &b, int64_t n);

/// Cycle count of the triple-loop GEMM design produced by the lowering
/// recipe, derived by hand (docs/cycle_model.md walks through it):
///
///   loop(T, B) = 1           counter init group
///              + (T + 1)     condition-group evaluations (while-do)
///              + T * (B + 1) body plus counter-increment group
///
///   k-loop body = 1 (loads, multiply, and accumulate fuse into one group)
///   j-loop body = acc init (1) + loop(n, 1) + store (1) = 3n + 4
///   i-loop body = loop(n, 3n + 4)          = 3n^2 + 6n + 2
///   total       = loop(n, 3n^2 + 6n + 2)   = 3n^3 + 6n^2 + 4n + 2
int64_t oracle_cycles_nested(int64_t n);

/// Same derivation with the k-loop fully unrolled: its body becomes n
/// single-cycle compute stages (cut at memory read ports) plus one store
/// group, and the zero constant folds into the first stage, so no acc init
/// group remains:
///
///   j-loop body = n + 1
///   i-loop body = loop(n, n + 1)         = n^2 + 3n + 2
///   total       = loop(n, n^2 + 3n + 2)  = n^3 + 3n^2 + 4n + 2
int64_t oracle_cycles_flattened(int64_t n);

} // namespace loft_test

#endif // LOFT_TESTS_ORACLE_HPP
