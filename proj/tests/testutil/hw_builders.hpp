//===- hw_builders.hpp - Hardware-IR fixtures for tests -----------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_TESTS_HW_BUILDERS_HPP
#define LOFT_TESTS_HW_BUILDERS_HPP

#include "loft/hw_ir.hpp"
#include "loft/rng.hpp"

namespace loft_test {

/// A while-loop counter: cnt increments from 0 while cnt < limit, then the
/// final value is stored to the one-word memory "m". Control is
///   seq { while cond.out with cond_grp { enable incr }; enable store }
/// so a run takes 2*limit + 2 cycles and ends with m[0] == limit.
loft::HwComponent make_counter(int64_t limit);

/// Random valid component whose control tree is while-free (seq / par /
/// repeat / enable, depth <= 4) over groups with latencies 1..3. Par arms
/// touch disjoint cells by construction. validate() is empty for every seed;
/// the point is cross-checking static_latency against simulated cycles.
/// `allow_par = false` swaps par draws for seqs (the Verilog backend has no
/// par realization), leaving the rest of the draw sequence unchanged.
loft::HwComponent gen_static_component(uint64_t seed,
                                       bool allow_par = true);

} // namespace loft_test

#endif // LOFT_TESTS_HW_BUILDERS_HPP
