//===- lowering.hpp - Affine-to-hardware lowering ------------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Turns one verified affine function into a hardware component. The recipe,
// spelled out in docs/lowering.md:
//
//   * each memref argument becomes a memory cell bound to the argument;
//   * each loop gets a counter register, a 1-bit condition flag refreshed by
//     a dedicated condition group, and init/increment groups, wired into a
//     while node — so a loop with trip count T and body latency B costs
//     1 + (T+1) + T*(B+1) cycles;
//   * a loop-carried scalar becomes a register seeded by its own init group
//     and rewritten where the body yields;
//   * straight-line loads/multiplies/adds fuse into single-cycle stage
//     groups, cut only where two loads contend for the same memory's read
//     port; values crossing a cut are latched into fresh registers;
//   * stores always stand alone, one group per store, and order memory
//     traffic the way the source does;
//   * index expressions never use multipliers: a `coeff * iv` term keeps a
//     strength-reduced register stepped by coeff*step alongside the counter,
//     and address adder trees sum the surviving operands (zero constants
//     drop out).
//
// Resource usage therefore tracks the source directly: one multiplier per
// arith multiply, one memory per argument, and unrolling a loop by a factor
// scales the multipliers by that factor while the controller stays put.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_LOWERING_HPP
#define LOFT_LOWERING_HPP

#include "loft/affine_ir.hpp"
#include "loft/hw_ir.hpp"

#include <stdexcept>

namespace loft {

/// A function outside the lowerable subset (negative or over-wide loop
/// bounds, more than one loop-carried scalar per loop). Verified functions
/// produced by the front end or the generators stay inside it.
class LowerError : public std::runtime_error {
public:
  explicit LowerError(const std::string &message)
      : std::runtime_error(message) {}
};

/// Lowers `func` to a component with the same name. The function must come
/// from a module that verifies; the result passes validate() as long as the
/// function's argument names do not collide with the generated cell names
/// (argument memories are prefixed "mem_").
HwComponent lower(const AffineFunc &func);

} // namespace loft

#endif // LOFT_LOWERING_HPP
