//===- simulator.hpp - Cycle-accurate component execution ---------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Interprets a component the way the emitted RTL executes it, one clock at a
// time. Each cycle: the control tree picks the active groups, combinational
// values settle (lazily, with feedback detection), then registers and
// memories commit. While-conditions are sampled from the post-commit register
// value, exactly like the FSM's registered branch. Cycle counts here are the
// project's ground truth; the Verilog backend is checked against them.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_SIMULATOR_HPP
#define LOFT_SIMULATOR_HPP

#include "loft/hw_ir.hpp"
#include "loft/memory_image.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace loft {

struct SimOptions {
  /// Throws SimError{Timeout} once this many cycles have run without the
  /// control tree finishing. 0 means a control tree that needs any cycle at
  /// all times out immediately.
  int64_t max_cycles = 100'000'000;

  /// Record one line per cycle listing the active groups.
  bool trace = false;
};

struct SimResult {
  int64_t cycles = 0;
  /// Final contents of every memory cell, in cell order, named by the cell's
  /// argument binding (cell name when unbound).
  std::vector<MemoryImage> memories;
  std::vector<std::string> trace;
};

class SimError : public std::runtime_error {
public:
  enum class Kind { Timeout, OutOfBounds, CombLoop };

  SimError(Kind kind, const std::string &message, int64_t cycle)
      : std::runtime_error(message), kind(kind), cycle(cycle) {}

  Kind kind;
  int64_t cycle;
};

/// Runs `component` to completion. `initial` preloads memory cells, matched
/// by binding-or-cell name; absent memories start zeroed. A present image
/// whose length disagrees with the cell, or a component that fails validate(),
/// throws std::invalid_argument.
SimResult simulate(const HwComponent &component,
                   const std::vector<MemoryImage> &initial,
                   const SimOptions &options = {});

} // namespace loft

#endif // LOFT_SIMULATOR_HPP
