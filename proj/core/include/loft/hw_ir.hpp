//===- hw_ir.hpp - Structural hardware IR --------------------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// A component is a set of primitive cells, a set of groups (named bundles of
// guarded port assignments, each with a static latency in cycles), and a
// control tree that schedules groups over time:
//
//   enable g        run group g for its latency
//   seq {...}       children one after another
//   par {...}       children simultaneously, joining on the slowest
//   while c, g {..} evaluate group g (1 cycle), test register bit c, repeat
//   repeat n {...}  run the body n times (count baked into the FSM)
//
// All datapath ports are 32 bits (memory addresses included); write enables,
// guards, and comparator outputs are single bits. Port values are unsigned
// bit patterns; adders and multipliers wrap, comparisons are unsigned.
// Combinational inputs are per-cycle: a port not assigned by any active
// group this cycle reads 0.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_HW_IR_HPP
#define LOFT_HW_IR_HPP

#include "loft/diagnostics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace loft {

//===----------------------------------------------------------------------===//
// Cells
//===----------------------------------------------------------------------===//

enum class CellKind {
  Register,   // in, write_en -> out (synchronous, holds value)
  Memory,     // read_addr -> read_data (combinational read);
              // write_addr, write_data, write_en (synchronous write)
  Adder,      // lhs, rhs -> out (combinational, wraps)
  Multiplier, // lhs, rhs -> out (combinational, wraps)
  CompareLt,  // lhs, rhs -> out (1 bit, unsigned less-than)
  CompareEq,  // lhs, rhs -> out (1 bit)
  Constant,   // -> out (fixed value)
};

struct Cell {
  std::string name;
  CellKind kind;
  int width = 32;       // data width; comparator inputs, register storage
  int64_t length = 0;   // memories: number of words
  uint64_t value = 0;   // constants: the emitted bit pattern (fits width)
  std::string binding;  // memories: the function argument they realize

  bool operator==(const Cell &) const = default;
};

struct PortInfo {
  int width;
  bool is_input; // true: driven by assignments; false: produced by the cell
};

/// Port metadata for `port` on `cell`; nullopt when the kind has no such
/// port. Every cell's port set is fixed by its kind.
std::optional<PortInfo> cell_port(const Cell &cell, const std::string &port);

/// All port names of a kind, inputs first, in stable order.
std::vector<std::string> cell_ports(CellKind kind);

const char *to_string(CellKind kind);

//===----------------------------------------------------------------------===//
// Groups
//===----------------------------------------------------------------------===//

struct PortRef {
  std::string cell;
  std::string port;

  bool operator==(const PortRef &) const = default;
};

/// A literal source; its width is taken from the destination port.
struct Literal {
  uint64_t value = 0;

  bool operator==(const Literal &) const = default;
};

struct Assignment {
  PortRef dest;                 // an input port
  std::variant<PortRef, Literal> src; // an output port or a literal
  std::optional<PortRef> guard; // 1-bit output; assignment active when nonzero

  bool operator==(const Assignment &) const = default;
};

struct Group {
  std::string name;
  std::vector<Assignment> assignments;
  int64_t latency = 1; // cycles the group occupies when enabled

  bool operator==(const Group &) const = default;
};

//===----------------------------------------------------------------------===//
// Control tree
//===----------------------------------------------------------------------===//

struct ControlNode;

struct Enable {
  std::string group;
  bool operator==(const Enable &) const = default;
};

struct Seq {
  std::vector<ControlNode> children;
  bool operator==(const Seq &) const;
};

struct Par {
  std::vector<ControlNode> children;
  bool operator==(const Par &) const;
};

/// While-do: run `cond_group` (one cycle), then test `condition` — which must
/// be the out port of a register written by `cond_group` — and either enter
/// the body or fall through. The body runs to completion before the next
/// condition evaluation.
struct While {
  PortRef condition;
  std::string cond_group;
  std::vector<ControlNode> body; // implicit seq
  bool operator==(const While &) const;
};

/// Fixed-count repetition; the count lives in the FSM, costing no cycles
/// beyond the body itself.
struct Repeat {
  int64_t count = 0;
  std::vector<ControlNode> body; // implicit seq
  bool operator==(const Repeat &) const;
};

struct ControlNode {
  std::variant<Enable, Seq, Par, While, Repeat> node;

  template <typename T> const T *as() const { return std::get_if<T>(&node); }
  template <typename T> T *as() { return std::get_if<T>(&node); }
  template <typename T> bool is() const {
    return std::holds_alternative<T>(node);
  }

  bool operator==(const ControlNode &) const;
};

//===----------------------------------------------------------------------===//
// Component
//===----------------------------------------------------------------------===//

struct HwComponent {
  std::string name;
  std::vector<Cell> cells;
  std::vector<Group> groups;
  ControlNode control{Seq{}};

  const Cell *find_cell(const std::string &name) const;
  const Group *find_group(const std::string &name) const;

  bool operator==(const HwComponent &) const = default;
};

/// Structural checks: unique collision-free names (including the wire names
/// Verilog will derive from them), known ports with matching widths, literals
/// that fit, single driver per port within a group, write-enable pairing,
/// existing groups in the control tree, while-conditions that are register
/// outputs refreshed by their condition group, and port-disjoint par arms.
/// Empty result means every backend can process the component.
Diagnostics validate(const HwComponent &component);

/// Total cycles the control tree takes, when that is a static quantity.
/// While nodes make it std::nullopt; everything else folds: enable = group
/// latency, seq = sum, par = max, repeat = count * body.
std::optional<int64_t> static_latency(const HwComponent &component);

struct ResourceReport {
  int64_t multipliers = 0;
  int64_t adders = 0;
  int64_t comparators = 0;
  int64_t registers = 0;
  int64_t constants = 0;
  int64_t memories = 0;
  int64_t memory_bits = 0;

  bool operator==(const ResourceReport &) const = default;
};

ResourceReport resource_counts(const HwComponent &component);

/// Deterministic textual rendering (the .hwir artifact): cells, then groups,
/// then the control tree as an indented s-expression-like block.
std::string dump_hwir(const HwComponent &component);

/// Rewrites every `while` into `seq { cond; repeat trips(w) { body...; cond } }`
/// given an oracle for its trip count. The replacement runs the exact same
/// groups in the same order for the same number of cycles — it just moves
/// the iteration decision from the datapath into the FSM — which makes the
/// control tree fully static. Used to cross-check dynamic while timing
/// against static_latency.
HwComponent
replace_while_with_repeat(const HwComponent &component,
                          const std::function<int64_t(const While &)> &trips);

/// Address bits needed to index `length` words (>= 1). The IR carries 32-bit
/// addresses regardless; this is for reports and documentation.
int addr_width(int64_t length);

} // namespace loft

#endif // LOFT_HW_IR_HPP
