//===- rtl_backend.hpp - Verilog emission from hardware IR --------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Turns a validated HwComponent into synthesizable Verilog: the datapath is
// wired with state-muxed continuous assigns, and the control tree becomes a
// binary-encoded FSM. The handshake is fixed — `go` is level-sampled in the
// idle state, `done` pulses for exactly one cycle — so a component whose
// control takes L cycles in the cycle-accurate simulator takes L + 2 cycles
// from go to done (one cycle to capture go, one to report done).
//
// A structural netlist checker parses the emitted text back and cross-checks
// it against the component, standing in for an external lint pass.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_RTL_BACKEND_HPP
#define LOFT_RTL_BACKEND_HPP

#include "loft/diagnostics.hpp"
#include "loft/hw_ir.hpp"
#include "loft/memory_image.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace loft {

/// Raised for control shapes the FSM cannot realize. `par` is the one case:
/// lockstep arms would need product states, and the lowering never emits it.
class BackendError : public std::runtime_error {
public:
  explicit BackendError(const std::string &message)
      : std::runtime_error(message) {}
};

//===----------------------------------------------------------------------===//
// FSM
//===----------------------------------------------------------------------===//

/// Counter bookkeeping on a transition edge: zero the counter when leaving a
/// repeat, bump it when starting the next iteration.
struct FsmAction {
  int counter = 0;
  bool to_zero = false;

  bool operator==(const FsmAction &) const = default;
};

/// What happens at the clock edge that ends a state: either jump (leaf) or
/// test a 1-bit expression and recurse. Conditions are rendered Verilog
/// expressions over the module's wires — `go`, a while-register's input
/// wire, or a repeat counter comparison.
struct FsmTransition {
  std::string condition; // empty for leaves
  std::unique_ptr<FsmTransition> if_true, if_false;
  int target = -1;                // leaf: next state index
  std::vector<FsmAction> actions; // leaf: counter updates, in order

  FsmTransition clone() const;
};

/// One FSM state. Work states enable exactly one group and hold for its
/// latency; idle and done enable nothing.
struct FsmState {
  std::string name;   // Verilog localparam, always fsm_-prefixed
  int group = -1;     // index into HwComponent::groups, -1 for idle/done
  int64_t latency = 1;
  FsmTransition exit;
};

struct FsmCounter {
  std::string name; // fsm_-prefixed reg
  int width = 1;
  int64_t last = 0; // value of the final iteration (count - 1)
};

/// Binary-encoded FSM: state 0 is idle, work states follow in control-tree
/// execution order, and the last state is done. Reset enters idle, and done
/// falls back to idle after its single cycle.
struct Fsm {
  std::vector<FsmState> states;
  std::vector<FsmCounter> counters;
  int idle = 0;
  int done = 0;
  int state_bits = 1;   // ceil(log2(states)), at least 1
  int64_t max_latency = 1;

  bool needs_cycle_counter() const { return max_latency > 1; }
};

/// Builds the FSM for a validated component. Throws BackendError on `par`
/// control. Cycle-exact with the simulator: each work state is active for
/// exactly the cycles its group runs.
Fsm build_fsm(const HwComponent &component);

//===----------------------------------------------------------------------===//
// Emission
//===----------------------------------------------------------------------===//

/// Emits one synthesizable module for the component: ports {clk, reset, go,
/// done}, per-input-port state-muxed assigns (undriven inputs read 0, as in
/// the simulator), inline combinational cells, synchronous registers with
/// active-high reset, memories as register arrays with combinational read
/// and no reset. Byte-identical output for equal components.
std::string emit_verilog(const HwComponent &component);

/// Emits a self-checking testbench for the component's module: loads the
/// images into the memory arrays (by binding-or-cell name; absent memories
/// zero-fill), pulses go, and waits for done or `max_cycles` clock cycles.
/// On done it prints one `MEM <name>[<index>]=<signed decimal>` line per
/// memory word in cell order; on timeout it prints `TIMEOUT after N cycles`.
std::string emit_testbench(const HwComponent &component,
                           const std::vector<MemoryImage> &images,
                           int64_t max_cycles);

/// Structural self-check: parses the emitted text (the exact subset this
/// backend produces) and verifies it against the component — module name and
/// handshake ports, every declared wire driven exactly once, every cell port
/// present at its declared width, widths matching across every connection,
/// and every referenced identifier declared. Empty means clean.
Diagnostics netlist_check(const HwComponent &component,
                          const std::string &verilog);

} // namespace loft

#endif // LOFT_RTL_BACKEND_HPP
