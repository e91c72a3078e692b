//===- rtl_backend.cpp - Verilog emission from hardware IR ----------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/rtl_backend.hpp"

#include "loft/ints.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <sstream>

namespace loft {

namespace {

int bitsFor(int64_t max_value) {
  int bits = 1;
  while ((int64_t{1} << bits) <= max_value)
    ++bits;
  return bits;
}

std::string sizedLiteral(int width, uint64_t value) {
  return std::to_string(width) + "'d" + std::to_string(value);
}

} // namespace

FsmTransition FsmTransition::clone() const {
  FsmTransition copy;
  copy.condition = condition;
  copy.target = target;
  copy.actions = actions;
  if (if_true)
    copy.if_true = std::make_unique<FsmTransition>(if_true->clone());
  if (if_false)
    copy.if_false = std::make_unique<FsmTransition>(if_false->clone());
  return copy;
}

//===----------------------------------------------------------------------===//
// FSM construction
//===----------------------------------------------------------------------===//

namespace {

/// Two passes over the control tree. The first allocates states (one per
/// enable, one per while condition) and repeat counters in execution order,
/// so the binary encoding reads top to bottom. The second wires transition
/// trees, threading each node's continuation — what the FSM does once the
/// node finishes — down the tree. Nodes that occupy no states (empty seqs,
/// zero repeats) are transparent: they pass the continuation through.
class FsmBuilder {
public:
  explicit FsmBuilder(const HwComponent &comp) : comp_(comp) {}

  Fsm run() {
    used_.insert("fsm_idle");
    used_.insert("fsm_done");
    fsm_.states.push_back({"fsm_idle", -1, 1, {}});
    allocate(comp_.control);
    int done = static_cast<int>(fsm_.states.size());
    fsm_.states.push_back({"fsm_done", -1, 1, {}});
    fsm_.done = done;

    FsmTransition toDone;
    toDone.target = done;
    FsmTransition entry = wire(comp_.control, std::move(toDone));

    // Idle: level-sample go; stay put otherwise (no else branch emitted).
    FsmTransition idleExit;
    idleExit.condition = "go";
    idleExit.if_true = std::make_unique<FsmTransition>(std::move(entry));
    idleExit.if_false = std::make_unique<FsmTransition>();
    idleExit.if_false->target = fsm_.idle;
    fsm_.states[fsm_.idle].exit = std::move(idleExit);

    FsmTransition toIdle;
    toIdle.target = fsm_.idle;
    fsm_.states[done].exit = std::move(toIdle);

    fsm_.state_bits = bitsFor(static_cast<int64_t>(fsm_.states.size()) - 1);
    for (const FsmState &state : fsm_.states)
      fsm_.max_latency = std::max(fsm_.max_latency, state.latency);
    return std::move(fsm_);
  }

private:
  /// Claims a deterministic fsm_-prefixed name: first the plain form, then
  /// _2, _3, ... for later occurrences of the same group.
  std::string claim(const std::string &base) {
    std::string name = "fsm_" + base;
    for (int n = 2; !used_.insert(name).second; ++n)
      name = "fsm_" + base + "_" + std::to_string(n);
    return name;
  }

  int groupIndex(const std::string &name) const {
    for (size_t i = 0; i < comp_.groups.size(); ++i)
      if (comp_.groups[i].name == name)
        return static_cast<int>(i);
    return -1;
  }

  int newState(const std::string &group) {
    int index = static_cast<int>(fsm_.states.size());
    int gi = groupIndex(group);
    if (gi < 0)
      throw BackendError("enable of unknown group '" + group + "'");
    fsm_.states.push_back(
        {claim(group), gi, comp_.groups[gi].latency, {}});
    return index;
  }

  //===--------------------------------------------------------------------===//
  // Pass 1: allocation
  //===--------------------------------------------------------------------===//

  void allocate(const ControlNode &node) {
    if (const auto *enable = node.as<Enable>()) {
      state_of_[&node] = newState(enable->group);
    } else if (const auto *seq = node.as<Seq>()) {
      for (const ControlNode &child : seq->children)
        allocate(child);
    } else if (const auto *loop = node.as<While>()) {
      state_of_[&node] = newState(loop->cond_group);
      for (const ControlNode &child : loop->body)
        allocate(child);
    } else if (const auto *repeat = node.as<Repeat>()) {
      if (repeat->count == 0)
        return;
      size_t before = fsm_.states.size();
      for (const ControlNode &child : repeat->body)
        allocate(child);
      // A body with no states runs in zero cycles however often it repeats;
      // it needs no counter (and the transition wiring skips it entirely).
      if (repeat->count >= 2 && fsm_.states.size() > before) {
        FsmCounter counter;
        counter.last = repeat->count - 1;
        counter.width = bitsFor(counter.last);
        counter.name = claim("rep" + std::to_string(fsm_.counters.size()));
        counter_of_[&node] = static_cast<int>(fsm_.counters.size());
        fsm_.counters.push_back(counter);
      }
    } else {
      throw BackendError("par control is not supported by the Verilog "
                         "backend: lockstep arms have no single-FSM "
                         "realization");
    }
  }

  //===--------------------------------------------------------------------===//
  // Pass 2: transition wiring
  //===--------------------------------------------------------------------===//

  /// First state `node` enters, or -1 when the node is transparent.
  int entry(const ControlNode &node) const {
    if (node.is<Enable>() || node.is<While>()) {
      auto it = state_of_.find(&node);
      return it == state_of_.end() ? -1 : it->second;
    }
    const std::vector<ControlNode> *children = nullptr;
    if (const auto *seq = node.as<Seq>())
      children = &seq->children;
    else if (const auto *repeat = node.as<Repeat>())
      children = repeat->count == 0 ? nullptr : &repeat->body;
    if (children)
      for (const ControlNode &child : *children)
        if (int first = entry(child); first >= 0)
          return first;
    return -1;
  }

  int entryOfList(const std::vector<ControlNode> &nodes, size_t from) const {
    for (size_t i = from; i < nodes.size(); ++i)
      if (int first = entry(nodes[i]); first >= 0)
        return first;
    return -1;
  }

  static FsmTransition gotoState(int target) {
    FsmTransition t;
    t.target = target;
    return t;
  }

  static FsmTransition withAction(FsmTransition tree, FsmAction action) {
    if (tree.condition.empty()) {
      tree.actions.insert(tree.actions.begin(), action);
      return tree;
    }
    *tree.if_true = withAction(std::move(*tree.if_true), action);
    *tree.if_false = withAction(std::move(*tree.if_false), action);
    return tree;
  }

  /// Attaches `cont` as what runs after `node`; returns what the
  /// predecessor should do to start `node` (== cont when transparent).
  FsmTransition wire(const ControlNode &node, FsmTransition cont) {
    if (node.as<Enable>()) {
      int self = state_of_.at(&node);
      fsm_.states[self].exit = std::move(cont);
      return gotoState(self);
    }
    if (const auto *seq = node.as<Seq>())
      return wireList(seq->children, std::move(cont));
    if (const auto *loop = node.as<While>()) {
      int condState = state_of_.at(&node);
      // The branch reads the condition register's input wire at the edge
      // that also commits it — same value the simulator sees post-commit.
      // The validator guarantees the condition group strobes the write
      // unconditionally.
      FsmTransition bodyEntry = wireList(loop->body, gotoState(condState));
      const Cell *cell = comp_.find_cell(loop->condition.cell);
      FsmTransition exit;
      exit.condition = loop->condition.cell + "_in";
      if (cell && cell->width > 1)
        exit.condition += " != " + sizedLiteral(static_cast<int>(cell->width), 0);
      exit.if_true = std::make_unique<FsmTransition>(std::move(bodyEntry));
      exit.if_false = std::make_unique<FsmTransition>(std::move(cont));
      fsm_.states[condState].exit = std::move(exit);
      return gotoState(condState);
    }
    const auto *repeat = node.as<Repeat>();
    assert(repeat && "par rejected during allocation");
    if (repeat->count == 0 || entryOfList(repeat->body, 0) < 0)
      return cont; // nothing to run, or a body with no states
    if (repeat->count == 1)
      return wireList(repeat->body, std::move(cont));

    int counter = counter_of_.at(&node);
    const FsmCounter &c = fsm_.counters[counter];
    FsmTransition decision;
    decision.condition =
        c.name + " == " + sizedLiteral(c.width, static_cast<uint64_t>(c.last));
    decision.if_true = std::make_unique<FsmTransition>(
        withAction(std::move(cont), {counter, /*to_zero=*/true}));
    FsmTransition back = gotoState(entryOfList(repeat->body, 0));
    back.actions.push_back({counter, /*to_zero=*/false});
    decision.if_false = std::make_unique<FsmTransition>(std::move(back));
    wireList(repeat->body, std::move(decision));
    return gotoState(entryOfList(repeat->body, 0));
  }

  FsmTransition wireList(const std::vector<ControlNode> &nodes,
                         FsmTransition cont) {
    for (size_t i = nodes.size(); i-- > 0;)
      cont = wire(nodes[i], std::move(cont));
    return cont;
  }

  const HwComponent &comp_;
  Fsm fsm_;
  std::set<std::string> used_;
  std::map<const ControlNode *, int> state_of_;
  std::map<const ControlNode *, int> counter_of_;
};

} // namespace

Fsm build_fsm(const HwComponent &component) {
  return FsmBuilder(component).run();
}

//===----------------------------------------------------------------------===//
// Verilog emission
//===----------------------------------------------------------------------===//

namespace {

std::string rangeOf(int width) {
  return width == 1 ? "" : "[" + std::to_string(width - 1) + ":0] ";
}

class Emitter {
public:
  Emitter(const HwComponent &comp, const Fsm &fsm) : comp_(comp), fsm_(fsm) {
    group_states_.resize(comp.groups.size());
    for (size_t i = 0; i < fsm.states.size(); ++i)
      if (fsm.states[i].group >= 0)
        group_states_[fsm.states[i].group].push_back(static_cast<int>(i));
    ctr_bits_ = fsm.needs_cycle_counter() ? bitsFor(fsm.max_latency - 1) : 0;
  }

  std::string run() {
    os_ << "// " << comp_.name
        << " - generated by the loft Verilog backend; do not edit.\n";
    os_ << "`default_nettype none\n\n";
    os_ << "module " << comp_.name << " (\n";
    os_ << "  input  wire clk,\n";
    os_ << "  input  wire reset,\n";
    os_ << "  input  wire go,\n";
    os_ << "  output wire done\n";
    os_ << ");\n\n";

    emitFsmDecls();
    emitCellDecls();
    emitInputSelects();
    emitCombOutputs();
    emitRegisters();
    emitMemories();
    emitFsm();

    os_ << "  assign done = (state == fsm_done);\n\n";
    os_ << "endmodule\n\n";
    os_ << "`default_nettype wire\n";
    return os_.str();
  }

private:
  std::string wireOf(const PortRef &port) const {
    return port.cell + "_" + port.port;
  }

  int portWidth(const Cell &cell, const std::string &port) const {
    return cell_port(cell, port)->width;
  }

  void emitFsmDecls() {
    os_ << "  // FSM state encoding (binary).\n";
    for (size_t i = 0; i < fsm_.states.size(); ++i)
      os_ << "  localparam " << rangeOf(fsm_.state_bits) << fsm_.states[i].name
          << " = " << sizedLiteral(fsm_.state_bits, i) << ";\n";
    os_ << "\n";
    os_ << "  reg " << rangeOf(fsm_.state_bits) << "state;\n";
    if (ctr_bits_ > 0)
      os_ << "  reg " << rangeOf(ctr_bits_) << "state_ctr;\n";
    for (const FsmCounter &counter : fsm_.counters)
      os_ << "  reg " << rangeOf(counter.width) << counter.name << ";\n";
    os_ << "\n";
  }

  void emitCellDecls() {
    os_ << "  // Cells.\n";
    for (const Cell &cell : comp_.cells) {
      if (cell.kind == CellKind::Memory)
        os_ << "  reg " << rangeOf(static_cast<int>(cell.width)) << cell.name
            << " [0:" << cell.length - 1 << "];\n";
      for (const std::string &port : cell_ports(cell.kind)) {
        PortInfo info = *cell_port(cell, port);
        bool is_reg = cell.kind == CellKind::Register && port == "out";
        os_ << "  " << (is_reg ? "reg " : "wire ") << rangeOf(info.width)
            << cell.name << "_" << port << ";\n";
      }
    }
    os_ << "\n";
  }

  /// The active-state test for a group, without guard: `state == fsm_a` or
  /// `(state == fsm_a || state == fsm_b)` when enabled from several places.
  std::string activeExpr(int group, bool parenthesize) const {
    const std::vector<int> &states = group_states_[group];
    std::string expr;
    for (size_t i = 0; i < states.size(); ++i) {
      if (i > 0)
        expr += " || ";
      expr += "state == " + fsm_.states[states[i]].name;
    }
    if (states.size() > 1 && parenthesize)
      expr = "(" + expr + ")";
    return expr;
  }

  void emitInputSelects() {
    os_ << "  // Input-port selects; undriven inputs read 0.\n";
    for (const Cell &cell : comp_.cells) {
      for (const std::string &port : cell_ports(cell.kind)) {
        PortInfo info = *cell_port(cell, port);
        if (!info.is_input)
          continue;
        // Arms in group order, then assignment order. Groups no state ever
        // enables never drive anything, exactly as in the simulator.
        std::vector<std::string> arms;
        for (size_t gi = 0; gi < comp_.groups.size(); ++gi) {
          if (group_states_[gi].empty())
            continue;
          for (const Assignment &assign : comp_.groups[gi].assignments) {
            if (assign.dest != PortRef{cell.name, port})
              continue;
            std::string cond = activeExpr(static_cast<int>(gi), assign.guard.has_value());
            if (assign.guard)
              cond += " && " + wireOf(*assign.guard);
            std::string value =
                std::holds_alternative<Literal>(assign.src)
                    ? sizedLiteral(info.width, std::get<Literal>(assign.src).value)
                    : wireOf(std::get<PortRef>(assign.src));
            arms.push_back("(" + cond + ") ? " + value + " :");
          }
        }
        std::string dest = cell.name + "_" + port;
        std::string zero = sizedLiteral(info.width, 0);
        if (arms.empty()) {
          os_ << "  assign " << dest << " = " << zero << ";\n";
        } else {
          os_ << "  assign " << dest << " =\n";
          for (const std::string &arm : arms)
            os_ << "      " << arm << "\n";
          os_ << "      " << zero << ";\n";
        }
      }
    }
    os_ << "\n";
  }

  void emitCombOutputs() {
    os_ << "  // Combinational cell outputs.\n";
    for (const Cell &cell : comp_.cells) {
      const std::string n = cell.name;
      switch (cell.kind) {
      case CellKind::Register:
        break; // synchronous, below
      case CellKind::Memory:
        os_ << "  assign " << n << "_read_data = " << n << "[" << n
            << "_read_addr];\n";
        break;
      case CellKind::Adder:
        os_ << "  assign " << n << "_out = " << n << "_lhs + " << n
            << "_rhs;\n";
        break;
      case CellKind::Multiplier:
        os_ << "  assign " << n << "_out = " << n << "_lhs * " << n
            << "_rhs;\n";
        break;
      case CellKind::CompareLt:
        os_ << "  assign " << n << "_out = (" << n << "_lhs < " << n
            << "_rhs);\n";
        break;
      case CellKind::CompareEq:
        os_ << "  assign " << n << "_out = (" << n << "_lhs == " << n
            << "_rhs);\n";
        break;
      case CellKind::Constant:
        os_ << "  assign " << n << "_out = "
            << sizedLiteral(static_cast<int>(cell.width), cell.value) << ";\n";
        break;
      }
    }
    os_ << "\n";
  }

  void emitRegisters() {
    os_ << "  // Registers: synchronous write, active-high reset.\n";
    for (const Cell &cell : comp_.cells) {
      if (cell.kind != CellKind::Register)
        continue;
      const std::string n = cell.name;
      os_ << "  always @(posedge clk) begin\n";
      os_ << "    if (reset) begin\n";
      os_ << "      " << n << "_out <= "
          << sizedLiteral(static_cast<int>(cell.width), 0) << ";\n";
      os_ << "    end else begin\n";
      os_ << "      if (" << n << "_write_en) begin\n";
      os_ << "        " << n << "_out <= " << n << "_in;\n";
      os_ << "      end\n";
      os_ << "    end\n";
      os_ << "  end\n";
    }
    os_ << "\n";
  }

  void emitMemories() {
    os_ << "  // Memories: synchronous write, never reset.\n";
    for (const Cell &cell : comp_.cells) {
      if (cell.kind != CellKind::Memory)
        continue;
      const std::string n = cell.name;
      os_ << "  always @(posedge clk) begin\n";
      os_ << "    if (" << n << "_write_en) begin\n";
      os_ << "      " << n << "[" << n << "_write_addr] <= " << n
          << "_write_data;\n";
      os_ << "    end\n";
      os_ << "  end\n";
    }
    os_ << "\n";
  }

  void emitTransition(const FsmTransition &t, int indent) {
    std::string pad(indent, ' ');
    if (t.condition.empty()) {
      for (const FsmAction &action : t.actions) {
        const FsmCounter &c = fsm_.counters[action.counter];
        if (action.to_zero)
          os_ << pad << c.name << " <= " << sizedLiteral(c.width, 0) << ";\n";
        else
          os_ << pad << c.name << " <= " << c.name << " + "
              << sizedLiteral(c.width, 1) << ";\n";
      }
      os_ << pad << "state <= " << fsm_.states[t.target].name << ";\n";
      return;
    }
    os_ << pad << "if (" << t.condition << ") begin\n";
    emitTransition(*t.if_true, indent + 2);
    os_ << pad << "end else begin\n";
    emitTransition(*t.if_false, indent + 2);
    os_ << pad << "end\n";
  }

  void emitFsm() {
    os_ << "  // Control FSM.\n";
    os_ << "  always @(posedge clk) begin\n";
    os_ << "    if (reset) begin\n";
    os_ << "      state <= fsm_idle;\n";
    if (ctr_bits_ > 0)
      os_ << "      state_ctr <= " << sizedLiteral(ctr_bits_, 0) << ";\n";
    for (const FsmCounter &counter : fsm_.counters)
      os_ << "      " << counter.name << " <= "
          << sizedLiteral(counter.width, 0) << ";\n";
    os_ << "    end else begin\n";
    os_ << "      case (state)\n";
    for (const FsmState &state : fsm_.states) {
      os_ << "        " << state.name << ": begin\n";
      if (state.latency > 1) {
        os_ << "          if (state_ctr == "
            << sizedLiteral(ctr_bits_, state.latency - 1) << ") begin\n";
        os_ << "            state_ctr <= " << sizedLiteral(ctr_bits_, 0)
            << ";\n";
        emitTransition(state.exit, 12);
        os_ << "          end else begin\n";
        os_ << "            state_ctr <= state_ctr + "
            << sizedLiteral(ctr_bits_, 1) << ";\n";
        os_ << "          end\n";
      } else {
        emitTransition(state.exit, 10);
      }
      os_ << "        end\n";
    }
    os_ << "        default: begin\n";
    os_ << "          state <= fsm_idle;\n";
    os_ << "        end\n";
    os_ << "      endcase\n";
    os_ << "    end\n";
    os_ << "  end\n\n";
  }

  const HwComponent &comp_;
  const Fsm &fsm_;
  std::vector<std::vector<int>> group_states_;
  int ctr_bits_ = 0;
  std::ostringstream os_;
};

} // namespace

std::string emit_verilog(const HwComponent &component) {
  Fsm fsm = build_fsm(component);
  return Emitter(component, fsm).run();
}

//===----------------------------------------------------------------------===//
// Testbench emission
//===----------------------------------------------------------------------===//

std::string emit_testbench(const HwComponent &component,
                           const std::vector<MemoryImage> &images,
                           int64_t max_cycles) {
  // Resolve images the same way the simulator does: by binding first, then
  // by cell name; absent memories zero-fill; unknown or ill-sized images are
  // caller errors.
  std::map<std::string, const MemoryImage *> by_name;
  std::map<std::string, const Cell *> memories;
  for (const Cell &cell : component.cells)
    if (cell.kind == CellKind::Memory)
      memories.emplace(cell.binding.empty() ? cell.name : cell.binding, &cell);
  for (const MemoryImage &image : images) {
    auto it = memories.find(image.name);
    if (it == memories.end())
      throw std::invalid_argument("emit_testbench: image '" + image.name +
                                  "' matches no memory cell");
    if (static_cast<int64_t>(image.data.size()) != it->second->length)
      throw std::invalid_argument(
          "emit_testbench: image '" + image.name + "' holds " +
          std::to_string(image.data.size()) + " words, memory '" +
          it->second->name + "' has " + std::to_string(it->second->length));
    by_name[image.name] = &image;
  }

  std::ostringstream os;
  os << "// Self-checking testbench for " << component.name
     << " - generated; do not edit.\n";
  os << "`timescale 1ns / 1ps\n";
  os << "`default_nettype none\n\n";
  os << "module " << component.name << "_tb;\n\n";
  os << "  reg clk;\n";
  os << "  reg reset;\n";
  os << "  reg go;\n";
  os << "  wire done;\n\n";
  os << "  " << component.name << " dut (\n";
  os << "    .clk(clk),\n";
  os << "    .reset(reset),\n";
  os << "    .go(go),\n";
  os << "    .done(done)\n";
  os << "  );\n\n";
  os << "  always #5 clk = ~clk;\n\n";
  os << "  integer cycles;\n";
  os << "  integer i;\n\n";
  os << "  initial begin\n";
  os << "    clk = 0;\n";
  os << "    reset = 1;\n";
  os << "    go = 0;\n";
  os << "    cycles = 0;\n\n";

  os << "    // Memory images (absent images zero-fill).\n";
  for (const Cell &cell : component.cells) {
    if (cell.kind != CellKind::Memory)
      continue;
    std::string key = cell.binding.empty() ? cell.name : cell.binding;
    auto it = by_name.find(key);
    for (int64_t i = 0; i < cell.length; ++i) {
      uint32_t word = 0;
      if (it != by_name.end())
        word = static_cast<uint32_t>(it->second->data[i]);
      os << "    dut." << cell.name << "[" << i << "] = "
         << sizedLiteral(static_cast<int>(cell.width), word) << ";\n";
    }
  }

  os << "\n";
  os << "    @(posedge clk);\n";
  os << "    @(posedge clk);\n";
  os << "    reset = 0;\n";
  os << "    @(posedge clk);\n";
  os << "    go = 1;\n\n";
  os << "    while (!done && cycles < " << max_cycles << ") begin\n";
  os << "      @(posedge clk);\n";
  os << "      cycles = cycles + 1;\n";
  os << "    end\n\n";
  os << "    if (done) begin\n";
  for (const Cell &cell : component.cells) {
    if (cell.kind != CellKind::Memory)
      continue;
    std::string shown = cell.binding.empty() ? cell.name : cell.binding;
    os << "      for (i = 0; i < " << cell.length << "; i = i + 1) begin\n";
    os << "        $display(\"MEM " << shown << "[%0d]=%0d\", i, $signed(dut."
       << cell.name << "[i]));\n";
    os << "      end\n";
  }
  os << "      $display(\"CYCLES=%0d\", cycles);\n";
  os << "    end else begin\n";
  os << "      $display(\"TIMEOUT after %0d cycles\", cycles);\n";
  os << "    end\n";
  os << "    $finish;\n";
  os << "  end\n\n";
  os << "endmodule\n\n";
  os << "`default_nettype wire\n";
  return os.str();
}

} // namespace loft
