//===- hw_ir_test.cpp - Structural hardware IR tests --------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/hw_ir.hpp"

#include "doctest.h"
#include "hw_builders.hpp"

#include <algorithm>

using namespace loft;
using loft_test::make_counter;

namespace {

bool hasDiag(const Diagnostics &diags, const std::string &needle) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic &d) {
    return d.message.find(needle) != std::string::npos;
  });
}

Group &groupOf(HwComponent &comp, const std::string &name) {
  for (Group &group : comp.groups)
    if (group.name == name)
      return group;
  throw std::logic_error("no group " + name);
}

Cell &cellOf(HwComponent &comp, const std::string &name) {
  for (Cell &cell : comp.cells)
    if (cell.name == name)
      return cell;
  throw std::logic_error("no cell " + name);
}

/// Two groups with distinct latencies plus a register each, for control
/// algebra tests. ga takes 2 cycles, gb takes 3.
HwComponent twoGroups() {
  HwComponent comp;
  comp.name = "algebra";
  comp.cells = {
      {"ra", CellKind::Register, 32},
      {"rb", CellKind::Register, 32},
  };
  comp.groups = {
      {"ga",
       {{{"ra", "in"}, Literal{1}, {}}, {{"ra", "write_en"}, Literal{1}, {}}},
       2},
      {"gb",
       {{{"rb", "in"}, Literal{2}, {}}, {{"rb", "write_en"}, Literal{1}, {}}},
       3},
  };
  return comp;
}

ControlNode enable(const std::string &group) {
  return ControlNode{Enable{group}};
}

} // namespace

TEST_CASE("cell ports carry kind-specific widths and directions") {
  Cell reg{"r", CellKind::Register, 32};
  CHECK(cell_port(reg, "in")->width == 32);
  CHECK(cell_port(reg, "in")->is_input);
  CHECK(cell_port(reg, "write_en")->width == 1);
  CHECK(cell_port(reg, "out")->width == 32);
  CHECK(!cell_port(reg, "out")->is_input);
  CHECK(!cell_port(reg, "lhs").has_value());

  Cell mem{"m", CellKind::Memory, 32, 64};
  CHECK(cell_port(mem, "read_addr")->width == 32); // addresses are 32-bit
  CHECK(cell_port(mem, "write_addr")->width == 32);
  CHECK(cell_port(mem, "write_data")->width == 32);
  CHECK(cell_port(mem, "write_en")->width == 1);
  CHECK(cell_port(mem, "read_data")->width == 32);
  CHECK(!cell_port(mem, "read_data")->is_input);

  Cell lt{"c", CellKind::CompareLt, 32};
  CHECK(cell_port(lt, "lhs")->width == 32);
  CHECK(cell_port(lt, "out")->width == 1); // comparisons produce a bit

  Cell k{"k", CellKind::Constant, 32, 0, 7};
  CHECK(cell_port(k, "out")->width == 32);
  CHECK(!cell_port(k, "out")->is_input);
  CHECK(!cell_port(k, "in").has_value());

  CHECK(cell_ports(CellKind::Register) ==
        std::vector<std::string>{"in", "write_en", "out"});
  CHECK(cell_ports(CellKind::Memory) ==
        std::vector<std::string>{"read_addr", "write_addr", "write_data",
                                 "write_en", "read_data"});
  CHECK(cell_ports(CellKind::Adder) ==
        std::vector<std::string>{"lhs", "rhs", "out"});
  CHECK(cell_ports(CellKind::Constant) == std::vector<std::string>{"out"});

  CHECK(std::string(to_string(CellKind::Multiplier)) == "multiplier");
  CHECK(std::string(to_string(CellKind::Register)) == "register");
}

TEST_CASE("validate accepts the counter loop") {
  HwComponent comp = make_counter(5);
  CHECK(validate(comp).empty());
  // A While makes the latency dynamic.
  CHECK(!static_latency(comp).has_value());
}

TEST_CASE("validate rejects malformed components") {
  HwComponent comp = make_counter(5);

  SUBCASE("invalid component name") {
    comp.name = "9counter";
    CHECK(hasDiag(validate(comp), "component name"));
  }
  SUBCASE("reserved cell name") {
    cellOf(comp, "cnt").name = "state";
    CHECK(hasDiag(validate(comp), "collides with backend signals"));
  }
  SUBCASE("fsm prefix is reserved") {
    cellOf(comp, "cnt").name = "fsm_cnt";
    CHECK(hasDiag(validate(comp), "collides with backend signals"));
  }
  SUBCASE("duplicate cell name") {
    comp.cells.push_back({"cnt", CellKind::Register, 32});
    CHECK(hasDiag(validate(comp), "duplicate cell name"));
  }
  SUBCASE("derived wire names must not collide") {
    // cnt.out's wire is "cnt_out"; a second cell of that name would emit
    // overlapping identifiers.
    comp.cells.push_back({"cnt_out", CellKind::Memory, 32, 4});
    Diagnostics diags = validate(comp);
    CHECK(hasDiag(diags, "claimed twice"));
  }
  SUBCASE("width bounds") {
    cellOf(comp, "cnt").width = 0;
    CHECK(hasDiag(validate(comp), "outside [1, 32]"));
    cellOf(comp, "cnt").width = 33;
    CHECK(hasDiag(validate(comp), "outside [1, 32]"));
  }
  SUBCASE("memory length") {
    cellOf(comp, "m").length = 0;
    CHECK(hasDiag(validate(comp), "length must be at least 1"));
  }
  SUBCASE("length on a non-memory") {
    cellOf(comp, "cnt").length = 8;
    CHECK(hasDiag(validate(comp), "only memories have a length"));
  }
  SUBCASE("constant value must fit its width") {
    cellOf(comp, "one").width = 1;
    cellOf(comp, "one").value = 2;
    CHECK(hasDiag(validate(comp), "does not fit in 1 bits"));
  }
  SUBCASE("value on a non-constant") {
    cellOf(comp, "cnt").value = 3;
    CHECK(hasDiag(validate(comp), "only constants carry a value"));
  }
  SUBCASE("binding on a non-memory") {
    cellOf(comp, "cnt").binding = "arg0";
    CHECK(hasDiag(validate(comp), "only memories carry an argument binding"));
  }
  SUBCASE("unknown cell in an assignment") {
    groupOf(comp, "incr").assignments[0].dest.cell = "ghost";
    CHECK(hasDiag(validate(comp), "unknown cell 'ghost'"));
  }
  SUBCASE("unknown port") {
    groupOf(comp, "incr").assignments[0].dest.port = "bogus";
    CHECK(hasDiag(validate(comp), "has no port 'bogus'"));
  }
  SUBCASE("cannot assign an output port") {
    groupOf(comp, "incr").assignments[0].dest = {"cnt", "out"};
    CHECK(hasDiag(validate(comp), "is not assignable"));
  }
  SUBCASE("source must be an output port") {
    groupOf(comp, "incr").assignments[0].src = PortRef{"cnt", "in"};
    CHECK(hasDiag(validate(comp), "is not a source"));
  }
  SUBCASE("double drive within a group") {
    Group &incr = groupOf(comp, "incr");
    incr.assignments.push_back(incr.assignments[2]); // cnt.in again
    CHECK(hasDiag(validate(comp), "driven twice in one group"));
  }
  SUBCASE("width mismatch") {
    // cond.in is 1 bit; add.out is 32.
    groupOf(comp, "cond_grp").assignments[2].src = PortRef{"add", "out"};
    CHECK(hasDiag(validate(comp), "width mismatch"));
  }
  SUBCASE("literal must fit the destination") {
    groupOf(comp, "cond_grp").assignments[3].src = Literal{2};
    CHECK(hasDiag(validate(comp), "does not fit in 1 bits"));
  }
  SUBCASE("guards are single bits") {
    groupOf(comp, "incr").assignments[0].guard = PortRef{"add", "out"};
    CHECK(hasDiag(validate(comp), "is not a single bit"));
  }
  SUBCASE("register write needs both in and write_en") {
    Group &incr = groupOf(comp, "incr");
    incr.assignments.erase(incr.assignments.begin() + 3); // drop write_en
    CHECK(hasDiag(validate(comp), "in and write_en must be driven together"));
  }
  SUBCASE("memory write needs addr, data, and en") {
    Group &store = groupOf(comp, "store");
    store.assignments.erase(store.assignments.begin()); // drop write_addr
    CHECK(hasDiag(validate(comp),
                  "write_addr, write_data, and write_en must be driven"));
  }
  SUBCASE("group latency") {
    groupOf(comp, "incr").latency = 0;
    CHECK(hasDiag(validate(comp), "latency must be at least 1"));
  }
  SUBCASE("duplicate group name") {
    comp.groups.push_back(comp.groups.back());
    CHECK(hasDiag(validate(comp), "duplicate group name"));
  }
  SUBCASE("enable of unknown group") {
    comp.control.as<Seq>()->children[1] = enable("ghost");
    CHECK(hasDiag(validate(comp), "enable of unknown group 'ghost'"));
  }
  SUBCASE("negative repeat count") {
    comp.control.as<Seq>()->children[1] =
        ControlNode{Repeat{-1, {enable("store")}}};
    CHECK(hasDiag(validate(comp), "repeat count must be non-negative"));
  }
  SUBCASE("par arms must drive disjoint ports") {
    Par par;
    par.children = {enable("incr"), enable("incr")};
    comp.control.as<Seq>()->children[1] = ControlNode{std::move(par)};
    CHECK(hasDiag(validate(comp), "both drive"));
  }
  SUBCASE("while condition must be a register out") {
    comp.control.as<Seq>()->children[0].as<While>()->condition = {"lt", "out"};
    CHECK(hasDiag(validate(comp), "must be a register's out port"));
  }
  SUBCASE("while condition group must refresh the register") {
    comp.control.as<Seq>()->children[0].as<While>()->cond_group = "incr";
    CHECK(hasDiag(validate(comp), "does not write register 'cond'"));
  }
  SUBCASE("while condition group latency") {
    groupOf(comp, "cond_grp").latency = 2;
    CHECK(hasDiag(validate(comp), "must have latency 1"));
  }
  SUBCASE("while condition strobe must be unguarded") {
    for (Assignment &assign : groupOf(comp, "cond_grp").assignments)
      if (assign.dest == PortRef{"cond", "write_en"})
        assign.guard = PortRef{"lt", "out"};
    CHECK(hasDiag(validate(comp), "unguarded constant write enable"));
  }
  SUBCASE("while condition strobe must be a constant") {
    for (Assignment &assign : groupOf(comp, "cond_grp").assignments)
      if (assign.dest == PortRef{"cond", "write_en"})
        assign.src = PortRef{"lt", "out"};
    CHECK(hasDiag(validate(comp), "unguarded constant write enable"));
  }
  SUBCASE("while with unknown condition group") {
    comp.control.as<Seq>()->children[0].as<While>()->cond_group = "ghost";
    CHECK(hasDiag(validate(comp), "unknown condition group"));
  }
}

TEST_CASE("static latency folds the control algebra") {
  HwComponent comp = twoGroups();

  SUBCASE("enable") {
    comp.control = enable("gb");
    CHECK(static_latency(comp) == 3);
  }
  SUBCASE("seq sums") {
    comp.control = ControlNode{Seq{{enable("ga"), enable("gb")}}};
    CHECK(static_latency(comp) == 5);
  }
  SUBCASE("par takes the slowest arm") {
    comp.control = ControlNode{Par{{enable("ga"), enable("gb")}}};
    CHECK(static_latency(comp) == 3);
  }
  SUBCASE("repeat multiplies") {
    comp.control = ControlNode{Repeat{4, {enable("ga"), enable("gb")}}};
    CHECK(static_latency(comp) == 20);
  }
  SUBCASE("repeat zero is free") {
    comp.control = ControlNode{Repeat{0, {enable("ga")}}};
    CHECK(static_latency(comp) == 0);
  }
  SUBCASE("empty seq is free") {
    comp.control = ControlNode{Seq{}};
    CHECK(static_latency(comp) == 0);
  }
  SUBCASE("nesting") {
    comp.control = ControlNode{Seq{{
        ControlNode{Par{{enable("ga"), enable("gb")}}},
        ControlNode{Repeat{2, {enable("ga")}}},
    }}};
    CHECK(static_latency(comp) == 7);
  }
  SUBCASE("while anywhere makes it dynamic") {
    CHECK(!static_latency(make_counter(3)).has_value());
  }
}

TEST_CASE("resource counts tally cells by kind") {
  HwComponent comp = make_counter(5);
  ResourceReport report = resource_counts(comp);
  CHECK(report.multipliers == 0);
  CHECK(report.adders == 1);
  CHECK(report.comparators == 1);
  CHECK(report.registers == 2);
  CHECK(report.constants == 2);
  CHECK(report.memories == 1);
  CHECK(report.memory_bits == 32);

  comp.cells.push_back({"big", CellKind::Memory, 32, 1024});
  comp.cells.push_back({"mul", CellKind::Multiplier, 32});
  comp.cells.push_back({"eq", CellKind::CompareEq, 32});
  report = resource_counts(comp);
  CHECK(report.memories == 2);
  CHECK(report.memory_bits == 32 + 32 * 1024);
  CHECK(report.multipliers == 1);
  CHECK(report.comparators == 2);
}

TEST_CASE("dump is deterministic and round-trips the structure by eye") {
  HwComponent comp = make_counter(2);
  std::string text = dump_hwir(comp);
  CHECK(text == dump_hwir(comp)); // byte-stable

  CHECK(text == R"(component @counter {
  cells {
    cnt : register<32>
    cond : register<1>
    one : constant<32>(1)
    lim : constant<32>(2)
    add : adder<32>
    lt : compare_lt<32>
    m : memory<32 x 1>
  }
  group cond_grp latency(1) {
    lt.lhs = cnt.out
    lt.rhs = lim.out
    cond.in = lt.out
    cond.write_en = 1
  }
  group incr latency(1) {
    add.lhs = cnt.out
    add.rhs = one.out
    cnt.in = add.out
    cnt.write_en = 1
  }
  group store latency(1) {
    m.write_addr = 0
    m.write_data = cnt.out
    m.write_en = 1
  }
  control {
    seq {
      while cond.out with cond_grp {
        enable incr
      }
      enable store
    }
  }
}
)");
}

TEST_CASE("dump renders guards and bindings") {
  HwComponent comp = make_counter(1);
  cellOf(comp, "m").binding = "arg0";
  groupOf(comp, "store").assignments[1].guard = PortRef{"cond", "out"};
  std::string text = dump_hwir(comp);
  CHECK(text.find("m : memory<32 x 1> bind(arg0)") != std::string::npos);
  CHECK(text.find("m.write_data = cnt.out when cond.out") !=
        std::string::npos);
}

TEST_CASE("addr width covers the index range") {
  CHECK(addr_width(1) == 1);
  CHECK(addr_width(2) == 1);
  CHECK(addr_width(3) == 2);
  CHECK(addr_width(4) == 2);
  CHECK(addr_width(5) == 3);
  CHECK(addr_width(1024) == 10);
  CHECK(addr_width(1025) == 11);
}

TEST_CASE("replace_while_with_repeat preserves group order and cost") {
  HwComponent comp = make_counter(5);
  HwComponent fixed =
      replace_while_with_repeat(comp, [](const While &) { return int64_t{5}; });

  CHECK(validate(fixed).empty());
  // Cells and groups untouched; only the control tree changes.
  CHECK(fixed.cells == comp.cells);
  CHECK(fixed.groups == comp.groups);

  ControlNode expected{Seq{{
      ControlNode{Seq{{
          enable("cond_grp"),
          ControlNode{Repeat{5, {enable("incr"), enable("cond_grp")}}},
      }}},
      enable("store"),
  }}};
  CHECK(fixed.control == expected);

  // cond runs 6x, incr 5x, store 1x.
  CHECK(static_latency(fixed) == 12);
}

TEST_CASE("find_cell and find_group") {
  HwComponent comp = make_counter(1);
  REQUIRE(comp.find_cell("cnt") != nullptr);
  CHECK(comp.find_cell("cnt")->kind == CellKind::Register);
  CHECK(comp.find_cell("nope") == nullptr);
  REQUIRE(comp.find_group("incr") != nullptr);
  CHECK(comp.find_group("incr")->latency == 1);
  CHECK(comp.find_group("nope") == nullptr);
}

TEST_CASE("control node equality is structural") {
  ControlNode a{Seq{{enable("g"), ControlNode{Repeat{2, {enable("h")}}}}}};
  ControlNode b{Seq{{enable("g"), ControlNode{Repeat{2, {enable("h")}}}}}};
  CHECK(a == b);
  b.as<Seq>()->children[1].as<Repeat>()->count = 3;
  CHECK(!(a == b));
  CHECK(!(a == enable("g")));

  While w1{{"c", "out"}, "cg", {enable("g")}};
  While w2 = w1;
  CHECK(ControlNode{w1} == ControlNode{w2});
  w2.cond_group = "other";
  CHECK(!(ControlNode{w1} == ControlNode{w2}));
}
