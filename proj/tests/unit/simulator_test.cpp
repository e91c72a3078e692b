//===- simulator_test.cpp - Cycle-accurate execution tests --------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/simulator.hpp"

#include "doctest.h"
#include "hw_builders.hpp"

using namespace loft;
using loft_test::gen_static_component;
using loft_test::make_counter;

namespace {

ControlNode enable(const std::string &group) {
  return ControlNode{Enable{group}};
}

/// One register, one 4-word scratch memory, and a pass-through group that
/// stores reg.out at a fixed address. Tests bolt further cells/groups on.
HwComponent scratch() {
  HwComponent comp;
  comp.name = "scratch";
  comp.cells = {
      {"r", CellKind::Register, 32},
      {"m", CellKind::Memory, 32, 4},
  };
  comp.groups = {
      {"st0",
       {
           {{"m", "write_addr"}, Literal{0}, {}},
           {{"m", "write_data"}, PortRef{"r", "out"}, {}},
           {{"m", "write_en"}, Literal{1}, {}},
       },
       1},
  };
  return comp;
}

const MemoryImage &imageOf(const SimResult &result, const std::string &name) {
  for (const MemoryImage &image : result.memories)
    if (image.name == name)
      return image;
  throw std::logic_error("no memory " + name);
}

} // namespace

TEST_CASE("registers commit after combinational reads settle") {
  HwComponent comp = scratch();
  // Same-cycle: the store sees the pre-write register value.
  comp.groups.push_back({"wr_and_st",
                         {
                             {{"r", "in"}, Literal{42}, {}},
                             {{"r", "write_en"}, Literal{1}, {}},
                             {{"m", "write_addr"}, Literal{1}, {}},
                             {{"m", "write_data"}, PortRef{"r", "out"}, {}},
                             {{"m", "write_en"}, Literal{1}, {}},
                         },
                         1});
  comp.control = ControlNode{Seq{{enable("wr_and_st"), enable("st0")}}};

  SimResult result = simulate(comp, {});
  CHECK(result.cycles == 2);
  // Cycle 0 stored the old value (0) at [1] and latched 42; cycle 1 stored
  // the new value at [0].
  CHECK(imageOf(result, "m").data == std::vector<int32_t>{42, 0, 0, 0});
}

TEST_CASE("undriven ports and guarded-off assignments read zero") {
  HwComponent comp = scratch();
  comp.cells.push_back({"zero", CellKind::Constant, 32, 0, 0});
  comp.cells.push_back({"eq", CellKind::CompareEq, 32});
  comp.cells.push_back({"lt", CellKind::CompareLt, 32});
  // eq.out: r == 0 -> true at start. lt.out: r < 0 (unsigned) -> false.
  comp.groups.push_back({"guarded",
                         {
                             {{"eq", "lhs"}, PortRef{"r", "out"}, {}},
                             {{"eq", "rhs"}, PortRef{"zero", "out"}, {}},
                             {{"lt", "lhs"}, PortRef{"r", "out"}, {}},
                             {{"lt", "rhs"}, PortRef{"zero", "out"}, {}},
                             // True guard: the literal lands.
                             {{"m", "write_addr"}, Literal{1}, {}},
                             {{"m", "write_data"}, Literal{7},
                              PortRef{"eq", "out"}},
                             {{"m", "write_en"}, Literal{1}, {}},
                         },
                         1});
  comp.groups.push_back({"guarded_off",
                         {
                             {{"lt", "lhs"}, PortRef{"r", "out"}, {}},
                             {{"lt", "rhs"}, PortRef{"zero", "out"}, {}},
                             // False guard: write_data falls back to 0.
                             {{"m", "write_addr"}, Literal{2}, {}},
                             {{"m", "write_data"}, Literal{9},
                              PortRef{"lt", "out"}},
                             {{"m", "write_en"}, Literal{1}, {}},
                         },
                         1});
  comp.groups.push_back({"en_off",
                         {
                             {{"lt", "lhs"}, PortRef{"r", "out"}, {}},
                             {{"lt", "rhs"}, PortRef{"zero", "out"}, {}},
                             // False guard on write_en: no write at all.
                             {{"m", "write_addr"}, Literal{3}, {}},
                             {{"m", "write_data"}, Literal{9}, {}},
                             {{"m", "write_en"}, Literal{1},
                              PortRef{"lt", "out"}},
                         },
                         1});
  comp.control = ControlNode{
      Seq{{enable("guarded"), enable("guarded_off"), enable("en_off")}}};

  std::vector<MemoryImage> init = {{"m", {5, 5, 5, 5}}};
  SimResult result = simulate(comp, init);
  CHECK(result.cycles == 3);
  // [0] untouched, [1] = 7, [2] overwritten with the guarded-off 0,
  // [3] kept its preload because the enable itself was off.
  CHECK(imageOf(result, "m").data == std::vector<int32_t>{5, 7, 0, 5});
}

TEST_CASE("while loop counts and terminates on the committed condition") {
  SimResult result = simulate(make_counter(5), {});
  // cond 6x + incr 5x + store: 2n+2.
  CHECK(result.cycles == 12);
  CHECK(imageOf(result, "m").data == std::vector<int32_t>{5});
}

TEST_CASE("while with an immediately false condition runs cond once") {
  SimResult result = simulate(make_counter(0), {});
  CHECK(result.cycles == 2);
  CHECK(imageOf(result, "m").data == std::vector<int32_t>{0});
}

TEST_CASE("while whose condition never clears times out") {
  HwComponent comp;
  comp.name = "spin";
  comp.cells = {{"cond", CellKind::Register, 1}};
  comp.groups = {{"cg",
                  {
                      {{"cond", "in"}, Literal{1}, {}},
                      {{"cond", "write_en"}, Literal{1}, {}},
                  },
                  1}};
  While loop;
  loop.condition = {"cond", "out"};
  loop.cond_group = "cg";
  comp.control = ControlNode{std::move(loop)};

  SimOptions opts;
  opts.max_cycles = 100;
  CHECK_THROWS_AS(simulate(comp, {}, opts), SimError);
  try {
    simulate(comp, {}, opts);
  } catch (const SimError &err) {
    CHECK(err.kind == SimError::Kind::Timeout);
    CHECK(err.cycle == 100);
  }
}

TEST_CASE("repeat runs the body a fixed number of times") {
  HwComponent comp = scratch();
  comp.cells.push_back({"one", CellKind::Constant, 32, 0, 1});
  comp.cells.push_back({"add", CellKind::Adder, 32});
  comp.groups.push_back({"incr",
                         {
                             {{"add", "lhs"}, PortRef{"r", "out"}, {}},
                             {{"add", "rhs"}, PortRef{"one", "out"}, {}},
                             {{"r", "in"}, PortRef{"add", "out"}, {}},
                             {{"r", "write_en"}, Literal{1}, {}},
                         },
                         1});

  SUBCASE("count 3") {
    comp.control = ControlNode{
        Seq{{ControlNode{Repeat{3, {enable("incr")}}}, enable("st0")}}};
    SimResult result = simulate(comp, {});
    CHECK(result.cycles == 4);
    CHECK(imageOf(result, "m").data[0] == 3);
  }
  SUBCASE("count 0 costs nothing") {
    comp.control = ControlNode{
        Seq{{ControlNode{Repeat{0, {enable("incr")}}}, enable("st0")}}};
    SimResult result = simulate(comp, {});
    CHECK(result.cycles == 1);
    CHECK(imageOf(result, "m").data[0] == 0);
  }
  SUBCASE("nested") {
    comp.control = ControlNode{Seq{{
        ControlNode{Repeat{2, {ControlNode{Repeat{2, {enable("incr")}}}}}},
        enable("st0"),
    }}};
    SimResult result = simulate(comp, {});
    CHECK(result.cycles == 5);
    CHECK(imageOf(result, "m").data[0] == 4);
  }
  SUBCASE("repeat of an empty seq finishes at cycle zero") {
    comp.control =
        ControlNode{Repeat{1000000, {ControlNode{Seq{}}}}};
    SimResult result = simulate(comp, {});
    CHECK(result.cycles == 0);
  }
}

TEST_CASE("par arms run in lockstep and join on the slowest") {
  HwComponent comp;
  comp.name = "par_test";
  comp.cells = {
      {"a", CellKind::Register, 32},
      {"b", CellKind::Register, 32},
      {"one", CellKind::Constant, 32, 0, 1},
      {"adda", CellKind::Adder, 32},
      {"addb", CellKind::Adder, 32},
      {"ma", CellKind::Memory, 32, 1},
      {"mb", CellKind::Memory, 32, 1},
  };
  // A multi-cycle group recomputes every cycle it is active: ga holds its
  // increment network for 3 cycles, so a advances 3 times.
  comp.groups = {
      {"ga",
       {
           {{"adda", "lhs"}, PortRef{"a", "out"}, {}},
           {{"adda", "rhs"}, PortRef{"one", "out"}, {}},
           {{"a", "in"}, PortRef{"adda", "out"}, {}},
           {{"a", "write_en"}, Literal{1}, {}},
       },
       3},
      {"gb",
       {
           {{"addb", "lhs"}, PortRef{"b", "out"}, {}},
           {{"addb", "rhs"}, PortRef{"one", "out"}, {}},
           {{"b", "in"}, PortRef{"addb", "out"}, {}},
           {{"b", "write_en"}, Literal{1}, {}},
       },
       1},
      {"sta",
       {
           {{"ma", "write_addr"}, Literal{0}, {}},
           {{"ma", "write_data"}, PortRef{"a", "out"}, {}},
           {{"ma", "write_en"}, Literal{1}, {}},
       },
       1},
      {"stb",
       {
           {{"mb", "write_addr"}, Literal{0}, {}},
           {{"mb", "write_data"}, PortRef{"b", "out"}, {}},
           {{"mb", "write_en"}, Literal{1}, {}},
       },
       1},
  };
  comp.control = ControlNode{Seq{{
      ControlNode{Par{{enable("ga"), enable("gb")}}},
      ControlNode{Par{{enable("sta"), enable("stb")}}},
  }}};

  SimResult result = simulate(comp, {});
  CHECK(result.cycles == 4); // max(3, 1) + 1
  CHECK(imageOf(result, "ma").data[0] == 3);
  CHECK(imageOf(result, "mb").data[0] == 1); // idle after its single cycle
}

TEST_CASE("combinational feedback is reported, not looped on") {
  HwComponent comp = scratch();
  comp.cells.push_back({"add", CellKind::Adder, 32});
  comp.groups.push_back({"loop",
                         {
                             {{"add", "lhs"}, PortRef{"add", "out"}, {}},
                             {{"add", "rhs"}, Literal{1}, {}},
                             {{"r", "in"}, PortRef{"add", "out"}, {}},
                             {{"r", "write_en"}, Literal{1}, {}},
                         },
                         1});
  comp.control = enable("loop");
  try {
    simulate(comp, {});
    FAIL("expected SimError");
  } catch (const SimError &err) {
    CHECK(err.kind == SimError::Kind::CombLoop);
    CHECK(std::string(err.what()).find("add") != std::string::npos);
  }
}

TEST_CASE("memory accesses are bounds-checked") {
  SUBCASE("write") {
    HwComponent comp = scratch();
    comp.groups[0].assignments[0].src = Literal{4}; // m has 4 words: 0..3
    comp.control = enable("st0");
    try {
      simulate(comp, {});
      FAIL("expected SimError");
    } catch (const SimError &err) {
      CHECK(err.kind == SimError::Kind::OutOfBounds);
      CHECK(err.cycle == 0);
      CHECK(std::string(err.what()).find("address 4") != std::string::npos);
    }
  }
  SUBCASE("read") {
    HwComponent comp = scratch();
    comp.groups.push_back({"ld",
                           {
                               {{"m", "read_addr"}, Literal{9}, {}},
                               {{"r", "in"}, PortRef{"m", "read_data"}, {}},
                               {{"r", "write_en"}, Literal{1}, {}},
                           },
                           1});
    comp.control = enable("ld");
    try {
      simulate(comp, {});
      FAIL("expected SimError");
    } catch (const SimError &err) {
      CHECK(err.kind == SimError::Kind::OutOfBounds);
    }
  }
}

TEST_CASE("timeout counts whole cycles") {
  SimOptions opts;
  opts.max_cycles = 3;
  try {
    simulate(make_counter(5), {}, opts);
    FAIL("expected SimError");
  } catch (const SimError &err) {
    CHECK(err.kind == SimError::Kind::Timeout);
    CHECK(err.cycle == 3);
  }

  // Zero budget: an already-done tree is fine, any real work is not.
  HwComponent idle = scratch();
  idle.control = ControlNode{Seq{}};
  opts.max_cycles = 0;
  CHECK(simulate(idle, {}, opts).cycles == 0);

  HwComponent busy = scratch();
  busy.control = enable("st0");
  CHECK_THROWS_AS(simulate(busy, {}, opts), SimError);
}

TEST_CASE("invalid components and images are rejected up front") {
  HwComponent comp = scratch();

  SUBCASE("validation failure") {
    comp.control = enable("ghost");
    CHECK_THROWS_AS(simulate(comp, {}), std::invalid_argument);
  }
  SUBCASE("image length mismatch") {
    comp.control = enable("st0");
    std::vector<MemoryImage> init = {{"m", {1, 2, 3}}};
    CHECK_THROWS_AS(simulate(comp, init), std::invalid_argument);
  }
  SUBCASE("image with no matching memory") {
    comp.control = enable("st0");
    std::vector<MemoryImage> init = {{"ghost", {1, 2, 3, 4}}};
    CHECK_THROWS_AS(simulate(comp, init), std::invalid_argument);
  }
}

TEST_CASE("memories preload by binding name and export in cell order") {
  HwComponent comp;
  comp.name = "io";
  comp.cells = {
      {"mem_a", CellKind::Memory, 32, 2, 0, "argA"},
      {"mem_b", CellKind::Memory, 32, 2},
  };
  comp.control = ControlNode{Seq{}};

  std::vector<MemoryImage> init = {{"argA", {-1, -2147483647 - 1}}};
  SimResult result = simulate(comp, init);
  REQUIRE(result.memories.size() == 2);
  // Bound memories answer to the argument name; unbound ones to the cell.
  CHECK(result.memories[0].name == "argA");
  CHECK(result.memories[1].name == "mem_b");
  // Negative values survive the bit-pattern round-trip; absent images zero.
  CHECK(result.memories[0].data == std::vector<int32_t>{-1, -2147483647 - 1});
  CHECK(result.memories[1].data == std::vector<int32_t>{0, 0});
}

TEST_CASE("trace names the active groups per cycle") {
  SimOptions opts;
  opts.trace = true;
  SimResult result = simulate(make_counter(1), {}, opts);
  CHECK(result.cycles == 4);
  CHECK(result.trace == std::vector<std::string>{
                            "cycle 0: cond_grp",
                            "cycle 1: incr",
                            "cycle 2: cond_grp",
                            "cycle 3: store",
                        });

  CHECK(simulate(make_counter(1), {}).trace.empty());
}

TEST_CASE("rewriting while to repeat preserves cycles and results") {
  for (int64_t limit : {0, 1, 7}) {
    HwComponent loop = make_counter(limit);
    HwComponent fixed = replace_while_with_repeat(
        loop, [&](const While &) { return limit; });

    SimResult dynamicRun = simulate(loop, {});
    SimResult staticRun = simulate(fixed, {});
    CHECK(dynamicRun.cycles == staticRun.cycles);
    CHECK(dynamicRun.memories == staticRun.memories);
    REQUIRE(static_latency(fixed).has_value());
    CHECK(*static_latency(fixed) == dynamicRun.cycles);
  }
}

TEST_CASE("static latency matches simulated cycles on random components") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    CAPTURE(seed);
    HwComponent comp = gen_static_component(seed);
    REQUIRE(validate(comp).empty());
    auto expected = static_latency(comp);
    REQUIRE(expected.has_value());
    SimResult result = simulate(comp, {});
    CHECK(result.cycles == *expected);
  }
}
