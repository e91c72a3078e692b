//===- lowering.cpp - Affine-to-hardware lowering -----------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/lowering.hpp"

#include <cstdint>
#include <limits>
#include <unordered_map>
#include <unordered_set>

using namespace loft;

namespace {

uint32_t wrapMul(int64_t a, int64_t b) {
  return static_cast<uint32_t>(static_cast<uint64_t>(a) *
                               static_cast<uint64_t>(b));
}

class Lowerer {
public:
  explicit Lowerer(const AffineFunc &func) : func_(func) {}

  HwComponent run() {
    comp_.name = func_.name;
    for (const FuncArg &arg : func_.args) {
      std::string cell = "mem_" + arg.id;
      comp_.cells.push_back(
          {cell, CellKind::Memory, 32, arg.type.length, 0, arg.id});
      mem_cell_.emplace(arg.id, std::move(cell));
    }
    collectUses(func_.body);
    Seq top;
    top.children = lowerRegion(func_.body, "");
    comp_.control = ControlNode{std::move(top)};
    return std::move(comp_);
  }

private:
  //===--------------------------------------------------------------------===//
  // Shared cells
  //===--------------------------------------------------------------------===//

  /// Datapath constants are pooled cells keyed by bit pattern; two source
  /// constants that wrap to the same 32 bits share one cell.
  PortRef constOut(uint32_t pattern) {
    auto [it, inserted] = const_pool_.try_emplace(pattern, "");
    if (inserted) {
      it->second = "const_" + std::to_string(pattern);
      comp_.cells.push_back(
          {it->second, CellKind::Constant, 32, 0, pattern});
    }
    return {it->second, "out"};
  }

  void assign(Group &group, PortRef dest, PortRef src) {
    group.assignments.push_back({std::move(dest), std::move(src), {}});
  }

  void strobe(Group &group, PortRef dest) {
    group.assignments.push_back({std::move(dest), Literal{1}, {}});
  }

  //===--------------------------------------------------------------------===//
  // Loops
  //===--------------------------------------------------------------------===//

  struct LoopCtx {
    int id;
    const ForOp *loop;
    std::string iv;
    size_t init_group;
    size_t incr_group;
    // coeff bit pattern -> strength-reduced register holding coeff * iv
    std::unordered_map<uint32_t, std::string> scaled;
  };

  /// coeff * iv without a multiplier: a register initialized to
  /// coeff * lower and stepped by coeff * step next to the loop counter.
  PortRef scaledOut(size_t loop_idx, int64_t coeff) {
    LoopCtx &ctx = loops_[loop_idx];
    uint32_t pattern = static_cast<uint32_t>(coeff);
    auto [it, inserted] = ctx.scaled.try_emplace(pattern, "");
    if (!inserted)
      return {it->second, "out"};

    std::string name =
        "sc" + std::to_string(ctx.id) + "_" + std::to_string(pattern);
    it->second = name;
    comp_.cells.push_back({name, CellKind::Register, 32});

    Group &init = comp_.groups[ctx.init_group];
    assign(init, {name, "in"}, constOut(wrapMul(coeff, ctx.loop->lower)));
    strobe(init, {name, "write_en"});

    std::string adder = "add_" + name;
    comp_.cells.push_back({adder, CellKind::Adder, 32});
    Group &incr = comp_.groups[ctx.incr_group];
    assign(incr, {adder, "lhs"}, {name, "out"});
    assign(incr, {adder, "rhs"}, constOut(wrapMul(coeff, ctx.loop->step)));
    assign(incr, {name, "in"}, {adder, "out"});
    strobe(incr, {name, "write_en"});
    return {name, "out"};
  }

  std::vector<ControlNode> lowerLoop(const ForOp &loop) {
    if (loop.lower < 0 || loop.upper > std::numeric_limits<int32_t>::max())
      throw LowerError("loop bounds [" + std::to_string(loop.lower) + ", " +
                       std::to_string(loop.upper) +
                       ") outside the unsigned 31-bit counter range");
    if (loop.iter_args.size() > 1)
      throw LowerError("at most one loop-carried scalar per loop");

    int id = loop_count_++;
    std::string iv = "iv" + std::to_string(id);
    std::string flag = "flag" + std::to_string(id);
    std::string lt = "lt" + std::to_string(id);
    std::string adder = "add_iv" + std::to_string(id);
    comp_.cells.push_back({iv, CellKind::Register, 32});
    comp_.cells.push_back({flag, CellKind::Register, 1});
    comp_.cells.push_back({lt, CellKind::CompareLt, 32});
    comp_.cells.push_back({adder, CellKind::Adder, 32});

    Group init{"init" + std::to_string(id), {}, 1};
    assign(init, {iv, "in"}, constOut(static_cast<uint32_t>(loop.lower)));
    strobe(init, {iv, "write_en"});

    Group cond{"cond" + std::to_string(id), {}, 1};
    assign(cond, {lt, "lhs"}, {iv, "out"});
    assign(cond, {lt, "rhs"}, constOut(static_cast<uint32_t>(loop.upper)));
    assign(cond, {flag, "in"}, {lt, "out"});
    strobe(cond, {flag, "write_en"});

    Group incr{"incr" + std::to_string(id), {}, 1};
    assign(incr, {adder, "lhs"}, {iv, "out"});
    assign(incr, {adder, "rhs"}, constOut(static_cast<uint32_t>(loop.step)));
    assign(incr, {iv, "in"}, {adder, "out"});
    strobe(incr, {iv, "write_en"});

    std::vector<ControlNode> nodes;

    // The loop-carried scalar lives in its own register, seeded one cycle
    // before the counter starts. Its init value comes from the enclosing
    // scope, so resolve it before pushing this loop's context.
    std::string acc;
    if (!loop.iter_args.empty()) {
      acc = "acc" + std::to_string(acc_count_++);
      comp_.cells.push_back({acc, CellKind::Register, 32});
      Group seed{"accinit" + std::to_string(seed_count_++), {}, 1};
      assign(seed, {acc, "in"}, resolve(loop.iter_args[0].init));
      strobe(seed, {acc, "write_en"});
      nodes.push_back(ControlNode{Enable{seed.name}});
      comp_.groups.push_back(std::move(seed));
    }

    size_t init_idx = comp_.groups.size();
    comp_.groups.push_back(std::move(init));
    comp_.groups.push_back(std::move(cond));
    size_t incr_idx = comp_.groups.size();
    comp_.groups.push_back(std::move(incr));
    nodes.push_back(ControlNode{Enable{"init" + std::to_string(id)}});

    loops_.push_back({id, &loop, iv, init_idx, incr_idx, {}});
    iv_index_.emplace(loop.induction_var, loops_.size() - 1);
    if (!acc.empty())
      stable_[loop.iter_args[0].name] = {acc, "out"};

    While node;
    node.condition = {flag, "out"};
    node.cond_group = "cond" + std::to_string(id);
    node.body = lowerRegion(loop.body, acc);
    node.body.push_back(ControlNode{Enable{"incr" + std::to_string(id)}});

    iv_index_.erase(loop.induction_var);
    loops_.pop_back();

    if (!loop.results.empty())
      stable_[loop.results[0]] = {acc, "out"};

    nodes.push_back(ControlNode{std::move(node)});
    return nodes;
  }

  //===--------------------------------------------------------------------===//
  // Straight-line segments
  //===--------------------------------------------------------------------===//

  /// Scalar source for a value available across stage boundaries: constants,
  /// loop-carried registers, loop results, and latched stage outputs.
  PortRef resolve(const ValueId &id) const { return stable_.at(id); }

  PortRef termOut(const AffineTerm &term) {
    size_t loop_idx = iv_index_.at(term.var);
    if (term.coeff == 1)
      return {loops_[loop_idx].iv, "out"};
    return scaledOut(loop_idx, term.coeff);
  }

  /// Sums the expression's operands with a chain of adders inside `group`,
  /// returning the port carrying the final address. Zero-coefficient terms
  /// and zero constants contribute nothing.
  PortRef addrTree(const AffineExpr &expr, Group &group) {
    std::vector<PortRef> operands;
    for (const AffineTerm &term : expr.terms)
      if (term.coeff != 0)
        operands.push_back(termOut(term));
    if (expr.constant != 0 || operands.empty())
      operands.push_back(constOut(static_cast<uint32_t>(expr.constant)));

    PortRef sum = operands[0];
    for (size_t i = 1; i < operands.size(); ++i) {
      std::string adder = "add_a" + std::to_string(addr_adder_count_++);
      comp_.cells.push_back({adder, CellKind::Adder, 32});
      assign(group, {adder, "lhs"}, sum);
      assign(group, {adder, "rhs"}, operands[i]);
      sum = {adder, "out"};
    }
    return sum;
  }

  std::string buildStore(const StoreOp &store) {
    Group group{"store" + std::to_string(store_count_++), {}, 1};
    const std::string &mem = mem_cell_.at(store.memref);
    assign(group, {mem, "write_addr"}, addrTree(store.index, group));
    assign(group, {mem, "write_data"}, resolve(store.value));
    strobe(group, {mem, "write_en"});
    std::string name = group.name;
    comp_.groups.push_back(std::move(group));
    return name;
  }

  /// End-of-region yield: either folded into the last compute stage (set up
  /// by flushSegment) or emitted as its own one-cycle register write.
  void writeYield(const std::string &acc, const ValueId &value,
                  std::vector<ControlNode> &nodes) {
    PortRef src = resolve(value);
    if (src == PortRef{acc, "out"})
      return; // yielding the carried value back is a no-op
    Group group{"ywrite" + std::to_string(ywrite_count_++), {}, 1};
    assign(group, {acc, "in"}, src);
    strobe(group, {acc, "write_en"});
    nodes.push_back(ControlNode{Enable{group.name}});
    comp_.groups.push_back(std::move(group));
  }

  const ValueId *resultOf(const AffineOp &op) const {
    if (const auto *load = op.as<LoadOp>())
      return &load->result;
    if (const auto *mul = op.as<MulOp>())
      return &mul->result;
    if (const auto *add = op.as<AddOp>())
      return &add->result;
    return nullptr;
  }

  /// Lowers the pending straight-line ops into single-cycle stage groups.
  /// `yield`, when non-null, is the region's terminator feeding `acc`; if its
  /// source lands in the final stage the register write fuses in for free,
  /// otherwise the caller gets a standalone write via writeYield.
  ///
  /// Returns true when the yield was fused.
  bool flushSegment(std::vector<const AffineOp *> &segment,
                    std::vector<ControlNode> &nodes, const std::string &acc,
                    const YieldOp *yield) {
    if (segment.empty())
      return false;

    // Stage partition: cut whenever a memory's single read port is claimed
    // twice. Arithmetic never cuts.
    std::vector<int> stage_of(segment.size(), 0);
    {
      int stage = 0;
      std::unordered_set<std::string> ports;
      for (size_t i = 0; i < segment.size(); ++i) {
        if (const auto *load = segment[i]->as<LoadOp>()) {
          const std::string &mem = mem_cell_.at(load->memref);
          if (!ports.insert(mem).second) {
            ++stage;
            ports.clear();
            ports.insert(mem);
          }
        }
        stage_of[i] = stage;
      }
    }
    int last_stage = stage_of.back();

    std::unordered_map<const AffineOp *, int> stage_by_op;
    for (size_t i = 0; i < segment.size(); ++i)
      stage_by_op.emplace(segment[i], stage_of[i]);

    // Fuse the yield into the final stage when that stage produces its value.
    const AffineOp *yield_src = nullptr;
    if (yield && !acc.empty() && !yield->values.empty()) {
      for (size_t i = 0; i < segment.size(); ++i) {
        const ValueId *result = resultOf(*segment[i]);
        if (result && *result == yield->values[0] &&
            stage_of[i] == last_stage) {
          yield_src = segment[i];
          break;
        }
      }
    }

    // A result consumed beyond its own stage must be latched.
    auto needsLatch = [&](size_t i) {
      const ValueId *result = resultOf(*segment[i]);
      if (!result)
        return false;
      auto it = uses_.find(*result);
      if (it == uses_.end())
        return false;
      for (const AffineOp *user : it->second) {
        auto local = stage_by_op.find(user);
        if (local != stage_by_op.end()) {
          if (local->second != stage_of[i])
            return true;
        } else if (!(yield_src == segment[i] &&
                     user->is<YieldOp>() && yieldOf(*user) == yield)) {
          return true;
        }
      }
      return false;
    };

    for (int stage = 0; stage <= last_stage; ++stage) {
      Group group{"stage" + std::to_string(stage_count_++), {}, 1};
      std::unordered_map<ValueId, PortRef> wires;
      auto operand = [&](const ValueId &id) {
        auto it = wires.find(id);
        return it != wires.end() ? it->second : resolve(id);
      };

      for (size_t i = 0; i < segment.size(); ++i) {
        if (stage_of[i] != stage)
          continue;
        const AffineOp &op = *segment[i];
        if (const auto *load = op.as<LoadOp>()) {
          const std::string &mem = mem_cell_.at(load->memref);
          assign(group, {mem, "read_addr"}, addrTree(load->index, group));
          wires[load->result] = {mem, "read_data"};
        } else if (const auto *mul = op.as<MulOp>()) {
          std::string cell = "mul" + std::to_string(mul_count_++);
          comp_.cells.push_back({cell, CellKind::Multiplier, 32});
          assign(group, {cell, "lhs"}, operand(mul->lhs));
          assign(group, {cell, "rhs"}, operand(mul->rhs));
          wires[mul->result] = {cell, "out"};
        } else if (const auto *add = op.as<AddOp>()) {
          std::string cell = "add_op" + std::to_string(add_count_++);
          comp_.cells.push_back({cell, CellKind::Adder, 32});
          assign(group, {cell, "lhs"}, operand(add->lhs));
          assign(group, {cell, "rhs"}, operand(add->rhs));
          wires[add->result] = {cell, "out"};
        }
      }

      for (size_t i = 0; i < segment.size(); ++i) {
        if (stage_of[i] != stage || !needsLatch(i))
          continue;
        const ValueId &result = *resultOf(*segment[i]);
        std::string latch = "r" + std::to_string(latch_count_++);
        comp_.cells.push_back({latch, CellKind::Register, 32});
        assign(group, {latch, "in"}, wires.at(result));
        strobe(group, {latch, "write_en"});
        stable_[result] = {latch, "out"};
      }

      if (yield_src && stage == last_stage) {
        assign(group, {acc, "in"}, wires.at(yield->values[0]));
        strobe(group, {acc, "write_en"});
      }

      nodes.push_back(ControlNode{Enable{group.name}});
      comp_.groups.push_back(std::move(group));
    }

    segment.clear();
    return yield_src != nullptr;
  }

  static const YieldOp *yieldOf(const AffineOp &op) {
    return op.as<YieldOp>();
  }

  //===--------------------------------------------------------------------===//
  // Regions
  //===--------------------------------------------------------------------===//

  std::vector<ControlNode> lowerRegion(const std::vector<AffineOp> &ops,
                                       const std::string &acc) {
    std::vector<ControlNode> nodes;
    std::vector<const AffineOp *> segment;
    const YieldOp *yield = nullptr;

    for (const AffineOp &op : ops) {
      if (const auto *constant = op.as<ConstantOp>()) {
        stable_[constant->result] =
            constOut(static_cast<uint32_t>(constant->value));
      } else if (op.is<LoadOp>() || op.is<MulOp>() || op.is<AddOp>()) {
        segment.push_back(&op);
      } else if (const auto *loop = op.as<ForOp>()) {
        flushSegment(segment, nodes, "", nullptr);
        std::vector<ControlNode> sub = lowerLoop(*loop);
        for (ControlNode &node : sub)
          nodes.push_back(std::move(node));
      } else if (const auto *store = op.as<StoreOp>()) {
        flushSegment(segment, nodes, "", nullptr);
        nodes.push_back(ControlNode{Enable{buildStore(*store)}});
      } else if (const auto *term = op.as<YieldOp>()) {
        yield = term;
      }
      // ReturnOp: nothing to schedule.
    }

    bool fused = flushSegment(segment, nodes, acc, yield);
    if (!fused && yield && !acc.empty() && !yield->values.empty())
      writeYield(acc, yield->values[0], nodes);
    return nodes;
  }

  //===--------------------------------------------------------------------===//
  // Scalar use map (for latch decisions)
  //===--------------------------------------------------------------------===//

  void addUse(const ValueId &id, const AffineOp &user) {
    uses_[id].push_back(&user);
  }

  void collectUses(const std::vector<AffineOp> &ops) {
    for (const AffineOp &op : ops) {
      if (const auto *mul = op.as<MulOp>()) {
        addUse(mul->lhs, op);
        addUse(mul->rhs, op);
      } else if (const auto *add = op.as<AddOp>()) {
        addUse(add->lhs, op);
        addUse(add->rhs, op);
      } else if (const auto *store = op.as<StoreOp>()) {
        addUse(store->value, op);
      } else if (const auto *yield = op.as<YieldOp>()) {
        for (const ValueId &value : yield->values)
          addUse(value, op);
      } else if (const auto *loop = op.as<ForOp>()) {
        for (const IterArg &arg : loop->iter_args)
          addUse(arg.init, op);
        collectUses(loop->body);
      }
    }
  }

  const AffineFunc &func_;
  HwComponent comp_;

  std::unordered_map<ValueId, std::string> mem_cell_;
  std::unordered_map<uint32_t, std::string> const_pool_;
  std::unordered_map<ValueId, PortRef> stable_;
  std::unordered_map<ValueId, std::vector<const AffineOp *>> uses_;

  std::vector<LoopCtx> loops_;
  std::unordered_map<ValueId, size_t> iv_index_;

  int loop_count_ = 0;
  int acc_count_ = 0;
  int seed_count_ = 0;
  int stage_count_ = 0;
  int store_count_ = 0;
  int latch_count_ = 0;
  int addr_adder_count_ = 0;
  int mul_count_ = 0;
  int add_count_ = 0;
  int ywrite_count_ = 0;
};

} // namespace

HwComponent loft::lower(const AffineFunc &func) { return Lowerer(func).run(); }
