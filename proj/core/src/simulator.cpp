//===- simulator.cpp - Cycle-accurate component execution --------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/simulator.hpp"

#include "loft/ints.hpp"

#include <memory>
#include <unordered_map>

using namespace loft;

namespace {

//===----------------------------------------------------------------------===//
// Compiled form: string port refs resolved to dense integer ids
//===----------------------------------------------------------------------===//

// pid = cell index * kSlots + port slot. Slots per kind:
//   register:  in 0, write_en 1, out 2
//   memory:    read_addr 0, write_addr 1, write_data 2, write_en 3, read_data 4
//   binary op: lhs 0, rhs 1, out 2
//   constant:  out 0
constexpr int kSlots = 8;

int portSlot(CellKind kind, const std::string &port) {
  switch (kind) {
  case CellKind::Register:
    return port == "in" ? 0 : port == "write_en" ? 1 : 2;
  case CellKind::Memory:
    return port == "read_addr"    ? 0
           : port == "write_addr" ? 1
           : port == "write_data" ? 2
           : port == "write_en"   ? 3
                                  : 4;
  case CellKind::Constant:
    return 0;
  default:
    return port == "lhs" ? 0 : port == "rhs" ? 1 : 2;
  }
}

struct CompiledAssign {
  int dest;
  int src_pid = -1;       // -1: literal
  uint64_t literal = 0;
  int guard_pid = -1;     // -1: unguarded
};

struct CompiledGroup {
  const Group *group;
  std::vector<CompiledAssign> assignments;
};

class Engine;

//===----------------------------------------------------------------------===//
// Control-tree executors
//===----------------------------------------------------------------------===//

class NodeExec {
public:
  virtual ~NodeExec() = default;
  virtual void start() = 0;
  virtual bool done() const = 0;
  virtual void collect(std::vector<int> &groups) const = 0;
  /// Called once per cycle after commit; may observe post-commit registers.
  virtual void advance(const Engine &engine) = 0;
};

using ExecPtr = std::unique_ptr<NodeExec>;

class EnableExec : public NodeExec {
public:
  EnableExec(int group, int64_t latency) : group_(group), latency_(latency) {}

  void start() override { remaining_ = latency_; }
  bool done() const override { return remaining_ == 0; }
  void collect(std::vector<int> &groups) const override {
    if (remaining_ > 0)
      groups.push_back(group_);
  }
  void advance(const Engine &) override {
    if (remaining_ > 0)
      --remaining_;
  }

private:
  int group_;
  int64_t latency_;
  int64_t remaining_ = 0;
};

/// Shared by Seq and the implicit sequences in While/Repeat bodies.
class SeqExec : public NodeExec {
public:
  explicit SeqExec(std::vector<ExecPtr> children)
      : children_(std::move(children)) {}

  void start() override {
    index_ = 0;
    // Zero-cycle children (empty sequences, repeat 0) pass through for free.
    while (index_ < children_.size()) {
      children_[index_]->start();
      if (!children_[index_]->done())
        break;
      ++index_;
    }
  }
  bool done() const override { return index_ >= children_.size(); }
  void collect(std::vector<int> &groups) const override {
    if (!done())
      children_[index_]->collect(groups);
  }
  void advance(const Engine &engine) override {
    if (done())
      return;
    children_[index_]->advance(engine);
    while (index_ < children_.size() && children_[index_]->done()) {
      ++index_;
      if (index_ < children_.size()) {
        children_[index_]->start();
      }
    }
  }

private:
  std::vector<ExecPtr> children_;
  size_t index_ = 0;
};

class ParExec : public NodeExec {
public:
  explicit ParExec(std::vector<ExecPtr> children)
      : children_(std::move(children)) {}

  void start() override {
    for (ExecPtr &child : children_)
      child->start();
  }
  bool done() const override {
    for (const ExecPtr &child : children_)
      if (!child->done())
        return false;
    return true;
  }
  void collect(std::vector<int> &groups) const override {
    for (const ExecPtr &child : children_)
      if (!child->done())
        child->collect(groups);
  }
  void advance(const Engine &engine) override {
    for (ExecPtr &child : children_)
      if (!child->done())
        child->advance(engine);
  }

private:
  std::vector<ExecPtr> children_;
};

class WhileExec : public NodeExec {
public:
  WhileExec(int cond_group, int cond_cell, ExecPtr body)
      : cond_group_(cond_group), cond_cell_(cond_cell),
        body_(std::move(body)) {}

  void start() override { state_ = State::Cond; }
  bool done() const override { return state_ == State::Done; }
  void collect(std::vector<int> &groups) const override {
    if (state_ == State::Cond)
      groups.push_back(cond_group_);
    else if (state_ == State::Body)
      body_->collect(groups);
  }
  void advance(const Engine &engine) override;

private:
  enum class State { Cond, Body, Done };

  int cond_group_;
  int cond_cell_;
  ExecPtr body_;
  State state_ = State::Done;
};

class RepeatExec : public NodeExec {
public:
  RepeatExec(int64_t count, ExecPtr body)
      : count_(count), body_(std::move(body)) {}

  void start() override {
    remaining_ = count_;
    if (remaining_ > 0) {
      body_->start();
      skipEmptyIterations();
    }
  }
  bool done() const override { return remaining_ == 0; }
  void collect(std::vector<int> &groups) const override {
    if (remaining_ > 0)
      body_->collect(groups);
  }
  void advance(const Engine &engine) override {
    if (remaining_ == 0)
      return;
    body_->advance(engine);
    skipEmptyIterations();
  }

private:
  void skipEmptyIterations() {
    while (remaining_ > 0 && body_->done()) {
      --remaining_;
      if (remaining_ > 0)
        body_->start();
    }
  }

  int64_t count_;
  int64_t remaining_ = 0;
  ExecPtr body_;
};

//===----------------------------------------------------------------------===//
// The engine: settle/commit machinery
//===----------------------------------------------------------------------===//

class Engine {
public:
  Engine(const HwComponent &component, const std::vector<MemoryImage> &initial,
         const SimOptions &options)
      : comp_(component), opts_(options) {
    compile();
    loadMemories(initial);
  }

  SimResult run() {
    SimResult result;
    ExecPtr root = buildExec(comp_.control);
    root->start();
    while (!root->done()) {
      if (result.cycles >= opts_.max_cycles)
        throw SimError(SimError::Kind::Timeout,
                       "no completion after " +
                           std::to_string(result.cycles) + " cycles",
                       result.cycles);
      active_groups_.clear();
      root->collect(active_groups_);
      beginCycle();
      settleAndCommit();
      if (opts_.trace)
        result.trace.push_back(traceLine(result.cycles));
      root->advance(*this);
      ++result.cycles;
    }
    result.memories = exportMemories();
    return result;
  }

  uint64_t registerValue(int cell) const { return regs_[cell]; }

private:
  //===--------------------------------------------------------------------===//
  // Compilation
  //===--------------------------------------------------------------------===//

  int pidOf(const PortRef &ref) const {
    int cell = cell_index_.at(ref.cell);
    return cell * kSlots + portSlot(comp_.cells[cell].kind, ref.port);
  }

  void compile() {
    for (size_t i = 0; i < comp_.cells.size(); ++i)
      cell_index_.emplace(comp_.cells[i].name, static_cast<int>(i));
    for (size_t i = 0; i < comp_.groups.size(); ++i)
      group_index_.emplace(comp_.groups[i].name, static_cast<int>(i));

    for (const Group &group : comp_.groups) {
      CompiledGroup compiled{&group, {}};
      for (const Assignment &assign : group.assignments) {
        CompiledAssign ca;
        ca.dest = pidOf(assign.dest);
        if (const auto *src = std::get_if<PortRef>(&assign.src))
          ca.src_pid = pidOf(*src);
        else
          ca.literal = std::get<Literal>(assign.src).value;
        if (assign.guard)
          ca.guard_pid = pidOf(*assign.guard);
        compiled.assignments.push_back(ca);
      }
      groups_.push_back(std::move(compiled));
    }

    size_t pids = comp_.cells.size() * kSlots;
    value_.assign(pids, 0);
    value_epoch_.assign(pids, 0);
    in_progress_.assign(pids, 0);
    driver_.assign(pids, -1);
    driver_epoch_.assign(pids, 0);

    regs_.assign(comp_.cells.size(), 0);
    mask_.resize(comp_.cells.size());
    for (size_t i = 0; i < comp_.cells.size(); ++i)
      mask_[i] = mask_to_width(~uint64_t{0}, comp_.cells[i].width);
  }

  void loadMemories(const std::vector<MemoryImage> &initial) {
    mems_.resize(comp_.cells.size());
    std::unordered_map<std::string, int> by_name;
    for (size_t i = 0; i < comp_.cells.size(); ++i) {
      const Cell &cell = comp_.cells[i];
      if (cell.kind != CellKind::Memory)
        continue;
      mems_[i].assign(static_cast<size_t>(cell.length), 0);
      by_name.emplace(cell.binding.empty() ? cell.name : cell.binding,
                      static_cast<int>(i));
    }
    for (const MemoryImage &image : initial) {
      auto it = by_name.find(image.name);
      if (it == by_name.end())
        throw std::invalid_argument("simulate: image '" + image.name +
                                    "' matches no memory cell");
      const Cell &cell = comp_.cells[it->second];
      if (static_cast<int64_t>(image.data.size()) != cell.length)
        throw std::invalid_argument(
            "simulate: image '" + image.name + "' has " +
            std::to_string(image.data.size()) + " words, memory '" +
            cell.name + "' has " + std::to_string(cell.length));
      std::vector<uint64_t> &words = mems_[it->second];
      for (size_t i = 0; i < image.data.size(); ++i)
        words[i] = static_cast<uint32_t>(image.data[i]) & mask_[it->second];
    }
  }

  ExecPtr buildExec(const ControlNode &node) {
    if (const auto *enable = node.as<Enable>()) {
      int group = group_index_.at(enable->group);
      return std::make_unique<EnableExec>(group,
                                          comp_.groups[group].latency);
    }
    if (const auto *seq = node.as<Seq>())
      return std::make_unique<SeqExec>(buildAll(seq->children));
    if (const auto *par = node.as<Par>())
      return std::make_unique<ParExec>(buildAll(par->children));
    if (const auto *loop = node.as<While>()) {
      return std::make_unique<WhileExec>(
          group_index_.at(loop->cond_group),
          cell_index_.at(loop->condition.cell),
          std::make_unique<SeqExec>(buildAll(loop->body)));
    }
    const auto *repeat = node.as<Repeat>();
    return std::make_unique<RepeatExec>(
        repeat->count, std::make_unique<SeqExec>(buildAll(repeat->body)));
  }

  std::vector<ExecPtr> buildAll(const std::vector<ControlNode> &nodes) {
    std::vector<ExecPtr> out;
    out.reserve(nodes.size());
    for (const ControlNode &node : nodes)
      out.push_back(buildExec(node));
    return out;
  }

  //===--------------------------------------------------------------------===//
  // One cycle
  //===--------------------------------------------------------------------===//

  void beginCycle() {
    ++epoch_;
    actives_.clear();
    sync_cells_.clear();
    for (int group : active_groups_) {
      for (const CompiledAssign &assign : groups_[group].assignments) {
        driver_[assign.dest] = static_cast<int>(actives_.size());
        driver_epoch_[assign.dest] = epoch_;
        actives_.push_back(&assign);
        int cell = assign.dest / kSlots;
        int slot = assign.dest % kSlots;
        CellKind kind = comp_.cells[cell].kind;
        bool is_write_en = (kind == CellKind::Register && slot == 1) ||
                           (kind == CellKind::Memory && slot == 3);
        if (is_write_en)
          sync_cells_.push_back(cell);
      }
    }
  }

  uint64_t eval(int pid) {
    if (value_epoch_[pid] == epoch_)
      return value_[pid];
    if (in_progress_[pid] == epoch_)
      throw SimError(SimError::Kind::CombLoop,
                     "combinational feedback through " + portName(pid),
                     cycle_);
    in_progress_[pid] = epoch_;
    uint64_t v = compute(pid);
    value_[pid] = v;
    value_epoch_[pid] = epoch_;
    return v;
  }

  uint64_t compute(int pid) {
    int cell_idx = pid / kSlots;
    int slot = pid % kSlots;
    const Cell &cell = comp_.cells[cell_idx];
    auto input = [&](int s) { return eval(cell_idx * kSlots + s); };

    switch (cell.kind) {
    case CellKind::Register:
      if (slot == 2)
        return regs_[cell_idx];
      return driven(pid);
    case CellKind::Constant:
      return cell.value;
    case CellKind::Memory:
      if (slot == 4) {
        uint64_t addr = input(0);
        checkBounds(cell, addr);
        return mems_[cell_idx][addr];
      }
      return driven(pid);
    case CellKind::Adder:
      if (slot == 2)
        return (input(0) + input(1)) & mask_[cell_idx];
      return driven(pid);
    case CellKind::Multiplier:
      if (slot == 2)
        return (input(0) * input(1)) & mask_[cell_idx];
      return driven(pid);
    case CellKind::CompareLt:
      if (slot == 2)
        return input(0) < input(1) ? 1 : 0;
      return driven(pid);
    case CellKind::CompareEq:
      if (slot == 2)
        return input(0) == input(1) ? 1 : 0;
      return driven(pid);
    }
    return 0;
  }

  /// Value of an input port: its active assignment, 0 when undriven or
  /// guarded off.
  uint64_t driven(int pid) {
    if (driver_epoch_[pid] != epoch_)
      return 0;
    const CompiledAssign &assign = *actives_[driver_[pid]];
    if (assign.guard_pid >= 0 && eval(assign.guard_pid) == 0)
      return 0;
    return assign.src_pid >= 0 ? eval(assign.src_pid) : assign.literal;
  }

  void checkBounds(const Cell &cell, uint64_t addr) {
    if (addr < static_cast<uint64_t>(cell.length))
      return;
    throw SimError(SimError::Kind::OutOfBounds,
                   "memory '" + cell.name + "' address " +
                       std::to_string(addr) + " outside [0, " +
                       std::to_string(cell.length) + ")",
                   cycle_);
  }

  void settleAndCommit() {
    pending_regs_.clear();
    pending_writes_.clear();
    for (int cell_idx : sync_cells_) {
      const Cell &cell = comp_.cells[cell_idx];
      if (cell.kind == CellKind::Register) {
        if (eval(cell_idx * kSlots + 1) != 0)
          pending_regs_.emplace_back(cell_idx,
                                     eval(cell_idx * kSlots + 0) &
                                         mask_[cell_idx]);
      } else { // memory
        if (eval(cell_idx * kSlots + 3) != 0) {
          uint64_t addr = eval(cell_idx * kSlots + 1);
          checkBounds(cell, addr);
          uint64_t data = eval(cell_idx * kSlots + 2) & mask_[cell_idx];
          pending_writes_.emplace_back(cell_idx, addr, data);
        }
      }
    }
    for (auto [cell_idx, value] : pending_regs_)
      regs_[cell_idx] = value;
    for (auto [cell_idx, addr, data] : pending_writes_)
      mems_[cell_idx][addr] = data;
    ++cycle_;
  }

  std::string portName(int pid) const {
    const Cell &cell = comp_.cells[pid / kSlots];
    for (const std::string &port : cell_ports(cell.kind))
      if (portSlot(cell.kind, port) == pid % kSlots &&
          cell_port(cell, port))
        return cell.name + "." + port;
    return cell.name + ".?";
  }

  std::string traceLine(int64_t cycle) const {
    std::string line = "cycle " + std::to_string(cycle) + ":";
    for (int group : active_groups_)
      line += " " + groups_[group].group->name;
    return line;
  }

  std::vector<MemoryImage> exportMemories() const {
    std::vector<MemoryImage> out;
    for (size_t i = 0; i < comp_.cells.size(); ++i) {
      const Cell &cell = comp_.cells[i];
      if (cell.kind != CellKind::Memory)
        continue;
      MemoryImage image;
      image.name = cell.binding.empty() ? cell.name : cell.binding;
      image.data.reserve(mems_[i].size());
      for (uint64_t word : mems_[i]) {
        // Sign-extend from the cell width into the i32 image.
        uint64_t sign = uint64_t{1} << (cell.width - 1);
        uint64_t extended = (word ^ sign) - sign;
        image.data.push_back(static_cast<int32_t>(extended));
      }
      out.push_back(std::move(image));
    }
    return out;
  }

  const HwComponent &comp_;
  const SimOptions &opts_;

  std::unordered_map<std::string, int> cell_index_;
  std::unordered_map<std::string, int> group_index_;
  std::vector<CompiledGroup> groups_;

  // Per-port settle state, epoch-stamped so cycles need no clearing.
  std::vector<uint64_t> value_;
  std::vector<uint32_t> value_epoch_;
  std::vector<uint32_t> in_progress_;
  std::vector<int> driver_;
  std::vector<uint32_t> driver_epoch_;
  uint32_t epoch_ = 0;

  std::vector<uint64_t> regs_;
  std::vector<std::vector<uint64_t>> mems_;
  std::vector<uint64_t> mask_;

  std::vector<int> active_groups_;
  std::vector<const CompiledAssign *> actives_;
  std::vector<int> sync_cells_;
  std::vector<std::pair<int, uint64_t>> pending_regs_;
  std::vector<std::tuple<int, uint64_t, uint64_t>> pending_writes_;
  int64_t cycle_ = 0;
};

void WhileExec::advance(const Engine &engine) {
  switch (state_) {
  case State::Cond:
    if (engine.registerValue(cond_cell_) != 0) {
      body_->start();
      state_ = body_->done() ? State::Cond : State::Body;
    } else {
      state_ = State::Done;
    }
    break;
  case State::Body:
    body_->advance(engine);
    if (body_->done())
      state_ = State::Cond;
    break;
  case State::Done:
    break;
  }
}

} // namespace

SimResult loft::simulate(const HwComponent &component,
                         const std::vector<MemoryImage> &initial,
                         const SimOptions &options) {
  Diagnostics diags = validate(component);
  if (!diags.empty())
    throw std::invalid_argument("simulate: component fails validation: " +
                                to_string(diags[0]));
  return Engine(component, initial, options).run();
}
