//===- hw_ir.cpp - Structural hardware IR ------------------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/hw_ir.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

using namespace loft;

//===----------------------------------------------------------------------===//
// Recursive equality (out of line: the node types contain ControlNode)
//===----------------------------------------------------------------------===//

bool Seq::operator==(const Seq &other) const {
  return children == other.children;
}
bool Par::operator==(const Par &other) const {
  return children == other.children;
}
bool While::operator==(const While &other) const {
  return condition == other.condition && cond_group == other.cond_group &&
         body == other.body;
}
bool Repeat::operator==(const Repeat &other) const {
  return count == other.count && body == other.body;
}
bool ControlNode::operator==(const ControlNode &other) const {
  return node == other.node;
}

//===----------------------------------------------------------------------===//
// Cell ports
//===----------------------------------------------------------------------===//

const char *loft::to_string(CellKind kind) {
  switch (kind) {
  case CellKind::Register:
    return "register";
  case CellKind::Memory:
    return "memory";
  case CellKind::Adder:
    return "adder";
  case CellKind::Multiplier:
    return "multiplier";
  case CellKind::CompareLt:
    return "compare_lt";
  case CellKind::CompareEq:
    return "compare_eq";
  case CellKind::Constant:
    return "constant";
  }
  return "?";
}

std::vector<std::string> loft::cell_ports(CellKind kind) {
  switch (kind) {
  case CellKind::Register:
    return {"in", "write_en", "out"};
  case CellKind::Memory:
    return {"read_addr", "write_addr", "write_data", "write_en", "read_data"};
  case CellKind::Adder:
  case CellKind::Multiplier:
  case CellKind::CompareLt:
  case CellKind::CompareEq:
    return {"lhs", "rhs", "out"};
  case CellKind::Constant:
    return {"out"};
  }
  return {};
}

std::optional<PortInfo> loft::cell_port(const Cell &cell,
                                        const std::string &port) {
  auto in = [&](int width) { return PortInfo{width, true}; };
  auto out = [&](int width) { return PortInfo{width, false}; };
  switch (cell.kind) {
  case CellKind::Register:
    if (port == "in")
      return in(cell.width);
    if (port == "write_en")
      return in(1);
    if (port == "out")
      return out(cell.width);
    return std::nullopt;
  case CellKind::Memory:
    if (port == "read_addr" || port == "write_addr")
      return in(32);
    if (port == "write_data")
      return in(cell.width);
    if (port == "write_en")
      return in(1);
    if (port == "read_data")
      return out(cell.width);
    return std::nullopt;
  case CellKind::Adder:
  case CellKind::Multiplier:
    if (port == "lhs" || port == "rhs")
      return in(cell.width);
    if (port == "out")
      return out(cell.width);
    return std::nullopt;
  case CellKind::CompareLt:
  case CellKind::CompareEq:
    if (port == "lhs" || port == "rhs")
      return in(cell.width);
    if (port == "out")
      return out(1);
    return std::nullopt;
  case CellKind::Constant:
    if (port == "out")
      return out(cell.width);
    return std::nullopt;
  }
  return std::nullopt;
}

int loft::addr_width(int64_t length) {
  int bits = 1;
  while ((int64_t{1} << bits) < length)
    ++bits;
  return bits;
}

//===----------------------------------------------------------------------===//
// Lookup
//===----------------------------------------------------------------------===//

const Cell *HwComponent::find_cell(const std::string &wanted) const {
  for (const Cell &cell : cells)
    if (cell.name == wanted)
      return &cell;
  return nullptr;
}

const Group *HwComponent::find_group(const std::string &wanted) const {
  for (const Group &group : groups)
    if (group.name == wanted)
      return &group;
  return nullptr;
}

//===----------------------------------------------------------------------===//
// Validation
//===----------------------------------------------------------------------===//

namespace {

bool validIdent(const std::string &name) {
  if (name.empty())
    return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto alnum = [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); };
  if (!alpha(name[0]))
    return false;
  return std::all_of(name.begin() + 1, name.end(), alnum);
}

const std::unordered_set<std::string> kReserved = {
    "clk", "reset", "go", "done", "state", "state_ctr"};

class Validator {
public:
  explicit Validator(const HwComponent &component) : comp_(component) {}

  Diagnostics run() {
    checkCells();
    checkGroups();
    checkControl();
    return std::move(diags_);
  }

private:
  void report(std::string location, std::string message) {
    diags_.push_back({std::move(location), std::move(message)});
  }

  void claimIdent(const std::string &id, const std::string &location) {
    if (kReserved.count(id) || id.rfind("fsm_", 0) == 0) {
      report(location, "name '" + id + "' collides with backend signals");
      return;
    }
    if (!verilog_ids_.insert(id).second)
      report(location, "name '" + id + "' is claimed twice");
  }

  void checkCells() {
    if (!validIdent(comp_.name))
      report("component", "component name '" + comp_.name +
                              "' is not a valid identifier");
    for (const Cell &cell : comp_.cells) {
      std::string loc = "component/cells/" + cell.name;
      if (!validIdent(cell.name)) {
        report(loc, "cell name is not a valid identifier");
        continue;
      }
      if (!cell_names_.insert(cell.name).second)
        report(loc, "duplicate cell name");
      // Cell names, group names, and every wire the RTL backend will derive
      // share one namespace (memories become arrays, groups become FSM state
      // labels), so all of them are claimed.
      claimIdent(cell.name, loc);
      for (const std::string &port : cell_ports(cell.kind))
        claimIdent(cell.name + "_" + port, loc);

      if (cell.width < 1 || cell.width > 32)
        report(loc, "width " + std::to_string(cell.width) +
                        " outside [1, 32]");
      if (cell.kind == CellKind::Memory && cell.length < 1)
        report(loc, "memory length must be at least 1");
      if (cell.kind != CellKind::Memory && cell.length != 0)
        report(loc, "only memories have a length");
      if (cell.kind == CellKind::Constant && cell.width < 64 &&
          (cell.value >> cell.width) != 0)
        report(loc, "constant value does not fit in " +
                        std::to_string(cell.width) + " bits");
      if (cell.kind != CellKind::Constant && cell.value != 0)
        report(loc, "only constants carry a value");
      if (cell.kind != CellKind::Memory && !cell.binding.empty())
        report(loc, "only memories carry an argument binding");
    }
  }

  /// Width of `ref` if it is a real port of an existing cell of the wanted
  /// direction; reports and returns nullopt otherwise.
  std::optional<int> portWidth(const PortRef &ref, bool want_input,
                               const std::string &loc) {
    const Cell *cell = comp_.find_cell(ref.cell);
    if (!cell) {
      report(loc, "unknown cell '" + ref.cell + "'");
      return std::nullopt;
    }
    auto info = cell_port(*cell, ref.port);
    if (!info) {
      report(loc, "cell '" + ref.cell + "' (" + to_string(cell->kind) +
                      ") has no port '" + ref.port + "'");
      return std::nullopt;
    }
    if (info->is_input != want_input) {
      report(loc, "port " + ref.cell + "." + ref.port +
                      (want_input ? " is not assignable" : " is not a source"));
      return std::nullopt;
    }
    return info->width;
  }

  void checkGroups() {
    for (const Group &group : comp_.groups) {
      std::string loc = "component/groups/" + group.name;
      if (!validIdent(group.name))
        report(loc, "group name is not a valid identifier");
      if (!group_names_.insert(group.name).second)
        report(loc, "duplicate group name");
      else
        claimIdent(group.name, loc);
      if (group.latency < 1)
        report(loc, "latency must be at least 1");

      std::unordered_set<std::string> dests;
      // cell -> ports driven in this group, for enable pairing
      std::unordered_map<std::string, std::unordered_set<std::string>> driven;
      for (size_t i = 0; i < group.assignments.size(); ++i) {
        const Assignment &assign = group.assignments[i];
        std::string aloc = loc + "/assignments[" + std::to_string(i) + "]";
        auto destWidth = portWidth(assign.dest, /*want_input=*/true, aloc);
        if (destWidth) {
          std::string key = assign.dest.cell + "." + assign.dest.port;
          if (!dests.insert(key).second)
            report(aloc, "port " + key + " is driven twice in one group");
          driven[assign.dest.cell].insert(assign.dest.port);
        }
        if (const auto *src = std::get_if<PortRef>(&assign.src)) {
          auto srcWidth = portWidth(*src, /*want_input=*/false, aloc);
          if (destWidth && srcWidth && *destWidth != *srcWidth)
            report(aloc, "width mismatch: " + std::to_string(*srcWidth) +
                             "-bit source into " + std::to_string(*destWidth) +
                             "-bit port");
        } else if (destWidth) {
          uint64_t value = std::get<Literal>(assign.src).value;
          if (*destWidth < 64 && (value >> *destWidth) != 0)
            report(aloc, "literal " + std::to_string(value) +
                             " does not fit in " + std::to_string(*destWidth) +
                             " bits");
        }
        if (assign.guard) {
          auto guardWidth = portWidth(*assign.guard, /*want_input=*/false,
                                      aloc);
          if (guardWidth && *guardWidth != 1)
            report(aloc, "guard " + assign.guard->cell + "." +
                             assign.guard->port + " is not a single bit");
        }
      }

      // Synchronous write discipline: data and enable travel together.
      for (const auto &[cellName, ports] : driven) {
        const Cell *cell = comp_.find_cell(cellName);
        if (!cell)
          continue;
        if (cell->kind == CellKind::Register) {
          if (ports.count("in") != ports.count("write_en"))
            report(loc, "register '" + cellName +
                            "': in and write_en must be driven together");
        } else if (cell->kind == CellKind::Memory) {
          bool data = ports.count("write_data") != 0;
          bool addr = ports.count("write_addr") != 0;
          bool en = ports.count("write_en") != 0;
          if (data != en || addr != en)
            report(loc, "memory '" + cellName +
                            "': write_addr, write_data, and write_en must be "
                            "driven together");
        }
      }
    }
  }

  /// Groups a control subtree can enable, cond groups included.
  void enabledGroups(const ControlNode &node,
                     std::unordered_set<std::string> &out) {
    if (const auto *enable = node.as<Enable>()) {
      out.insert(enable->group);
    } else if (const auto *seq = node.as<Seq>()) {
      for (const ControlNode &child : seq->children)
        enabledGroups(child, out);
    } else if (const auto *par = node.as<Par>()) {
      for (const ControlNode &child : par->children)
        enabledGroups(child, out);
    } else if (const auto *loop = node.as<While>()) {
      out.insert(loop->cond_group);
      for (const ControlNode &child : loop->body)
        enabledGroups(child, out);
    } else if (const auto *repeat = node.as<Repeat>()) {
      for (const ControlNode &child : repeat->body)
        enabledGroups(child, out);
    }
  }

  void checkControl() { walk(comp_.control, "component/control"); }

  void walk(const ControlNode &node, const std::string &loc) {
    if (const auto *enable = node.as<Enable>()) {
      if (!comp_.find_group(enable->group))
        report(loc, "enable of unknown group '" + enable->group + "'");
    } else if (const auto *seq = node.as<Seq>()) {
      for (size_t i = 0; i < seq->children.size(); ++i)
        walk(seq->children[i], loc + "/seq[" + std::to_string(i) + "]");
    } else if (const auto *par = node.as<Par>()) {
      checkPar(*par, loc);
    } else if (const auto *loop = node.as<While>()) {
      checkWhile(*loop, loc);
    } else if (const auto *repeat = node.as<Repeat>()) {
      if (repeat->count < 0)
        report(loc, "repeat count must be non-negative");
      for (size_t i = 0; i < repeat->body.size(); ++i)
        walk(repeat->body[i], loc + "/repeat[" + std::to_string(i) + "]");
    }
  }

  void checkPar(const Par &par, const std::string &loc) {
    // Arms must drive disjoint ports: anything else is a same-cycle conflict.
    std::unordered_map<std::string, size_t> port_to_arm;
    for (size_t i = 0; i < par.children.size(); ++i) {
      std::unordered_set<std::string> groups;
      enabledGroups(par.children[i], groups);
      for (const std::string &name : groups) {
        const Group *group = comp_.find_group(name);
        if (!group)
          continue; // reported when the child is walked
        for (const Assignment &assign : group->assignments) {
          std::string key = assign.dest.cell + "." + assign.dest.port;
          auto [it, inserted] = port_to_arm.emplace(key, i);
          if (!inserted && it->second != i)
            report(loc, "par arms " + std::to_string(it->second) + " and " +
                            std::to_string(i) + " both drive " + key);
        }
      }
    }
    for (size_t i = 0; i < par.children.size(); ++i)
      walk(par.children[i], loc + "/par[" + std::to_string(i) + "]");
  }

  void checkWhile(const While &loop, const std::string &loc) {
    const Group *cond = comp_.find_group(loop.cond_group);
    if (!cond) {
      report(loc, "while references unknown condition group '" +
                      loop.cond_group + "'");
    } else {
      if (cond->latency != 1)
        report(loc, "condition group '" + loop.cond_group +
                        "' must have latency 1");
      const Cell *cell = comp_.find_cell(loop.condition.cell);
      if (!cell || cell->kind != CellKind::Register ||
          loop.condition.port != "out") {
        report(loc, "while condition " + loop.condition.cell + "." +
                        loop.condition.port + " must be a register's out port");
      } else {
        bool refreshed = false;
        bool strobed = false;
        for (const Assignment &assign : cond->assignments) {
          refreshed |= assign.dest == PortRef{loop.condition.cell, "in"};
          // The refresh must be unconditional: the backend FSM decides the
          // branch from the register's input wire on the condition group's
          // clock edge, which only equals the committed value when the
          // write strobe is a bare constant 1.
          if (assign.dest == PortRef{loop.condition.cell, "write_en"}) {
            const Literal *lit = std::get_if<Literal>(&assign.src);
            strobed |= lit && lit->value == 1 && !assign.guard;
          }
        }
        if (!refreshed)
          report(loc, "condition group '" + loop.cond_group +
                          "' does not write register '" +
                          loop.condition.cell + "'");
        else if (!strobed)
          report(loc, "condition group '" + loop.cond_group +
                          "' must strobe '" + loop.condition.cell +
                          "' with an unguarded constant write enable");
      }
    }
    for (size_t i = 0; i < loop.body.size(); ++i)
      walk(loop.body[i], loc + "/while[" + std::to_string(i) + "]");
  }

  const HwComponent &comp_;
  Diagnostics diags_;
  std::unordered_set<std::string> cell_names_;
  std::unordered_set<std::string> group_names_;
  std::unordered_set<std::string> verilog_ids_;
};

} // namespace

Diagnostics loft::validate(const HwComponent &component) {
  return Validator(component).run();
}

//===----------------------------------------------------------------------===//
// Static latency
//===----------------------------------------------------------------------===//

namespace {

std::optional<int64_t> nodeLatency(const HwComponent &comp,
                                   const ControlNode &node) {
  if (const auto *enable = node.as<Enable>()) {
    const Group *group = comp.find_group(enable->group);
    if (!group)
      return std::nullopt;
    return group->latency;
  }
  if (const auto *seq = node.as<Seq>()) {
    int64_t total = 0;
    for (const ControlNode &child : seq->children) {
      auto cycles = nodeLatency(comp, child);
      if (!cycles)
        return std::nullopt;
      total += *cycles;
    }
    return total;
  }
  if (const auto *par = node.as<Par>()) {
    int64_t slowest = 0;
    for (const ControlNode &child : par->children) {
      auto cycles = nodeLatency(comp, child);
      if (!cycles)
        return std::nullopt;
      slowest = std::max(slowest, *cycles);
    }
    return slowest;
  }
  if (const auto *repeat = node.as<Repeat>()) {
    int64_t body = 0;
    for (const ControlNode &child : repeat->body) {
      auto cycles = nodeLatency(comp, child);
      if (!cycles)
        return std::nullopt;
      body += *cycles;
    }
    return repeat->count * body;
  }
  return std::nullopt; // While
}

} // namespace

std::optional<int64_t> loft::static_latency(const HwComponent &component) {
  return nodeLatency(component, component.control);
}

//===----------------------------------------------------------------------===//
// Resource counts
//===----------------------------------------------------------------------===//

ResourceReport loft::resource_counts(const HwComponent &component) {
  ResourceReport report;
  for (const Cell &cell : component.cells) {
    switch (cell.kind) {
    case CellKind::Register:
      ++report.registers;
      break;
    case CellKind::Memory:
      ++report.memories;
      report.memory_bits += cell.length * cell.width;
      break;
    case CellKind::Adder:
      ++report.adders;
      break;
    case CellKind::Multiplier:
      ++report.multipliers;
      break;
    case CellKind::CompareLt:
    case CellKind::CompareEq:
      ++report.comparators;
      break;
    case CellKind::Constant:
      ++report.constants;
      break;
    }
  }
  return report;
}

//===----------------------------------------------------------------------===//
// Textual dump
//===----------------------------------------------------------------------===//

namespace {

std::string portText(const PortRef &ref) { return ref.cell + "." + ref.port; }

class Dumper {
public:
  explicit Dumper(const HwComponent &component) : comp_(component) {}

  std::string run() {
    os_ << "component @" << comp_.name << " {\n";
    dumpCells();
    for (const Group &group : comp_.groups)
      dumpGroup(group);
    os_ << "  control {\n";
    dumpNode(comp_.control, 2);
    os_ << "  }\n}\n";
    return os_.str();
  }

private:
  void indent(int depth) {
    for (int i = 0; i < depth; ++i)
      os_ << "  ";
  }

  void dumpCells() {
    os_ << "  cells {\n";
    for (const Cell &cell : comp_.cells) {
      os_ << "    " << cell.name << " : " << to_string(cell.kind) << "<"
          << cell.width;
      if (cell.kind == CellKind::Memory)
        os_ << " x " << cell.length;
      os_ << ">";
      if (cell.kind == CellKind::Constant)
        os_ << "(" << cell.value << ")";
      if (!cell.binding.empty())
        os_ << " bind(" << cell.binding << ")";
      os_ << "\n";
    }
    os_ << "  }\n";
  }

  void dumpGroup(const Group &group) {
    os_ << "  group " << group.name << " latency(" << group.latency << ") {\n";
    for (const Assignment &assign : group.assignments) {
      os_ << "    " << portText(assign.dest) << " = ";
      if (const auto *src = std::get_if<PortRef>(&assign.src))
        os_ << portText(*src);
      else
        os_ << std::get<Literal>(assign.src).value;
      if (assign.guard)
        os_ << " when " << portText(*assign.guard);
      os_ << "\n";
    }
    os_ << "  }\n";
  }

  void dumpBody(const std::vector<ControlNode> &body, int depth) {
    for (const ControlNode &child : body)
      dumpNode(child, depth);
  }

  void dumpNode(const ControlNode &node, int depth) {
    indent(depth);
    if (const auto *enable = node.as<Enable>()) {
      os_ << "enable " << enable->group << "\n";
    } else if (const auto *seq = node.as<Seq>()) {
      os_ << "seq {\n";
      dumpBody(seq->children, depth + 1);
      indent(depth);
      os_ << "}\n";
    } else if (const auto *par = node.as<Par>()) {
      os_ << "par {\n";
      dumpBody(par->children, depth + 1);
      indent(depth);
      os_ << "}\n";
    } else if (const auto *loop = node.as<While>()) {
      os_ << "while " << portText(loop->condition) << " with "
          << loop->cond_group << " {\n";
      dumpBody(loop->body, depth + 1);
      indent(depth);
      os_ << "}\n";
    } else if (const auto *repeat = node.as<Repeat>()) {
      os_ << "repeat " << repeat->count << " {\n";
      dumpBody(repeat->body, depth + 1);
      indent(depth);
      os_ << "}\n";
    }
  }

  const HwComponent &comp_;
  std::ostringstream os_;
};

} // namespace

std::string loft::dump_hwir(const HwComponent &component) {
  return Dumper(component).run();
}

//===----------------------------------------------------------------------===//
// While -> Repeat rewriting
//===----------------------------------------------------------------------===//

namespace {

ControlNode rewriteNode(const ControlNode &node,
                        const std::function<int64_t(const While &)> &trips) {
  auto rewriteBody = [&](const std::vector<ControlNode> &body) {
    std::vector<ControlNode> out;
    out.reserve(body.size());
    for (const ControlNode &child : body)
      out.push_back(rewriteNode(child, trips));
    return out;
  };
  if (const auto *seq = node.as<Seq>())
    return ControlNode{Seq{rewriteBody(seq->children)}};
  if (const auto *par = node.as<Par>())
    return ControlNode{Par{rewriteBody(par->children)}};
  if (const auto *repeat = node.as<Repeat>())
    return ControlNode{Repeat{repeat->count, rewriteBody(repeat->body)}};
  if (const auto *loop = node.as<While>()) {
    std::vector<ControlNode> iteration = rewriteBody(loop->body);
    iteration.push_back(ControlNode{Enable{loop->cond_group}});
    Seq replacement;
    replacement.children.push_back(ControlNode{Enable{loop->cond_group}});
    replacement.children.push_back(
        ControlNode{Repeat{trips(*loop), std::move(iteration)}});
    return ControlNode{std::move(replacement)};
  }
  return node; // Enable
}

} // namespace

HwComponent loft::replace_while_with_repeat(
    const HwComponent &component,
    const std::function<int64_t(const While &)> &trips) {
  HwComponent out = component;
  out.control = rewriteNode(component.control, trips);
  return out;
}
