//===- printer.cpp - Textual affine dialect printer ------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/printer.hpp"

#include <sstream>
#include <stdexcept>

using namespace loft;

namespace {

void printMemRefType(std::ostringstream &os, const MemRefType &type) {
  os << "memref<" << type.length << "xi32";
  if (type.space != 0)
    os << ", " << type.space;
  os << ">";
}

class Printer {
public:
  std::string run(const AffineModule &module) {
    for (size_t i = 0; i < module.funcs.size(); ++i) {
      if (i != 0)
        os_ << "\n";
      printFunc(module.funcs[i]);
    }
    return os_.str();
  }

private:
  void indent() {
    for (int i = 0; i < depth_; ++i)
      os_ << "  ";
  }

  void printFunc(const AffineFunc &func) {
    current_ = &func;
    os_ << "func.func @" << func.name << "(";
    for (size_t i = 0; i < func.args.size(); ++i) {
      if (i != 0)
        os_ << ", ";
      os_ << "%" << func.args[i].id << ": ";
      printMemRefType(os_, func.args[i].type);
    }
    os_ << ") {\n";
    depth_ = 1;
    for (const AffineOp &op : func.body)
      printOp(op);
    os_ << "}\n";
  }

  void printOp(const AffineOp &op) {
    indent();
    if (const auto *c = op.as<ConstantOp>()) {
      os_ << "%" << c->result << " = arith.constant " << c->value << " : i32\n";
    } else if (const auto *load = op.as<LoadOp>()) {
      os_ << "%" << load->result << " = affine.load %" << load->memref << "["
          << print_affine_expr(load->index) << "] : ";
      printMemRefType(os_, typeOf(load->memref));
      os_ << "\n";
    } else if (const auto *store = op.as<StoreOp>()) {
      os_ << "affine.store %" << store->value << ", %" << store->memref << "["
          << print_affine_expr(store->index) << "] : ";
      printMemRefType(os_, typeOf(store->memref));
      os_ << "\n";
    } else if (const auto *mul = op.as<MulOp>()) {
      os_ << "%" << mul->result << " = arith.muli %" << mul->lhs << ", %"
          << mul->rhs << " : i32\n";
    } else if (const auto *add = op.as<AddOp>()) {
      os_ << "%" << add->result << " = arith.addi %" << add->lhs << ", %"
          << add->rhs << " : i32\n";
    } else if (const auto *yield = op.as<YieldOp>()) {
      if (yield->values.size() != 1)
        throw std::invalid_argument(
            "printer: affine.yield must carry exactly one value");
      os_ << "affine.yield %" << yield->values[0] << " : i32\n";
    } else if (op.is<ReturnOp>()) {
      os_ << "return\n";
    } else if (const auto *loop = op.as<ForOp>()) {
      printFor(*loop);
    }
  }

  void printFor(const ForOp &loop) {
    if (loop.iter_args.size() > 1)
      throw std::invalid_argument(
          "printer: at most one iter_args binding has a textual form");
    if (!loop.results.empty())
      os_ << "%" << loop.results[0] << " = ";
    os_ << "affine.for %" << loop.induction_var << " = " << loop.lower
        << " to " << loop.upper;
    if (loop.step != 1)
      os_ << " step " << loop.step;
    if (!loop.iter_args.empty())
      os_ << " iter_args(%" << loop.iter_args[0].name << " = %"
          << loop.iter_args[0].init << ") -> (i32)";
    os_ << " {\n";
    ++depth_;
    for (const AffineOp &op : loop.body)
      printOp(op);
    --depth_;
    indent();
    os_ << "}\n";
  }

  /// Load/store type annotations repeat the operand's declared type, so the
  /// printer resolves memref names against the current function's arguments.
  const MemRefType &typeOf(const ValueId &memref) {
    for (const FuncArg &arg : current_->args)
      if (arg.id == memref)
        return arg.type;
    throw std::invalid_argument("printer: unknown memref %" + memref);
  }

  std::ostringstream os_;
  const AffineFunc *current_ = nullptr;
  int depth_ = 0;
};

} // namespace

std::string loft::print_affine_expr(const AffineExpr &expr) {
  std::ostringstream os;
  bool first = true;
  for (const AffineTerm &term : expr.terms) {
    if (!first)
      os << " + ";
    first = false;
    os << "%" << term.var;
    if (term.coeff != 1)
      os << " * " << term.coeff;
  }
  if (expr.constant != 0 || first) {
    if (!first)
      os << " + ";
    os << expr.constant;
  }
  return os.str();
}

std::string loft::print_module(const AffineModule &module) {
  return Printer().run(module);
}
