//===- interp.cpp - Sequential reference interpreter --------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/affine_ir.hpp"
#include "loft/ints.hpp"

#include <stdexcept>

namespace loft {

namespace {

struct Frame {
  std::unordered_map<ValueId, int32_t> scalars;
  IndexEnv indices;
  std::unordered_map<ValueId, size_t> memrefs; // value id -> image slot
};

class Interp {
public:
  Interp(const AffineFunc &f, std::vector<MemoryImage> images)
      : func_(f), images_(std::move(images)) {}

  std::vector<MemoryImage> run() {
    Frame frame;
    for (size_t i = 0; i < func_.args.size(); ++i)
      frame.memrefs.emplace(func_.args[i].id, i);
    exec_region(func_.body, frame);
    return std::move(images_);
  }

private:
  int32_t scalar(const Frame &frame, const ValueId &id) const {
    auto it = frame.scalars.find(id);
    if (it == frame.scalars.end())
      throw std::invalid_argument("interpret: use of undefined value %" + id);
    return it->second;
  }

  std::vector<int32_t> &memory(const Frame &frame, const ValueId &id) {
    auto it = frame.memrefs.find(id);
    if (it == frame.memrefs.end())
      throw std::invalid_argument("interpret: unknown memref %" + id);
    return images_[it->second].data;
  }

  int64_t checked_index(const AffineExpr &e, const Frame &frame,
                        int64_t length) const {
    int64_t idx = eval_affine_expr(e, frame.indices);
    if (idx < 0 || idx >= length)
      throw EvalError(EvalError::Kind::OutOfBounds,
                      "memory index " + std::to_string(idx) +
                          " outside [0, " + std::to_string(length) + ")",
                      idx, length);
    return idx;
  }

  // Executes ops in order; returns the yielded values if the region ended in
  // an affine.yield.
  std::vector<int32_t> exec_region(const std::vector<AffineOp> &ops,
                                   Frame &frame) {
    for (const auto &op : ops) {
      if (const auto *c = op.as<ConstantOp>()) {
        frame.scalars[c->result] = c->value;
      } else if (const auto *l = op.as<LoadOp>()) {
        auto &mem = memory(frame, l->memref);
        int64_t idx = checked_index(l->index, frame,
                                    static_cast<int64_t>(mem.size()));
        frame.scalars[l->result] = mem[static_cast<size_t>(idx)];
      } else if (const auto *s = op.as<StoreOp>()) {
        auto &mem = memory(frame, s->memref);
        int64_t idx = checked_index(s->index, frame,
                                    static_cast<int64_t>(mem.size()));
        mem[static_cast<size_t>(idx)] = scalar(frame, s->value);
      } else if (const auto *m = op.as<MulOp>()) {
        frame.scalars[m->result] =
            wrap_mul32(scalar(frame, m->lhs), scalar(frame, m->rhs));
      } else if (const auto *a = op.as<AddOp>()) {
        frame.scalars[a->result] =
            wrap_add32(scalar(frame, a->lhs), scalar(frame, a->rhs));
      } else if (const auto *f = op.as<ForOp>()) {
        exec_for(*f, frame);
      } else if (const auto *y = op.as<YieldOp>()) {
        std::vector<int32_t> vals;
        vals.reserve(y->values.size());
        for (const auto &v : y->values)
          vals.push_back(scalar(frame, v));
        return vals;
      } // ReturnOp: region simply ends.
    }
    return {};
  }

  void exec_for(const ForOp &f, Frame &frame) {
    std::vector<int32_t> carried;
    carried.reserve(f.iter_args.size());
    for (const auto &ia : f.iter_args)
      carried.push_back(scalar(frame, ia.init));

    for (int64_t iv = f.lower; iv < f.upper; iv += f.step) {
      // Loops in the subset bind only their own iv and iter_args; reuse the
      // enclosing frame and retract the bindings afterwards.
      frame.indices[f.induction_var] = iv;
      for (size_t i = 0; i < f.iter_args.size(); ++i)
        frame.scalars[f.iter_args[i].name] = carried[i];
      std::vector<int32_t> yielded = exec_region(f.body, frame);
      if (!f.iter_args.empty())
        carried = std::move(yielded);
    }
    frame.indices.erase(f.induction_var);
    for (const auto &ia : f.iter_args)
      frame.scalars.erase(ia.name);

    for (size_t i = 0; i < f.results.size(); ++i)
      frame.scalars[f.results[i]] = carried[i];
  }

  const AffineFunc &func_;
  std::vector<MemoryImage> images_;
};

} // namespace

std::vector<MemoryImage> interpret(const AffineFunc &f,
                                   const std::vector<MemoryImage> &mems) {
  std::vector<MemoryImage> images;
  images.reserve(f.args.size());
  for (const auto &arg : f.args) {
    const MemoryImage *img = find_image(mems, arg.id);
    if (!img)
      throw std::invalid_argument("interpret: no memory image for %" + arg.id);
    if (static_cast<int64_t>(img->data.size()) != arg.type.length)
      throw std::invalid_argument(
          "interpret: image for %" + arg.id + " has " +
          std::to_string(img->data.size()) + " elements, memref expects " +
          std::to_string(arg.type.length));
    images.push_back(*img);
  }
  return Interp(f, std::move(images)).run();
}

} // namespace loft
