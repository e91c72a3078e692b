//===- affine_ir.cpp - Verifier and structural comparisons --------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/affine_ir.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace loft {

bool ForOp::operator==(const ForOp &other) const {
  return induction_var == other.induction_var && lower == other.lower &&
         upper == other.upper && step == other.step &&
         iter_args == other.iter_args && results == other.results &&
         body == other.body;
}

bool AffineOp::operator==(const AffineOp &other) const {
  return op == other.op;
}

const AffineFunc *AffineModule::find_func(const std::string &name) const {
  for (const auto &f : funcs)
    if (f.name == name)
      return &f;
  return nullptr;
}

//===----------------------------------------------------------------------===//
// Verifier
//===----------------------------------------------------------------------===//

namespace {

enum class ValueKind { Memref, Index, I32 };

struct VerifyCtx {
  Diagnostics diags;
  // Scope stack: one map per region, innermost last.
  std::vector<std::unordered_map<ValueId, ValueKind>> scopes;

  void error(const std::string &path, const std::string &msg) {
    diags.push_back({path, msg});
  }

  const ValueKind *lookup(const ValueId &id) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto found = it->find(id);
      if (found != it->end())
        return &found->second;
    }
    return nullptr;
  }

  bool shadowed(const ValueId &id) const { return lookup(id) != nullptr; }

  void define(const std::string &path, const ValueId &id, ValueKind kind) {
    if (id.empty()) {
      error(path, "empty value id");
      return;
    }
    if (shadowed(id)) {
      error(path, "redefinition of value %" + id);
      return;
    }
    scopes.back().emplace(id, kind);
  }

  void expect(const std::string &path, const ValueId &id, ValueKind kind,
              const char *what) {
    const ValueKind *found = lookup(id);
    if (!found) {
      error(path, std::string(what) + " %" + id + " is not defined here");
      return;
    }
    if (*found != kind) {
      const char *names[] = {"a memref", "an induction variable",
                             "an i32 value"};
      error(path, std::string(what) + " %" + id + " is " +
                      names[static_cast<int>(*found)] + ", expected " +
                      names[static_cast<int>(kind)]);
    }
  }
};

std::string child_path(const std::string &base, size_t i) {
  return base + "/op[" + std::to_string(i) + "]";
}

void check_index_expr(VerifyCtx &ctx, const std::string &path,
                      const AffineExpr &e) {
  for (const auto &term : e.terms)
    ctx.expect(path, term.var, ValueKind::Index, "index variable");
}

void verify_region(VerifyCtx &ctx, const std::string &path,
                   const std::vector<AffineOp> &ops, bool is_func_body,
                   const std::vector<IterArg> *iter_args);

void verify_for(VerifyCtx &ctx, const std::string &path, const ForOp &f) {
  if (f.step < 1)
    ctx.error(path, "loop step must be >= 1");
  if (f.lower > f.upper)
    ctx.error(path, "loop lower bound exceeds upper bound");
  if (f.step >= 1 && f.lower <= f.upper && (f.upper - f.lower) % f.step != 0)
    ctx.error(path, "trip count is not exact: (upper - lower) must be "
                    "divisible by step");
  if (f.iter_args.size() != f.results.size())
    ctx.error(path, "loop has " + std::to_string(f.iter_args.size()) +
                        " iter_args but " + std::to_string(f.results.size()) +
                        " results");

  // Initial values are read in the enclosing scope.
  for (const auto &ia : f.iter_args)
    ctx.expect(path, ia.init, ValueKind::I32, "iter_arg init");

  ctx.scopes.emplace_back();
  ctx.define(path, f.induction_var, ValueKind::Index);
  for (const auto &ia : f.iter_args)
    ctx.define(path, ia.name, ValueKind::I32);
  verify_region(ctx, path, f.body, /*is_func_body=*/false,
                f.iter_args.empty() ? nullptr : &f.iter_args);
  ctx.scopes.pop_back();

  for (const auto &r : f.results)
    ctx.define(path, r, ValueKind::I32);
}

void verify_region(VerifyCtx &ctx, const std::string &path,
                   const std::vector<AffineOp> &ops, bool is_func_body,
                   const std::vector<IterArg> *iter_args) {
  if (is_func_body && (ops.empty() || !ops.back().is<ReturnOp>()))
    ctx.error(path, "function body must end with return");
  if (iter_args && (ops.empty() || !ops.back().is<YieldOp>()))
    ctx.error(path, "loop with iter_args must end with affine.yield");

  for (size_t i = 0; i < ops.size(); ++i) {
    const std::string p = child_path(path, i);
    const bool last = i + 1 == ops.size();
    std::visit(
        [&](const auto &op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, ConstantOp>) {
            ctx.define(p, op.result, ValueKind::I32);
          } else if constexpr (std::is_same_v<T, LoadOp>) {
            ctx.expect(p, op.memref, ValueKind::Memref, "load memref");
            check_index_expr(ctx, p, op.index);
            ctx.define(p, op.result, ValueKind::I32);
          } else if constexpr (std::is_same_v<T, StoreOp>) {
            ctx.expect(p, op.value, ValueKind::I32, "store value");
            ctx.expect(p, op.memref, ValueKind::Memref, "store memref");
            check_index_expr(ctx, p, op.index);
          } else if constexpr (std::is_same_v<T, MulOp>) {
            ctx.expect(p, op.lhs, ValueKind::I32, "muli operand");
            ctx.expect(p, op.rhs, ValueKind::I32, "muli operand");
            ctx.define(p, op.result, ValueKind::I32);
          } else if constexpr (std::is_same_v<T, AddOp>) {
            ctx.expect(p, op.lhs, ValueKind::I32, "addi operand");
            ctx.expect(p, op.rhs, ValueKind::I32, "addi operand");
            ctx.define(p, op.result, ValueKind::I32);
          } else if constexpr (std::is_same_v<T, ForOp>) {
            verify_for(ctx, p + "/for %" + op.induction_var, op);
          } else if constexpr (std::is_same_v<T, YieldOp>) {
            if (!iter_args || !last) {
              ctx.error(p, "affine.yield is only allowed as the final op of "
                           "a loop body with iter_args");
            } else if (op.values.size() != iter_args->size()) {
              ctx.error(p, "yield produces " + std::to_string(op.values.size()) +
                               " values but the loop carries " +
                               std::to_string(iter_args->size()));
            }
            for (const auto &v : op.values)
              ctx.expect(p, v, ValueKind::I32, "yield value");
          } else if constexpr (std::is_same_v<T, ReturnOp>) {
            if (!is_func_body)
              ctx.error(p, "return is only allowed at function level");
            else if (!last)
              ctx.error(p, "return must be the final op of the function");
          }
        },
        ops[i].op);
  }
}

} // namespace

Diagnostics verify_module(const AffineModule &m) {
  VerifyCtx ctx;
  std::set<std::string> names;
  for (const auto &f : m.funcs) {
    const std::string path = "func @" + f.name;
    if (!names.insert(f.name).second)
      ctx.error(path, "duplicate function name");

    ctx.scopes.clear();
    ctx.scopes.emplace_back();
    for (const auto &arg : f.args) {
      if (arg.type.length < 1)
        ctx.error(path, "memref argument %" + arg.id +
                            " must have length >= 1");
      ctx.define(path, arg.id, ValueKind::Memref);
    }
    verify_region(ctx, path, f.body, /*is_func_body=*/true, nullptr);
  }
  return std::move(ctx.diags);
}

//===----------------------------------------------------------------------===//
// Expression evaluation
//===----------------------------------------------------------------------===//

int64_t eval_affine_expr(const AffineExpr &e, const IndexEnv &env) {
  int64_t acc = e.constant;
  for (const auto &term : e.terms) {
    auto it = env.find(term.var);
    if (it == env.end())
      throw EvalError(EvalError::Kind::UnboundVariable,
                      "unbound induction variable %" + term.var);
    acc += term.coeff * it->second;
  }
  return acc;
}

//===----------------------------------------------------------------------===//
// Alpha equivalence
//===----------------------------------------------------------------------===//

namespace {

/// Bijective id correspondence built as defs are encountered.
struct AlphaCtx {
  std::unordered_map<ValueId, ValueId> fwd;
  std::unordered_map<ValueId, ValueId> rev;

  bool bind(const ValueId &a, const ValueId &b) {
    auto f = fwd.find(a);
    auto r = rev.find(b);
    if (f != fwd.end() || r != rev.end())
      return f != fwd.end() && r != rev.end() && f->second == b &&
             r->second == a;
    fwd.emplace(a, b);
    rev.emplace(b, a);
    return true;
  }

  bool same(const ValueId &a, const ValueId &b) const {
    auto f = fwd.find(a);
    return f != fwd.end() && f->second == b;
  }
};

bool alpha_expr(AlphaCtx &ctx, const AffineExpr &a, const AffineExpr &b) {
  if (a.constant != b.constant || a.terms.size() != b.terms.size())
    return false;
  for (size_t i = 0; i < a.terms.size(); ++i)
    if (a.terms[i].coeff != b.terms[i].coeff ||
        !ctx.same(a.terms[i].var, b.terms[i].var))
      return false;
  return true;
}

bool alpha_region(AlphaCtx &ctx, const std::vector<AffineOp> &a,
                  const std::vector<AffineOp> &b);

bool alpha_op(AlphaCtx &ctx, const AffineOp &a, const AffineOp &b) {
  if (a.op.index() != b.op.index())
    return false;
  if (const auto *ca = a.as<ConstantOp>()) {
    const auto *cb = b.as<ConstantOp>();
    return ca->value == cb->value && ctx.bind(ca->result, cb->result);
  }
  if (const auto *la = a.as<LoadOp>()) {
    const auto *lb = b.as<LoadOp>();
    return ctx.same(la->memref, lb->memref) &&
           alpha_expr(ctx, la->index, lb->index) &&
           ctx.bind(la->result, lb->result);
  }
  if (const auto *sa = a.as<StoreOp>()) {
    const auto *sb = b.as<StoreOp>();
    return ctx.same(sa->value, sb->value) && ctx.same(sa->memref, sb->memref) &&
           alpha_expr(ctx, sa->index, sb->index);
  }
  if (const auto *ma = a.as<MulOp>()) {
    const auto *mb = b.as<MulOp>();
    return ctx.same(ma->lhs, mb->lhs) && ctx.same(ma->rhs, mb->rhs) &&
           ctx.bind(ma->result, mb->result);
  }
  if (const auto *aa = a.as<AddOp>()) {
    const auto *ab = b.as<AddOp>();
    return ctx.same(aa->lhs, ab->lhs) && ctx.same(aa->rhs, ab->rhs) &&
           ctx.bind(aa->result, ab->result);
  }
  if (const auto *fa = a.as<ForOp>()) {
    const auto *fb = b.as<ForOp>();
    if (fa->lower != fb->lower || fa->upper != fb->upper ||
        fa->step != fb->step || fa->iter_args.size() != fb->iter_args.size() ||
        fa->results.size() != fb->results.size())
      return false;
    for (size_t i = 0; i < fa->iter_args.size(); ++i)
      if (!ctx.same(fa->iter_args[i].init, fb->iter_args[i].init))
        return false;
    if (!ctx.bind(fa->induction_var, fb->induction_var))
      return false;
    for (size_t i = 0; i < fa->iter_args.size(); ++i)
      if (!ctx.bind(fa->iter_args[i].name, fb->iter_args[i].name))
        return false;
    if (!alpha_region(ctx, fa->body, fb->body))
      return false;
    for (size_t i = 0; i < fa->results.size(); ++i)
      if (!ctx.bind(fa->results[i], fb->results[i]))
        return false;
    return true;
  }
  if (const auto *ya = a.as<YieldOp>()) {
    const auto *yb = b.as<YieldOp>();
    if (ya->values.size() != yb->values.size())
      return false;
    for (size_t i = 0; i < ya->values.size(); ++i)
      if (!ctx.same(ya->values[i], yb->values[i]))
        return false;
    return true;
  }
  return a.is<ReturnOp>(); // both ReturnOp: nothing to compare
}

bool alpha_region(AlphaCtx &ctx, const std::vector<AffineOp> &a,
                  const std::vector<AffineOp> &b) {
  if (a.size() != b.size())
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!alpha_op(ctx, a[i], b[i]))
      return false;
  return true;
}

} // namespace

bool alpha_equivalent(const AffineModule &a, const AffineModule &b) {
  if (a.funcs.size() != b.funcs.size())
    return false;
  for (size_t i = 0; i < a.funcs.size(); ++i) {
    const AffineFunc &fa = a.funcs[i];
    const AffineFunc &fb = b.funcs[i];
    if (fa.name != fb.name || fa.args.size() != fb.args.size())
      return false;
    AlphaCtx ctx;
    for (size_t j = 0; j < fa.args.size(); ++j) {
      if (!(fa.args[j].type == fb.args[j].type))
        return false;
      if (!ctx.bind(fa.args[j].id, fb.args[j].id))
        return false;
    }
    if (!alpha_region(ctx, fa.body, fb.body))
      return false;
  }
  return true;
}

} // namespace loft
