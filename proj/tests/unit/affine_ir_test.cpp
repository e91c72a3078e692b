//===- affine_ir_test.cpp - IR verifier / interpreter / generator ----------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/affine_ir.hpp"

#include "generators.hpp"
#include "oracle.hpp"

#include "doctest.h"

#include <algorithm>
#include <stdexcept>

using namespace loft;
using namespace loft_test;

namespace {

/// Smallest well-formed function: one store of a constant.
AffineFunc storeConstFunc() {
  AffineFunc func;
  func.name = "f";
  func.args.push_back({"m", MemRefType{4, 0}});
  func.body.push_back(AffineOp{ConstantOp{"c", 7}});
  func.body.push_back(AffineOp{StoreOp{"c", "m", AffineExpr{{}, 2}}});
  func.body.push_back(AffineOp{ReturnOp{}});
  return func;
}

AffineModule wrap(AffineFunc func) {
  AffineModule module;
  module.funcs.push_back(std::move(func));
  return module;
}

} // namespace

TEST_CASE("eval_affine_expr computes sum of scaled terms") {
  IndexEnv env{{"i", 31}, {"j", 31}, {"k", 7}};
  AffineExpr expr;
  expr.terms = {{"k", 1}, {"i", 32}};
  expr.constant = 5;
  CHECK(eval_affine_expr(expr, env) == 7 + 32 * 31 + 5);

  AffineExpr constOnly;
  constOnly.constant = -3;
  CHECK(eval_affine_expr(constOnly, env) == -3);

  AffineExpr dup; // same variable twice accumulates
  dup.terms = {{"j", 2}, {"j", 3}};
  CHECK(eval_affine_expr(dup, env) == 5 * 31);

  AffineExpr unbound;
  unbound.terms = {{"zz", 1}};
  CHECK_THROWS_AS(eval_affine_expr(unbound, env), EvalError);
}

TEST_CASE("verifier accepts the generated GEMM at several sizes") {
  for (int64_t n : {1, 2, 8, 32})
    CHECK(verify_module(gen_gemm(n)).empty());
}

TEST_CASE("verifier pinpoints malformed modules") {
  SUBCASE("missing return") {
    AffineFunc func = storeConstFunc();
    func.body.pop_back();
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("use before def") {
    AffineFunc func = storeConstFunc();
    std::swap(func.body[0], func.body[1]);
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("bad step") {
    AffineFunc func = storeConstFunc();
    ForOp loop;
    loop.induction_var = "i";
    loop.lower = 0;
    loop.upper = 4;
    loop.step = 0;
    func.body.insert(func.body.begin(), AffineOp{loop});
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("step must divide the range") {
    AffineFunc func = storeConstFunc();
    ForOp loop;
    loop.induction_var = "i";
    loop.lower = 0;
    loop.upper = 5;
    loop.step = 2;
    func.body.insert(func.body.begin(), AffineOp{loop});
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("shadowing is rejected") {
    AffineFunc func = storeConstFunc();
    ForOp outer;
    outer.induction_var = "i";
    outer.lower = 0;
    outer.upper = 2;
    ForOp inner = outer; // same induction variable name
    outer.body.push_back(AffineOp{inner});
    func.body.insert(func.body.begin(), AffineOp{outer});
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("sibling loops may reuse a name") {
    AffineFunc func = storeConstFunc();
    ForOp loop;
    loop.induction_var = "i";
    loop.lower = 0;
    loop.upper = 2;
    func.body.insert(func.body.begin(), AffineOp{loop});
    func.body.insert(func.body.begin(), AffineOp{loop});
    CHECK(verify_module(wrap(func)).empty());
  }
  SUBCASE("yield outside an iter_args loop") {
    AffineFunc func = storeConstFunc();
    ForOp loop;
    loop.induction_var = "i";
    loop.lower = 0;
    loop.upper = 2;
    loop.body.push_back(AffineOp{YieldOp{{"c"}}});
    func.body.insert(func.body.begin() + 1, AffineOp{loop});
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("iter_args loop must end in a matching yield") {
    AffineFunc func = storeConstFunc();
    ForOp loop;
    loop.induction_var = "i";
    loop.lower = 0;
    loop.upper = 2;
    loop.iter_args.push_back({"acc", "c"});
    loop.results.push_back("r");
    // body lacks the terminating yield
    func.body.insert(func.body.begin() + 1, AffineOp{loop});
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("store of an index variable is rejected") {
    AffineFunc func = storeConstFunc();
    ForOp loop;
    loop.induction_var = "i";
    loop.lower = 0;
    loop.upper = 2;
    loop.body.push_back(AffineOp{StoreOp{"i", "m", AffineExpr{}}});
    func.body.insert(func.body.begin(), AffineOp{loop});
    CHECK(!verify_module(wrap(func)).empty());
  }
  SUBCASE("duplicate function names") {
    AffineModule module = wrap(storeConstFunc());
    module.funcs.push_back(storeConstFunc());
    CHECK(!verify_module(module).empty());
  }
}

TEST_CASE("interpreter multiplies small matrices correctly") {
  AffineModule module = gen_gemm(2);
  const AffineFunc &func = module.funcs[0];
  std::vector<MemoryImage> images{
      {"arg0", {0, 0, 0, 0}},
      {"arg1", {1, 2, 3, 4}},  // A
      {"arg2", {5, 6, 7, 8}},  // B
  };
  auto out = interpret(func, images);
  CHECK(out[0].data == std::vector<int32_t>{19, 22, 43, 50});
  // Inputs pass through untouched.
  CHECK(out[1].data == images[1].data);
  CHECK(out[2].data == images[2].data);
}

TEST_CASE("interpreter agrees with the matmul oracle under wrap-around") {
  for (int64_t n : {1, 2, 3, 5, 8}) {
    Rng rng(mix_seed(2024, n));
    auto a = gen_random_matrix(rng, n);
    auto b = gen_random_matrix(rng, n);
    std::vector<MemoryImage> images{
        {"arg0", std::vector<int32_t>(n * n, 0)}, {"arg1", a}, {"arg2", b}};
    auto out = interpret(gen_gemm(n).funcs[0], images);
    CHECK(out[0].data == oracle_matmul(a, b, n));
  }
}

TEST_CASE("interpreter checks image bindings") {
  AffineFunc func = storeConstFunc();
  CHECK_THROWS_AS(interpret(func, {}), std::invalid_argument);
  CHECK_THROWS_AS(interpret(func, {{"wrong", {0, 0, 0, 0}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(interpret(func, {{"m", {0}}}), std::invalid_argument);
}

TEST_CASE("interpreter reports out-of-bounds accesses") {
  AffineFunc func = storeConstFunc();
  func.body[1].as<StoreOp>()->index.constant = 4; // length is 4
  try {
    interpret(func, {{"m", {0, 0, 0, 0}}});
    FAIL("expected EvalError");
  } catch (const EvalError &err) {
    CHECK(err.kind == EvalError::Kind::OutOfBounds);
    CHECK(err.index == 4);
    CHECK(err.length == 4);
  }
}

TEST_CASE("gen_gemm rejects non-positive sizes") {
  CHECK_THROWS_AS(gen_gemm(0), std::invalid_argument);
  CHECK_THROWS_AS(gen_gemm(-3), std::invalid_argument);
}

TEST_CASE("random modules verify and interpret cleanly") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(mix_seed(99, seed));
    AffineModule module = gen_random_module(rng);
    auto diags = verify_module(module);
    REQUIRE_MESSAGE(diags.empty(), "seed " << seed << ": "
                                           << to_string(diags));
    auto images = gen_random_images(rng, module.funcs[0]);
    CHECK_NOTHROW(interpret(module.funcs[0], images));
  }
}

namespace {

ValueId renamed(const ValueId &id) { return "renamed." + id; }

void renameAll(AffineExpr &expr) {
  for (AffineTerm &term : expr.terms)
    term.var = renamed(term.var);
}

void renameAll(std::vector<AffineOp> &ops) {
  for (AffineOp &op : ops) {
    if (auto *c = op.as<ConstantOp>()) {
      c->result = renamed(c->result);
    } else if (auto *load = op.as<LoadOp>()) {
      load->result = renamed(load->result);
      load->memref = renamed(load->memref);
      renameAll(load->index);
    } else if (auto *store = op.as<StoreOp>()) {
      store->value = renamed(store->value);
      store->memref = renamed(store->memref);
      renameAll(store->index);
    } else if (auto *mul = op.as<MulOp>()) {
      mul->result = renamed(mul->result);
      mul->lhs = renamed(mul->lhs);
      mul->rhs = renamed(mul->rhs);
    } else if (auto *add = op.as<AddOp>()) {
      add->result = renamed(add->result);
      add->lhs = renamed(add->lhs);
      add->rhs = renamed(add->rhs);
    } else if (auto *yield = op.as<YieldOp>()) {
      for (ValueId &v : yield->values)
        v = renamed(v);
    } else if (auto *loop = op.as<ForOp>()) {
      loop->induction_var = renamed(loop->induction_var);
      for (IterArg &iter : loop->iter_args) {
        iter.name = renamed(iter.name);
        iter.init = renamed(iter.init);
      }
      for (ValueId &r : loop->results)
        r = renamed(r);
      renameAll(loop->body);
    }
  }
}

AffineModule renamedCopy(const AffineModule &module) {
  AffineModule copy = module;
  for (AffineFunc &func : copy.funcs) {
    for (FuncArg &arg : func.args)
      arg.id = renamed(arg.id);
    renameAll(func.body);
  }
  return copy;
}

} // namespace

TEST_CASE("alpha equivalence tracks structure, not names") {
  AffineModule a = gen_gemm(4);
  CHECK(alpha_equivalent(a, gen_gemm(4)));
  CHECK(a == gen_gemm(4));

  // A consistent renaming keeps equivalence but breaks exact equality.
  AffineModule b = renamedCopy(a);
  CHECK(verify_module(b).empty());
  CHECK(alpha_equivalent(a, b));
  CHECK(!(a == b));

  AffineModule e = gen_gemm(4);
  e.funcs[0].name = "other";
  CHECK(!alpha_equivalent(a, e));

  CHECK(!alpha_equivalent(gen_gemm(4), gen_gemm(8)));

  // A structural difference hiding behind identical names is caught.
  AffineModule f = gen_gemm(4);
  AffineModule g = gen_gemm(4);
  g.funcs[0].args[0].type.space = 7;
  CHECK(!alpha_equivalent(f, g));
}

TEST_CASE("alpha equivalence requires a consistent bijection") {
  // Two constants with distinct names vs. swapped uses.
  AffineFunc lhs;
  lhs.name = "f";
  lhs.args.push_back({"m", MemRefType{4, 0}});
  lhs.body.push_back(AffineOp{ConstantOp{"x", 1}});
  lhs.body.push_back(AffineOp{ConstantOp{"y", 1}});
  lhs.body.push_back(AffineOp{AddOp{"s", "x", "y"}});
  lhs.body.push_back(AffineOp{ReturnOp{}});

  AffineFunc rhs = lhs;
  CHECK(alpha_equivalent(wrap(lhs), wrap(rhs)));

  // Swap the operand order: still two constants of value 1, but the mapping
  // x->y, y->x conflicts with the definition order mapping x->x.
  rhs.body[2] = AffineOp{AddOp{"s", "y", "x"}};
  CHECK(!alpha_equivalent(wrap(lhs), wrap(rhs)));
}
