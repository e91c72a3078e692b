//===- gemm.cpp - Canonical GEMM module generator -----------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/affine_ir.hpp"

#include <stdexcept>

namespace loft {

const char *const kGemmFuncName = "mlir_funcSYCL_class_mxm_kernel";

// C(arg0) = A(arg1) * B(arg2), all n*n row-major flattened:
//
//   for i (arg3):
//     for j (arg4):
//       acc = 0
//       for k (arg5), acc (arg6):
//         acc += B[k*n + j] * A[k + i*n]
//       C[j + i*n] = acc
//
// The value-id spelling follows the shipped gemm32 fixture so the n = 32
// instance stays alpha-equal to it (and identical under printing except for
// the fixture's dotted constant name).
AffineModule gen_gemm(int64_t n) {
  if (n < 1)
    throw std::invalid_argument("gen_gemm: n must be >= 1");

  const MemRefType mem{n * n, /*space=*/1};

  LoadOp load_b{"2", "arg2", AffineExpr{{{"arg5", n}, {"arg4", 1}}, 0}};
  LoadOp load_a{"3", "arg1", AffineExpr{{{"arg5", 1}, {"arg3", n}}, 0}};
  MulOp mul{"4", "2", "3"};
  AddOp add{"5", "4", "arg6"};
  YieldOp yield{{"5"}};

  ForOp inner;
  inner.induction_var = "arg5";
  inner.lower = 0;
  inner.upper = n;
  inner.step = 1;
  inner.iter_args = {{"arg6", "c0_i32"}};
  inner.results = {"1"};
  inner.body = {{load_b}, {load_a}, {mul}, {add}, {yield}};

  StoreOp store{"1", "arg0", AffineExpr{{{"arg4", 1}, {"arg3", n}}, 0}};

  ForOp middle;
  middle.induction_var = "arg4";
  middle.lower = 0;
  middle.upper = n;
  middle.step = 1;
  middle.body = {{ConstantOp{"c0_i32", 0}}, {inner}, {store}};

  ForOp outer;
  outer.induction_var = "arg3";
  outer.lower = 0;
  outer.upper = n;
  outer.step = 1;
  outer.body = {{middle}};

  AffineFunc func;
  func.name = kGemmFuncName;
  func.args = {{"arg0", mem}, {"arg1", mem}, {"arg2", mem}};
  func.body = {{outer}, {ReturnOp{}}};

  return AffineModule{{func}};
}

} // namespace loft
