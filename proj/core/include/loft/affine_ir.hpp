//===- affine_ir.hpp - Affine loop-nest IR ------------------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// In-memory form of the closed affine subset loft compiles: functions over
// 1-D i32 memrefs, perfectly analyzable counted loops with optional
// loop-carried scalars, affine loads/stores, and 32-bit multiply/add.
//
// Everything here is a plain value type; modules are immutable by convention
// once verified and safe to share across threads.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_AFFINE_IR_HPP
#define LOFT_AFFINE_IR_HPP

#include "loft/diagnostics.hpp"
#include "loft/memory_image.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace loft {

/// SSA value name without the leading '%'.
using ValueId = std::string;

/// 1-D static memref of 32-bit elements. The space tag is parsed and carried
/// through but has no semantics.
struct MemRefType {
  int64_t length = 0;
  int space = 0;

  static constexpr int kElementWidth = 32;

  bool operator==(const MemRefType &) const = default;
};

/// One `coeff * %var` term of an affine index expression.
struct AffineTerm {
  ValueId var;
  int64_t coeff = 1;

  bool operator==(const AffineTerm &) const = default;
};

/// Linear combination of induction variables plus a constant. Terms keep
/// their textual order so printing round-trips exactly.
struct AffineExpr {
  std::vector<AffineTerm> terms;
  int64_t constant = 0;

  bool operator==(const AffineExpr &) const = default;
};

struct ConstantOp {
  ValueId result;
  int32_t value = 0;
  bool operator==(const ConstantOp &) const = default;
};

struct LoadOp {
  ValueId result;
  ValueId memref;
  AffineExpr index;
  bool operator==(const LoadOp &) const = default;
};

struct StoreOp {
  ValueId value;
  ValueId memref;
  AffineExpr index;
  bool operator==(const StoreOp &) const = default;
};

struct MulOp {
  ValueId result;
  ValueId lhs;
  ValueId rhs;
  bool operator==(const MulOp &) const = default;
};

struct AddOp {
  ValueId result;
  ValueId lhs;
  ValueId rhs;
  bool operator==(const AddOp &) const = default;
};

struct YieldOp {
  std::vector<ValueId> values;
  bool operator==(const YieldOp &) const = default;
};

struct ReturnOp {
  bool operator==(const ReturnOp &) const = default;
};

/// Loop-carried scalar: `name` is bound in the body, `init` seeds it.
struct IterArg {
  ValueId name;
  ValueId init;
  bool operator==(const IterArg &) const = default;
};

struct AffineOp;

/// Counted loop with constant bounds. `results` receives the final values of
/// the iter_args once the loop finishes; the two lists always pair up.
struct ForOp {
  ValueId induction_var;
  int64_t lower = 0;
  int64_t upper = 0;
  int64_t step = 1;
  std::vector<IterArg> iter_args;
  std::vector<ValueId> results;
  std::vector<AffineOp> body;

  int64_t trip_count() const { return (upper - lower) / step; }

  bool operator==(const ForOp &) const;
};

struct AffineOp {
  std::variant<ConstantOp, LoadOp, StoreOp, MulOp, AddOp, ForOp, YieldOp,
               ReturnOp>
      op;

  template <typename T> const T *as() const { return std::get_if<T>(&op); }
  template <typename T> T *as() { return std::get_if<T>(&op); }
  template <typename T> bool is() const { return std::holds_alternative<T>(op); }

  bool operator==(const AffineOp &) const;
};

struct FuncArg {
  ValueId id;
  MemRefType type;
  bool operator==(const FuncArg &) const = default;
};

struct AffineFunc {
  std::string name;
  std::vector<FuncArg> args;
  std::vector<AffineOp> body;

  bool operator==(const AffineFunc &) const = default;
};

struct AffineModule {
  std::vector<AffineFunc> funcs;

  bool operator==(const AffineModule &) const = default;

  const AffineFunc *find_func(const std::string &name) const;
};

//===----------------------------------------------------------------------===//
// Verification
//===----------------------------------------------------------------------===//

/// Structural verifier. Returns one diagnostic per violation: SSA dominance,
/// operand kinds (memref / induction / i32), loop bound sanity, yield/return
/// placement, and type invariants. An empty result means the module is in the
/// supported subset and every other operation in loft may assume so.
Diagnostics verify_module(const AffineModule &m);

//===----------------------------------------------------------------------===//
// Affine expression evaluation
//===----------------------------------------------------------------------===//

class EvalError : public std::runtime_error {
public:
  enum class Kind { OutOfBounds, UnboundVariable };

  EvalError(Kind kind, std::string message, int64_t index = 0,
            int64_t length = 0)
      : std::runtime_error(std::move(message)), kind(kind), index(index),
        length(length) {}

  Kind kind;
  int64_t index;
  int64_t length;
};

using IndexEnv = std::unordered_map<ValueId, int64_t>;

/// Exact 64-bit evaluation of `sum(coeff * env[var]) + constant`.
/// Throws EvalError{UnboundVariable} when a variable is missing from env.
int64_t eval_affine_expr(const AffineExpr &e, const IndexEnv &env);

//===----------------------------------------------------------------------===//
// Reference interpreter (the golden functional model)
//===----------------------------------------------------------------------===//

/// Sequentially executes `f` against the given memory images and returns the
/// final images in argument order. All i32 arithmetic wraps at 32 bits.
///
/// Preconditions (checked): the module verifies, and every memref argument
/// has an image whose name matches the argument id and whose data length
/// matches the memref length; violations throw std::invalid_argument.
/// Runtime faults throw EvalError{OutOfBounds}.
std::vector<MemoryImage> interpret(const AffineFunc &f,
                                   const std::vector<MemoryImage> &mems);

//===----------------------------------------------------------------------===//
// GEMM generator
//===----------------------------------------------------------------------===//

/// Builds the canonical three-loop matrix multiply over n×n row-major
/// matrices flattened into length-n² memrefs: C(arg0) = A(arg1) × B(arg2).
/// The n = 32 instance matches the shipped gemm32 fixture modulo value-id
/// spelling. Throws std::invalid_argument when n < 1.
AffineModule gen_gemm(int64_t n);

/// Name of the function gen_gemm emits.
extern const char *const kGemmFuncName;

//===----------------------------------------------------------------------===//
// Structural comparison modulo value-id names
//===----------------------------------------------------------------------===//

/// True when the two modules are identical up to a consistent renaming of
/// SSA value ids (function names, types, bounds, constants, and term order
/// must all match exactly).
bool alpha_equivalent(const AffineModule &a, const AffineModule &b);

} // namespace loft

#endif // LOFT_AFFINE_IR_HPP
