//===- transforms.hpp - Loop unrolling ----------------------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Source-level loop unrolling on verified modules. Only innermost loops can
// be unrolled: their bodies are straight-line, so duplication is pure SSA
// substitution — the induction variable becomes a constant (full unroll) or
// an offset term (partial), the carried value threads through the copies,
// and every cloned definition gets a fresh collision-free id.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_TRANSFORMS_HPP
#define LOFT_TRANSFORMS_HPP

#include "loft/affine_ir.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loft {

/// Names one loop: the function holding it plus the loop's position at each
/// nesting level, counting only affine.for ops ("0.2.1" = fourth level-two
/// loop inside the third loop inside the first top-level loop).
struct LoopPath {
  std::string func;
  std::vector<int> indices;

  bool operator==(const LoopPath &) const = default;
};

/// Renders just the index part: "0.0.0".
std::string to_string(const LoopPath &path);

/// Parses "0.0.0"-style index lists; nullopt on anything else.
std::optional<std::vector<int>> parse_loop_indices(const std::string &text);

class TransformError : public std::runtime_error {
public:
  enum class Kind { InvalidPath, NotInnermost, NonDividingFactor };

  TransformError(Kind kind, const std::string &message)
      : std::runtime_error(message), kind(kind) {}

  Kind kind;
};

/// Replaces the loop at `path` with trip-count copies of its body. The loop's
/// results are rewired to the values the final copy yields (to the iter_args
/// inits when the trip count is zero). Throws TransformError; the input
/// module must verify.
AffineModule unroll_full(const AffineModule &module, const LoopPath &path);

/// Keeps the loop but repeats its body `factor` times per iteration, scaling
/// the step accordingly. `factor` must divide the trip count exactly;
/// factor == trip count delegates to unroll_full, factor == 1 is the
/// identity.
AffineModule unroll_by_factor(const AffineModule &module, const LoopPath &path,
                              int64_t factor);

/// Paths of every innermost loop (loops whose bodies contain no loops), in
/// program order. Handy for "unroll everything innermost" drivers and tests.
std::vector<LoopPath> innermost_loops(const AffineModule &module);

} // namespace loft

#endif // LOFT_TRANSFORMS_HPP
