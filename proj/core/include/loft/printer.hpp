//===- printer.hpp - Textual affine dialect printer ----------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_PRINTER_HPP
#define LOFT_PRINTER_HPP

#include "loft/affine_ir.hpp"

#include <string>

namespace loft {

/// Render a module in the same concrete syntax `parse` accepts, with 2-space
/// indentation. Deterministic: the same module always yields the same bytes,
/// and parse(print(m)) == m for verified modules. Index expressions keep
/// their stored term order; a memory space of 0 is omitted.
///
/// Loops with more than one iter_arg have no spelling in the textual subset;
/// printing one throws std::invalid_argument.
std::string print_module(const AffineModule &module);

/// Just the expression part, e.g. "%arg5 * 32 + %arg4". Used by diagnostics
/// and tests; `print_module` composes it.
std::string print_affine_expr(const AffineExpr &expr);

} // namespace loft

#endif // LOFT_PRINTER_HPP
