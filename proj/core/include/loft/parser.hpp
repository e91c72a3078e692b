//===- parser.hpp - Textual affine dialect parser -----------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Parses the closed textual subset:
//
//   func.func @name(%arg0: memref<1024xi32, 1>, ...) {
//     affine.for %i = 0 to 32 [step C] [iter_args(%acc = %init) -> (i32)] {
//       %c = arith.constant 0 : i32
//       %v = affine.load %m[%i * 32 + %j] : memref<1024xi32, 1>
//       affine.store %v, %m[...] : memref<1024xi32, 1>
//       %p = arith.muli %a, %b : i32
//       %s = arith.addi %a, %b : i32
//       affine.yield %s : i32
//     }
//     return
//   }
//
// Index expressions are sums of `%var`, `%var * C`, `C * %var`, and integer
// constants. `//` comments run to end of line; LF and CRLF both work. Value
// identifiers may contain letters, digits, `_`, and `.` (the dotted form
// shows up in scanned listings, e.g. `%c0.i32` for the usual `%c0_i32`;
// both spellings are accepted and mean nothing special).
//
// Anything outside the subset is rejected with a located ParseError whose
// `expected` field names what the grammar supports at that point. Accepted
// input always satisfies verify_module: def-before-use, operand kinds,
// terminator rules, and loop-bound sanity are all enforced during the parse.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_PARSER_HPP
#define LOFT_PARSER_HPP

#include "loft/affine_ir.hpp"

#include <optional>
#include <string>

namespace loft {

struct SourceSpan {
  int line = 1;   // 1-based
  int column = 1; // 1-based
  int length = 0; // in characters
};

struct ParseError {
  SourceSpan span;
  std::string expected;
  std::string found;

  /// "line:col: expected X, found Y" — the CLI prefixes the file path.
  std::string to_string() const;
};

struct ParseResult {
  std::optional<AffineModule> module;
  std::optional<ParseError> error;

  bool ok() const { return module.has_value(); }
};

/// Parse UTF-8 text into a module. Never throws on any byte input; failures
/// come back as the first ParseError encountered.
ParseResult parse(const std::string &text);

} // namespace loft

#endif // LOFT_PARSER_HPP
