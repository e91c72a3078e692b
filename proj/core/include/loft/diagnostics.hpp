//===- diagnostics.hpp - Shared diagnostic types ----------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_DIAGNOSTICS_HPP
#define LOFT_DIAGNOSTICS_HPP

#include <string>
#include <vector>

namespace loft {

/// A single finding from a verifier or netlist checker. `location` is a
/// slash-separated path into the offending structure (function, op index,
/// group, wire); verifiers never throw, they return lists of these.
struct Diagnostic {
  std::string location;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline std::string to_string(const Diagnostic &d) {
  return d.location + ": " + d.message;
}

inline std::string to_string(const Diagnostics &ds) {
  std::string out;
  for (const Diagnostic &d : ds) {
    if (!out.empty())
      out += "\n";
    out += to_string(d);
  }
  return out;
}

} // namespace loft

#endif // LOFT_DIAGNOSTICS_HPP
