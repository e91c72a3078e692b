//===- ints.hpp - Two's-complement helpers -----------------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_INTS_HPP
#define LOFT_INTS_HPP

#include <cstdint>

namespace loft {

// All i32 arithmetic in the interpreter, the hardware simulator, and the
// emitted RTL wraps at 32 bits; these keep the three bit-exact.

inline int32_t wrap_add32(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) + static_cast<uint32_t>(b));
}

inline int32_t wrap_mul32(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) * static_cast<uint32_t>(b));
}

/// Mask a raw value to `width` bits (width 1..32).
inline uint32_t mask_to_width(uint64_t v, int width) {
  return width >= 32 ? static_cast<uint32_t>(v)
                     : static_cast<uint32_t>(v) & ((1u << width) - 1u);
}

} // namespace loft

#endif // LOFT_INTS_HPP
