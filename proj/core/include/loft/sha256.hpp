//===- sha256.hpp - SHA-256 for fixture manifests ----------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_SHA256_HPP
#define LOFT_SHA256_HPP

#include <string>
#include <string_view>

namespace loft {

/// FIPS 180-4 SHA-256 of `data`, returned as 64 lowercase hex characters.
std::string sha256_hex(std::string_view data);

} // namespace loft

#endif // LOFT_SHA256_HPP
