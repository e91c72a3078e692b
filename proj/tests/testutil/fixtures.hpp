//===- fixtures.hpp - Fixture manifest re-checking -------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_TEST_FIXTURES_HPP
#define LOFT_TEST_FIXTURES_HPP

#include "loft/diagnostics.hpp"

#include <string>

namespace loft_test {

/// Re-validates every entry of `<dir>/manifest.json`: the committed bytes
/// must hash to the recorded sha256, and entries with a pipeline check must
/// match a fresh run of their generating pipeline (after dropping leading
/// "// golden:" provenance lines). Returns one diagnostic per failure,
/// located at the fixture id; empty means the checkout is pristine.
loft::Diagnostics check_fixtures(const std::string &dir);

} // namespace loft_test

#endif // LOFT_TEST_FIXTURES_HPP
