//===- bench.hpp - GEMM cycle-count benchmark table -----------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Builds the nested-vs-flattened GEMM comparison: for each requested size and
// loop variant, generate the kernel, lower it, simulate one run on seeded
// random matrices, and record cycles plus the datapath resource counts. Every
// row is cross-checked against the reference interpreter before it is
// admitted to the table, so a reported cycle count always belongs to a run
// that computed the right product.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_BENCH_HPP
#define LOFT_BENCH_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace loft {

enum class GemmVariant {
  Nested,    ///< gen_gemm(n) as written: three nested loops.
  Flattened, ///< innermost loop fully unrolled before lowering.
};

const char *to_string(GemmVariant variant);
std::optional<GemmVariant> parse_variant(std::string_view name);

struct BenchRow {
  int64_t n = 0;
  GemmVariant variant = GemmVariant::Nested;
  int64_t cycles = 0;
  int64_t multipliers = 0;
  int64_t adders = 0;
  int64_t registers = 0;

  bool operator==(const BenchRow &) const = default;
};

struct BenchTable {
  uint64_t seed = 0;
  std::vector<BenchRow> rows;

  bool operator==(const BenchTable &) const = default;
};

class BenchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct BenchOptions {
  uint64_t seed = 42;
  /// Worker threads; rows are independent (immutable inputs), so any job
  /// count produces the same table.
  int jobs = 1;
  /// Simulation bound per row; 0 derives one comfortably above the nested
  /// cycle count for that size.
  int64_t max_cycles = 0;
};

/// One row per (size, variant) pair, sizes outer, in the given order. Inputs
/// for each row come from a stream keyed on (seed, size, variant), so the
/// table is a pure function of its arguments regardless of job count.
/// Throws BenchError on bad arguments or an interpreter mismatch; simulation
/// errors (e.g. Timeout) propagate.
BenchTable run_bench(const std::vector<int64_t> &sizes,
                     const std::vector<GemmVariant> &variants,
                     const BenchOptions &opts = {});

/// `n,variant,cycles,multipliers,adders,registers` rows under a comment
/// header that records the seed.
std::string to_csv(const BenchTable &table);

/// Column-aligned rendering of the same rows for terminals.
std::string to_text(const BenchTable &table);

} // namespace loft

#endif // LOFT_BENCH_HPP
