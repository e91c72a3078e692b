//===- bench.cpp - GEMM cycle-count benchmark table -----------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/bench.hpp"

#include "loft/affine_ir.hpp"
#include "loft/hw_ir.hpp"
#include "loft/lowering.hpp"
#include "loft/memory_image.hpp"
#include "loft/rng.hpp"
#include "loft/simulator.hpp"
#include "loft/transforms.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

using namespace loft;

const char *loft::to_string(GemmVariant variant) {
  return variant == GemmVariant::Nested ? "nested" : "flattened";
}

std::optional<GemmVariant> loft::parse_variant(std::string_view name) {
  if (name == "nested")
    return GemmVariant::Nested;
  if (name == "flattened")
    return GemmVariant::Flattened;
  return std::nullopt;
}

namespace {

MemoryImage randomMatrix(Rng &rng, const std::string &name, int64_t n) {
  MemoryImage image;
  image.name = name;
  image.data.resize(static_cast<size_t>(n * n));
  for (int32_t &word : image.data)
    word = rng.next_i32();
  return image;
}

BenchRow runRow(int64_t n, GemmVariant variant, const BenchOptions &opts) {
  AffineModule module = gen_gemm(n);
  if (variant == GemmVariant::Flattened)
    module = unroll_full(module, {kGemmFuncName, {0, 0, 0}});
  const AffineFunc &func = module.funcs[0];
  HwComponent hw = lower(func);

  Rng rng(mix_seed(opts.seed, std::string("bench-") + to_string(variant) +
                                  "-" + std::to_string(n)));
  MemoryImage out;
  out.name = "arg0";
  out.data.assign(static_cast<size_t>(n * n), 0);
  std::vector<MemoryImage> inputs = {
      out,                          // C, accumulated in place
      randomMatrix(rng, "arg1", n), // A
      randomMatrix(rng, "arg2", n), // B
  };

  // The nested walk costs a little over 3n^3 cycles; 8n^3 leaves slack
  // without letting a wedged run spin forever.
  SimOptions sim;
  sim.max_cycles = opts.max_cycles > 0 ? opts.max_cycles : 8 * n * n * n + 1024;
  SimResult result = simulate(hw, inputs, sim);

  std::vector<MemoryImage> expected = interpret(func, inputs);
  for (const MemoryImage &image : expected) {
    const MemoryImage *got = find_image(result.memories, image.name);
    if (!got || got->data != image.data)
      throw BenchError(std::string("bench: simulated memories for n=") +
                       std::to_string(n) + " " + to_string(variant) +
                       " disagree with the interpreter");
  }

  ResourceReport resources = resource_counts(hw);
  BenchRow row;
  row.n = n;
  row.variant = variant;
  row.cycles = result.cycles;
  row.multipliers = resources.multipliers;
  row.adders = resources.adders;
  row.registers = resources.registers;
  return row;
}

} // namespace

BenchTable loft::run_bench(const std::vector<int64_t> &sizes,
                           const std::vector<GemmVariant> &variants,
                           const BenchOptions &opts) {
  if (sizes.empty())
    throw BenchError("bench: no sizes given");
  if (variants.empty())
    throw BenchError("bench: no variants given");
  for (int64_t n : sizes)
    if (n < 1)
      throw BenchError("bench: size " + std::to_string(n) +
                       " is not positive");

  std::vector<std::pair<int64_t, GemmVariant>> specs;
  for (int64_t n : sizes)
    for (GemmVariant variant : variants)
      specs.emplace_back(n, variant);

  BenchTable table;
  table.seed = opts.seed;
  table.rows.resize(specs.size());

  int jobs = std::clamp<int>(opts.jobs, 1, static_cast<int>(specs.size()));
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < specs.size();
         i = next.fetch_add(1)) {
      try {
        table.rows[i] = runRow(specs[i].first, specs[i].second, opts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int i = 0; i < jobs; ++i)
      pool.emplace_back(worker);
    for (std::thread &thread : pool)
      thread.join();
  }
  if (failure)
    std::rethrow_exception(failure);
  return table;
}

std::string loft::to_csv(const BenchTable &table) {
  std::ostringstream os;
  os << "# loft bench seed=" << table.seed << "\n";
  os << "n,variant,cycles,multipliers,adders,registers\n";
  for (const BenchRow &row : table.rows)
    os << row.n << ',' << to_string(row.variant) << ',' << row.cycles << ','
       << row.multipliers << ',' << row.adders << ',' << row.registers
       << "\n";
  return os.str();
}

std::string loft::to_text(const BenchTable &table) {
  const std::array<std::string, 6> headers = {
      "n", "variant", "cycles", "multipliers", "adders", "registers"};
  std::vector<std::array<std::string, 6>> cells;
  for (const BenchRow &row : table.rows)
    cells.push_back({std::to_string(row.n), to_string(row.variant),
                     std::to_string(row.cycles),
                     std::to_string(row.multipliers),
                     std::to_string(row.adders),
                     std::to_string(row.registers)});

  std::array<size_t, 6> width;
  for (size_t c = 0; c < 6; ++c) {
    width[c] = headers[c].size();
    for (const auto &row : cells)
      width[c] = std::max(width[c], row[c].size());
  }

  // Numbers right-align; the variant column (index 1) left-aligns.
  auto pad = [&](const std::string &text, size_t c) {
    std::string fill(width[c] - text.size(), ' ');
    return c == 1 ? text + fill : fill + text;
  };
  auto line = [&](const std::array<std::string, 6> &row, std::ostream &os) {
    for (size_t c = 0; c < 6; ++c)
      os << (c ? "  " : "") << pad(row[c], c);
    os << "\n";
  };

  std::ostringstream os;
  os << "# loft bench seed=" << table.seed << "\n";
  line(headers, os);
  for (const auto &row : cells)
    line(row, os);
  return os.str();
}
