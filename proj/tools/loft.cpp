//===- loft.cpp - Pipeline command-line driver -----------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Wires the pipeline end to end: parse -> verify -> (unroll) -> lower ->
// {emit Verilog + hardware IR + testbench | interpret | simulate | bench |
// report}. Every subcommand is a thin composition of library calls; the tool
// adds argument handling, file I/O, and diagnostics only.
//
//   loft gen gemm 32 -o fixtures/gemm32.mlir
//   loft compile kernel.mlir --unroll 0.0.0:full -o out/
//   loft run kernel.mlir --mem arg1=a.json --mem arg2=b.json
//   loft simulate kernel.mlir --max-cycles 100000
//   loft bench --sizes 4,8,16 --variants nested,flattened --seed 42
//   loft report kernel.mlir --json
//
// Exit codes: 0 success, 1 input/parse/verify errors, 2 transform/lower/
// backend errors, 3 runtime errors (timeout, out of bounds, bench mismatch),
// 64 usage errors.
//
//===----------------------------------------------------------------------===//

#include "loft/affine_ir.hpp"
#include "loft/bench.hpp"
#include "loft/hw_ir.hpp"
#include "loft/lowering.hpp"
#include "loft/memory_image.hpp"
#include "loft/parser.hpp"
#include "loft/printer.hpp"
#include "loft/rtl_backend.hpp"
#include "loft/simulator.hpp"
#include "loft/transforms.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace loft;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;     // I/O, parse, verify
constexpr int kExitTransform = 2; // unroll, lower, backend
constexpr int kExitRuntime = 3;   // timeout, out of bounds, bench mismatch
constexpr int kExitUsage = 64;

//===----------------------------------------------------------------------===//
// Small I/O helpers
//===----------------------------------------------------------------------===//

std::optional<std::string> slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool spill(const std::string &path, const std::string &bytes) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  return static_cast<bool>(out.flush());
}

std::string defaultOutDir() {
  const char *dir = std::getenv("LOFT_OUT_DIR");
  return dir && *dir ? dir : ".";
}

/// "kernel" from "path/to/kernel.mlir".
std::string stemOf(const std::string &path) {
  return std::filesystem::path(path).stem().string();
}

//===----------------------------------------------------------------------===//
// Front end: load, verify, unroll
//===----------------------------------------------------------------------===//

std::optional<AffineModule> loadModule(const std::string &path, int &rc) {
  std::optional<std::string> text = slurp(path);
  if (!text) {
    std::cerr << path << ":1:1: error: cannot open file\n";
    rc = kExitInput;
    return std::nullopt;
  }
  ParseResult result = parse(*text);
  if (!result.ok()) {
    std::cerr << path << ":" << result.error->to_string() << "\n";
    rc = kExitInput;
    return std::nullopt;
  }
  // The parser enforces the verifier's rules already; this guards the tool
  // against drift between the two.
  Diagnostics diags = verify_module(*result.module);
  if (!diags.empty()) {
    for (const Diagnostic &d : diags)
      std::cerr << path << ":1:1: error: " << d.location << ": " << d.message
                << "\n";
    rc = kExitInput;
    return std::nullopt;
  }
  return std::move(result.module);
}

struct UnrollSpec {
  std::vector<int> indices;
  bool full = true;
  int64_t factor = 0;
};

/// "0.0.0", "0.0.0:full", or "0.0.0:4". Nullopt on bad syntax.
std::optional<UnrollSpec> parseUnrollSpec(const std::string &text) {
  UnrollSpec spec;
  std::string head = text;
  if (size_t colon = text.find(':'); colon != std::string::npos) {
    head = text.substr(0, colon);
    std::string tail = text.substr(colon + 1);
    if (tail != "full") {
      try {
        size_t used = 0;
        spec.factor = std::stoll(tail, &used);
        if (used != tail.size() || spec.factor < 1)
          return std::nullopt;
        spec.full = false;
      } catch (const std::exception &) {
        return std::nullopt;
      }
    }
  }
  std::optional<std::vector<int>> indices = parse_loop_indices(head);
  if (!indices)
    return std::nullopt;
  spec.indices = std::move(*indices);
  return spec;
}

/// Applies --unroll when given. Returns false (and sets rc) on failure.
bool applyUnroll(AffineModule &module, const std::string &flag,
                 const std::string &path, int &rc) {
  if (flag.empty())
    return true;
  std::optional<UnrollSpec> spec = parseUnrollSpec(flag);
  if (!spec) {
    std::cerr << "error: bad --unroll '" << flag
              << "': want INDEX[.INDEX]*[:full|:FACTOR]\n";
    rc = kExitUsage;
    return false;
  }
  LoopPath target{module.funcs[0].name, spec->indices};
  try {
    module = spec->full ? unroll_full(module, target)
                        : unroll_by_factor(module, target, spec->factor);
  } catch (const TransformError &e) {
    std::cerr << path << ":1:1: error: unroll: " << e.what() << "\n";
    rc = kExitTransform;
    return false;
  }
  return true;
}

//===----------------------------------------------------------------------===//
// Memory images
//===----------------------------------------------------------------------===//

/// Loads repeated `--mem NAME=path.json` bindings; the flag's NAME wins over
/// whatever name the file carries.
std::optional<std::vector<MemoryImage>>
loadImages(const std::vector<std::string> &specs, int &rc) {
  std::vector<MemoryImage> images;
  for (const std::string &spec : specs) {
    size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      std::cerr << "error: bad --mem '" << spec << "': want NAME=path.json\n";
      rc = kExitUsage;
      return std::nullopt;
    }
    std::string name = spec.substr(0, eq);
    std::string path = spec.substr(eq + 1);
    std::optional<std::string> text = slurp(path);
    if (!text) {
      std::cerr << path << ":1:1: error: cannot open file\n";
      rc = kExitInput;
      return std::nullopt;
    }
    try {
      MemoryImage image = memory_image_from_json(*text);
      image.name = name;
      images.push_back(std::move(image));
    } catch (const std::exception &e) {
      std::cerr << path << ":1:1: error: " << e.what() << "\n";
      rc = kExitInput;
      return std::nullopt;
    }
  }
  return images;
}

/// Pads `images` to cover every memref argument of `func` (zeros plus a
/// warning for the unbound ones) and validates names and lengths up front so
/// later stages only ever see well-formed image sets.
bool completeImages(const AffineFunc &func, std::vector<MemoryImage> &images,
                    int &rc) {
  for (const MemoryImage &image : images) {
    const FuncArg *arg = nullptr;
    for (const FuncArg &candidate : func.args)
      if (candidate.id == image.name)
        arg = &candidate;
    if (!arg) {
      std::cerr << "error: --mem '" << image.name
                << "' matches no memref argument of @" << func.name << "\n";
      rc = kExitUsage;
      return false;
    }
    if (static_cast<int64_t>(image.data.size()) != arg->type.length) {
      std::cerr << "error: image '" << image.name << "' holds "
                << image.data.size() << " words, %" << image.name
                << " is memref<" << arg->type.length << "xi32>\n";
      rc = kExitInput;
      return false;
    }
  }
  for (const FuncArg &arg : func.args) {
    if (find_image(images, arg.id))
      continue;
    std::cerr << "warning: memory '" << arg.id << "' defaults to zeros ("
              << arg.type.length << " words)\n";
    MemoryImage zero;
    zero.name = arg.id;
    zero.data.assign(static_cast<size_t>(arg.type.length), 0);
    images.push_back(std::move(zero));
  }
  return true;
}

nlohmann::json imagesToJson(const std::vector<MemoryImage> &images) {
  nlohmann::json arr = nlohmann::json::array();
  for (const MemoryImage &image : images) {
    nlohmann::json j;
    j["name"] = image.name;
    j["length"] = image.data.size();
    j["data"] = image.data;
    arr.push_back(std::move(j));
  }
  return arr;
}

//===----------------------------------------------------------------------===//
// Subcommands
//===----------------------------------------------------------------------===//

int runGen(const std::string &kind, int64_t n, std::string out) {
  if (kind != "gemm") {
    std::cerr << "error: unknown generator '" << kind << "' (have: gemm)\n";
    return kExitUsage;
  }
  if (out.empty())
    out = defaultOutDir() + "/gemm" + std::to_string(n) + ".mlir";
  if (!spill(out, print_module(gen_gemm(n)))) {
    std::cerr << out << ":1:1: error: cannot write file\n";
    return kExitInput;
  }
  return kExitOk;
}

int runCompile(const std::string &input, const std::string &unroll,
               std::string outdir, const std::vector<std::string> &emits,
               const std::vector<std::string> &mems, int64_t max_cycles) {
  bool want_sv = false, want_hwir = false, want_tb = false;
  for (const std::string &emit : emits) {
    if (emit == "verilog")
      want_sv = true;
    else if (emit == "hwir")
      want_hwir = true;
    else if (emit == "testbench")
      want_tb = true;
    else {
      std::cerr << "error: unknown --emit '" << emit
                << "' (have: verilog, hwir, testbench)\n";
      return kExitUsage;
    }
  }

  int rc = kExitOk;
  std::optional<AffineModule> module = loadModule(input, rc);
  if (!module)
    return rc;
  if (!applyUnroll(*module, unroll, input, rc))
    return rc;

  HwComponent hw;
  std::string sv;
  try {
    hw = lower(module->funcs[0]);
    if (want_sv || want_tb)
      sv = emit_verilog(hw);
  } catch (const LowerError &e) {
    std::cerr << input << ":1:1: error: lower: " << e.what() << "\n";
    return kExitTransform;
  } catch (const BackendError &e) {
    std::cerr << input << ":1:1: error: emit: " << e.what() << "\n";
    return kExitTransform;
  }
  if (want_sv) {
    // Self-check: the emitted text must satisfy the netlist checker.
    Diagnostics diags = netlist_check(hw, sv);
    if (!diags.empty()) {
      for (const Diagnostic &d : diags)
        std::cerr << input << ":1:1: error: netlist: " << d.location << ": "
                  << d.message << "\n";
      return kExitTransform;
    }
  }

  if (outdir.empty())
    outdir = defaultOutDir();
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  std::string stem = outdir + "/" + stemOf(input);

  std::vector<std::pair<std::string, const std::string *>> artifacts;
  std::string hwir, tb;
  if (want_hwir)
    hwir = dump_hwir(hw);
  if (want_tb) {
    std::optional<std::vector<MemoryImage>> images = loadImages(mems, rc);
    if (!images)
      return rc;
    if (!completeImages(module->funcs[0], *images, rc))
      return rc;
    tb = emit_testbench(hw, *images, max_cycles);
  }
  if (want_sv)
    artifacts.emplace_back(stem + ".sv", &sv);
  if (want_hwir)
    artifacts.emplace_back(stem + ".hwir", &hwir);
  if (want_tb)
    artifacts.emplace_back(stem + "_tb.sv", &tb);

  for (const auto &[path, bytes] : artifacts) {
    if (!spill(path, *bytes)) {
      std::cerr << path << ":1:1: error: cannot write file\n";
      return kExitInput;
    }
  }
  return kExitOk;
}

int runRun(const std::string &input, const std::string &unroll,
           const std::vector<std::string> &mems) {
  int rc = kExitOk;
  std::optional<AffineModule> module = loadModule(input, rc);
  if (!module)
    return rc;
  if (!applyUnroll(*module, unroll, input, rc))
    return rc;
  std::optional<std::vector<MemoryImage>> images = loadImages(mems, rc);
  if (!images)
    return rc;
  if (!completeImages(module->funcs[0], *images, rc))
    return rc;
  try {
    std::vector<MemoryImage> final = interpret(module->funcs[0], *images);
    std::cout << imagesToJson(final).dump(2) << "\n";
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int runSimulate(const std::string &input, const std::string &unroll,
                const std::vector<std::string> &mems, int64_t max_cycles,
                bool trace) {
  int rc = kExitOk;
  std::optional<AffineModule> module = loadModule(input, rc);
  if (!module)
    return rc;
  if (!applyUnroll(*module, unroll, input, rc))
    return rc;
  std::optional<std::vector<MemoryImage>> images = loadImages(mems, rc);
  if (!images)
    return rc;
  if (!completeImages(module->funcs[0], *images, rc))
    return rc;

  HwComponent hw;
  try {
    hw = lower(module->funcs[0]);
  } catch (const LowerError &e) {
    std::cerr << input << ":1:1: error: lower: " << e.what() << "\n";
    return kExitTransform;
  }

  SimOptions options;
  options.max_cycles = max_cycles;
  options.trace = trace;
  try {
    SimResult result = simulate(hw, *images, options);
    for (const std::string &line : result.trace)
      std::cerr << line << "\n";
    nlohmann::json out;
    out["cycles"] = result.cycles;
    out["memories"] = imagesToJson(result.memories);
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int runBench(const std::vector<int64_t> &sizes,
             const std::vector<std::string> &variant_names, uint64_t seed,
             int jobs, int64_t max_cycles, const std::string &format,
             const std::string &out) {
  std::vector<GemmVariant> variants;
  for (const std::string &name : variant_names) {
    std::optional<GemmVariant> variant = parse_variant(name);
    if (!variant) {
      std::cerr << "error: unknown variant '" << name
                << "' (have: nested, flattened)\n";
      return kExitUsage;
    }
    variants.push_back(*variant);
  }
  if (format != "csv" && format != "table") {
    std::cerr << "error: unknown --format '" << format
              << "' (have: csv, table)\n";
    return kExitUsage;
  }
  if (sizes.empty() || variants.empty()) {
    std::cerr << "error: --sizes and --variants must not be empty\n";
    return kExitUsage;
  }
  for (int64_t n : sizes) {
    if (n < 1) {
      std::cerr << "error: size " << n << " is not positive\n";
      return kExitUsage;
    }
  }

  BenchOptions options;
  options.seed = seed;
  options.jobs = jobs;
  options.max_cycles = max_cycles;
  std::string rendered;
  try {
    BenchTable table = run_bench(sizes, variants, options);
    rendered = format == "csv" ? to_csv(table) : to_text(table);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  if (out.empty()) {
    std::cout << rendered;
  } else if (!spill(out, rendered)) {
    std::cerr << out << ":1:1: error: cannot write file\n";
    return kExitInput;
  }
  return kExitOk;
}

int runReport(const std::string &input, const std::string &unroll,
              bool as_json) {
  int rc = kExitOk;
  std::optional<AffineModule> module = loadModule(input, rc);
  if (!module)
    return rc;
  if (!applyUnroll(*module, unroll, input, rc))
    return rc;
  HwComponent hw;
  try {
    hw = lower(module->funcs[0]);
  } catch (const LowerError &e) {
    std::cerr << input << ":1:1: error: lower: " << e.what() << "\n";
    return kExitTransform;
  }
  ResourceReport report = resource_counts(hw);
  const std::pair<const char *, int64_t> rows[] = {
      {"multipliers", report.multipliers}, {"adders", report.adders},
      {"comparators", report.comparators}, {"registers", report.registers},
      {"constants", report.constants},     {"memories", report.memories},
      {"memory_bits", report.memory_bits},
  };
  if (as_json) {
    nlohmann::json j;
    for (const auto &[key, count] : rows)
      j[key] = count;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto &[key, count] : rows)
      std::cout << key << std::string(12 - std::string(key).size(), ' ')
                << count << "\n";
  }
  return kExitOk;
}

} // namespace

//===----------------------------------------------------------------------===//
// Argument wiring
//===----------------------------------------------------------------------===//

int main(int argc, char **argv) {
  CLI::App app{"affine-to-Verilog pipeline driver"};
  app.require_subcommand(1);
  int rc = kExitOk;

  // gen
  std::string gen_kind;
  int64_t gen_n = 0;
  std::string gen_out;
  CLI::App *gen = app.add_subcommand("gen", "generate a kernel .mlir file");
  gen->add_option("kind", gen_kind, "generator name (gemm)")->required();
  gen->add_option("n", gen_n, "problem size")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("-o,--output", gen_out,
                  "output file (default $LOFT_OUT_DIR/gemm<n>.mlir)");
  gen->callback([&] { rc = runGen(gen_kind, gen_n, gen_out); });

  // compile
  std::string c_input, c_unroll, c_outdir;
  std::vector<std::string> c_emits = {"verilog", "hwir"};
  std::vector<std::string> c_mems;
  int64_t c_max_cycles = 10'000'000;
  CLI::App *compile =
      app.add_subcommand("compile", "emit Verilog and hardware IR");
  compile->add_option("input", c_input, ".mlir input")->required();
  compile->add_option("--unroll", c_unroll,
                      "loop to unroll: INDEX[.INDEX]*[:full|:FACTOR]");
  compile->add_option("-o,--outdir", c_outdir,
                      "output directory (default $LOFT_OUT_DIR or .)");
  compile->add_option("--emit", c_emits, "artifacts: verilog, hwir, testbench")
      ->delimiter(',');
  compile->add_option("--mem", c_mems,
                      "testbench memory image NAME=path.json (repeatable)");
  compile->add_option("--max-cycles", c_max_cycles,
                      "testbench cycle bound")
      ->check(CLI::NonNegativeNumber);
  compile->callback([&] {
    rc = runCompile(c_input, c_unroll, c_outdir, c_emits, c_mems,
                    c_max_cycles);
  });

  // run (reference interpreter)
  std::string r_input, r_unroll;
  std::vector<std::string> r_mems;
  CLI::App *run =
      app.add_subcommand("run", "execute with the reference interpreter");
  run->add_option("input", r_input, ".mlir input")->required();
  run->add_option("--unroll", r_unroll,
                  "loop to unroll: INDEX[.INDEX]*[:full|:FACTOR]");
  run->add_option("--mem", r_mems, "memory image NAME=path.json (repeatable)");
  run->callback([&] { rc = runRun(r_input, r_unroll, r_mems); });

  // simulate
  std::string s_input, s_unroll;
  std::vector<std::string> s_mems;
  int64_t s_max_cycles = 100'000'000;
  bool s_trace = false;
  CLI::App *simulate =
      app.add_subcommand("simulate", "cycle-accurate hardware-IR simulation");
  simulate->add_option("input", s_input, ".mlir input")->required();
  simulate->add_option("--unroll", s_unroll,
                       "loop to unroll: INDEX[.INDEX]*[:full|:FACTOR]");
  simulate->add_option("--mem", s_mems,
                       "memory image NAME=path.json (repeatable)");
  simulate->add_option("--max-cycles", s_max_cycles, "timeout bound")
      ->check(CLI::NonNegativeNumber);
  simulate->add_flag("--trace", s_trace, "print active groups per cycle");
  simulate->callback([&] {
    rc = runSimulate(s_input, s_unroll, s_mems, s_max_cycles, s_trace);
  });

  // bench
  std::vector<int64_t> b_sizes = {4, 8, 16, 32, 64};
  std::vector<std::string> b_variants = {"nested", "flattened"};
  uint64_t b_seed = 42;
  int b_jobs = 1;
  int64_t b_max_cycles = 0;
  std::string b_format = "csv", b_out;
  CLI::App *bench =
      app.add_subcommand("bench", "nested-vs-flattened GEMM cycle table");
  bench->add_option("--sizes", b_sizes, "matrix sizes")->delimiter(',');
  bench->add_option("--variants", b_variants, "nested, flattened")
      ->delimiter(',');
  bench->add_option("--seed", b_seed, "input seed (recorded in the header)");
  bench->add_option("--jobs", b_jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  bench->add_option("--max-cycles", b_max_cycles,
                    "per-row bound (0 = auto)");
  bench->add_option("--format", b_format, "csv or table");
  bench->add_option("-o,--output", b_out, "write here instead of stdout");
  bench->callback([&] {
    rc = runBench(b_sizes, b_variants, b_seed, b_jobs, b_max_cycles, b_format,
                  b_out);
  });

  // report
  std::string p_input, p_unroll;
  bool p_json = false;
  CLI::App *report =
      app.add_subcommand("report", "datapath resource counts");
  report->add_option("input", p_input, ".mlir input")->required();
  report->add_option("--unroll", p_unroll,
                     "loop to unroll: INDEX[.INDEX]*[:full|:FACTOR]");
  report->add_flag("--json", p_json, "JSON instead of aligned text");
  report->callback([&] { rc = runReport(p_input, p_unroll, p_json); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return rc;
}
