//===- fixtures.cpp - Fixture manifest re-checking -------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "fixtures.hpp"

#include "loft/affine_ir.hpp"
#include "loft/hw_ir.hpp"
#include "loft/lowering.hpp"
#include "loft/parser.hpp"
#include "loft/rtl_backend.hpp"
#include "loft/sha256.hpp"
#include "loft/transforms.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <sstream>

using namespace loft;

namespace loft_test {

namespace {

std::optional<std::string> slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Drops the leading "// golden:" provenance lines a frozen artifact carries
/// on top of its generated content.
std::string stripProvenance(const std::string &text) {
  size_t at = 0;
  while (text.compare(at, 10, "// golden:") == 0) {
    size_t eol = text.find('\n', at);
    if (eol == std::string::npos)
      return "";
    at = eol + 1;
  }
  return text.substr(at);
}

/// Fresh pipeline output for a named check; nullopt when the name is unknown.
std::optional<std::string> regenerate(const std::string &check) {
  if (check == "gemm2-verilog")
    return emit_verilog(lower(gen_gemm(2).funcs[0]));
  if (check == "gemm2-hwir")
    return dump_hwir(lower(gen_gemm(2).funcs[0]));
  if (check == "gemm4-flat-hwir") {
    AffineModule flat =
        unroll_full(gen_gemm(4), {kGemmFuncName, {0, 0, 0}});
    return dump_hwir(lower(flat.funcs[0]));
  }
  return std::nullopt;
}

} // namespace

Diagnostics check_fixtures(const std::string &dir) {
  Diagnostics diags;
  auto report = [&](const std::string &id, const std::string &message) {
    diags.push_back({id, message});
  };

  std::optional<std::string> manifest_text = slurp(dir + "/manifest.json");
  if (!manifest_text) {
    report("manifest.json", "cannot open " + dir + "/manifest.json");
    return diags;
  }
  nlohmann::json manifest = nlohmann::json::parse(
      *manifest_text, /*cb=*/nullptr, /*allow_exceptions=*/false);
  if (manifest.is_discarded() || !manifest.contains("fixtures") ||
      !manifest["fixtures"].is_array()) {
    report("manifest.json", "not a manifest: want {\"fixtures\": [...]}");
    return diags;
  }

  for (const nlohmann::json &entry : manifest["fixtures"]) {
    if (!entry.is_object() || !entry.contains("id") ||
        !entry.contains("path") || !entry.contains("sha256") ||
        !entry.contains("check")) {
      report("manifest.json", "entry missing id/path/sha256/check");
      continue;
    }
    std::string id = entry["id"].get<std::string>();
    std::string check = entry["check"].get<std::string>();

    std::optional<std::string> bytes =
        slurp(dir + "/" + entry["path"].get<std::string>());
    if (!bytes) {
      report(id, "fixture file missing");
      continue;
    }
    if (std::string hash = sha256_hex(*bytes);
        hash != entry["sha256"].get<std::string>()) {
      report(id, "sha256 mismatch: committed bytes hash to " + hash);
      continue;
    }
    if (check == "reference-only")
      continue;

    if (check == "gemm32-source") {
      // The transcribed source is not byte-regenerable (its ids and layout
      // are the listing's own); it must parse, verify, and match the
      // generator structurally.
      ParseResult parsed = parse(*bytes);
      if (!parsed.ok()) {
        report(id, "does not parse: " + parsed.error->to_string());
        continue;
      }
      if (Diagnostics verify = verify_module(*parsed.module); !verify.empty())
        report(id, "does not verify: " + to_string(verify[0]));
      else if (!alpha_equivalent(*parsed.module, gen_gemm(32)))
        report(id, "not alpha-equivalent to gen_gemm(32)");
      continue;
    }

    std::optional<std::string> fresh = regenerate(check);
    if (!fresh) {
      report(id, "unknown check '" + check + "'");
      continue;
    }
    if (stripProvenance(*bytes) != *fresh)
      report(id, "frozen content differs from a fresh " + check + " run");
  }
  return diags;
}

} // namespace loft_test
