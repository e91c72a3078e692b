//===- transforms.cpp - Loop unrolling --------------------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/transforms.hpp"

#include <unordered_map>
#include <unordered_set>

using namespace loft;

std::string loft::to_string(const LoopPath &path) {
  std::string out;
  for (size_t i = 0; i < path.indices.size(); ++i) {
    if (i)
      out += ".";
    out += std::to_string(path.indices[i]);
  }
  return out;
}

std::optional<std::vector<int>> loft::parse_loop_indices(
    const std::string &text) {
  std::vector<int> indices;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t dot = text.find('.', pos);
    std::string part = text.substr(pos, dot == std::string::npos
                                            ? std::string::npos
                                            : dot - pos);
    if (part.empty() || part.size() > 6)
      return std::nullopt;
    int value = 0;
    for (char c : part) {
      if (c < '0' || c > '9')
        return std::nullopt;
      value = value * 10 + (c - '0');
    }
    indices.push_back(value);
    if (dot == std::string::npos)
      break;
    pos = dot + 1;
    if (pos == text.size()) // trailing dot
      return std::nullopt;
  }
  if (indices.empty())
    return std::nullopt;
  return indices;
}

namespace {

[[noreturn]] void invalidPath(const LoopPath &path, const std::string &why) {
  throw TransformError(TransformError::Kind::InvalidPath,
                       "loop path " + to_string(path) + " in @" + path.func +
                           ": " + why);
}

/// Resolves `path` to a mutable loop plus its enclosing op list.
struct LoopSite {
  std::vector<AffineOp> *region; // list holding the loop
  size_t position;               // index of the loop op within *region
  ForOp *loop;
};

LoopSite resolve(AffineModule &module, const LoopPath &path) {
  AffineFunc *func = nullptr;
  for (AffineFunc &f : module.funcs)
    if (f.name == path.func)
      func = &f;
  if (!func)
    invalidPath(path, "no such function");
  if (path.indices.empty())
    invalidPath(path, "empty index list");

  std::vector<AffineOp> *region = &func->body;
  LoopSite site{};
  for (size_t depth = 0; depth < path.indices.size(); ++depth) {
    int wanted = path.indices[depth];
    int seen = 0;
    ForOp *found = nullptr;
    size_t position = 0;
    for (size_t i = 0; i < region->size(); ++i) {
      if (auto *loop = (*region)[i].as<ForOp>()) {
        if (seen == wanted) {
          found = loop;
          position = i;
          break;
        }
        ++seen;
      }
    }
    if (!found)
      invalidPath(path, "no loop with index " + std::to_string(wanted) +
                            " at depth " + std::to_string(depth));
    site = LoopSite{region, position, found};
    region = &found->body;
  }
  return site;
}

bool containsLoop(const std::vector<AffineOp> &ops) {
  for (const AffineOp &op : ops)
    if (op.is<ForOp>())
      return true;
  return false;
}

/// Every value id used anywhere in the function (defs and uses), to keep
/// cloned names fresh.
void collectIds(const std::vector<AffineOp> &ops,
                std::unordered_set<ValueId> &ids) {
  auto addExpr = [&](const AffineExpr &expr) {
    for (const AffineTerm &term : expr.terms)
      ids.insert(term.var);
  };
  for (const AffineOp &op : ops) {
    if (const auto *c = op.as<ConstantOp>()) {
      ids.insert(c->result);
    } else if (const auto *load = op.as<LoadOp>()) {
      ids.insert(load->result);
      ids.insert(load->memref);
      addExpr(load->index);
    } else if (const auto *store = op.as<StoreOp>()) {
      ids.insert(store->value);
      ids.insert(store->memref);
      addExpr(store->index);
    } else if (const auto *mul = op.as<MulOp>()) {
      ids.insert(mul->result);
      ids.insert(mul->lhs);
      ids.insert(mul->rhs);
    } else if (const auto *add = op.as<AddOp>()) {
      ids.insert(add->result);
      ids.insert(add->lhs);
      ids.insert(add->rhs);
    } else if (const auto *yield = op.as<YieldOp>()) {
      for (const ValueId &v : yield->values)
        ids.insert(v);
    } else if (const auto *loop = op.as<ForOp>()) {
      ids.insert(loop->induction_var);
      for (const IterArg &iter : loop->iter_args) {
        ids.insert(iter.name);
        ids.insert(iter.init);
      }
      for (const ValueId &r : loop->results)
        ids.insert(r);
      collectIds(loop->body, ids);
    }
  }
}

/// Rewrites one straight-line body copy. The induction variable either
/// disappears into constants (`iv_value` set) or stays with its uses offset
/// by `iv_offset` (partial unroll). `rename` maps old ids to their
/// replacement in this copy: the iter_arg to the incoming carried value, and
/// each local def to a fresh name registered by the caller.
struct CopySubst {
  const ValueId *iv = nullptr;
  std::optional<int64_t> iv_value;
  int64_t iv_offset = 0;
  std::unordered_map<ValueId, ValueId> rename;

  ValueId mapUse(const ValueId &id) const {
    auto it = rename.find(id);
    return it == rename.end() ? id : it->second;
  }

  AffineExpr mapExpr(const AffineExpr &expr) const {
    AffineExpr out;
    out.constant = expr.constant;
    for (const AffineTerm &term : expr.terms) {
      if (iv && term.var == *iv) {
        if (iv_value) {
          out.constant += term.coeff * *iv_value;
          continue;
        }
        out.constant += term.coeff * iv_offset;
      }
      out.terms.push_back({mapUse(term.var), term.coeff});
    }
    return out;
  }
};

/// Result of cloning a loop body once: the ops (yield stripped) and the value
/// the copy carried out through its yield, already renamed.
struct BodyCopy {
  std::vector<AffineOp> ops;
  std::optional<ValueId> carried;
};

class Unroller {
public:
  explicit Unroller(std::unordered_set<ValueId> used) : used_(std::move(used)) {}

  ValueId freshen(const ValueId &base, int copy) {
    ValueId candidate = base + "_u" + std::to_string(copy);
    while (used_.count(candidate))
      candidate += "_";
    used_.insert(candidate);
    return candidate;
  }

  BodyCopy clone(const std::vector<AffineOp> &body, CopySubst subst,
                 int copy) {
    BodyCopy out;
    for (const AffineOp &op : body) {
      if (const auto *c = op.as<ConstantOp>()) {
        ValueId result = freshen(c->result, copy);
        subst.rename[c->result] = result;
        out.ops.push_back(AffineOp{ConstantOp{result, c->value}});
      } else if (const auto *load = op.as<LoadOp>()) {
        ValueId result = freshen(load->result, copy);
        AffineExpr index = subst.mapExpr(load->index);
        subst.rename[load->result] = result;
        out.ops.push_back(
            AffineOp{LoadOp{result, load->memref, std::move(index)}});
      } else if (const auto *store = op.as<StoreOp>()) {
        out.ops.push_back(AffineOp{StoreOp{subst.mapUse(store->value),
                                           store->memref,
                                           subst.mapExpr(store->index)}});
      } else if (const auto *mul = op.as<MulOp>()) {
        ValueId result = freshen(mul->result, copy);
        MulOp cloned{result, subst.mapUse(mul->lhs), subst.mapUse(mul->rhs)};
        subst.rename[mul->result] = result;
        out.ops.push_back(AffineOp{cloned});
      } else if (const auto *add = op.as<AddOp>()) {
        ValueId result = freshen(add->result, copy);
        AddOp cloned{result, subst.mapUse(add->lhs), subst.mapUse(add->rhs)};
        subst.rename[add->result] = result;
        out.ops.push_back(AffineOp{cloned});
      } else if (const auto *yield = op.as<YieldOp>()) {
        out.carried = subst.mapUse(yield->values.at(0));
      }
    }
    return out;
  }

private:
  std::unordered_set<ValueId> used_;
};

/// Renames every use of `from` to `to` in the remainder of the program after
/// a fully unrolled loop (its results no longer exist as definitions).
void renameUses(std::vector<AffineOp> &ops, const ValueId &from,
                const ValueId &to) {
  auto fixExpr = [&](AffineExpr &expr) {
    for (AffineTerm &term : expr.terms)
      if (term.var == from)
        term.var = to;
  };
  auto fix = [&](ValueId &id) {
    if (id == from)
      id = to;
  };
  for (AffineOp &op : ops) {
    if (auto *load = op.as<LoadOp>()) {
      fixExpr(load->index);
    } else if (auto *store = op.as<StoreOp>()) {
      fix(store->value);
      fixExpr(store->index);
    } else if (auto *mul = op.as<MulOp>()) {
      fix(mul->lhs);
      fix(mul->rhs);
    } else if (auto *add = op.as<AddOp>()) {
      fix(add->lhs);
      fix(add->rhs);
    } else if (auto *yield = op.as<YieldOp>()) {
      for (ValueId &v : yield->values)
        fix(v);
    } else if (auto *loop = op.as<ForOp>()) {
      // `from` was defined in an enclosing region, so no-shadowing guarantees
      // nothing below redefines it; rename uses throughout the subtree.
      for (IterArg &iter : loop->iter_args)
        fix(iter.init);
      renameUses(loop->body, from, to);
    }
  }
}

} // namespace

AffineModule loft::unroll_full(const AffineModule &module,
                               const LoopPath &path) {
  AffineModule out = module;
  LoopSite site = resolve(out, path);
  if (containsLoop(site.loop->body))
    throw TransformError(TransformError::Kind::NotInnermost,
                         "loop path " + to_string(path) + " in @" + path.func +
                             ": only innermost loops can be unrolled");

  std::unordered_set<ValueId> used;
  for (const AffineFunc &func : out.funcs) {
    for (const FuncArg &arg : func.args)
      used.insert(arg.id);
    collectIds(func.body, used);
  }
  Unroller unroller(std::move(used));

  const ForOp loop = *site.loop; // copy: the site is overwritten below
  int64_t trip = loop.trip_count();
  bool carries = !loop.iter_args.empty();
  ValueId carried = carries ? loop.iter_args[0].init : ValueId();

  std::vector<AffineOp> expansion;
  for (int64_t c = 0; c < trip; ++c) {
    CopySubst subst;
    subst.iv = &loop.induction_var;
    subst.iv_value = loop.lower + c * loop.step;
    if (carries)
      subst.rename[loop.iter_args[0].name] = carried;
    BodyCopy copy = unroller.clone(loop.body, std::move(subst),
                                   static_cast<int>(c));
    if (carries)
      carried = *copy.carried;
    for (AffineOp &op : copy.ops)
      expansion.push_back(std::move(op));
  }

  // Splice the copies in place of the loop, then point every later use of
  // the loop's result at the final carried value.
  std::vector<AffineOp> &region = *site.region;
  region.erase(region.begin() + static_cast<long>(site.position));
  region.insert(region.begin() + static_cast<long>(site.position),
                std::make_move_iterator(expansion.begin()),
                std::make_move_iterator(expansion.end()));
  if (carries)
    renameUses(region, loop.results[0], carried);
  return out;
}

AffineModule loft::unroll_by_factor(const AffineModule &module,
                                    const LoopPath &path, int64_t factor) {
  AffineModule out = module;
  LoopSite site = resolve(out, path);
  if (containsLoop(site.loop->body))
    throw TransformError(TransformError::Kind::NotInnermost,
                         "loop path " + to_string(path) + " in @" + path.func +
                             ": only innermost loops can be unrolled");
  int64_t trip = site.loop->trip_count();
  if (factor < 1 || (trip > 0 && trip % factor != 0))
    throw TransformError(TransformError::Kind::NonDividingFactor,
                         "factor " + std::to_string(factor) +
                             " does not divide trip count " +
                             std::to_string(trip));
  if (factor == 1)
    return out;
  if (factor == trip)
    return unroll_full(module, path);

  std::unordered_set<ValueId> used;
  for (const AffineFunc &func : out.funcs) {
    for (const FuncArg &arg : func.args)
      used.insert(arg.id);
    collectIds(func.body, used);
  }
  Unroller unroller(std::move(used));

  ForOp &loop = *site.loop;
  const std::vector<AffineOp> body = std::move(loop.body);
  bool carries = !loop.iter_args.empty();
  ValueId carried = carries ? loop.iter_args[0].name : ValueId();

  loop.body.clear();
  for (int64_t c = 0; c < factor; ++c) {
    CopySubst subst;
    subst.iv = &loop.induction_var;
    subst.iv_offset = c * loop.step;
    if (carries)
      subst.rename[loop.iter_args[0].name] = carried;
    BodyCopy copy = unroller.clone(body, std::move(subst),
                                   static_cast<int>(c));
    if (carries)
      carried = *copy.carried;
    for (AffineOp &op : copy.ops)
      loop.body.push_back(std::move(op));
  }
  if (carries)
    loop.body.push_back(AffineOp{YieldOp{{carried}}});
  loop.step *= factor;
  return out;
}

namespace {

void walkLoops(const std::vector<AffineOp> &ops, LoopPath &path,
               std::vector<LoopPath> &found) {
  int index = 0;
  for (const AffineOp &op : ops) {
    const auto *loop = op.as<ForOp>();
    if (!loop)
      continue;
    path.indices.push_back(index);
    if (containsLoop(loop->body))
      walkLoops(loop->body, path, found);
    else
      found.push_back(path);
    path.indices.pop_back();
    ++index;
  }
}

} // namespace

std::vector<LoopPath> loft::innermost_loops(const AffineModule &module) {
  std::vector<LoopPath> found;
  for (const AffineFunc &func : module.funcs) {
    LoopPath path{func.name, {}};
    walkLoops(func.body, path, found);
  }
  return found;
}
