#include "modeltools.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "extnat.hpp"
#include "json.hpp"

namespace flpc {

void Structure::declare(const std::string& name, uint32_t arity) {
  auto [it, inserted] = preds.try_emplace(name);
  if (!inserted) {
    if (it->second.arity != arity)
      throw std::invalid_argument("predicate '" + name + "' redeclared with arity " +
                                  std::to_string(arity));
    return;
  }
  it->second.arity = arity;
}

void Structure::set_nullary(const std::string& name, bool value) {
  declare(name, 0);
  preds[name].value = value;
}

void Structure::add_tuple(const std::string& name, std::vector<uint32_t> tuple) {
  auto it = preds.find(name);
  if (it == preds.end())
    throw std::invalid_argument("predicate '" + name + "' not declared");
  if (it->second.arity == 0 || tuple.size() != it->second.arity)
    throw std::invalid_argument("tuple arity mismatch for '" + name + "'");
  for (uint32_t e : tuple)
    if (e >= domain)
      throw std::out_of_range("tuple element " + std::to_string(e) +
                              " outside domain of size " + std::to_string(domain));
  it->second.tuples.insert(std::move(tuple));
}

bool Structure::holds(const std::string& name, const std::vector<uint32_t>& args) const {
  auto it = preds.find(name);
  if (it == preds.end())
    throw std::invalid_argument("predicate '" + name + "' not in structure");
  if (args.size() != it->second.arity)
    throw std::invalid_argument("arity mismatch for '" + name + "'");
  if (it->second.arity == 0) return it->second.value;
  return it->second.tuples.count(args) != 0;
}

Signature Structure::signature() const {
  Signature sig;
  for (const auto& [name, ext] : preds) sig.add(name, ext.arity);
  return sig;
}

void Structure::validate() const {
  for (const auto& [name, ext] : preds) {
    if (ext.arity == 0) {
      if (!ext.tuples.empty())
        throw std::invalid_argument("nullary predicate '" + name + "' has tuples");
      continue;
    }
    for (const auto& tuple : ext.tuples) {
      if (tuple.size() != ext.arity)
        throw std::invalid_argument("tuple arity mismatch for '" + name + "'");
      for (uint32_t e : tuple)
        if (e >= domain)
          throw std::out_of_range("tuple element outside domain for '" + name + "'");
    }
  }
}

namespace {

uint32_t lookup(const Env& env, const std::string& var) {
  auto it = env.find(var);
  if (it == env.end())
    throw std::invalid_argument("evaluate: unbound variable '" + var + "'");
  return it->second;
}

bool eval_rec(const Structure& a, const Formula& f, Env& env) {
  switch (f.kind) {
    case FKind::True:
      return true;
    case FKind::False:
      return false;
    case FKind::Atom: {
      std::vector<uint32_t> args;
      args.reserve(f.args.size());
      for (const std::string& v : f.args) args.push_back(lookup(env, v));
      return a.holds(f.pred, args);
    }
    case FKind::Eq:
      return lookup(env, f.args[0]) == lookup(env, f.args[1]);
    case FKind::Not:
      return !eval_rec(a, *f.children[0], env);
    case FKind::And:
      return eval_rec(a, *f.children[0], env) && eval_rec(a, *f.children[1], env);
    case FKind::Or:
      return eval_rec(a, *f.children[0], env) || eval_rec(a, *f.children[1], env);
    case FKind::Implies:
      return !eval_rec(a, *f.children[0], env) || eval_rec(a, *f.children[1], env);
    case FKind::Iff:
      return eval_rec(a, *f.children[0], env) == eval_rec(a, *f.children[1], env);
    case FKind::Exists: {
      uint64_t count = 0;
      for (uint32_t b = 0; b < a.domain; ++b) {
        env[f.var] = b;
        if (eval_rec(a, *f.children[0], env)) ++count;
      }
      env.erase(f.var);
      return linear_set_contains(ExtNat(count), f.count.base, f.count.period);
    }
    case FKind::Forall: {
      bool all = true;
      for (uint32_t b = 0; b < a.domain && all; ++b) {
        env[f.var] = b;
        all = eval_rec(a, *f.children[0], env);
      }
      env.erase(f.var);
      return all;
    }
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

bool evaluate(const Structure& a, const FormulaPtr& f, const Env& env) {
  Env scratch = env;
  return eval_rec(a, *f, scratch);
}

namespace {

void collect_conjuncts(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == FKind::And) {
    collect_conjuncts(f->children[0], out);
    collect_conjuncts(f->children[1], out);
  } else {
    out.push_back(f);
  }
}

void collect_preds(const FormulaPtr& f, std::set<std::string>& out) {
  if (f->kind == FKind::Atom) out.insert(f->pred);
  for (const FormulaPtr& c : f->children) collect_preds(c, out);
}

// One predicate's extension enumerated as an ascending subset counter over
// the lexicographically ordered tuple universe.
struct PredCounter {
  std::string name;
  uint32_t arity;
  std::vector<std::vector<uint32_t>> universe;
  std::vector<bool> bits;

  void reset() { std::fill(bits.begin(), bits.end(), false); }

  // Adds one; returns false on wrap-around (carry out).
  bool increment() {
    for (size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i]) {
        bits[i] = true;
        return true;
      }
      bits[i] = false;
    }
    return false;
  }

  void materialize(Structure& s) const {
    PredicateExtension& ext = s.preds[name];
    ext.arity = arity;
    if (arity == 0) {
      ext.value = !bits.empty() && bits[0];
      return;
    }
    ext.tuples.clear();
    for (size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) ext.tuples.insert(universe[i]);
  }
};

std::vector<std::vector<uint32_t>> tuple_universe(uint32_t size, uint32_t arity) {
  std::vector<std::vector<uint32_t>> out;
  if (arity == 0) {
    out.push_back({});
    return out;
  }
  std::vector<uint32_t> tuple(arity, 0);
  while (true) {
    out.push_back(tuple);
    // Lexicographic order: increment from the last position.
    int i = static_cast<int>(arity) - 1;
    while (i >= 0 && tuple[i] + 1 == size) tuple[i--] = 0;
    if (i < 0) break;
    ++tuple[i];
  }
  return out;
}

}  // namespace

std::optional<Structure> brute_force_search(const FormulaPtr& s, const Signature& sig,
                                            uint32_t max_size,
                                            const BruteLimits& limits) {
  std::vector<FormulaPtr> conjuncts;
  collect_conjuncts(s, conjuncts);
  std::vector<std::set<std::string>> supports(conjuncts.size());
  for (size_t i = 0; i < conjuncts.size(); ++i) collect_preds(conjuncts[i], supports[i]);

  std::vector<std::pair<std::string, uint32_t>> order(sig.predicates());
  std::sort(order.begin(), order.end(), [](const auto& l, const auto& r) {
    return std::tie(l.second, l.first) < std::tie(r.second, r.first);
  });

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(limits.time_limit_ms);
  uint64_t visited = 0;

  for (uint32_t size = 1; size <= max_size; ++size) {
    std::vector<PredCounter> counters;
    for (const auto& [name, arity] : order) {
      PredCounter c;
      c.name = name;
      c.arity = arity;
      c.universe = tuple_universe(size, arity);
      c.bits.assign(c.universe.size(), false);
      counters.push_back(std::move(c));
    }

    // For each prefix of the counter list, the conjuncts decidable from that
    // prefix alone. Checked whenever every later counter is at zero, which
    // allows skipping the whole inner block on failure.
    std::vector<std::vector<size_t>> prefix_checks(counters.size() + 1);
    {
      std::set<std::string> known;
      std::vector<bool> assigned(conjuncts.size(), false);
      for (size_t j = 0; j <= counters.size(); ++j) {
        if (j > 0) known.insert(counters[j - 1].name);
        for (size_t ci = 0; ci < conjuncts.size(); ++ci) {
          if (assigned[ci]) continue;
          if (std::includes(known.begin(), known.end(), supports[ci].begin(),
                            supports[ci].end())) {
            prefix_checks[j].push_back(ci);
            assigned[ci] = true;
          }
        }
      }
    }

    Structure cand;
    cand.domain = size;
    for (PredCounter& c : counters) c.materialize(cand);

    bool exhausted = false;
    while (!exhausted) {
      if (++visited > limits.max_structures)
        throw SearchCapExceeded("brute force structure budget exhausted");
      if ((visited & 1023) == 0 && std::chrono::steady_clock::now() > deadline)
        throw SearchCapExceeded("brute force time limit exceeded");

      // Check conjuncts grouped by the shortest counter prefix that decides
      // them, outermost group first; a failure at group j lets the whole
      // block sharing counters 0..j-1 be skipped.
      size_t failed_prefix = SIZE_MAX;
      for (size_t j = 0; j <= counters.size() && failed_prefix == SIZE_MAX; ++j)
        for (size_t ci : prefix_checks[j])
          if (!evaluate(cand, conjuncts[ci])) {
            failed_prefix = j;
            break;
          }

      if (failed_prefix == SIZE_MAX)
        return cand;
      if (failed_prefix == 0)
        break;  // fails independently of every extension; try the next size

      // Zero the counters the failure does not depend on, then step the
      // odometer at position failed_prefix-1 (the last counter cycling
      // fastest overall).
      for (size_t j = failed_prefix; j < counters.size(); ++j) counters[j].reset();
      size_t pos = failed_prefix;
      while (pos-- > 0) {
        if (counters[pos].increment()) break;
        if (pos == 0) {
          exhausted = true;
          break;
        }
      }
      if (exhausted) break;
      for (size_t j = pos; j < counters.size(); ++j) counters[j].materialize(cand);
    }
  }
  return std::nullopt;
}

namespace {

using nlohmann::json;

}  // namespace

Structure structure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw std::runtime_error(std::string("bad structure JSON: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("domain") || !j.contains("preds"))
    throw std::runtime_error("structure JSON must have 'domain' and 'preds'");
  Structure s;
  if (!j["domain"].is_number_unsigned())
    throw std::runtime_error("'domain' must be a non-negative integer");
  s.domain = j["domain"].get<uint32_t>();
  if (!j["preds"].is_object())
    throw std::runtime_error("'preds' must be an object");
  for (const auto& [name, spec] : j["preds"].items()) {
    if (!spec.is_object() || !spec.contains("arity"))
      throw std::runtime_error("predicate '" + name + "' needs an 'arity'");
    uint32_t arity = spec["arity"].get<uint32_t>();
    s.declare(name, arity);
    if (arity == 0) {
      if (!spec.contains("value") || !spec["value"].is_boolean())
        throw std::runtime_error("nullary predicate '" + name + "' needs a boolean 'value'");
      s.set_nullary(name, spec["value"].get<bool>());
      continue;
    }
    if (!spec.contains("tuples") || !spec["tuples"].is_array())
      throw std::runtime_error("predicate '" + name + "' needs a 'tuples' array");
    for (const auto& t : spec["tuples"]) {
      if (!t.is_array())
        throw std::runtime_error("tuple of '" + name + "' is not an array");
      std::vector<uint32_t> tuple;
      for (const auto& e : t) {
        if (!e.is_number_unsigned())
          throw std::runtime_error("tuple element of '" + name + "' is not a natural");
        tuple.push_back(e.get<uint32_t>());
      }
      try {
        s.add_tuple(name, std::move(tuple));
      } catch (const std::exception& ex) {
        throw std::runtime_error(std::string("bad tuple for '") + name + "': " + ex.what());
      }
    }
  }
  return s;
}

std::string structure_to_json(const Structure& a, bool pretty) {
  json preds(json::value_t::object);
  for (const auto& [name, ext] : a.preds) {
    json p;
    p["arity"] = ext.arity;
    if (ext.arity == 0) {
      p["value"] = ext.value;
    } else {
      json tuples(json::value_t::array);
      for (const auto& t : ext.tuples) tuples.push_back(t);
      p["tuples"] = std::move(tuples);
    }
    preds[name] = std::move(p);
  }
  json j;
  j["domain"] = a.domain;
  j["preds"] = std::move(preds);
  return pretty ? j.dump(2) : j.dump();
}

Structure load_structure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return structure_from_json(text);
}

void save_structure(const Structure& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << structure_to_json(a, true) << '\n';
}

}  // namespace flpc
