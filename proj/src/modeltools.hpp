#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "syntax.hpp"

namespace flpc {

struct PredicateExtension {
  uint32_t arity = 0;
  bool value = false;                      // arity == 0
  std::set<std::vector<uint32_t>> tuples;  // arity >= 1
};

// Explicit finite structure over the domain {0, ..., domain-1}. Equality is
// never stored; it is always the identity relation on the domain.
struct Structure {
  uint32_t domain = 0;
  std::map<std::string, PredicateExtension> preds;

  void declare(const std::string& name, uint32_t arity);
  void set_nullary(const std::string& name, bool value);
  void add_tuple(const std::string& name, std::vector<uint32_t> tuple);
  bool holds(const std::string& name, const std::vector<uint32_t>& args) const;
  Signature signature() const;
  // Checks every tuple is arity-matched and within the domain.
  void validate() const;
};

using Env = std::map<std::string, uint32_t>;

// Model checker for formulas with periodic counting. Counting quantifiers
// count satisfying extensions exactly and test membership in the linear set.
// Atom arguments are resolved through env, so reversed or repeated argument
// orders evaluate fine. Throws std::invalid_argument on unbound variables or
// predicates missing from the structure.
bool evaluate(const Structure& a, const FormulaPtr& f, const Env& env = {});

struct SearchCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BruteLimits {
  uint64_t max_structures = 200'000'000;
  uint64_t time_limit_ms = 600'000;
};

// Exhaustive model search over domains of size 1..max_size. Predicates are
// ordered by (arity, name) and extensions enumerated as ascending subset
// counters with the last predicate cycling fastest; the first satisfying
// structure in this order is returned, so results are deterministic.
// Throws SearchCapExceeded when limits are hit.
std::optional<Structure> brute_force_search(const FormulaPtr& s, const Signature& sig,
                                            uint32_t max_size,
                                            const BruteLimits& limits = {});

// JSON form:
// {"domain": n,
//  "preds": {"r": {"arity": 2, "tuples": [[0,1],...]},
//            "q0": {"arity": 0, "value": true}}}
Structure structure_from_json(const std::string& text);
std::string structure_to_json(const Structure& a, bool pretty = false);

Structure load_structure(const std::string& path);
void save_structure(const Structure& a, const std::string& path);

}  // namespace flpc
