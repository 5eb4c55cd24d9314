#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extnat.hpp"

namespace flpc {

// Systems of disjunctive linear constraints over the extended naturals.
// A clause is a nonempty disjunction of atomic comparisons; the system is a
// conjunction of clauses. Variables range over N, or over N + {inf} for
// those not flagged finite_only when solving in OverNStar mode.

enum class RelOp { Eq, Ne, Le, Lt, Ge, Gt };

const char* relop_str(RelOp op);

struct LinExpr {
  // Sorted by variable index, no duplicates, no zero coefficients.
  std::vector<std::pair<int, ExtNat>> terms;
  ExtNat constant{0};

  void add_term(int var, ExtNat coeff);
  static LinExpr of_constant(ExtNat c);
  static LinExpr of_var(int v);
};

struct Comparison {
  LinExpr lhs;
  RelOp op = RelOp::Eq;
  LinExpr rhs;
};

struct Clause {
  std::vector<Comparison> disjuncts;
};

struct VarDecl {
  std::string name;
  bool finite_only = false;
};

struct LinearSystem {
  std::vector<VarDecl> vars;
  std::vector<Clause> clauses;

  int add_var(const std::string& name, bool finite_only = false);
  int var_index(const std::string& name) const;  // -1 if absent
};

// Total map from system variables to values.
struct Assignment {
  std::vector<ExtNat> values;
};

ExtNat eval_expr(const LinExpr& e, const Assignment& a);
bool eval_comparison(const Comparison& c, const Assignment& a);
bool eval_clause(const Clause& c, const Assignment& a);
// True iff every clause holds and every finite_only variable is finite.
bool satisfies(const LinearSystem& s, const Assignment& a);

enum class SolveMode { OverN, OverNStar };
enum class SolveStatus { Sat, Unsat, CapExceeded };

struct SolverLimits {
  uint64_t max_nodes = 4'000'000;   // search nodes across clause + value branching
  uint64_t time_limit_ms = 120'000;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  Assignment assignment;  // meaningful when status == Sat
  uint64_t nodes = 0;
};

// Decides satisfiability and produces a witness assignment. Deterministic:
// a fixed canonical branch order, finite patterns before infinite ones,
// ascending values. Returned witnesses always pass satisfies().
SolveResult solve(const LinearSystem& s, SolveMode mode,
                  const SolverLimits& limits = {});

// JSON round trips. Values serialize as numbers, inf as the string "inf".
std::string system_to_json(const LinearSystem& s, bool pretty = false);
LinearSystem system_from_json(const std::string& text);
std::string assignment_to_json(const LinearSystem& s, const Assignment& a,
                               bool pretty = false);
Assignment assignment_from_json(const LinearSystem& s, const std::string& text);

}  // namespace flpc
