#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "diophantine.hpp"
#include "modeltools.hpp"
#include "normalform.hpp"
#include "typespace.hpp"

namespace flpc {

// Canonical constraint-variable names, derived from the bit patterns of the
// 1-type pi and 2-type tau over the sentence's atom bases, and from conjunct
// indices. The registration order is fixed: all x, then all y (pi-major),
// then i per positive conjunct, then j per negative conjunct.
std::string x_var_name(uint32_t pi);
std::string y_var_name(uint32_t pi, uint32_t tau);
std::string i_var_name(uint32_t pi, size_t r);
std::string j_var_name(uint32_t pi, size_t t);

// Emits the constraint system for a width-2 nullary-free sentence:
// cardinality variables x_pi, witness counters y_{pi,tau}, and periodic
// counters i_{pi,r} / j_{pi,t} (the latter flagged finite-only). Clause
// groups, in order: the domain is nonempty; witness counts per endpoint sum
// to the endpoint cardinality (guarded by x_pi = 0); positive conjuncts pin
// the satisfying-witness sum to n + i*p; negative conjuncts exclude it via
// the escape disjunction (below the base, infinite, above the base for
// period 0, or strictly between consecutive lattice points for period > 0,
// the last split into two clauses); equality types concentrate exactly one
// witness on the reflexive extension. Throws std::invalid_argument on wrong
// width or leftover nullary atoms, TypeSpaceCapExceeded on oversized bases.
LinearSystem encode_psi(const NormalFormSentence& nf);

// Finite-mode strengthening: a negative conjunct with base 1 and period 1
// forbids every finite positive witness count, so the offending y variables
// are pinned to zero. Unsound over N* (an infinite count also escapes), so
// it must only be applied when solving over N.
void add_witness_pruning(LinearSystem& sys, const NormalFormSentence& nf);

struct Decide2Result {
  bool sat = false;
  Assignment assignment;  // over `system`; meaningful when sat
  LinearSystem system;
  uint64_t solver_nodes = 0;
};

// Satisfiability of a width-2 nullary-free normal-form sentence over finite
// domains (finite = true) or arbitrary countable ones. Throws
// SearchCapExceeded when the solver gives up within its limits.
Decide2Result decide2(const NormalFormSentence& nf, bool finite, bool prune = false);

// Global homogeneity: any two elements of the same 1-type have identical
// profiles (multisets of emitted 2-types), over the structure's own
// signature restricted to arities 1 and 2.
bool is_globally_homogeneous(const Structure& a);

// Lemma-2 rewiring: per 1-type class, every element b beyond the least
// exemplar a copies a's outgoing binary rows, with ftp(b,a) := ftp(a,b) and
// ftp(b,b) := ftp(a,a). Unary and higher-arity predicates are untouched.
Structure globally_homogenize(const Structure& a);

// Reads the solution vector off a globally homogeneous model of nf:
// x_pi = block size, y from the shared profile, counters from the witness
// sums; unrealized 1-types receive the canonical reflexive filler demanded
// by the equality constraints. sys must be encode_psi(nf) (extra pruning
// clauses are fine). Throws std::invalid_argument when the model is not
// homogeneous over nf's bases.
Assignment assignment_from_model(const Structure& a, const NormalFormSentence& nf,
                                 const LinearSystem& sys);

// Cardinality-and-profile form of a model with infinite blocks.
struct AbstractModel {
  std::map<uint32_t, ExtNat> cardinalities;                 // pi -> |A_pi|
  std::map<uint32_t, std::map<uint32_t, ExtNat>> profiles;  // pi -> tau -> count
};

// Materializes a satisfying assignment. All cardinalities finite: an
// explicit structure, elements blocked by 1-type in ascending type order,
// each element's witnesses dealt to the endpoint blocks in ascending type
// and element order, the reflexive pair carrying the chosen equality type.
// Any infinite cardinality: the abstract form. Throws std::invalid_argument
// when sol does not satisfy encode_psi(nf).
std::variant<Structure, AbstractModel> build_model(const Assignment& sol,
                                                   const NormalFormSentence& nf);

}  // namespace flpc
