#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "modeltools.hpp"
#include "qfformula.hpp"
#include "syntax.hpp"

namespace flpc {

// One conjunct of the normal form, read under an implicit universal prefix
// over x1..x_{width-1}:  guard -> exists_{[count]} x_width body  (positive)
// or                     guard -> not exists_{[count]} x_width body  (negative).
struct NFConjunct {
  QFNodePtr guard;  // read at depth width - 1
  CountSpec count;
  QFNodePtr body;   // read at depth width
};

// Definition of a fresh predicate q introduced for a quantified subformula:
// q(x1..x_arity) stands for exists_{[count]} x_{arity+1} body. Bodies mention
// only fresh predicates with larger indices, so models expand from the last
// definition backwards.
struct FreshDef {
  std::string name;
  uint32_t arity = 0;
  CountSpec count;
  QFNodePtr body;  // read at depth arity + 1
};

struct NormalFormSentence {
  uint32_t width = 2;  // number of variables of the widest conjunct, >= 2
  std::vector<NFConjunct> positives;
  std::vector<NFConjunct> negatives;
  QFNodePtr residue;   // propositional part over nullary atoms
  Signature signature; // original predicates plus the fresh ones
  std::vector<FreshDef> fresh_defs;
  // Values chosen for nullary predicates; filled by branch_nullary.
  std::map<std::string, bool> nullary_choice;

  QFFormula guard_formula(const NFConjunct& c) const { return {width - 1, c.guard}; }
  QFFormula body_formula(const NFConjunct& c) const { return {width, c.body}; }
};

// Rewrites a fluted sentence into normal form: innermost-out, every
// quantified subformula with k free variables is replaced by a fresh k-ary
// predicate, emitting a positive and a negative conjunct that pin the
// predicate to the subformula. Universal quantifiers are treated as
// exists_{[0+0]} over the negated body, which is exact for both finite and
// infinite counts. Throws std::invalid_argument if the input is open or not
// (forward) fluted.
NormalFormSentence to_normal_form(const FormulaPtr& s);

// Eliminates nullary predicates by enumerating their truth assignments.
// Returns one sentence per assignment consistent with the residue; guards and
// bodies are substituted and constant-folded, conjuncts with a false guard
// are dropped. The input is satisfiable iff some branch is. An empty result
// means the residue is propositionally unsatisfiable.
std::vector<NormalFormSentence> branch_nullary(const NormalFormSentence& nf);

// Renders the sentence back as a single formula (residue plus all conjuncts
// under explicit universal prefixes).
FormulaPtr nf_to_formula(const NormalFormSentence& nf);

// Interprets the fresh predicates of nf over a structure for the original
// signature, by evaluating each definition innermost-first. Nullary
// predicates recorded in nullary_choice are set to their chosen values.
Structure expand_with_fresh(const Structure& a, const NormalFormSentence& nf);

}  // namespace flpc
