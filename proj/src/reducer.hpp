#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "modeltools.hpp"
#include "normalform.hpp"
#include "sat2.hpp"
#include "syntax.hpp"

namespace flpc {

// Local ell-homogeneity: for every (ell-1)-tuple b and every ell-type pi, all
// elements a with ftp(a.b) = pi emit the same (ell+1)-type to every c. The
// check and the rewiring read types over the structure's own signature.
// Requires ell >= 2; throws SearchCapExceeded when domain^(ell+1) is too
// large to sweep.
bool is_locally_homogeneous(const Structure& a, uint32_t ell);

// Rewires towards local ell-homogeneity: per (b, pi) the least element of the
// block is the exemplar, and every other block member copies the exemplar's
// full-width atoms on each extension. Idempotent; models of a normal-form
// sentence of width ell+1 stay models.
Structure locally_homogenize(const Structure& a, uint32_t ell);

// Registry of the fresh predicates introduced by one reduction step from
// width ell+1 down to ell: q predicates (arity ell-1) remember which tuples
// extend to a given ell-type, s predicates (arity ell) remember the absorbed
// (ell+1)-type per ell-type. Pruned (pi, tau) pairs have no s predicate, and
// a pi whose pairs are all pruned has no q predicate either.
struct ReductionStep {
  uint32_t source_width = 0;  // ell + 1
  Signature source_signature;
  Signature reduced_signature;  // source plus the fresh predicates
  std::vector<std::pair<uint32_t, std::string>> q_preds;  // (pi bits, name), pi ascending
  std::vector<std::tuple<uint32_t, uint32_t, std::string>> s_preds;  // (pi, tau, name)
  std::map<std::string, uint32_t> pi_of_q;
  std::map<std::string, std::pair<uint32_t, uint32_t>> pair_of_s;
};

// One variable-reduction step. The input must be a nullary-free normal form
// of width ell+1 >= 3; the output is an equisatisfiable normal form of width
// ell over the extended signature, emitted directly as conjuncts:
//   psi1  per pi:          positive (true, 0^{+0}, pi and not q_pi)
//   psi2a per (pi, tau):   positive (true, 0^{+0}, s_{pi,tau} and not tau|)
//   psi2b per pi:          positive (q_pi, 0^{+0}, not exactly-one s_{pi,.})
//   psi3  per (r, pi |= alpha_r): positive (q_pi, n_r^{+p_r}, or of s_{pi,tau} with tau |= gamma_r)
//   psi4  per (t, pi |= beta_t):  negative (q_pi, n_t^{+p_t}, or of s_{pi,tau} with tau |= delta_t)
// The universal blocks are forced with exact zero-violation counts, which is
// correct for finite and infinite counts alike.
//
// With prune set, a pair (pi, tau) is omitted when some negative conjunct
// with n_t = 1, p_t = 1 has pi |= beta_t and tau |= delta_t; such emissions
// are forbidden outright in finite models, so the omission preserves finite
// satisfiability (callers enable pruning only in finite mode). A pi left with
// no pairs is dropped from the registry and forbidden by a positive
// (true, 0^{+0}, pi) conjunct instead.
// Throws TypeSpaceCapExceeded when a type basis at either depth, or the
// basis of the emitted sentence, exceeds the enumeration cap.
std::pair<NormalFormSentence, ReductionStep> reduce_once(const NormalFormSentence& nf,
                                                         bool prune = false);

// Decorates a model of the source sentence with the step's q/s predicates,
// per their definitions: q_pi(b) iff some a realises ftp(a.b) = pi, and
// s_{pi,tau}(b.c) iff some a with ftp(a.b) = pi has ftp(a.b.c) = tau. On a
// locally homogeneous model the result satisfies the reduced sentence.
Structure expand_with_step(const Structure& a, const ReductionStep& step);

// Rebuilds a width-(ell+1) model from a model of the reduced sentence, over
// the same domain: the q/s predicates are dropped and each full-width tuple
// a.b.c receives the type recorded by the unique s_{pi,tau} holding on b.c,
// where pi = ftp(a.b). The result satisfies nf and is locally
// ell-homogeneous. Throws std::logic_error when the s predicates are not
// functional on a required pair, which signals an unverified input model.
Structure lift_model(const Structure& ap, const ReductionStep& step,
                     const NormalFormSentence& nf);

struct DecideOptions {
  // Enables witness pruning at width 2 and pair pruning inside reductions.
  // Both transformations preserve finite satisfiability only, so they are
  // ignored in general mode.
  bool prune = false;
};

struct DecideResult {
  bool sat = false;
  // Explicit model of the decided sentence, produced whenever the solution
  // is finite: built at width 2, lifted through every reduction step and
  // verified. Absent for infinite solutions.
  std::optional<Structure> witness;
  // General-mode certificate when the solution needs infinite blocks and the
  // input required no reduction steps.
  std::optional<AbstractModel> abstract;
  uint64_t solver_nodes = 0;   // summed over attempted branches
  uint32_t nullary_branches = 0;
  uint32_t reductions = 0;     // reduction steps on the deciding branch
  uint64_t one_types = 0;      // type-space sizes of the last solved width-2 sentence
  uint64_t two_types = 0;
};

// Decides a normal-form sentence of any width: nullary branching, a
// constant-propagation cleanup per branch, reduction down to width 2, then
// the arithmetic decision procedure. The first satisfiable branch wins and
// its witness is lifted and verified against the branch.
DecideResult decide_nf(const NormalFormSentence& nf, bool finite,
                       const DecideOptions& opts = {});

// Full pipeline for a fluted sentence: to_normal_form, decide_nf, and a
// final reduct of the witness to the predicates of s itself, re-checked by
// evaluate. Throws std::invalid_argument when s is not fluted.
DecideResult decide(const FormulaPtr& s, bool finite, const DecideOptions& opts = {});

}  // namespace flpc
