#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "syntax.hpp"

namespace flpc {

// Quantifier-free formulas in suffix notation. An atom is a pair
// (pred, arity); read at depth d it denotes pred(x_{d-a+1},...,x_d), or the
// reversed argument order when reversed is set. The equality atom denotes
// x_{d-1} = x_d. Because atoms name no variables, re-reading the same tree at
// a larger depth is exactly the depth-padding operation.
enum class QKind { True, False, Atom, Eq, Not, And, Or, Implies, Iff };

struct QFNode;
using QFNodePtr = std::shared_ptr<const QFNode>;

struct QFNode {
  QKind kind = QKind::True;
  std::string pred;
  uint32_t arity = 0;
  bool reversed = false;
  std::vector<QFNodePtr> children;
};

struct QFFormula {
  uint32_t depth = 0;
  QFNodePtr root;
};

QFNodePtr qf_true();
QFNodePtr qf_false();
QFNodePtr qf_atom(std::string pred, uint32_t arity, bool reversed = false);
QFNodePtr qf_eq();
QFNodePtr qf_not(QFNodePtr f);
QFNodePtr qf_and(QFNodePtr a, QFNodePtr b);
QFNodePtr qf_or(QFNodePtr a, QFNodePtr b);
QFNodePtr qf_implies(QFNodePtr a, QFNodePtr b);
QFNodePtr qf_iff(QFNodePtr a, QFNodePtr b);
QFNodePtr qf_and_all(std::vector<QFNodePtr> fs);
QFNodePtr qf_or_all(std::vector<QFNodePtr> fs);

bool qf_equal(const QFNodePtr& a, const QFNodePtr& b);

// Evaluates the tree; atom_truth is consulted for Atom and Eq leaves.
bool qf_eval(const QFNodePtr& f, const std::function<bool(const QFNode&)>& atom_truth);

// All (pred, arity) pairs of non-equality atoms.
std::set<std::pair<std::string, uint32_t>> qf_atoms(const QFNodePtr& f);
bool qf_mentions_eq(const QFNodePtr& f);

// Replaces nullary atoms found in vals by constants. Other atoms are kept.
QFNodePtr qf_substitute_nullary(const QFNodePtr& f, const std::map<std::string, bool>& vals);

// Bottom-up constant folding; neutral/absorbing elements only, no other
// rewriting.
QFNodePtr qf_simplify(const QFNodePtr& f);

// Renders the tree over the canonical variables x1..x_depth. Throws if an
// atom needs more variables than the depth provides.
FormulaPtr qf_to_formula(const QFFormula& f);

std::string canonical_var(uint32_t depth_index);  // "x1", "x2", ...

}  // namespace flpc
