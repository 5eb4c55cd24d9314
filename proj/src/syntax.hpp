#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flpc {

// Relational signature. Equality is implicit and always available; predicates
// carry a fixed arity and there are no function or constant symbols.
class Signature {
public:
  void add(const std::string& name, uint32_t arity);
  bool has(const std::string& name) const;
  std::optional<uint32_t> arity_of(const std::string& name) const;
  const std::vector<std::pair<std::string, uint32_t>>& predicates() const {
    return preds_;
  }

private:
  std::vector<std::pair<std::string, uint32_t>> preds_;
};

// Signature files: one "name/arity" per line, '#' starts a comment.
Signature signature_from_text(const std::string& text);
std::string signature_to_text(const Signature& sig);

// The linear set n^{+p} = { n + i*p | i in N }. Plain "exists" is 1^{+1},
// exists[=n] is n^{+0}, exists[>=n] is n^{+1}. exists[<=n] is surface sugar
// and is expanded into a disjunction at parse time.
struct CountSpec {
  uint64_t base = 1;
  uint64_t period = 1;

  static CountSpec plain() { return {1, 1}; }
  static CountSpec exactly(uint64_t n) { return {n, 0}; }
  static CountSpec at_least(uint64_t n) { return {n, 1}; }
  static CountSpec periodic(uint64_t n, uint64_t p) { return {n, p}; }

  bool is_plain() const { return base == 1 && period == 1; }

  friend bool operator==(const CountSpec&, const CountSpec&) = default;
};

enum class FKind {
  True,
  False,
  Atom,
  Eq,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Exists,
  Forall,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable AST node. Which fields are meaningful depends on kind:
//   Atom           pred, args (bound variable names)
//   Eq             args (exactly two variable names)
//   Not            children[0]
//   And/Or/...     children[0], children[1]
//   Exists         count, var, children[0]
//   Forall         var, children[0]
struct Formula {
  FKind kind = FKind::True;
  std::string pred;
  std::vector<std::string> args;
  std::vector<FormulaPtr> children;
  CountSpec count = CountSpec::plain();
  std::string var;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(std::string pred, std::vector<std::string> args = {});
FormulaPtr f_eq(std::string a, std::string b);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr f_exists(CountSpec count, std::string var, FormulaPtr body);
FormulaPtr f_forall(std::string var, FormulaPtr body);

// Left folds; the empty conjunction is true, the empty disjunction false.
FormulaPtr f_and_all(std::vector<FormulaPtr> fs);
FormulaPtr f_or_all(std::vector<FormulaPtr> fs);

bool formulas_equal(const FormulaPtr& a, const FormulaPtr& b);

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, size_t line, size_t column)
      : std::runtime_error(what), line(line), column(column) {}
  size_t line;
  size_t column;
};

// Strict parser: every predicate must be declared in sig, every atom's
// argument count must match the declared arity, variables must be bound and
// never rebound while in scope. A bare predicate name of arity a > 0 denotes
// the atom over the innermost a quantified variables (variable-free notation).
FormulaPtr parse_formula(const std::string& text, const Signature& sig);

// Permissive parser that infers the signature from atom occurrences. Bare
// names become nullary predicates; inconsistent arities are an error.
std::pair<FormulaPtr, Signature> parse_formula_infer(const std::string& text);

// Inverse of parsing up to structural equality:
// formulas_equal(parse_formula(print_formula(f), sig), f) for closed f.
std::string print_formula(const FormulaPtr& f);

struct OffendingAtom {
  std::string atom;
  std::string reason;
};

struct FragmentReport {
  uint32_t variable_width = 0;
  bool is_fluted = false;
  bool is_fluted_rev = false;
  bool uses_counting = false;
  bool uses_periodic = false;
  std::vector<OffendingAtom> offending_atoms;
};

// Classifies a sentence. An atom under d quantifiers with arity a is fluted
// iff its arguments are the variables bound at depths d-a+1,...,d in that
// order, and reverse-fluted if the order may also be reversed. Equality atoms
// are treated as binary atoms. Throws std::invalid_argument on open formulas.
FragmentReport classify_fragment(const FormulaPtr& f);

}  // namespace flpc
