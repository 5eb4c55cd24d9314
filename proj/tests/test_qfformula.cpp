#include "qfformula.hpp"

#include "doctest.h"
#include "syntax.hpp"

using namespace flpc;

TEST_CASE("constant folding keeps only live subtrees") {
  QFNodePtr p = qf_atom("p", 1);
  QFNodePtr q = qf_atom("q", 1);

  CHECK(qf_equal(qf_simplify(qf_and(qf_true(), p)), p));
  CHECK(qf_equal(qf_simplify(qf_and(p, qf_false())), qf_false()));
  CHECK(qf_equal(qf_simplify(qf_or(qf_false(), p)), p));
  CHECK(qf_equal(qf_simplify(qf_or(p, qf_true())), qf_true()));
  CHECK(qf_equal(qf_simplify(qf_implies(qf_false(), p)), qf_true()));
  CHECK(qf_equal(qf_simplify(qf_implies(qf_true(), p)), p));
  CHECK(qf_equal(qf_simplify(qf_implies(p, qf_false())), qf_not(p)));
  CHECK(qf_equal(qf_simplify(qf_iff(p, qf_true())), p));
  CHECK(qf_equal(qf_simplify(qf_iff(qf_false(), p)), qf_not(p)));
  CHECK(qf_equal(qf_simplify(qf_not(qf_not(qf_false()))), qf_false()));

  // No rewriting beyond constants: p & q stays as is.
  QFNodePtr both = qf_and(p, q);
  CHECK(qf_simplify(both) == both);
}

TEST_CASE("evaluation consults the atom oracle") {
  QFNodePtr f = qf_and(qf_atom("p", 1), qf_or(qf_not(qf_atom("q", 1)), qf_eq()));
  auto oracle = [](bool p, bool q, bool eq) {
    return [=](const QFNode& n) {
      if (n.kind == QKind::Eq) return eq;
      return n.pred == "p" ? p : q;
    };
  };
  CHECK(qf_eval(f, oracle(true, false, false)));
  CHECK(qf_eval(f, oracle(true, true, true)));
  CHECK_FALSE(qf_eval(f, oracle(true, true, false)));
  CHECK_FALSE(qf_eval(f, oracle(false, false, true)));
}

TEST_CASE("nullary substitution touches only the listed atoms") {
  QFNodePtr f = qf_and(qf_atom("q0", 0), qf_and(qf_atom("p", 1), qf_atom("q1", 0)));
  QFNodePtr g = qf_substitute_nullary(f, {{"q0", true}});
  CHECK(qf_equal(qf_simplify(g), qf_and(qf_atom("p", 1), qf_atom("q1", 0))));
  QFNodePtr h = qf_substitute_nullary(f, {{"q0", true}, {"q1", false}});
  CHECK(qf_equal(qf_simplify(h), qf_false()));
  // A unary predicate of the same name is left alone.
  QFNodePtr k = qf_substitute_nullary(qf_atom("q0", 1), {{"q0", true}});
  CHECK(k->kind == QKind::Atom);
}

TEST_CASE("atom collection skips equality but reports it separately") {
  QFNodePtr f = qf_and(qf_atom("p", 1), qf_or(qf_atom("r", 2), qf_not(qf_eq())));
  auto atoms = qf_atoms(f);
  CHECK(atoms.size() == 2);
  CHECK(atoms.count({"p", 1}) == 1);
  CHECK(atoms.count({"r", 2}) == 1);
  CHECK(qf_mentions_eq(f));
  CHECK_FALSE(qf_mentions_eq(qf_and(qf_atom("p", 1), qf_atom("r", 2))));
}

TEST_CASE("rendering places arguments as a suffix of the depth") {
  QFFormula f{2, qf_and(qf_atom("p", 1), qf_atom("r", 2))};
  FormulaPtr expected =
      f_and(f_atom("p", {"x2"}), f_atom("r", {"x1", "x2"}));
  CHECK(formulas_equal(qf_to_formula(f), expected));

  QFFormula deeper{3, qf_atom("p", 1)};
  CHECK(formulas_equal(qf_to_formula(deeper), f_atom("p", {"x3"})));

  QFFormula rev{2, qf_atom("r", 2, true)};
  CHECK(formulas_equal(qf_to_formula(rev), f_atom("r", {"x2", "x1"})));

  QFFormula eq3{3, qf_eq()};
  CHECK(formulas_equal(qf_to_formula(eq3), f_eq("x2", "x3")));

  CHECK_THROWS_AS(qf_to_formula(QFFormula{1, qf_atom("r", 2)}), std::invalid_argument);
  CHECK_THROWS_AS(qf_to_formula(QFFormula{1, qf_eq()}), std::invalid_argument);
}

TEST_CASE("folds use the boolean units") {
  CHECK(qf_and_all({})->kind == QKind::True);
  CHECK(qf_or_all({})->kind == QKind::False);
  QFNodePtr p = qf_atom("p", 1);
  CHECK(qf_and_all({p}) == p);
  CHECK(qf_or_all({p}) == p);
}
