#include "sat2.hpp"

#include <random>
#include <set>

#include "doctest.h"
#include "normalform.hpp"

namespace flpc {
namespace {

NormalFormSentence make_nf(Signature sig, std::vector<NFConjunct> pos,
                           std::vector<NFConjunct> neg) {
  NormalFormSentence nf;
  nf.width = 2;
  nf.positives = std::move(pos);
  nf.negatives = std::move(neg);
  nf.residue = qf_true();
  nf.signature = std::move(sig);
  return nf;
}

Signature sig_empty() { return {}; }

Signature sig_p() {
  Signature s;
  s.add("p", 1);
  return s;
}

Signature sig_pr() {
  Signature s;
  s.add("p", 1);
  s.add("r", 2);
  return s;
}

ExtNat value_of(const LinearSystem& sys, const Assignment& a, const std::string& name) {
  int idx = sys.var_index(name);
  REQUIRE(idx >= 0);
  return a.values[static_cast<size_t>(idx)];
}

bool comparison_is_zero_test(const Comparison& c) {
  return c.op == RelOp::Eq && c.lhs.terms.size() == 1 &&
         c.lhs.constant == ExtNat(0) && c.rhs.terms.empty() &&
         c.rhs.constant == ExtNat(0);
}

QFNodePtr random_qf(std::mt19937& rng, const AtomBasis& basis, int budget) {
  std::uniform_int_distribution<int> pick(0, budget <= 0 ? 1 : 6);
  switch (pick(rng)) {
    case 0: {
      if (basis.atoms.empty()) return qf_true();
      std::uniform_int_distribution<size_t> ai(0, basis.atoms.size() - 1);
      const BasisAtom& atom = basis.atoms[ai(rng)];
      return atom.is_eq ? qf_eq() : qf_atom(atom.pred, atom.arity);
    }
    case 1:
      return rng() & 1 ? qf_true() : qf_false();
    case 2:
      return qf_not(random_qf(rng, basis, budget - 1));
    case 3:
      return qf_and(random_qf(rng, basis, budget - 1), random_qf(rng, basis, budget - 1));
    case 4:
      return qf_or(random_qf(rng, basis, budget - 1), random_qf(rng, basis, budget - 1));
    case 5:
      return qf_implies(random_qf(rng, basis, budget - 1),
                        random_qf(rng, basis, budget - 1));
    default:
      return qf_iff(random_qf(rng, basis, budget - 1), random_qf(rng, basis, budget - 1));
  }
}

CountSpec random_count(std::mt19937& rng) {
  std::uniform_int_distribution<uint64_t> base(0, 3);
  std::uniform_int_distribution<uint64_t> period(0, 3);
  return {base(rng), period(rng)};
}

NormalFormSentence random_nf(std::mt19937& rng) {
  Signature sig = sig_pr();
  AtomBasis b1 = atom_basis(sig, 1);
  AtomBasis b2 = atom_basis(sig, 2);
  std::uniform_int_distribution<int> npos(1, 2);
  std::uniform_int_distribution<int> nneg(0, 2);
  std::vector<NFConjunct> pos, neg;
  for (int k = npos(rng); k > 0; --k)
    pos.push_back({random_qf(rng, b1, 2), random_count(rng), random_qf(rng, b2, 2)});
  for (int k = nneg(rng); k > 0; --k)
    neg.push_back({random_qf(rng, b1, 2), random_count(rng), random_qf(rng, b2, 2)});
  return make_nf(sig, std::move(pos), std::move(neg));
}

}  // namespace

TEST_CASE("the one-witness sentence encodes to the pinned system") {
  // forall x1 exists[=1] x2 true, over the empty signature.
  NormalFormSentence nf =
      make_nf(sig_empty(), {{qf_true(), {1, 0}, qf_true()}}, {});
  LinearSystem sys = encode_psi(nf);

  REQUIRE(sys.vars.size() == 3);
  CHECK(sys.vars[0].name == "x_0");
  CHECK(sys.vars[1].name == "y_0_0");
  CHECK(sys.vars[2].name == "y_0_1");
  CHECK_FALSE(sys.vars[0].finite_only);

  // Nonempty domain, witness balance, the positive conjunct, the reflexive
  // witness. No zero clauses: the only equality type already ends at pi.
  REQUIRE(sys.clauses.size() == 4);
  CHECK(sys.clauses[0].disjuncts.size() == 1);
  CHECK(sys.clauses[0].disjuncts[0].op == RelOp::Ge);
  CHECK(sys.clauses[1].disjuncts.size() == 2);
  CHECK(comparison_is_zero_test(sys.clauses[1].disjuncts[0]));
  CHECK(sys.clauses[1].disjuncts[1].lhs.terms.size() == 2);
  CHECK(sys.clauses[1].disjuncts[1].rhs.terms.size() == 1);
  CHECK(sys.clauses[2].disjuncts[1].rhs.constant == ExtNat(1));
  CHECK(sys.clauses[3].disjuncts.size() == 1);
  CHECK(sys.clauses[3].disjuncts[0].lhs.terms.size() == 1);
  CHECK(sys.clauses[3].disjuncts[0].lhs.terms[0].first == 2);

  Decide2Result res = decide2(nf, true);
  REQUIRE(res.sat);
  CHECK(value_of(res.system, res.assignment, "x_0") == ExtNat(1));
  CHECK(value_of(res.system, res.assignment, "y_0_1") == ExtNat(1));
  CHECK(value_of(res.system, res.assignment, "y_0_0") == ExtNat(0));

  auto built = build_model(res.assignment, nf);
  REQUIRE(std::holds_alternative<Structure>(built));
  const Structure& s = std::get<Structure>(built);
  CHECK(s.domain == 1);
  CHECK(evaluate(s, nf_to_formula(nf)));

  CHECK(decide2(nf, false).sat);
}

TEST_CASE("witness balance emits one clause per ordered pair of 1-types") {
  NormalFormSentence nf =
      make_nf(sig_p(), {{qf_true(), {0, 2}, qf_atom("p", 1)}}, {});
  LinearSystem sys = encode_psi(nf);

  // 2 x vars, 2*4 y vars, one i var per guard-satisfying 1-type.
  REQUIRE(sys.vars.size() == 12);
  CHECK(sys.var_index("i_0_0") == 10);
  CHECK(sys.var_index("i_1_0") == 11);
  CHECK(sys.vars[10].finite_only);

  // 1 nonemptiness + 4 balance + 2 positive + 4 equality-discipline clauses,
  // in that order.
  REQUIRE(sys.clauses.size() == 11);
  for (size_t k = 1; k <= 4; ++k) {
    REQUIRE(sys.clauses[k].disjuncts.size() == 2);
    CHECK(comparison_is_zero_test(sys.clauses[k].disjuncts[0]));
    CHECK(sys.clauses[k].disjuncts[1].op == RelOp::Eq);
    CHECK(sys.clauses[k].disjuncts[1].lhs.terms.size() == 2);
  }

  // The positive clause for pi = 0 pins y_0_2 + y_0_3 to 0 + 2 i_0_0.
  const Comparison& c = sys.clauses[5].disjuncts[1];
  CHECK(c.lhs.terms.size() == 2);
  CHECK(c.rhs.constant == ExtNat(0));
  REQUIRE(c.rhs.terms.size() == 1);
  CHECK(c.rhs.terms[0].first == 10);
  CHECK(c.rhs.terms[0].second == ExtNat(2));

  // Equality discipline for pi = 0: the foreign equality type is pinned to
  // zero, then the equality mass sums to one.
  CHECK(sys.clauses[7].disjuncts.size() == 1);
  CHECK(sys.clauses[7].disjuncts[0].lhs.terms[0].first ==
        sys.var_index("y_0_3"));
  CHECK(sys.clauses[8].disjuncts[0].lhs.terms.size() == 2);
}

TEST_CASE("negative conjuncts emit the escape disjunction by period") {
  SUBCASE("period zero adds a single above-the-base escape") {
    NormalFormSentence nf =
        make_nf(sig_p(), {}, {{qf_true(), {2, 0}, qf_atom("p", 1)}});
    LinearSystem sys = encode_psi(nf);
    REQUIRE(sys.clauses.size() == 11);
    for (size_t k = 5; k <= 6; ++k) {
      REQUIRE(sys.clauses[k].disjuncts.size() == 4);
      CHECK(comparison_is_zero_test(sys.clauses[k].disjuncts[0]));
      CHECK(sys.clauses[k].disjuncts[1].op == RelOp::Lt);
      CHECK(sys.clauses[k].disjuncts[1].rhs.constant == ExtNat(2));
      CHECK(sys.clauses[k].disjuncts[2].op == RelOp::Eq);
      CHECK(sys.clauses[k].disjuncts[2].rhs.constant == ExtNat::inf());
      CHECK(sys.clauses[k].disjuncts[3].op == RelOp::Gt);
      CHECK(sys.clauses[k].disjuncts[3].rhs.constant == ExtNat(2));
    }
  }

  SUBCASE("positive period brackets the sum between lattice points") {
    NormalFormSentence nf =
        make_nf(sig_p(), {}, {{qf_true(), {1, 2}, qf_atom("p", 1)}});
    LinearSystem sys = encode_psi(nf);
    int j0 = sys.var_index("j_0_0");
    REQUIRE(j0 >= 0);
    CHECK(sys.vars[static_cast<size_t>(j0)].finite_only);
    CHECK(sys.var_index("i_0_0") == -1);

    // Two clauses per 1-type: above n + jp and below n + (j+1)p.
    REQUIRE(sys.clauses.size() == 13);
    const Clause& above = sys.clauses[5];
    const Clause& below = sys.clauses[6];
    REQUIRE(above.disjuncts.size() == 4);
    CHECK(above.disjuncts[3].op == RelOp::Gt);
    CHECK(above.disjuncts[3].rhs.constant == ExtNat(1));
    REQUIRE(above.disjuncts[3].rhs.terms.size() == 1);
    CHECK(above.disjuncts[3].rhs.terms[0] == std::pair{j0, ExtNat(2)});
    REQUIRE(below.disjuncts.size() == 4);
    CHECK(below.disjuncts[3].op == RelOp::Lt);
    CHECK(below.disjuncts[3].rhs.constant == ExtNat(3));
    REQUIRE(below.disjuncts[3].rhs.terms.size() == 1);
    CHECK(below.disjuncts[3].rhs.terms[0] == std::pair{j0, ExtNat(2)});
  }
}

TEST_CASE("the axiom of infinity separates the two modes") {
  FormulaPtr axiom = f_not(f_exists({0, 1}, "x1", f_true()));
  auto branches = branch_nullary(to_normal_form(axiom));
  REQUIRE(branches.size() == 1);
  const NormalFormSentence& nf = branches[0];

  CHECK_FALSE(decide2(nf, true).sat);

  Decide2Result res = decide2(nf, false);
  REQUIRE(res.sat);
  CHECK(value_of(res.system, res.assignment, "x_0") == ExtNat::inf());

  auto built = build_model(res.assignment, nf);
  REQUIRE(std::holds_alternative<AbstractModel>(built));
  const AbstractModel& m = std::get<AbstractModel>(built);
  REQUIRE(m.cardinalities.count(0) == 1);
  CHECK(m.cardinalities.at(0).is_inf());
  CHECK(m.profiles.at(0).size() >= 1);
}

TEST_CASE("a universal contradiction is unsatisfiable in both modes") {
  FormulaPtr s = f_forall("x1", f_and(f_atom("p", {"x1"}),
                                      f_not(f_atom("p", {"x1"}))));
  auto branches = branch_nullary(to_normal_form(s));
  bool fin = false, gen = false;
  for (const auto& b : branches) {
    fin = fin || decide2(b, true).sat;
    gen = gen || decide2(b, false).sat;
  }
  CHECK_FALSE(fin);
  CHECK_FALSE(gen);
}

TEST_CASE("only infinite witness counts escape a full periodic negation") {
  // not exists[1+1] x2 true: every finite count of extensions (always >= 1,
  // the element itself) hits the lattice, so only aleph_0 escapes.
  NormalFormSentence nf = make_nf(sig_empty(), {}, {{qf_true(), {1, 1}, qf_true()}});
  CHECK_FALSE(decide2(nf, true).sat);
  CHECK(decide2(nf, false).sat);
  // Pruning is a finite-mode strengthening and must be ignored over N*.
  CHECK(decide2(nf, false, true).sat);
}

TEST_CASE("homogenization rewires the two-element example and is idempotent") {
  Structure a;
  a.domain = 2;
  a.declare("r", 2);
  a.add_tuple("r", {0, 0});
  a.add_tuple("r", {0, 1});
  a.add_tuple("r", {1, 0});

  CHECK_FALSE(is_globally_homogeneous(a));

  Structure h = globally_homogenize(a);
  std::set<std::vector<uint32_t>> want = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(h.preds.at("r").tuples == want);
  CHECK(is_globally_homogeneous(h));

  FormulaPtr phi = f_forall("x1", f_exists({1, 1}, "x2", f_atom("r", {"x1", "x2"})));
  CHECK(evaluate(a, phi));
  CHECK(evaluate(h, phi));

  Structure again = globally_homogenize(h);
  CHECK(again.preds.at("r").tuples == want);
}

TEST_CASE("assignments read off pinned models") {
  SUBCASE("the singleton model of the one-witness sentence") {
    NormalFormSentence nf =
        make_nf(sig_empty(), {{qf_true(), {1, 0}, qf_true()}}, {});
    LinearSystem sys = encode_psi(nf);
    Structure a;
    a.domain = 1;
    Assignment asg = assignment_from_model(a, nf, sys);
    CHECK(satisfies(sys, asg));
    CHECK(value_of(sys, asg, "x_0") == ExtNat(1));
    CHECK(value_of(sys, asg, "y_0_0") == ExtNat(0));
    CHECK(value_of(sys, asg, "y_0_1") == ExtNat(1));
  }

  SUBCASE("unrealized 1-types receive the reflexive filler") {
    NormalFormSentence nf =
        make_nf(sig_p(), {{qf_true(), {1, 1}, qf_atom("p", 1)}}, {});
    LinearSystem sys = encode_psi(nf);
    Structure a;
    a.domain = 2;
    a.declare("p", 1);
    a.add_tuple("p", {0});
    a.add_tuple("p", {1});
    Assignment asg = assignment_from_model(a, nf, sys);
    CHECK(satisfies(sys, asg));
    CHECK(value_of(sys, asg, "x_0") == ExtNat(0));
    CHECK(value_of(sys, asg, "x_1") == ExtNat(2));
    // pi = 0 is unrealized; its equality mass sits on (not p, =).
    CHECK(value_of(sys, asg, "y_0_1") == ExtNat(1));
    CHECK(value_of(sys, asg, "y_1_2") == ExtNat(1));
    CHECK(value_of(sys, asg, "y_1_3") == ExtNat(1));
    CHECK(value_of(sys, asg, "i_1_0") == ExtNat(1));
  }

  SUBCASE("inhomogeneous models are rejected") {
    NormalFormSentence nf =
        make_nf(sig_pr(), {{qf_true(), {0, 1}, qf_true()}}, {});
    LinearSystem sys = encode_psi(nf);
    Structure a;
    a.domain = 2;
    a.declare("p", 1);
    a.declare("r", 2);
    a.add_tuple("r", {0, 0});
    CHECK_THROWS_AS(assignment_from_model(a, nf, sys), std::invalid_argument);
  }
}

TEST_CASE("an exact-two demand builds a two-element model") {
  NormalFormSentence nf =
      make_nf(sig_empty(), {{qf_true(), {2, 0}, qf_true()}}, {});
  Decide2Result res = decide2(nf, true);
  REQUIRE(res.sat);
  CHECK(value_of(res.system, res.assignment, "x_0") == ExtNat(2));
  CHECK(value_of(res.system, res.assignment, "y_0_0") == ExtNat(1));
  CHECK(value_of(res.system, res.assignment, "y_0_1") == ExtNat(1));

  auto built = build_model(res.assignment, nf);
  REQUIRE(std::holds_alternative<Structure>(built));
  const Structure& s = std::get<Structure>(built);
  CHECK(s.domain == 2);
  CHECK(evaluate(s, nf_to_formula(nf)));
  CHECK(is_globally_homogeneous(s));
}

TEST_CASE("ill-formed inputs are rejected") {
  NormalFormSentence wide = make_nf(sig_p(), {{qf_true(), {1, 1}, qf_true()}}, {});
  wide.width = 3;
  CHECK_THROWS_AS(encode_psi(wide), std::invalid_argument);

  NormalFormSentence resid = make_nf(sig_p(), {{qf_true(), {1, 1}, qf_true()}}, {});
  resid.residue = qf_atom("u", 0);
  CHECK_THROWS_AS(encode_psi(resid), std::invalid_argument);

  NormalFormSentence nul = make_nf(sig_p(), {{qf_atom("u", 0), {1, 1}, qf_true()}}, {});
  CHECK_THROWS_AS(encode_psi(nul), std::invalid_argument);

  NormalFormSentence nf = make_nf(sig_empty(), {{qf_true(), {1, 0}, qf_true()}}, {});
  Assignment bad;
  bad.values.assign(2, ExtNat(0));
  CHECK_THROWS_AS(build_model(bad, nf), std::invalid_argument);
  bad.values.assign(3, ExtNat(0));
  CHECK_THROWS_AS(build_model(bad, nf), std::invalid_argument);
}

TEST_CASE("homogenized brute-force models satisfy the constraint system") {
  std::mt19937 rng(77001);
  int models = 0;
  for (int iter = 0; iter < 400 && models < 100; ++iter) {
    NormalFormSentence nf = random_nf(rng);
    FormulaPtr phi = nf_to_formula(nf);
    auto m = brute_force_search(phi, nf.signature, 3);
    if (!m) continue;
    ++models;

    Structure h = globally_homogenize(*m);
    CHECK(is_globally_homogeneous(h));
    CHECK(evaluate(h, phi));

    LinearSystem sys = encode_psi(nf);
    Assignment asg = assignment_from_model(h, nf, sys);
    CHECK(satisfies(sys, asg));
  }
  CHECK(models >= 60);
}

TEST_CASE("decided systems materialize into verified models") {
  std::mt19937 rng(77002);
  int sat_count = 0, unsat_count = 0;
  for (int iter = 0; iter < 150; ++iter) {
    NormalFormSentence nf = random_nf(rng);
    FormulaPtr phi = nf_to_formula(nf);
    Decide2Result fin = decide2(nf, true);
    Decide2Result gen = decide2(nf, false);

    // A finite model is in particular a countable one.
    if (fin.sat) CHECK(gen.sat);

    auto m = brute_force_search(phi, nf.signature, 3);
    if (m) CHECK(fin.sat);
    if (!fin.sat) CHECK_FALSE(m.has_value());

    if (fin.sat) {
      ++sat_count;
      auto built = build_model(fin.assignment, nf);
      REQUIRE(std::holds_alternative<Structure>(built));
      const Structure& s = std::get<Structure>(built);
      s.validate();
      CHECK(s.domain >= 1);
      CHECK(evaluate(s, phi));
      CHECK(is_globally_homogeneous(s));
    } else {
      ++unsat_count;
    }
  }
  CHECK(sat_count >= 40);
  CHECK(unsat_count >= 10);
}

TEST_CASE("pruning never changes the finite verdict") {
  std::mt19937 rng(77003);
  for (int iter = 0; iter < 80; ++iter) {
    NormalFormSentence nf = random_nf(rng);
    // Force at least one conjunct the pruning pass acts on.
    AtomBasis b2 = atom_basis(nf.signature, 2);
    nf.negatives.push_back({qf_true(), {1, 1}, random_qf(rng, b2, 2)});

    Decide2Result plain = decide2(nf, true, false);
    Decide2Result pruned = decide2(nf, true, true);
    CHECK(plain.sat == pruned.sat);
    if (pruned.sat) {
      auto built = build_model(pruned.assignment, nf);
      REQUIRE(std::holds_alternative<Structure>(built));
      CHECK(evaluate(std::get<Structure>(built), nf_to_formula(nf)));
    }
  }
}

}  // namespace flpc
