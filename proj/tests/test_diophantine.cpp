#include "doctest.h"

#include <functional>
#include <random>

#include "diophantine.hpp"

using namespace flpc;

namespace {

LinExpr expr(std::vector<std::pair<int, ExtNat>> terms, ExtNat constant = 0) {
  LinExpr e;
  e.constant = constant;
  for (auto& [v, c] : terms) e.add_term(v, c);
  return e;
}

Comparison cmp(LinExpr l, RelOp op, LinExpr r) {
  return {std::move(l), op, std::move(r)};
}

Clause unit(Comparison c) { return Clause{{std::move(c)}}; }

// Exhaustive search over domain^n, the reference answer for small systems.
bool oracle_sat(const LinearSystem& s, const std::vector<ExtNat>& domain) {
  Assignment a;
  a.values.assign(s.vars.size(), ExtNat(0));
  std::function<bool(size_t)> rec = [&](size_t i) -> bool {
    if (i == s.vars.size()) return satisfies(s, a);
    for (ExtNat v : domain) {
      if (s.vars[i].finite_only && v.is_inf()) continue;
      a.values[i] = v;
      if (rec(i + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

std::vector<ExtNat> range_domain(uint64_t hi, bool with_inf) {
  std::vector<ExtNat> d;
  for (uint64_t v = 0; v <= hi; ++v) d.push_back(ExtNat(v));
  if (with_inf) d.push_back(ExtNat::inf());
  return d;
}

LinearSystem random_system(std::mt19937_64& rng, bool allow_inf) {
  auto pick = [&](uint64_t n) { return rng() % n; };
  LinearSystem s;
  int nv = 1 + static_cast<int>(pick(3));
  for (int i = 0; i < nv; ++i)
    s.add_var("v" + std::to_string(i), allow_inf && pick(5) == 0);
  int nc = 1 + static_cast<int>(pick(3));
  for (int c = 0; c < nc; ++c) {
    Clause cl;
    int nd = 1 + static_cast<int>(pick(3));
    for (int d = 0; d < nd; ++d) {
      auto side = [&]() {
        LinExpr e;
        int nt = static_cast<int>(pick(3));
        for (int t = 0; t < nt; ++t) {
          ExtNat coeff = (allow_inf && pick(8) == 0)
                             ? ExtNat::inf()
                             : ExtNat(1 + pick(3));
          e.add_term(static_cast<int>(pick(nv)), coeff);
        }
        e.constant = (allow_inf && pick(12) == 0) ? ExtNat::inf()
                                                  : ExtNat(pick(7));
        return e;
      };
      RelOp ops[] = {RelOp::Eq, RelOp::Ne, RelOp::Le,
                     RelOp::Lt, RelOp::Ge, RelOp::Gt};
      cl.disjuncts.push_back(cmp(side(), ops[pick(6)], side()));
    }
    s.clauses.push_back(std::move(cl));
  }
  return s;
}

const SolverLimits kTestLimits{200'000, 10'000};

}  // namespace

TEST_CASE("extended naturals: zero times inf is zero") {
  CHECK(ExtNat(0) * ExtNat::inf() == ExtNat(0));
  CHECK(ExtNat::inf() * ExtNat(0) == ExtNat(0));
}

TEST_CASE("extended naturals: addition absorbs inf") {
  CHECK(ExtNat(5) + ExtNat::inf() == ExtNat::inf());
  CHECK(ExtNat::inf() + ExtNat(0) == ExtNat::inf());
  CHECK(ExtNat::inf() + ExtNat::inf() == ExtNat::inf());
  CHECK(ExtNat(2) + ExtNat(3) == ExtNat(5));
}

TEST_CASE("extended naturals: nonzero times inf is inf") {
  CHECK(ExtNat(1) * ExtNat::inf() == ExtNat::inf());
  CHECK(ExtNat::inf() * ExtNat(7) == ExtNat::inf());
  CHECK(ExtNat::inf() * ExtNat::inf() == ExtNat::inf());
  CHECK(ExtNat(3) * ExtNat(4) == ExtNat(12));
}

TEST_CASE("extended naturals: ordering puts inf on top") {
  CHECK(ExtNat(1000000) < ExtNat::inf());
  CHECK(ExtNat::inf() <= ExtNat::inf());
  CHECK(ExtNat::inf() == ExtNat::inf());
  CHECK(!(ExtNat::inf() < ExtNat::inf()));
  CHECK(ExtNat(0) < ExtNat(1));
}

TEST_CASE("extended naturals: overflow and misuse throw") {
  CHECK_THROWS_AS(ExtNat(UINT64_MAX), std::overflow_error);
  CHECK_THROWS_AS(ExtNat(UINT64_MAX - 1) + ExtNat(5), std::overflow_error);
  CHECK_THROWS_AS(ExtNat(UINT64_MAX / 2) * ExtNat(3), std::overflow_error);
  CHECK_THROWS_AS(ExtNat::inf().value(), std::logic_error);
  CHECK(ExtNat(UINT64_MAX - 1).value() == UINT64_MAX - 1);
}

TEST_CASE("linear set membership") {
  // {2 + 3i}: 2, 5, 8, ...
  CHECK(linear_set_contains(ExtNat(2), 2, 3));
  CHECK(linear_set_contains(ExtNat(8), 2, 3));
  CHECK(!linear_set_contains(ExtNat(3), 2, 3));
  CHECK(!linear_set_contains(ExtNat(1), 2, 3));
  // period 0 is a singleton
  CHECK(linear_set_contains(ExtNat(4), 4, 0));
  CHECK(!linear_set_contains(ExtNat(5), 4, 0));
  // inf is never a member, even of {0 + 1i}
  CHECK(!linear_set_contains(ExtNat::inf(), 0, 1));
  CHECK(!linear_set_contains(ExtNat::inf(), 0, 0));
  CHECK(linear_set_contains(ExtNat(0), 0, 1));
}

TEST_CASE("evaluation over extended naturals") {
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y");
  Assignment a;
  a.values = {ExtNat(2), ExtNat::inf()};
  CHECK(eval_expr(expr({{x, 3}}, 1), a) == ExtNat(7));
  CHECK(eval_expr(expr({{x, 0}, {y, 1}}), a) == ExtNat::inf());
  CHECK(eval_expr(expr({{y, 0}}), a) == ExtNat(0));  // zero coeff dropped
  CHECK(eval_comparison(cmp(expr({{x, 1}}), RelOp::Lt, expr({{y, 1}})), a));
  CHECK(eval_comparison(cmp(expr({{y, 1}}), RelOp::Eq, expr({{y, 2}})), a));
  CHECK(!eval_comparison(cmp(expr({{y, 1}}), RelOp::Ne, expr({{y, 2}})), a));
}

TEST_CASE("solve: simple equality with bounds") {
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y");
  s.clauses.push_back(unit(cmp(expr({{x, 1}, {y, 1}}), RelOp::Eq,
                               LinExpr::of_constant(5))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(2))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(y), RelOp::Ge,
                               LinExpr::of_constant(2))));
  auto res = solve(s, SolveMode::OverN, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(satisfies(s, res.assignment));
  CHECK(res.assignment.values[x] == ExtNat(2));
  CHECK(res.assignment.values[y] == ExtNat(3));

  // determinism
  auto res2 = solve(s, SolveMode::OverN, kTestLimits);
  CHECK(res2.assignment.values == res.assignment.values);
}

TEST_CASE("solve: infeasible by propagation") {
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y");
  s.clauses.push_back(unit(cmp(expr({{x, 1}, {y, 1}}), RelOp::Eq,
                               LinExpr::of_constant(3))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(2))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(y), RelOp::Ge,
                               LinExpr::of_constant(2))));
  CHECK(solve(s, SolveMode::OverN, kTestLimits).status == SolveStatus::Unsat);
  CHECK(solve(s, SolveMode::OverNStar, kTestLimits).status ==
        SolveStatus::Unsat);
}

TEST_CASE("solve: parity contradiction needs the gcd test") {
  // 2x = 2y + 1 has no solutions; boxes alone would never close
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y");
  s.clauses.push_back(unit(cmp(expr({{x, 2}}), RelOp::Eq, expr({{y, 2}}, 1))));
  auto res = solve(s, SolveMode::OverN, kTestLimits);
  CHECK(res.status == SolveStatus::Unsat);
  // over the extended naturals both sides can absorb to inf
  auto gen = solve(s, SolveMode::OverNStar, kTestLimits);
  REQUIRE(gen.status == SolveStatus::Sat);
  CHECK(gen.assignment.values[x] == ExtNat::inf());
  CHECK(gen.assignment.values[y] == ExtNat::inf());
}

TEST_CASE("solve: congruences from divisibility, merged by crt") {
  // x = 2a, x = 3b, 1 <= x <= 20 forces x = 6
  LinearSystem s;
  int x = s.add_var("x");
  int a = s.add_var("a");
  int b = s.add_var("b");
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Eq, expr({{a, 2}}))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Eq, expr({{b, 3}}))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(1))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Le,
                               LinExpr::of_constant(20))));
  auto res = solve(s, SolveMode::OverN, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(res.assignment.values[x] == ExtNat(6));
  CHECK(res.assignment.values[a] == ExtNat(3));
  CHECK(res.assignment.values[b] == ExtNat(2));
}

TEST_CASE("solve: crt conflict is unsat") {
  // x = 2a, x = 2b + 1
  LinearSystem s;
  int x = s.add_var("x");
  int a = s.add_var("a");
  int b = s.add_var("b");
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Eq, expr({{a, 2}}))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Eq,
                               expr({{b, 2}}, 1))));
  CHECK(solve(s, SolveMode::OverN, kTestLimits).status == SolveStatus::Unsat);
}

TEST_CASE("solve: free periodic counter eliminated into a congruence") {
  // y1 + y2 = 2 + 3i with y1 = y2 forces y1 = y2 = 1 + multiple handling
  LinearSystem s;
  int y1 = s.add_var("y1");
  int y2 = s.add_var("y2");
  int i = s.add_var("i");
  s.clauses.push_back(unit(cmp(expr({{y1, 1}, {y2, 1}}), RelOp::Eq,
                               expr({{i, 3}}, 2))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(y1), RelOp::Eq,
                               LinExpr::of_var(y2))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(y1), RelOp::Ge,
                               LinExpr::of_constant(2))));
  auto res = solve(s, SolveMode::OverN, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(satisfies(s, res.assignment));
  // smallest even total in {2 + 3i} with both parts >= 2 is 8
  CHECK(res.assignment.values[y1] == ExtNat(4));
  CHECK(res.assignment.values[y2] == ExtNat(4));
  CHECK(res.assignment.values[i] == ExtNat(2));
}

TEST_CASE("solve: opposed equalities with no interval contradiction") {
  // 2x = y and 2x = y + 1 together are unsat; caught by the negation check
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y");
  s.clauses.push_back(unit(cmp(expr({{x, 2}}), RelOp::Eq, expr({{y, 1}}))));
  s.clauses.push_back(unit(cmp(expr({{x, 2}}), RelOp::Eq, expr({{y, 1}}, 1))));
  auto res = solve(s, SolveMode::OverN, kTestLimits);
  CHECK(res.status == SolveStatus::Unsat);
}

TEST_CASE("solve: inf constant on the right") {
  LinearSystem s;
  int x = s.add_var("x");
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Eq,
                               LinExpr::of_constant(ExtNat::inf()))));
  auto res = solve(s, SolveMode::OverNStar, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(res.assignment.values[x] == ExtNat::inf());
  CHECK(solve(s, SolveMode::OverN, kTestLimits).status == SolveStatus::Unsat);
}

TEST_CASE("solve: finite_only blocks the infinite witness") {
  LinearSystem s;
  int x = s.add_var("x", true);
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Eq,
                               LinExpr::of_constant(ExtNat::inf()))));
  CHECK(solve(s, SolveMode::OverNStar, kTestLimits).status ==
        SolveStatus::Unsat);
}

TEST_CASE("solve: strictly below inf picks a finite value") {
  LinearSystem s;
  int x = s.add_var("x");
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Lt,
                               LinExpr::of_constant(ExtNat::inf()))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(3))));
  auto res = solve(s, SolveMode::OverNStar, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(res.assignment.values[x] == ExtNat(3));
}

TEST_CASE("solve: x != x is unsat in both modes") {
  LinearSystem s;
  int x = s.add_var("x");
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ne,
                               LinExpr::of_var(x))));
  CHECK(solve(s, SolveMode::OverN, kTestLimits).status == SolveStatus::Unsat);
  CHECK(solve(s, SolveMode::OverNStar, kTestLimits).status ==
        SolveStatus::Unsat);
}

TEST_CASE("solve: inf coefficient pins its variable or goes infinite") {
  LinearSystem s;
  int x = s.add_var("x");
  s.clauses.push_back(unit(cmp(expr({{x, ExtNat::inf()}}), RelOp::Eq,
                               LinExpr::of_constant(0))));
  auto res = solve(s, SolveMode::OverNStar, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(res.assignment.values[x] == ExtNat(0));

  LinearSystem s2;
  int z = s2.add_var("z");
  s2.clauses.push_back(unit(cmp(expr({{z, ExtNat::inf()}}), RelOp::Ge,
                                LinExpr::of_constant(1))));
  CHECK(solve(s2, SolveMode::OverN, kTestLimits).status == SolveStatus::Unsat);
  auto r2 = solve(s2, SolveMode::OverNStar, kTestLimits);
  REQUIRE(r2.status == SolveStatus::Sat);
  CHECK(satisfies(s2, r2.assignment));
}

TEST_CASE("solve: disjunction branches in order") {
  LinearSystem s;
  int x = s.add_var("x");
  Clause cl;
  cl.disjuncts.push_back(cmp(LinExpr::of_var(x), RelOp::Eq,
                             LinExpr::of_constant(4)));
  cl.disjuncts.push_back(cmp(LinExpr::of_var(x), RelOp::Eq,
                             LinExpr::of_constant(2)));
  s.clauses.push_back(cl);
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(3))));
  auto res = solve(s, SolveMode::OverN, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(res.assignment.values[x] == ExtNat(4));
}

TEST_CASE("solve: guarded emptiness pattern") {
  // the shape of a guard clause: x = 0 or sum = target
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y");
  Clause cl;
  cl.disjuncts.push_back(cmp(LinExpr::of_var(x), RelOp::Eq,
                             LinExpr::of_constant(0)));
  cl.disjuncts.push_back(cmp(expr({{y, 1}}), RelOp::Eq,
                             LinExpr::of_constant(7)));
  s.clauses.push_back(cl);
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(1))));
  s.clauses.push_back(unit(cmp(LinExpr::of_var(y), RelOp::Le,
                               LinExpr::of_constant(3))));
  // x >= 1 rules out the first disjunct, y <= 3 the second
  CHECK(solve(s, SolveMode::OverN, kTestLimits).status == SolveStatus::Unsat);
}

TEST_CASE("solve: empty system and no-clause vars") {
  LinearSystem s;
  s.add_var("x");
  auto res = solve(s, SolveMode::OverNStar, kTestLimits);
  REQUIRE(res.status == SolveStatus::Sat);
  CHECK(res.assignment.values[0] == ExtNat(0));
}

TEST_CASE("solve: node cap reports CapExceeded") {
  LinearSystem s;
  int x = s.add_var("x");
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Ge,
                               LinExpr::of_constant(1))));
  SolverLimits tiny{0, 10'000};
  CHECK(solve(s, SolveMode::OverN, tiny).status == SolveStatus::CapExceeded);
}

TEST_CASE("solve: matches exhaustive search on random finite systems") {
  std::mt19937_64 rng(20260401);
  int caps = 0;
  for (int round = 0; round < 300; ++round) {
    LinearSystem s = random_system(rng, false);
    auto res = solve(s, SolveMode::OverN, kTestLimits);
    if (res.status == SolveStatus::CapExceeded) {
      ++caps;
      continue;
    }
    bool oracle = oracle_sat(s, range_domain(12, false));
    if (res.status == SolveStatus::Sat) {
      CHECK(satisfies(s, res.assignment));
      for (ExtNat v : res.assignment.values) CHECK(!v.is_inf());
    } else {
      CHECK(!oracle);
    }
    if (oracle) CHECK(res.status == SolveStatus::Sat);
  }
  CHECK(caps <= 15);
}

TEST_CASE("solve: matches exhaustive search over the extended naturals") {
  std::mt19937_64 rng(8881234);
  int caps = 0;
  for (int round = 0; round < 200; ++round) {
    LinearSystem s = random_system(rng, true);
    auto res = solve(s, SolveMode::OverNStar, kTestLimits);
    if (res.status == SolveStatus::CapExceeded) {
      ++caps;
      continue;
    }
    bool oracle = oracle_sat(s, range_domain(6, true));
    if (res.status == SolveStatus::Sat) {
      CHECK(satisfies(s, res.assignment));
    } else {
      CHECK(!oracle);
    }
    if (oracle) CHECK(res.status == SolveStatus::Sat);
  }
  CHECK(caps <= 15);
}

TEST_CASE("solve: a witness over N also works over N star") {
  std::mt19937_64 rng(777001);
  for (int round = 0; round < 100; ++round) {
    LinearSystem s = random_system(rng, false);
    auto fin = solve(s, SolveMode::OverN, kTestLimits);
    if (fin.status != SolveStatus::Sat) continue;
    auto gen = solve(s, SolveMode::OverNStar, kTestLimits);
    CHECK(gen.status == SolveStatus::Sat);
  }
}

TEST_CASE("json: system round trip") {
  LinearSystem s;
  int x = s.add_var("x");
  int y = s.add_var("y", true);
  Clause cl;
  cl.disjuncts.push_back(cmp(expr({{x, 2}, {y, ExtNat::inf()}}, 1), RelOp::Le,
                             LinExpr::of_constant(ExtNat::inf())));
  cl.disjuncts.push_back(cmp(LinExpr::of_var(y), RelOp::Ne,
                             LinExpr::of_constant(3)));
  s.clauses.push_back(cl);
  s.clauses.push_back(unit(cmp(LinExpr::of_var(x), RelOp::Gt,
                               LinExpr::of_var(y))));

  std::string text = system_to_json(s);
  LinearSystem back = system_from_json(text);
  CHECK(system_to_json(back) == text);
  REQUIRE(back.vars.size() == 2);
  CHECK(back.vars[1].finite_only);
  REQUIRE(back.clauses.size() == 2);
  CHECK(back.clauses[0].disjuncts[0].op == RelOp::Le);
  CHECK(back.clauses[0].disjuncts[0].lhs.constant == ExtNat(1));
  CHECK(back.clauses[0].disjuncts[0].rhs.constant == ExtNat::inf());
}

TEST_CASE("json: assignment round trip") {
  LinearSystem s;
  s.add_var("x");
  s.add_var("y");
  Assignment a;
  a.values = {ExtNat(42), ExtNat::inf()};
  std::string text = assignment_to_json(s, a);
  Assignment back = assignment_from_json(s, text);
  CHECK(back.values == a.values);
}

TEST_CASE("json: malformed input throws") {
  CHECK_THROWS(system_from_json("{}"));
  CHECK_THROWS(system_from_json(
      R"({"variables":[{"name":"x"}],"clauses":[[]]})"));
  CHECK_THROWS(system_from_json(
      R"({"variables":[{"name":"x"}],
          "clauses":[[{"lhs":{"terms":{"z":1},"const":0},"op":"=",
                       "rhs":{"terms":{},"const":0}}]]})"));
  LinearSystem s;
  s.add_var("x");
  CHECK_THROWS(assignment_from_json(s, R"({"x":"huge"})"));
}
