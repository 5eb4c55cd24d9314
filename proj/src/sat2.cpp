#include "sat2.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <utility>

namespace flpc {

namespace {

bool qf_has_nullary(const QFNodePtr& n) {
  if (!n) return false;
  if (n->kind == QKind::Atom && n->arity == 0) return true;
  for (const auto& c : n->children)
    if (qf_has_nullary(c)) return true;
  return false;
}

void require_width2(const NormalFormSentence& nf, const char* who) {
  if (nf.width != 2)
    throw std::invalid_argument(std::string(who) + ": sentence width must be 2");
  if (nf.residue && nf.residue->kind != QKind::True)
    throw std::invalid_argument(std::string(who) +
                                ": resolve nullary predicates first (nontrivial residue)");
  for (const auto& group : {nf.positives, nf.negatives})
    for (const auto& c : group)
      if (qf_has_nullary(c.guard) || qf_has_nullary(c.body))
        throw std::invalid_argument(std::string(who) +
                                    ": resolve nullary predicates first (nullary atom)");
}

// Type spaces over the sentence signature. Kept in one non-movable bundle so
// the FlutedType basis pointers stay valid; enumerate_types returns types in
// ascending bits order, so the index of a type equals its bit pattern.
struct Enc {
  AtomBasis basis1;
  AtomBasis basis2;
  std::vector<FlutedType> types1;
  std::vector<FlutedType> types2;
  std::vector<uint32_t> endpoint;                  // tau -> pi bits
  std::vector<std::vector<uint32_t>> by_endpoint;  // pi -> taus, ascending
  std::vector<uint32_t> eq_taus;                   // taus with the equality bit

  Enc() = default;
  Enc(const Enc&) = delete;
  Enc& operator=(const Enc&) = delete;
};

void init_enc(Enc& e, const NormalFormSentence& nf) {
  e.basis1 = atom_basis(nf.signature, 1);
  e.basis2 = atom_basis(nf.signature, 2);
  e.types1 = enumerate_types(e.basis1);
  e.types2 = enumerate_types(e.basis2);
  e.endpoint.resize(e.types2.size());
  e.by_endpoint.assign(e.types1.size(), {});
  uint32_t eq_idx = *e.basis2.eq_index();
  for (uint32_t tau = 0; tau < e.types2.size(); ++tau) {
    uint32_t pi = restrict_type(e.types2[tau], e.basis1).bits;
    e.endpoint[tau] = pi;
    e.by_endpoint[pi].push_back(tau);
    if (e.types2[tau].atom_true(eq_idx)) e.eq_taus.push_back(tau);
  }
}

std::vector<char> guard_table(const Enc& e, const NormalFormSentence& nf,
                              const NFConjunct& c) {
  std::vector<char> sat(e.types1.size());
  QFFormula g = nf.guard_formula(c);
  for (uint32_t pi = 0; pi < e.types1.size(); ++pi)
    sat[pi] = type_satisfies(e.types1[pi], g);
  return sat;
}

std::vector<char> body_table(const Enc& e, const NormalFormSentence& nf,
                             const NFConjunct& c) {
  std::vector<char> sat(e.types2.size());
  QFFormula b = nf.body_formula(c);
  for (uint32_t tau = 0; tau < e.types2.size(); ++tau)
    sat[tau] = type_satisfies(e.types2[tau], b);
  return sat;
}

Comparison is_zero(int var) {
  return {LinExpr::of_var(var), RelOp::Eq, LinExpr::of_constant(0)};
}

// The equality 2-type an unrealized 1-type pi would emit on its reflexive
// pair: pi's unary atoms, no binary atoms, the equality bit set.
uint32_t reflexive_tau(const Enc& e, uint32_t pi) {
  uint32_t bits = 0;
  uint32_t n = static_cast<uint32_t>(e.basis2.atoms.size());
  FlutedType p1{&e.basis1, pi};
  for (uint32_t i = 0; i < n; ++i) {
    const BasisAtom& at = e.basis2.atoms[i];
    bool bit = false;
    if (at.is_eq) {
      bit = true;
    } else if (at.arity == 1) {
      bit = p1.atom_true(*e.basis1.index_of(at.pred, 1));
    }
    if (bit) bits |= 1u << (n - 1 - i);
  }
  return bits;
}

}  // namespace

std::string x_var_name(uint32_t pi) { return "x_" + std::to_string(pi); }

std::string y_var_name(uint32_t pi, uint32_t tau) {
  return "y_" + std::to_string(pi) + "_" + std::to_string(tau);
}

std::string i_var_name(uint32_t pi, size_t r) {
  return "i_" + std::to_string(pi) + "_" + std::to_string(r);
}

std::string j_var_name(uint32_t pi, size_t t) {
  return "j_" + std::to_string(pi) + "_" + std::to_string(t);
}

LinearSystem encode_psi(const NormalFormSentence& nf) {
  require_width2(nf, "encode_psi");
  Enc e;
  init_enc(e, nf);
  const uint32_t n1 = static_cast<uint32_t>(e.types1.size());
  const uint32_t n2 = static_cast<uint32_t>(e.types2.size());

  LinearSystem sys;
  std::vector<int> xv(n1);
  for (uint32_t pi = 0; pi < n1; ++pi) xv[pi] = sys.add_var(x_var_name(pi));
  std::vector<std::vector<int>> yv(n1, std::vector<int>(n2));
  for (uint32_t pi = 0; pi < n1; ++pi)
    for (uint32_t tau = 0; tau < n2; ++tau)
      yv[pi][tau] = sys.add_var(y_var_name(pi, tau));

  std::vector<std::vector<char>> pos_guard, pos_body, neg_guard, neg_body;
  for (const auto& c : nf.positives) {
    pos_guard.push_back(guard_table(e, nf, c));
    pos_body.push_back(body_table(e, nf, c));
  }
  for (const auto& c : nf.negatives) {
    neg_guard.push_back(guard_table(e, nf, c));
    neg_body.push_back(body_table(e, nf, c));
  }

  // Periodic counters; finite-only in both solve modes.
  std::map<std::pair<size_t, uint32_t>, int> iv, jv;
  for (size_t r = 0; r < nf.positives.size(); ++r) {
    if (nf.positives[r].count.period == 0) continue;
    for (uint32_t pi = 0; pi < n1; ++pi)
      if (pos_guard[r][pi]) iv[{r, pi}] = sys.add_var(i_var_name(pi, r), true);
  }
  for (size_t t = 0; t < nf.negatives.size(); ++t) {
    // period 1 leaves no gaps between lattice points, so no counter is needed
    if (nf.negatives[t].count.period < 2) continue;
    for (uint32_t pi = 0; pi < n1; ++pi)
      if (neg_guard[t][pi]) jv[{t, pi}] = sys.add_var(j_var_name(pi, t), true);
  }

  // The domain is nonempty.
  {
    LinExpr sum;
    for (uint32_t pi = 0; pi < n1; ++pi) sum.add_term(xv[pi], 1);
    sys.clauses.push_back({{{sum, RelOp::Ge, LinExpr::of_constant(1)}}});
  }

  // Realized 1-types emit, toward every endpoint type, exactly as many
  // 2-types as the endpoint has elements.
  for (uint32_t pi = 0; pi < n1; ++pi)
    for (uint32_t pi2 = 0; pi2 < n1; ++pi2) {
      LinExpr sum;
      for (uint32_t tau : e.by_endpoint[pi2]) sum.add_term(yv[pi][tau], 1);
      sys.clauses.push_back(
          {{is_zero(xv[pi]), {sum, RelOp::Eq, LinExpr::of_var(xv[pi2])}}});
    }

  // Positive conjuncts: the satisfying-witness sum lies on the lattice.
  for (size_t r = 0; r < nf.positives.size(); ++r) {
    const CountSpec& ct = nf.positives[r].count;
    for (uint32_t pi = 0; pi < n1; ++pi) {
      if (!pos_guard[r][pi]) continue;
      LinExpr sum;
      for (uint32_t tau = 0; tau < n2; ++tau)
        if (pos_body[r][tau]) sum.add_term(yv[pi][tau], 1);
      LinExpr rhs = LinExpr::of_constant(ct.base);
      if (ct.period > 0) rhs.add_term(iv.at({r, pi}), ct.period);
      sys.clauses.push_back({{is_zero(xv[pi]), {sum, RelOp::Eq, rhs}}});
    }
  }

  // Negative conjuncts: the sum escapes the lattice. Below the base, or
  // infinite, or above the base (period 0), or strictly between consecutive
  // lattice points (period > 0; one clause per side of the gap).
  for (size_t t = 0; t < nf.negatives.size(); ++t) {
    const CountSpec& ct = nf.negatives[t].count;
    for (uint32_t pi = 0; pi < n1; ++pi) {
      if (!neg_guard[t][pi]) continue;
      LinExpr sum;
      for (uint32_t tau = 0; tau < n2; ++tau)
        if (neg_body[t][tau]) sum.add_term(yv[pi][tau], 1);
      Clause common;
      common.disjuncts.push_back(is_zero(xv[pi]));
      common.disjuncts.push_back({sum, RelOp::Lt, LinExpr::of_constant(ct.base)});
      common.disjuncts.push_back({sum, RelOp::Eq, LinExpr::of_constant(ExtNat::inf())});
      if (ct.period == 0) {
        Clause cl = common;
        cl.disjuncts.push_back({sum, RelOp::Gt, LinExpr::of_constant(ct.base)});
        sys.clauses.push_back(std::move(cl));
      } else if (ct.period == 1) {
        // the lattice covers everything from the base upward
        sys.clauses.push_back(std::move(common));
      } else {
        int j = jv.at({t, pi});
        Clause above = common;
        LinExpr lo = LinExpr::of_constant(ct.base);
        lo.add_term(j, ct.period);
        above.disjuncts.push_back({sum, RelOp::Gt, std::move(lo)});
        sys.clauses.push_back(std::move(above));
        Clause below = std::move(common);
        LinExpr hi = LinExpr::of_constant(ct.base + ct.period);
        hi.add_term(j, ct.period);
        below.disjuncts.push_back({sum, RelOp::Lt, std::move(hi)});
        sys.clauses.push_back(std::move(below));
      }
    }
  }

  // Equality discipline: every 1-type concentrates one witness on its own
  // reflexive 2-type, realized or not; foreign equality types carry none.
  for (uint32_t pi = 0; pi < n1; ++pi) {
    for (uint32_t tau : e.eq_taus)
      if (e.endpoint[tau] != pi)
        sys.clauses.push_back({{is_zero(yv[pi][tau])}});
    LinExpr sum;
    for (uint32_t tau : e.eq_taus) sum.add_term(yv[pi][tau], 1);
    sys.clauses.push_back({{{sum, RelOp::Eq, LinExpr::of_constant(1)}}});
  }

  return sys;
}

void add_witness_pruning(LinearSystem& sys, const NormalFormSentence& nf) {
  require_width2(nf, "add_witness_pruning");
  Enc e;
  init_enc(e, nf);
  for (size_t t = 0; t < nf.negatives.size(); ++t) {
    const CountSpec& ct = nf.negatives[t].count;
    if (ct.base != 1 || ct.period != 1) continue;
    std::vector<char> guard = guard_table(e, nf, nf.negatives[t]);
    std::vector<char> body = body_table(e, nf, nf.negatives[t]);
    for (uint32_t pi = 0; pi < e.types1.size(); ++pi) {
      if (!guard[pi]) continue;
      for (uint32_t tau = 0; tau < e.types2.size(); ++tau) {
        if (!body[tau]) continue;
        int v = sys.var_index(y_var_name(pi, tau));
        int xvar = sys.var_index(x_var_name(pi));
        // Guarded like the conjunct itself: an unrealized 1-type still needs
        // its reflexive equality filler, which may well satisfy delta.
        if (v >= 0 && xvar >= 0)
          sys.clauses.push_back({{is_zero(xvar), is_zero(v)}});
      }
    }
  }
}

static SolverLimits limits_from_env() {
  SolverLimits lim;
  if (const char* s = std::getenv("FLPC_BRANCH_LIMIT"))
    lim.max_nodes = std::strtoull(s, nullptr, 10);
  if (const char* s = std::getenv("FLPC_TIME_LIMIT_MS"))
    lim.time_limit_ms = std::strtoull(s, nullptr, 10);
  return lim;
}

Decide2Result decide2(const NormalFormSentence& nf, bool finite, bool prune) {
  Decide2Result res;
  res.system = encode_psi(nf);
  if (finite && prune) add_witness_pruning(res.system, nf);
  SolveResult sr = solve(res.system, finite ? SolveMode::OverN : SolveMode::OverNStar,
                         limits_from_env());
  res.solver_nodes = sr.nodes;
  if (sr.status == SolveStatus::CapExceeded)
    throw SearchCapExceeded("decide2: solver limits exceeded");
  res.sat = sr.status == SolveStatus::Sat;
  if (res.sat) res.assignment = std::move(sr.assignment);
  return res;
}

bool is_globally_homogeneous(const Structure& a) {
  Signature sig = a.signature();
  AtomBasis b1 = atom_basis(sig, 1);
  AtomBasis b2 = atom_basis(sig, 2);
  std::map<uint32_t, Profile> seen;
  for (uint32_t el = 0; el < a.domain; ++el) {
    uint32_t pi = compute_ftp(a, {el}, b1).bits;
    Profile rho = compute_profile(a, {el}, b2);
    auto it = seen.find(pi);
    if (it == seen.end())
      seen.emplace(pi, std::move(rho));
    else if (it->second.counts != rho.counts)
      return false;
  }
  return true;
}

Structure globally_homogenize(const Structure& a) {
  Structure out = a;
  Signature sig = a.signature();
  AtomBasis b1 = atom_basis(sig, 1);
  std::vector<std::string> binary;
  for (const auto& [name, arity] : sig.predicates())
    if (arity == 2) binary.push_back(name);
  std::sort(binary.begin(), binary.end());

  std::map<uint32_t, uint32_t> exemplar;
  for (uint32_t b = 0; b < a.domain; ++b) {
    uint32_t pi = compute_ftp(a, {b}, b1).bits;
    auto [it, fresh] = exemplar.try_emplace(pi, b);
    if (fresh) continue;
    uint32_t ex = it->second;
    for (const std::string& r : binary) {
      auto& tuples = out.preds.at(r).tuples;
      for (uint32_t c = 0; c < a.domain; ++c) {
        // ftp(b,b) := ftp(ex,ex), ftp(b,ex) := ftp(ex,b), otherwise copy the
        // exemplar's row; only exemplar rows are read, so order is irrelevant.
        uint32_t src = c == b ? ex : (c == ex ? b : c);
        if (a.holds(r, {ex, src}))
          tuples.insert({b, c});
        else
          tuples.erase({b, c});
      }
    }
  }
  return out;
}

Assignment assignment_from_model(const Structure& a, const NormalFormSentence& nf,
                                 const LinearSystem& sys) {
  require_width2(nf, "assignment_from_model");
  Enc e;
  init_enc(e, nf);
  const uint32_t n1 = static_cast<uint32_t>(e.types1.size());
  const uint32_t n2 = static_cast<uint32_t>(e.types2.size());

  std::map<uint32_t, std::vector<uint32_t>> blocks;
  for (uint32_t el = 0; el < a.domain; ++el)
    blocks[compute_ftp(a, {el}, e.basis1).bits].push_back(el);

  std::map<uint32_t, Profile> prof;
  for (const auto& [pi, elems] : blocks) {
    prof.emplace(pi, compute_profile(a, {elems.front()}, e.basis2));
    for (size_t k = 1; k < elems.size(); ++k)
      if (compute_profile(a, {elems[k]}, e.basis2).counts != prof.at(pi).counts)
        throw std::invalid_argument(
            "assignment_from_model: model is not globally homogeneous");
  }

  Assignment asg;
  asg.values.assign(sys.vars.size(), ExtNat(0));
  auto set = [&](const std::string& name, ExtNat v) {
    int idx = sys.var_index(name);
    if (idx < 0)
      throw std::invalid_argument(
          "assignment_from_model: system does not match the sentence");
    asg.values[static_cast<size_t>(idx)] = v;
  };

  for (uint32_t pi = 0; pi < n1; ++pi) {
    auto it = blocks.find(pi);
    if (it == blocks.end()) {
      set(x_var_name(pi), 0);
      set(y_var_name(pi, reflexive_tau(e, pi)), 1);
    } else {
      set(x_var_name(pi), ExtNat(it->second.size()));
      for (uint32_t tau = 0; tau < n2; ++tau)
        set(y_var_name(pi, tau), prof.at(pi).at(tau));
    }
  }

  // Counter values are recovered from the witness sums; unrealized or
  // off-lattice sums leave the counter at zero (the clause is then discharged
  // by another disjunct).
  auto witness_sum = [&](uint32_t pi, const std::vector<char>& body) -> uint64_t {
    uint64_t s = 0;
    for (uint32_t tau = 0; tau < n2; ++tau)
      if (body[tau]) s += prof.at(pi).at(tau).value();
    return s;
  };
  for (size_t r = 0; r < nf.positives.size(); ++r) {
    const CountSpec& ct = nf.positives[r].count;
    if (ct.period == 0) continue;
    std::vector<char> guard = guard_table(e, nf, nf.positives[r]);
    std::vector<char> body = body_table(e, nf, nf.positives[r]);
    for (uint32_t pi = 0; pi < n1; ++pi) {
      if (!guard[pi]) continue;
      uint64_t v = 0;
      if (blocks.count(pi)) {
        uint64_t s = witness_sum(pi, body);
        if (s >= ct.base && (s - ct.base) % ct.period == 0)
          v = (s - ct.base) / ct.period;
      }
      set(i_var_name(pi, r), ExtNat(v));
    }
  }
  for (size_t t = 0; t < nf.negatives.size(); ++t) {
    const CountSpec& ct = nf.negatives[t].count;
    if (ct.period == 0) continue;
    std::vector<char> guard = guard_table(e, nf, nf.negatives[t]);
    std::vector<char> body = body_table(e, nf, nf.negatives[t]);
    for (uint32_t pi = 0; pi < n1; ++pi) {
      if (!guard[pi]) continue;
      uint64_t v = 0;
      if (blocks.count(pi)) {
        uint64_t s = witness_sum(pi, body);
        if (s >= ct.base) v = (s - ct.base) / ct.period;
      }
      set(j_var_name(pi, t), ExtNat(v));
    }
  }
  return asg;
}

std::variant<Structure, AbstractModel> build_model(const Assignment& sol,
                                                   const NormalFormSentence& nf) {
  require_width2(nf, "build_model");
  LinearSystem sys = encode_psi(nf);
  if (sol.values.size() != sys.vars.size())
    throw std::invalid_argument("build_model: assignment does not fit the encoding");
  if (!satisfies(sys, sol))
    throw std::invalid_argument("build_model: assignment does not satisfy the encoding");

  Enc e;
  init_enc(e, nf);
  const uint32_t n1 = static_cast<uint32_t>(e.types1.size());
  const uint32_t n2 = static_cast<uint32_t>(e.types2.size());
  auto value_of = [&](const std::string& name) {
    return sol.values[static_cast<size_t>(sys.var_index(name))];
  };

  std::vector<ExtNat> x(n1);
  bool all_finite = true;
  for (uint32_t pi = 0; pi < n1; ++pi) {
    x[pi] = value_of(x_var_name(pi));
    if (x[pi].is_inf()) all_finite = false;
  }

  if (!all_finite) {
    AbstractModel m;
    for (uint32_t pi = 0; pi < n1; ++pi) {
      if (x[pi].is_zero()) continue;
      m.cardinalities[pi] = x[pi];
      auto& row = m.profiles[pi];
      for (uint32_t tau = 0; tau < n2; ++tau) {
        ExtNat y = value_of(y_var_name(pi, tau));
        if (!y.is_zero()) row[tau] = y;
      }
    }
    return m;
  }

  uint64_t total = 0;
  for (uint32_t pi = 0; pi < n1; ++pi) total += x[pi].value();
  if (total > 1'000'000)
    throw SearchCapExceeded("build_model: model too large to materialize");

  Structure s;
  s.domain = static_cast<uint32_t>(total);
  for (const auto& [name, arity] : nf.signature.predicates()) {
    s.declare(name, arity);
    if (arity == 0) {
      auto it = nf.nullary_choice.find(name);
      s.set_nullary(name, it != nf.nullary_choice.end() && it->second);
    }
  }

  std::map<uint32_t, uint32_t> start;
  uint32_t next = 0;
  for (uint32_t pi = 0; pi < n1; ++pi) {
    if (x[pi].is_zero()) continue;
    start[pi] = next;
    next += static_cast<uint32_t>(x[pi].value());
  }
  auto block = [&](uint32_t pi) {
    std::vector<uint32_t> elems;
    if (auto it = start.find(pi); it != start.end())
      for (uint64_t k = 0; k < x[pi].value(); ++k)
        elems.push_back(it->second + static_cast<uint32_t>(k));
    return elems;
  };

  uint32_t eq_idx = *e.basis2.eq_index();
  for (const auto& [pi, off] : start) {
    std::vector<uint32_t> elems = block(pi);
    FlutedType p1{&e.basis1, pi};
    uint32_t tau_eq = n2;
    for (uint32_t tau : e.eq_taus)
      if (value_of(y_var_name(pi, tau)) == ExtNat(1)) tau_eq = tau;
    if (tau_eq == n2)
      throw std::logic_error("build_model: no reflexive 2-type selected");

    for (uint32_t el : elems) {
      for (uint32_t i = 0; i < e.basis1.atoms.size(); ++i)
        if (p1.atom_true(i)) s.add_tuple(e.basis1.atoms[i].pred, {el});
      FlutedType te{&e.basis2, tau_eq};
      for (uint32_t i = 0; i < e.basis2.atoms.size(); ++i)
        if (i != eq_idx && e.basis2.atoms[i].arity == 2 && te.atom_true(i))
          s.add_tuple(e.basis2.atoms[i].pred, {el, el});

      // Deal the witnesses: per endpoint block, walk its elements (minus el)
      // in order while the non-equality 2-types consume their y counts.
      for (const auto& [pi2, off2] : start) {
        std::vector<uint32_t> targets;
        for (uint32_t c : block(pi2))
          if (c != el) targets.push_back(c);
        size_t pos = 0;
        for (uint32_t tau : e.by_endpoint[pi2]) {
          FlutedType t2{&e.basis2, tau};
          if (t2.atom_true(eq_idx)) continue;
          uint64_t cnt = value_of(y_var_name(pi, tau)).value();
          for (uint64_t k = 0; k < cnt; ++k) {
            if (pos >= targets.size())
              throw std::logic_error("build_model: witness counts exceed the block");
            uint32_t c = targets[pos++];
            for (uint32_t i = 0; i < e.basis2.atoms.size(); ++i)
              if (i != eq_idx && e.basis2.atoms[i].arity == 2 && t2.atom_true(i))
                s.add_tuple(e.basis2.atoms[i].pred, {el, c});
          }
        }
        if (pos != targets.size())
          throw std::logic_error("build_model: witness counts miss the block");
      }
    }
  }
  return s;
}

}  // namespace flpc
