#include "reducer.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfformula.hpp"
#include "typespace.hpp"

namespace flpc {

namespace {

// Sweep budget for the homogeneity/lift loops and the post-hoc witness
// checks: roughly the number of tuples visited. Larger inputs are refused or
// (for the redundant witness re-checks) trusted to the verified constraint
// solution instead.
constexpr uint64_t kSweepCap = 200'000'000;
constexpr uint64_t kVerifyWorkCap = 50'000'000;
constexpr uint32_t kBasisCapBits = 24;

uint64_t bounded_pow(uint64_t base, uint32_t exp, uint64_t cap) {
  uint64_t r = 1;
  for (uint32_t i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

// Advances an odometer over {0..domain-1}^k; false once it wraps around.
bool next_tuple(std::vector<uint32_t>& t, uint32_t domain) {
  for (size_t i = t.size(); i-- > 0;) {
    if (++t[i] < domain) return true;
    t[i] = 0;
  }
  return false;
}

uint32_t qf_max_arity(const QFNodePtr& f) {
  if (f->kind == QKind::Atom) return f->arity;
  if (f->kind == QKind::Eq) return 2;
  uint32_t m = 0;
  for (const auto& c : f->children) m = std::max(m, qf_max_arity(c));
  return m;
}

QFNodePtr substitute_pred(const QFNodePtr& f, const std::string& name, bool value) {
  if (f->kind == QKind::Atom && f->pred == name) return value ? qf_true() : qf_false();
  if (f->children.empty()) return f;
  auto node = std::make_shared<QFNode>(*f);
  for (auto& c : node->children) c = substitute_pred(c, name, value);
  return node;
}

void require_reducible(const NormalFormSentence& nf, const char* who) {
  if (nf.width < 3)
    throw std::invalid_argument(std::string(who) + ": width must be at least 3");
  if (nf.residue && nf.residue->kind != QKind::True)
    throw std::invalid_argument(std::string(who) + ": nullary residue must be resolved first");
  for (const auto& [name, arity] : nf.signature.predicates())
    if (arity == 0)
      throw std::invalid_argument(std::string(who) + ": nullary predicate " + name +
                                  " must be branched away first");
}

std::string claim_name(Signature& sig, std::string name, uint32_t arity) {
  while (sig.has(name)) name.insert(0, "_");
  sig.add(name, arity);
  return name;
}

// ---- constant propagation on a nullary-free branch --------------------

// A positive conjunct (true, 0^{+0}, L) with L a plain literal pins its
// predicate to one truth value on every tuple, so the predicate can be
// substituted away. The cleanup also drops conjuncts that became trivial and
// detects ones that became unsatisfiable, then shrinks the width while no
// conjunct mentions the outermost variable.
struct CollapseResult {
  bool unsat = false;
  // name -> (arity, forced value), to be re-materialized on witnesses
  std::map<std::string, std::pair<uint32_t, bool>> forced;
};

bool forcing_literal(const QFNodePtr& body, std::string* name, uint32_t* arity, bool* value) {
  const QFNode* n = body.get();
  bool val = false;  // zero witnesses of P means P is everywhere false
  if (n->kind == QKind::Not) {
    val = true;
    n = n->children[0].get();
  }
  if (n->kind != QKind::Atom || n->reversed || n->arity == 0) return false;
  *name = n->pred;
  *arity = n->arity;
  *value = val;
  return true;
}

CollapseResult collapse_branch(NormalFormSentence& nf) {
  CollapseResult res;
  for (;;) {
    bool unsat = false;
    auto sweep = [&](std::vector<NFConjunct>& cs, bool positive) {
      std::vector<NFConjunct> keep;
      for (NFConjunct& c : cs) {
        c.guard = qf_simplify(c.guard);
        c.body = qf_simplify(c.body);
        if (c.guard->kind == QKind::False) continue;
        if (c.body->kind == QKind::False) {
          // zero witnesses everywhere: fine iff 0 is (not) in the set
          bool trivial = positive ? c.count.base == 0 : c.count.base > 0;
          if (trivial) continue;
          if (c.guard->kind == QKind::True) {
            unsat = true;
            return;
          }
        }
        keep.push_back(std::move(c));
      }
      cs = std::move(keep);
    };
    sweep(nf.positives, true);
    if (!unsat) sweep(nf.negatives, false);
    if (unsat) {
      res.unsat = true;
      return res;
    }

    std::string name;
    uint32_t arity = 0;
    bool value = false;
    bool found = false;
    for (const NFConjunct& c : nf.positives) {
      if (c.guard->kind != QKind::True || c.count.base != 0 || c.count.period != 0) continue;
      if (forcing_literal(c.body, &name, &arity, &value)) {
        found = true;
        break;
      }
    }
    if (!found) break;

    res.forced[name] = {arity, value};
    Signature sig;
    for (const auto& [n, a] : nf.signature.predicates())
      if (n != name) sig.add(n, a);
    nf.signature = sig;
    for (auto* cs : {&nf.positives, &nf.negatives})
      for (NFConjunct& c : *cs) {
        c.guard = substitute_pred(c.guard, name, value);
        c.body = substitute_pred(c.body, name, value);
      }
  }

  while (nf.width > 2) {
    bool ok = true;
    for (const auto* cs : {&nf.positives, &nf.negatives}) {
      for (const NFConjunct& c : *cs)
        if (qf_max_arity(c.guard) + 2 > nf.width || qf_max_arity(c.body) + 1 > nf.width) {
          ok = false;
          break;
        }
      if (!ok) break;
    }
    if (!ok) break;
    --nf.width;
  }
  return res;
}

void verify_against(const Structure& m, const NormalFormSentence& nf, const char* stage) {
  if (bounded_pow(m.domain, nf.width, kVerifyWorkCap) > kVerifyWorkCap) return;
  if (!evaluate(m, nf_to_formula(nf)))
    throw std::logic_error(std::string(stage) + ": witness fails its sentence (verification bug)");
}

}  // namespace

// ---- local homogeneity -------------------------------------------------

bool is_locally_homogeneous(const Structure& a, uint32_t ell) {
  if (ell < 2) throw std::invalid_argument("is_locally_homogeneous: ell must be >= 2");
  if (bounded_pow(a.domain, ell + 1, kSweepCap) > kSweepCap)
    throw SearchCapExceeded("is_locally_homogeneous: structure too large to sweep");
  if (a.domain == 0) return true;
  Signature sig = a.signature();
  AtomBasis bl = atom_basis(sig, ell);
  AtomBasis bl1 = atom_basis(sig, ell + 1);

  std::vector<uint32_t> b(ell - 1, 0);
  std::vector<uint32_t> left(ell), full(ell + 1), exfull(ell + 1);
  do {
    std::copy(b.begin(), b.end(), left.begin() + 1);
    std::copy(b.begin(), b.end(), full.begin() + 1);
    std::copy(b.begin(), b.end(), exfull.begin() + 1);
    std::map<uint32_t, uint32_t> exemplar;  // pi -> least block element
    for (uint32_t a1 = 0; a1 < a.domain; ++a1) {
      left[0] = a1;
      uint32_t pi = compute_ftp(a, left, bl).bits;
      auto [it, fresh] = exemplar.try_emplace(pi, a1);
      if (fresh) continue;
      full[0] = a1;
      exfull[0] = it->second;
      for (uint32_t c = 0; c < a.domain; ++c) {
        full[ell] = c;
        exfull[ell] = c;
        if (compute_ftp(a, full, bl1).bits != compute_ftp(a, exfull, bl1).bits) return false;
      }
    }
  } while (next_tuple(b, a.domain));
  return true;
}

Structure locally_homogenize(const Structure& a, uint32_t ell) {
  if (ell < 2) throw std::invalid_argument("locally_homogenize: ell must be >= 2");
  if (bounded_pow(a.domain, ell + 1, kSweepCap) > kSweepCap)
    throw SearchCapExceeded("locally_homogenize: structure too large to sweep");
  Structure out = a;
  if (a.domain == 0) return out;
  Signature sig = a.signature();
  AtomBasis bl = atom_basis(sig, ell);
  std::vector<std::string> full_preds;
  for (const auto& [name, arity] : sig.predicates())
    if (arity == ell + 1) full_preds.push_back(name);
  std::sort(full_preds.begin(), full_preds.end());

  std::vector<uint32_t> b(ell - 1, 0);
  std::vector<uint32_t> left(ell), dst(ell + 1), src(ell + 1);
  do {
    std::copy(b.begin(), b.end(), left.begin() + 1);
    std::copy(b.begin(), b.end(), dst.begin() + 1);
    std::copy(b.begin(), b.end(), src.begin() + 1);
    std::map<uint32_t, uint32_t> exemplar;
    for (uint32_t a1 = 0; a1 < a.domain; ++a1) {
      left[0] = a1;
      uint32_t pi = compute_ftp(a, left, bl).bits;
      auto [it, fresh] = exemplar.try_emplace(pi, a1);
      if (fresh) continue;
      // copy the exemplar's full-width atoms onto a1; exemplar rows for this
      // b are never written, so reading the input structure is exact
      dst[0] = a1;
      src[0] = it->second;
      for (uint32_t c = 0; c < a.domain; ++c) {
        dst[ell] = c;
        src[ell] = c;
        for (const std::string& r : full_preds) {
          auto& tuples = out.preds.at(r).tuples;
          if (a.holds(r, src))
            tuples.insert(dst);
          else
            tuples.erase(dst);
        }
      }
    }
  } while (next_tuple(b, a.domain));
  return out;
}

// ---- one reduction step ------------------------------------------------

std::pair<NormalFormSentence, ReductionStep> reduce_once(const NormalFormSentence& nf,
                                                         bool prune) {
  require_reducible(nf, "reduce_once");
  const uint32_t ell = nf.width - 1;
  AtomBasis bl = atom_basis(nf.signature, ell);
  AtomBasis bl1 = atom_basis(nf.signature, ell + 1);
  std::vector<FlutedType> pis = enumerate_types(bl);
  std::vector<FlutedType> taus = enumerate_types(bl1);
  const uint32_t P = static_cast<uint32_t>(pis.size());
  const uint32_t T = static_cast<uint32_t>(taus.size());

  auto guard_table = [&](const NFConjunct& c) {
    std::vector<char> g(P);
    for (uint32_t pi = 0; pi < P; ++pi) g[pi] = type_satisfies(pis[pi], nf.guard_formula(c));
    return g;
  };
  auto body_table = [&](const NFConjunct& c) {
    std::vector<char> t(T);
    for (uint32_t tau = 0; tau < T; ++tau) t[tau] = type_satisfies(taus[tau], nf.body_formula(c));
    return t;
  };

  // pairs killed by pruning: a negative conjunct with count 1^{+1} forbids
  // every positive finite witness count, so a pair emitting delta from a
  // beta-type cannot occur in a finite model at all
  std::vector<char> dead(static_cast<size_t>(P) * T, 0);
  if (prune) {
    for (const NFConjunct& c : nf.negatives) {
      if (c.count.base != 1 || c.count.period != 1) continue;
      std::vector<char> g = guard_table(c);
      std::vector<char> d = body_table(c);
      for (uint32_t pi = 0; pi < P; ++pi) {
        if (!g[pi]) continue;
        for (uint32_t tau = 0; tau < T; ++tau)
          if (d[tau]) dead[static_cast<size_t>(pi) * T + tau] = 1;
      }
    }
  }
  std::vector<std::vector<uint32_t>> surv(P);
  uint32_t s_count = 0;
  for (uint32_t pi = 0; pi < P; ++pi)
    for (uint32_t tau = 0; tau < T; ++tau)
      if (!dead[static_cast<size_t>(pi) * T + tau]) {
        surv[pi].push_back(tau);
        ++s_count;
      }
  uint32_t q_count = 0;
  for (uint32_t pi = 0; pi < P; ++pi)
    if (!surv[pi].empty()) ++q_count;

  // the emitted sentence must itself stay enumerable one level down
  uint32_t low_preds = 0;
  for (const auto& [name, arity] : nf.signature.predicates())
    if (arity >= 1 && arity <= ell) ++low_preds;
  uint64_t projected = static_cast<uint64_t>(low_preds) + q_count + s_count + (ell >= 2 ? 1 : 0);
  if (projected > kBasisCapBits)
    throw TypeSpaceCapExceeded("reduce_once: reduced signature needs " +
                               std::to_string(projected) + " basis atoms at depth " +
                               std::to_string(ell));

  ReductionStep step;
  step.source_width = nf.width;
  step.source_signature = nf.signature;
  Signature red = nf.signature;
  std::map<uint32_t, std::string> qname;
  std::map<std::pair<uint32_t, uint32_t>, std::string> sname;
  for (uint32_t pi = 0; pi < P; ++pi) {
    if (surv[pi].empty()) continue;
    std::string n = claim_name(red, "q_" + std::to_string(pis[pi].bits), ell - 1);
    qname[pi] = n;
    step.q_preds.emplace_back(pis[pi].bits, n);
    step.pi_of_q[n] = pis[pi].bits;
  }
  for (uint32_t pi = 0; pi < P; ++pi)
    for (uint32_t tau : surv[pi]) {
      std::string n = claim_name(
          red, "s_" + std::to_string(pis[pi].bits) + "_" + std::to_string(taus[tau].bits), ell);
      sname[{pi, tau}] = n;
      step.s_preds.emplace_back(pis[pi].bits, taus[tau].bits, n);
      step.pair_of_s[n] = {pis[pi].bits, taus[tau].bits};
    }
  step.reduced_signature = red;

  NormalFormSentence out;
  out.width = ell;
  out.signature = red;
  out.residue = qf_true();
  out.nullary_choice = nf.nullary_choice;

  auto qatom = [&](uint32_t pi) { return qf_atom(qname.at(pi), ell - 1); };
  auto satom = [&](uint32_t pi, uint32_t tau) { return qf_atom(sname.at({pi, tau}), ell); };
  const CountSpec none = CountSpec::exactly(0);

  // psi1: a tuple of type pi makes q_pi fire; a pi with no pairs left cannot
  // occur at all
  for (uint32_t pi = 0; pi < P; ++pi) {
    QFNodePtr pif = type_formula(pis[pi]).root;
    if (surv[pi].empty())
      out.positives.push_back({qf_true(), none, pif});
    else
      out.positives.push_back({qf_true(), none, qf_and(pif, qf_not(qatom(pi)))});
  }
  // psi2a: an s mark implies the recorded type's restriction on its own tuple
  for (uint32_t pi = 0; pi < P; ++pi)
    for (uint32_t tau : surv[pi]) {
      QFNodePtr restr = type_formula(restrict_type(taus[tau], bl)).root;
      out.positives.push_back({qf_true(), none, qf_and(satom(pi, tau), qf_not(restr))});
    }
  // psi2b: below a q_pi tuple, every extension carries exactly one s mark
  for (uint32_t pi = 0; pi < P; ++pi) {
    if (surv[pi].empty()) continue;
    std::vector<QFNodePtr> satoms;
    for (uint32_t tau : surv[pi]) satoms.push_back(satom(pi, tau));
    std::vector<QFNodePtr> parts;
    parts.push_back(qf_or_all(satoms));
    for (size_t i = 0; i < satoms.size(); ++i)
      for (size_t j = i + 1; j < satoms.size(); ++j)
        parts.push_back(qf_or(qf_not(satoms[i]), qf_not(satoms[j])));
    out.positives.push_back({qatom(pi), none, qf_not(qf_and_all(std::move(parts)))});
  }
  // psi3 / psi4: the source counts transfer to the s marks
  auto transfer = [&](const NFConjunct& c, std::vector<NFConjunct>& into) {
    std::vector<char> g = guard_table(c);
    std::vector<char> bt = body_table(c);
    for (uint32_t pi = 0; pi < P; ++pi) {
      if (!g[pi] || surv[pi].empty()) continue;
      std::vector<QFNodePtr> ds;
      for (uint32_t tau : surv[pi])
        if (bt[tau]) ds.push_back(satom(pi, tau));
      into.push_back({qatom(pi), c.count, qf_or_all(std::move(ds))});
    }
  };
  for (const NFConjunct& c : nf.positives) transfer(c, out.positives);
  for (const NFConjunct& c : nf.negatives) transfer(c, out.negatives);
  return {std::move(out), std::move(step)};
}

// ---- expansion and lifting ----------------------------------------------

Structure expand_with_step(const Structure& a, const ReductionStep& step) {
  const uint32_t ell = step.source_width - 1;
  if (bounded_pow(a.domain, ell + 1, kSweepCap) > kSweepCap)
    throw SearchCapExceeded("expand_with_step: structure too large to sweep");
  Structure out = a;
  AtomBasis bl = atom_basis(step.source_signature, ell);
  AtomBasis bl1 = atom_basis(step.source_signature, ell + 1);
  std::map<uint32_t, std::string> qname;
  std::map<std::pair<uint32_t, uint32_t>, std::string> sname;
  for (const auto& [pi, name] : step.q_preds) {
    out.declare(name, ell - 1);
    qname[pi] = name;
  }
  for (const auto& [pi, tau, name] : step.s_preds) {
    out.declare(name, ell);
    sname[{pi, tau}] = name;
  }
  if (a.domain == 0) return out;

  std::vector<uint32_t> b(ell - 1, 0);
  std::vector<uint32_t> left(ell), full(ell + 1), ext(ell);
  do {
    std::copy(b.begin(), b.end(), left.begin() + 1);
    std::copy(b.begin(), b.end(), full.begin() + 1);
    std::copy(b.begin(), b.end(), ext.begin());
    for (uint32_t a1 = 0; a1 < a.domain; ++a1) {
      left[0] = a1;
      full[0] = a1;
      uint32_t pi = compute_ftp(a, left, bl).bits;
      if (auto it = qname.find(pi); it != qname.end()) out.add_tuple(it->second, b);
      for (uint32_t c = 0; c < a.domain; ++c) {
        full[ell] = c;
        uint32_t tau = compute_ftp(a, full, bl1).bits;
        if (auto it = sname.find({pi, tau}); it != sname.end()) {
          ext[ell - 1] = c;
          out.add_tuple(it->second, ext);
        }
      }
    }
  } while (next_tuple(b, a.domain));
  return out;
}

Structure lift_model(const Structure& ap, const ReductionStep& step,
                     const NormalFormSentence& nf) {
  const uint32_t ell = step.source_width - 1;
  if (nf.width != step.source_width)
    throw std::invalid_argument("lift_model: step does not match the sentence width");
  if (bounded_pow(ap.domain, ell + 1, kSweepCap) > kSweepCap)
    throw SearchCapExceeded("lift_model: structure too large to sweep");

  Structure out;
  out.domain = ap.domain;
  for (const auto& [name, arity] : step.source_signature.predicates()) {
    out.declare(name, arity);
    auto it = ap.preds.find(name);
    if (it == ap.preds.end()) continue;
    if (arity == 0)
      out.set_nullary(name, it->second.value);
    else if (arity <= ell)
      out.preds.at(name).tuples = it->second.tuples;
    // full-width extensions are reassigned wholesale below
  }

  AtomBasis bl = atom_basis(step.source_signature, ell);
  AtomBasis bl1 = atom_basis(step.source_signature, ell + 1);
  std::map<uint32_t, std::vector<std::pair<uint32_t, std::string>>> stable;  // pi -> (tau, s)
  for (const auto& [pi, tau, name] : step.s_preds) stable[pi].push_back({tau, name});
  std::vector<std::pair<std::string, uint32_t>> full_atoms;  // (pred, basis index)
  for (uint32_t i = 0; i < bl1.atoms.size(); ++i)
    if (!bl1.atoms[i].is_eq && bl1.atoms[i].arity == ell + 1)
      full_atoms.emplace_back(bl1.atoms[i].pred, i);
  if (ap.domain == 0) return out;

  std::vector<uint32_t> b(ell - 1, 0);
  std::vector<uint32_t> left(ell), full(ell + 1), ext(ell);
  do {
    std::copy(b.begin(), b.end(), left.begin() + 1);
    std::copy(b.begin(), b.end(), full.begin() + 1);
    std::copy(b.begin(), b.end(), ext.begin());
    // which s marks hold on b.c, keyed by their pi
    std::vector<std::map<uint32_t, uint32_t>> mark(ap.domain);  // c -> pi -> tau
    std::vector<std::map<uint32_t, uint32_t>> mark_count(ap.domain);
    for (uint32_t c = 0; c < ap.domain; ++c) {
      ext[ell - 1] = c;
      for (const auto& [pi, list] : stable)
        for (const auto& [tau, name] : list)
          if (ap.holds(name, ext)) {
            mark[c][pi] = tau;
            ++mark_count[c][pi];
          }
    }
    for (uint32_t a1 = 0; a1 < ap.domain; ++a1) {
      left[0] = a1;
      full[0] = a1;
      uint32_t pi = compute_ftp(ap, left, bl).bits;
      for (uint32_t c = 0; c < ap.domain; ++c) {
        auto cnt = mark_count[c].find(pi);
        if (cnt == mark_count[c].end() || cnt->second != 1)
          throw std::logic_error("lift_model: s predicates not functional on a realized pair "
                                 "(verification bug)");
        FlutedType tau{&bl1, mark[c].at(pi)};
        full[ell] = c;
        for (const auto& [pred, idx] : full_atoms)
          if (tau.atom_true(idx)) out.add_tuple(pred, full);
      }
    }
  } while (next_tuple(b, ap.domain));
  return out;
}

// ---- the decision procedure ----------------------------------------------

DecideResult decide_nf(const NormalFormSentence& nf, bool finite, const DecideOptions& opts) {
  NormalFormSentence top = nf;
  if (!top.residue) top.residue = qf_true();
  const bool prune = opts.prune && finite;

  DecideResult res;
  for (NormalFormSentence& branch : branch_nullary(top)) {
    ++res.nullary_branches;
    NormalFormSentence pristine = branch;
    CollapseResult col = collapse_branch(branch);
    if (col.unsat) continue;

    std::vector<std::pair<NormalFormSentence, ReductionStep>> steps;
    NormalFormSentence cur = branch;
    while (cur.width > 2) {
      auto [red, step] = reduce_once(cur, prune);
      steps.emplace_back(std::move(cur), std::move(step));
      cur = std::move(red);
    }
    res.reductions = std::max(res.reductions, static_cast<uint32_t>(steps.size()));
    size_t n1 = atom_basis(cur.signature, 1).atoms.size();
    size_t n2 = atom_basis(cur.signature, 2).atoms.size();
    res.one_types = n1 < 64 ? 1ull << n1 : 0;
    res.two_types = n2 < 64 ? 1ull << n2 : 0;

    Decide2Result d2 = decide2(cur, finite, opts.prune);
    res.solver_nodes += d2.solver_nodes;
    if (!d2.sat) continue;
    res.sat = true;
    res.reductions = static_cast<uint32_t>(steps.size());

    auto built = build_model(d2.assignment, cur);
    if (std::holds_alternative<AbstractModel>(built)) {
      // infinite blocks: only meaningful for the caller when nothing was
      // renamed along the way
      if (steps.empty() && col.forced.empty())
        res.abstract = std::get<AbstractModel>(std::move(built));
      return res;
    }
    Structure m = std::get<Structure>(std::move(built));
    verify_against(m, cur, "decide_nf");
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      m = lift_model(m, it->second, it->first);
      verify_against(m, it->first, "decide_nf");
    }
    // constants removed by the collapse come back as trivial extensions
    for (const auto& [name, fa] : col.forced) {
      const auto& [arity, value] = fa;
      m.declare(name, arity);
      if (!value) continue;
      if (bounded_pow(m.domain, arity, kSweepCap) > kSweepCap)
        throw SearchCapExceeded("decide_nf: witness too large to fill a constant predicate");
      std::vector<uint32_t> t(arity, 0);
      if (m.domain > 0) do {
          m.add_tuple(name, t);
        } while (next_tuple(t, m.domain));
    }
    verify_against(m, pristine, "decide_nf");
    for (const auto& [name, value] : branch.nullary_choice) {
      m.declare(name, 0);
      m.set_nullary(name, value);
    }
    for (const FreshDef& def : top.fresh_defs) m.preds.erase(def.name);
    res.witness = std::move(m);
    return res;
  }
  return res;
}

DecideResult decide(const FormulaPtr& s, bool finite, const DecideOptions& opts) {
  NormalFormSentence nf = to_normal_form(s);
  DecideResult res = decide_nf(nf, finite, opts);
  if (res.witness) {
    // reduct to the predicates the sentence itself mentions
    std::map<std::string, uint32_t> used;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& f) {
      if (f->kind == FKind::Atom) used.emplace(f->pred, static_cast<uint32_t>(f->args.size()));
      for (const auto& c : f->children) walk(c);
    };
    walk(s);
    Structure w;
    w.domain = res.witness->domain;
    for (const auto& [name, arity] : used) {
      w.declare(name, arity);
      const PredicateExtension& src = res.witness->preds.at(name);
      if (arity == 0)
        w.set_nullary(name, src.value);
      else
        w.preds.at(name).tuples = src.tuples;
    }
    if (bounded_pow(w.domain, nf.width, kVerifyWorkCap) <= kVerifyWorkCap &&
        !evaluate(w, s))
      throw std::logic_error("decide: witness fails the input sentence (verification bug)");
    res.witness = std::move(w);
  }
  return res;
}

}  // namespace flpc
