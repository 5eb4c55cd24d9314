#include "normalform.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace flpc {

namespace {

uint32_t qf_max_arity(const QFNodePtr& f) {
  uint32_t m = 0;
  if (f->kind == QKind::Atom) m = f->arity;
  if (f->kind == QKind::Eq) m = 2;
  for (const QFNodePtr& c : f->children) m = std::max(m, qf_max_arity(c));
  return m;
}

uint32_t count_quantifiers(const FormulaPtr& f) {
  uint32_t n = (f->kind == FKind::Exists || f->kind == FKind::Forall) ? 1 : 0;
  for (const FormulaPtr& c : f->children) n += count_quantifiers(c);
  return n;
}

struct Normalizer {
  std::string prefix;
  uint32_t next_index;  // counts down; the outermost replacement ends at 0
  std::vector<FreshDef> defs;
  std::vector<NFConjunct> positives;
  std::vector<NFConjunct> negatives;

  QFNodePtr replace_quantified(CountSpec count, QFNodePtr chi) {
    uint32_t k = qf_max_arity(chi);
    k = k == 0 ? 0 : k - 1;
    std::string name = prefix + std::to_string(--next_index);
    QFNodePtr q = qf_atom(name, k);
    positives.push_back({q, count, chi});
    negatives.push_back({qf_not(q), count, chi});
    defs.push_back({name, k, count, chi});
    return q;
  }

  // Returns the quantifier-free replacement of f, read at depth d. Children
  // of connectives are processed right to left so that the countdown names
  // replacements left to right, outermost first.
  QFNodePtr process(const FormulaPtr& f, uint32_t d) {
    switch (f->kind) {
      case FKind::True:
        return qf_true();
      case FKind::False:
        return qf_false();
      case FKind::Atom:
        return qf_atom(f->pred, static_cast<uint32_t>(f->args.size()));
      case FKind::Eq:
        return qf_eq();
      case FKind::Not:
        return qf_not(process(f->children[0], d));
      case FKind::And:
      case FKind::Or:
      case FKind::Implies:
      case FKind::Iff: {
        QFNodePtr right = process(f->children[1], d);
        QFNodePtr left = process(f->children[0], d);
        switch (f->kind) {
          case FKind::And:
            return qf_and(left, right);
          case FKind::Or:
            return qf_or(left, right);
          case FKind::Implies:
            return qf_implies(left, right);
          default:
            return qf_iff(left, right);
        }
      }
      case FKind::Exists:
        return replace_quantified(f->count, process(f->children[0], d + 1));
      case FKind::Forall:
        return replace_quantified(CountSpec{0, 0},
                                  qf_not(process(f->children[0], d + 1)));
    }
    throw std::logic_error("unreachable formula kind");
  }
};

void collect_nullary(const QFNodePtr& f, std::set<std::string>& out) {
  if (f->kind == QKind::Atom && f->arity == 0) out.insert(f->pred);
  for (const QFNodePtr& c : f->children) collect_nullary(c, out);
}

FormulaPtr render_conjunct(const NormalFormSentence& nf, const NFConjunct& c,
                           bool negative) {
  uint32_t ell = nf.width - 1;
  FormulaPtr body = qf_to_formula({nf.width, c.body});
  FormulaPtr counted = f_exists(c.count, canonical_var(nf.width), body);
  if (negative) counted = f_not(counted);
  FormulaPtr inner = f_implies(qf_to_formula({ell, c.guard}), counted);
  for (uint32_t d = ell; d >= 1; --d) inner = f_forall(canonical_var(d), inner);
  return inner;
}

}  // namespace

NormalFormSentence to_normal_form(const FormulaPtr& s) {
  FragmentReport report = classify_fragment(s);  // throws on open formulas
  if (!report.is_fluted) {
    std::string what = "input is not fluted";
    if (!report.offending_atoms.empty())
      what += ": " + report.offending_atoms[0].atom + " (" +
              report.offending_atoms[0].reason + ")";
    throw std::invalid_argument(what);
  }

  // Fresh names count down from the number of quantified subformulas; the
  // prefix grows until it collides with nothing in the input signature.
  uint32_t total = count_quantifiers(s);
  Normalizer norm;
  norm.prefix = "q";
  norm.next_index = total;

  // The input signature is not passed in; rebuild it from the sentence.
  Signature sig;
  {
    std::vector<std::pair<std::string, uint32_t>> found;
    std::function<void(const FormulaPtr&)> scan = [&](const FormulaPtr& f) {
      if (f->kind == FKind::Atom)
        found.emplace_back(f->pred, static_cast<uint32_t>(f->args.size()));
      for (const FormulaPtr& c : f->children) scan(c);
    };
    scan(s);
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    for (const auto& [name, arity] : found) {
      if (sig.has(name))
        throw std::invalid_argument("predicate used with two arities: " + name);
      sig.add(name, arity);
    }
  }
  for (bool collides = true; collides;) {
    collides = false;
    for (uint32_t i = 0; i < total; ++i)
      if (sig.has(norm.prefix + std::to_string(i))) collides = true;
    if (collides) norm.prefix += "q";
  }

  NormalFormSentence nf;
  nf.residue = norm.process(s, 0);

  std::reverse(norm.defs.begin(), norm.defs.end());
  std::reverse(norm.positives.begin(), norm.positives.end());
  std::reverse(norm.negatives.begin(), norm.negatives.end());
  nf.positives = std::move(norm.positives);
  nf.negatives = std::move(norm.negatives);
  nf.fresh_defs = std::move(norm.defs);

  uint32_t width = 2;
  for (const FreshDef& def : nf.fresh_defs) width = std::max(width, def.arity + 1);
  nf.width = width;

  nf.signature = sig;
  for (const FreshDef& def : nf.fresh_defs) nf.signature.add(def.name, def.arity);
  return nf;
}

std::vector<NormalFormSentence> branch_nullary(const NormalFormSentence& nf) {
  std::set<std::string> names;
  collect_nullary(nf.residue, names);
  for (const NFConjunct& c : nf.positives) {
    collect_nullary(c.guard, names);
    collect_nullary(c.body, names);
  }
  for (const NFConjunct& c : nf.negatives) {
    collect_nullary(c.guard, names);
    collect_nullary(c.body, names);
  }

  std::vector<std::string> order(names.begin(), names.end());
  if (order.size() > 24)
    throw SearchCapExceeded("too many nullary predicates to branch over: " +
                            std::to_string(order.size()));

  std::vector<NormalFormSentence> branches;
  for (uint64_t bits = 0; bits < (uint64_t{1} << order.size()); ++bits) {
    std::map<std::string, bool> vals;
    for (size_t i = 0; i < order.size(); ++i)
      vals[order[i]] = (bits >> (order.size() - 1 - i)) & 1;

    bool residue_ok = qf_eval(nf.residue, [&](const QFNode& node) {
      if (node.kind != QKind::Atom || node.arity != 0)
        throw std::logic_error("residue contains a non-nullary atom");
      return vals.at(node.pred);
    });
    if (!residue_ok) continue;

    NormalFormSentence b;
    b.width = nf.width;
    b.residue = qf_true();
    b.nullary_choice = nf.nullary_choice;
    for (const auto& [name, v] : vals) b.nullary_choice[name] = v;

    auto substituted = [&](const std::vector<NFConjunct>& in) {
      std::vector<NFConjunct> out;
      for (const NFConjunct& c : in) {
        QFNodePtr guard = qf_simplify(qf_substitute_nullary(c.guard, vals));
        if (guard->kind == QKind::False) continue;
        QFNodePtr body = qf_simplify(qf_substitute_nullary(c.body, vals));
        out.push_back({guard, c.count, body});
      }
      return out;
    };
    b.positives = substituted(nf.positives);
    b.negatives = substituted(nf.negatives);

    for (const auto& [name, arity] : nf.signature.predicates())
      if (arity > 0) b.signature.add(name, arity);
    for (const FreshDef& def : nf.fresh_defs) {
      QFNodePtr body = qf_simplify(qf_substitute_nullary(def.body, vals));
      b.fresh_defs.push_back({def.name, def.arity, def.count, body});
    }
    branches.push_back(std::move(b));
  }
  return branches;
}

FormulaPtr nf_to_formula(const NormalFormSentence& nf) {
  std::vector<FormulaPtr> parts;
  if (nf.residue && nf.residue->kind != QKind::True)
    parts.push_back(qf_to_formula({0, nf.residue}));
  for (const NFConjunct& c : nf.positives)
    parts.push_back(render_conjunct(nf, c, false));
  for (const NFConjunct& c : nf.negatives)
    parts.push_back(render_conjunct(nf, c, true));
  return f_and_all(parts);
}

Structure expand_with_fresh(const Structure& a, const NormalFormSentence& nf) {
  Structure out = a;
  for (const auto& [name, value] : nf.nullary_choice) {
    if (!out.preds.count(name)) out.declare(name, 0);
    out.set_nullary(name, value);
  }
  for (auto it = nf.fresh_defs.rbegin(); it != nf.fresh_defs.rend(); ++it) {
    const FreshDef& def = *it;
    if (out.preds.count(def.name)) continue;  // pinned by nullary_choice
    out.declare(def.name, def.arity);
    FormulaPtr phi = f_exists(def.count, canonical_var(def.arity + 1),
                              qf_to_formula({def.arity + 1, def.body}));
    if (def.arity == 0) {
      out.set_nullary(def.name, evaluate(out, phi));
      continue;
    }
    std::vector<uint32_t> tuple(def.arity, 0);
    for (;;) {
      Env env;
      for (uint32_t i = 0; i < def.arity; ++i) env[canonical_var(i + 1)] = tuple[i];
      if (evaluate(out, phi, env)) out.add_tuple(def.name, tuple);
      uint32_t pos = def.arity;
      while (pos > 0) {
        if (++tuple[pos - 1] < out.domain) break;
        tuple[pos - 1] = 0;
        --pos;
      }
      if (pos == 0) break;
    }
  }
  return out;
}

}  // namespace flpc
