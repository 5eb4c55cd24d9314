#include "qfformula.hpp"

#include <algorithm>
#include <stdexcept>

namespace flpc {

namespace {

QFNodePtr qnode(QKind kind, std::vector<QFNodePtr> children = {}) {
  QFNode n;
  n.kind = kind;
  n.children = std::move(children);
  return std::make_shared<const QFNode>(std::move(n));
}

}  // namespace

QFNodePtr qf_true() {
  static const QFNodePtr t = qnode(QKind::True);
  return t;
}

QFNodePtr qf_false() {
  static const QFNodePtr f = qnode(QKind::False);
  return f;
}

QFNodePtr qf_atom(std::string pred, uint32_t arity, bool reversed) {
  QFNode n;
  n.kind = QKind::Atom;
  n.pred = std::move(pred);
  n.arity = arity;
  n.reversed = reversed && arity >= 2;
  return std::make_shared<const QFNode>(std::move(n));
}

QFNodePtr qf_eq() {
  static const QFNodePtr e = qnode(QKind::Eq);
  return e;
}

QFNodePtr qf_not(QFNodePtr f) { return qnode(QKind::Not, {std::move(f)}); }

QFNodePtr qf_and(QFNodePtr a, QFNodePtr b) {
  return qnode(QKind::And, {std::move(a), std::move(b)});
}

QFNodePtr qf_or(QFNodePtr a, QFNodePtr b) {
  return qnode(QKind::Or, {std::move(a), std::move(b)});
}

QFNodePtr qf_implies(QFNodePtr a, QFNodePtr b) {
  return qnode(QKind::Implies, {std::move(a), std::move(b)});
}

QFNodePtr qf_iff(QFNodePtr a, QFNodePtr b) {
  return qnode(QKind::Iff, {std::move(a), std::move(b)});
}

QFNodePtr qf_and_all(std::vector<QFNodePtr> fs) {
  if (fs.empty()) return qf_true();
  QFNodePtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = qf_and(acc, fs[i]);
  return acc;
}

QFNodePtr qf_or_all(std::vector<QFNodePtr> fs) {
  if (fs.empty()) return qf_false();
  QFNodePtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = qf_or(acc, fs[i]);
  return acc;
}

bool qf_equal(const QFNodePtr& a, const QFNodePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->pred != b->pred || a->arity != b->arity ||
      a->reversed != b->reversed || a->children.size() != b->children.size())
    return false;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (!qf_equal(a->children[i], b->children[i])) return false;
  return true;
}

bool qf_eval(const QFNodePtr& f, const std::function<bool(const QFNode&)>& atom_truth) {
  switch (f->kind) {
    case QKind::True:
      return true;
    case QKind::False:
      return false;
    case QKind::Atom:
    case QKind::Eq:
      return atom_truth(*f);
    case QKind::Not:
      return !qf_eval(f->children[0], atom_truth);
    case QKind::And:
      return qf_eval(f->children[0], atom_truth) && qf_eval(f->children[1], atom_truth);
    case QKind::Or:
      return qf_eval(f->children[0], atom_truth) || qf_eval(f->children[1], atom_truth);
    case QKind::Implies:
      return !qf_eval(f->children[0], atom_truth) || qf_eval(f->children[1], atom_truth);
    case QKind::Iff:
      return qf_eval(f->children[0], atom_truth) == qf_eval(f->children[1], atom_truth);
  }
  throw std::logic_error("unreachable qf kind");
}

namespace {

void collect_atoms(const QFNodePtr& f, std::set<std::pair<std::string, uint32_t>>& out) {
  if (f->kind == QKind::Atom) out.emplace(f->pred, f->arity);
  for (const QFNodePtr& c : f->children) collect_atoms(c, out);
}

}  // namespace

std::set<std::pair<std::string, uint32_t>> qf_atoms(const QFNodePtr& f) {
  std::set<std::pair<std::string, uint32_t>> out;
  collect_atoms(f, out);
  return out;
}

bool qf_mentions_eq(const QFNodePtr& f) {
  if (f->kind == QKind::Eq) return true;
  for (const QFNodePtr& c : f->children)
    if (qf_mentions_eq(c)) return true;
  return false;
}

QFNodePtr qf_substitute_nullary(const QFNodePtr& f, const std::map<std::string, bool>& vals) {
  if (f->kind == QKind::Atom && f->arity == 0) {
    auto it = vals.find(f->pred);
    if (it != vals.end()) return it->second ? qf_true() : qf_false();
    return f;
  }
  if (f->children.empty()) return f;
  std::vector<QFNodePtr> children;
  children.reserve(f->children.size());
  bool changed = false;
  for (const QFNodePtr& c : f->children) {
    children.push_back(qf_substitute_nullary(c, vals));
    changed = changed || children.back() != c;
  }
  if (!changed) return f;
  QFNode n = *f;
  n.children = std::move(children);
  return std::make_shared<const QFNode>(std::move(n));
}

QFNodePtr qf_simplify(const QFNodePtr& f) {
  if (f->children.empty()) return f;
  std::vector<QFNodePtr> ch;
  ch.reserve(f->children.size());
  for (const QFNodePtr& c : f->children) ch.push_back(qf_simplify(c));
  auto is_true = [](const QFNodePtr& n) { return n->kind == QKind::True; };
  auto is_false = [](const QFNodePtr& n) { return n->kind == QKind::False; };
  switch (f->kind) {
    case QKind::Not:
      if (is_true(ch[0])) return qf_false();
      if (is_false(ch[0])) return qf_true();
      break;
    case QKind::And:
      if (is_false(ch[0]) || is_false(ch[1])) return qf_false();
      if (is_true(ch[0])) return ch[1];
      if (is_true(ch[1])) return ch[0];
      break;
    case QKind::Or:
      if (is_true(ch[0]) || is_true(ch[1])) return qf_true();
      if (is_false(ch[0])) return ch[1];
      if (is_false(ch[1])) return ch[0];
      break;
    case QKind::Implies:
      if (is_false(ch[0]) || is_true(ch[1])) return qf_true();
      if (is_true(ch[0])) return ch[1];
      if (is_false(ch[1])) return qf_not(ch[0]);
      break;
    case QKind::Iff:
      if (is_true(ch[0])) return ch[1];
      if (is_true(ch[1])) return ch[0];
      if (is_false(ch[0])) return qf_not(ch[1]);
      if (is_false(ch[1])) return qf_not(ch[0]);
      break;
    default:
      break;
  }
  bool changed = false;
  for (size_t i = 0; i < ch.size(); ++i) changed = changed || ch[i] != f->children[i];
  if (!changed) return f;
  QFNode n = *f;
  n.children = std::move(ch);
  return std::make_shared<const QFNode>(std::move(n));
}

std::string canonical_var(uint32_t depth_index) {
  return "x" + std::to_string(depth_index);
}

namespace {

FormulaPtr render(const QFNodePtr& f, uint32_t depth) {
  switch (f->kind) {
    case QKind::True:
      return f_true();
    case QKind::False:
      return f_false();
    case QKind::Atom: {
      if (f->arity > depth)
        throw std::invalid_argument("atom '" + f->pred + "' of arity " +
                                    std::to_string(f->arity) + " does not fit depth " +
                                    std::to_string(depth));
      std::vector<std::string> args;
      for (uint32_t i = depth - f->arity + 1; i <= depth; ++i)
        args.push_back(canonical_var(i));
      if (f->reversed) std::reverse(args.begin(), args.end());
      return f_atom(f->pred, std::move(args));
    }
    case QKind::Eq:
      if (depth < 2)
        throw std::invalid_argument("equality atom needs depth >= 2");
      return f_eq(canonical_var(depth - 1), canonical_var(depth));
    case QKind::Not:
      return f_not(render(f->children[0], depth));
    case QKind::And:
      return f_and(render(f->children[0], depth), render(f->children[1], depth));
    case QKind::Or:
      return f_or(render(f->children[0], depth), render(f->children[1], depth));
    case QKind::Implies:
      return f_implies(render(f->children[0], depth), render(f->children[1], depth));
    case QKind::Iff:
      return f_iff(render(f->children[0], depth), render(f->children[1], depth));
  }
  throw std::logic_error("unreachable qf kind");
}

}  // namespace

FormulaPtr qf_to_formula(const QFFormula& f) { return render(f.root, f.depth); }

}  // namespace flpc
