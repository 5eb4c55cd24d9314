#include "typespace.hpp"

#include <algorithm>

namespace flpc {

std::optional<uint32_t> AtomBasis::index_of(const std::string& pred, uint32_t arity) const {
  for (uint32_t i = 0; i < atoms.size(); ++i)
    if (!atoms[i].is_eq && atoms[i].pred == pred && atoms[i].arity == arity) return i;
  return std::nullopt;
}

std::optional<uint32_t> AtomBasis::eq_index() const {
  if (!atoms.empty() && atoms.back().is_eq)
    return static_cast<uint32_t>(atoms.size() - 1);
  return std::nullopt;
}

AtomBasis atom_basis(const Signature& sig, uint32_t depth) {
  if (depth < 1) throw std::invalid_argument("atom_basis: depth must be >= 1");
  AtomBasis b;
  b.depth = depth;
  for (const auto& [name, arity] : sig.predicates())
    if (arity >= 1 && arity <= depth) b.atoms.push_back({name, arity, false});
  std::sort(b.atoms.begin(), b.atoms.end(),
            [](const BasisAtom& x, const BasisAtom& y) { return x.pred < y.pred; });
  if (depth >= 2) b.atoms.push_back({"", 2, true});
  return b;
}

bool FlutedType::atom_true(uint32_t atom_index) const {
  uint32_t n = static_cast<uint32_t>(basis->atoms.size());
  if (atom_index >= n) throw std::out_of_range("FlutedType: atom index out of range");
  return (bits >> (n - 1 - atom_index)) & 1u;
}

std::vector<FlutedType> enumerate_types(const AtomBasis& basis, uint32_t cap_bits) {
  uint32_t n = static_cast<uint32_t>(basis.atoms.size());
  if (n > cap_bits)
    throw TypeSpaceCapExceeded("type space over " + std::to_string(n) +
                               " atoms exceeds the cap of " + std::to_string(cap_bits));
  std::vector<FlutedType> out;
  out.reserve(size_t{1} << n);
  for (uint32_t bits = 0; bits < (1u << n); ++bits) out.push_back({&basis, bits});
  return out;
}

FlutedType restrict_type(const FlutedType& tau, const AtomBasis& lower) {
  const AtomBasis& upper = *tau.basis;
  if (lower.depth + 1 != upper.depth)
    throw std::invalid_argument("restrict_type: lower basis depth must be one less");
  uint32_t result = 0;
  for (uint32_t j = 0; j < lower.atoms.size(); ++j) {
    const BasisAtom& atom = lower.atoms[j];
    std::optional<uint32_t> i =
        atom.is_eq ? upper.eq_index() : upper.index_of(atom.pred, atom.arity);
    if (!i)
      throw std::invalid_argument("restrict_type: lower atom missing from the upper basis");
    result = (result << 1) | (tau.atom_true(*i) ? 1u : 0u);
  }
  // Every upper atom that still fits must be covered, or the two bases are
  // over different signatures.
  for (const BasisAtom& atom : upper.atoms) {
    if (atom.is_eq) {
      if (lower.depth >= 2 && !lower.eq_index())
        throw std::invalid_argument("restrict_type: lower basis dropped equality");
    } else if (atom.arity <= lower.depth && !lower.index_of(atom.pred, atom.arity)) {
      throw std::invalid_argument("restrict_type: lower basis dropped atom " + atom.pred);
    }
  }
  return {&lower, result};
}

bool type_satisfies(const FlutedType& tau, const QFFormula& phi) {
  const AtomBasis& basis = *tau.basis;
  if (phi.depth != basis.depth)
    throw std::invalid_argument("type_satisfies: formula depth " +
                                std::to_string(phi.depth) + " does not match basis depth " +
                                std::to_string(basis.depth));
  return qf_eval(phi.root, [&](const QFNode& node) {
    if (node.kind == QKind::Eq) {
      std::optional<uint32_t> i = basis.eq_index();
      if (!i) throw std::invalid_argument("type_satisfies: no equality atom at depth 1");
      return tau.atom_true(*i);
    }
    if (node.reversed)
      throw std::invalid_argument("type_satisfies: reversed atom '" + node.pred +
                                  "' has no place in a forward basis");
    std::optional<uint32_t> i = basis.index_of(node.pred, node.arity);
    if (!i)
      throw std::invalid_argument("type_satisfies: atom '" + node.pred + "' of arity " +
                                  std::to_string(node.arity) + " not in the basis");
    return tau.atom_true(*i);
  });
}

QFFormula type_formula(const FlutedType& tau) {
  const AtomBasis& basis = *tau.basis;
  std::vector<QFNodePtr> lits;
  lits.reserve(basis.atoms.size());
  for (uint32_t i = 0; i < basis.atoms.size(); ++i) {
    const BasisAtom& atom = basis.atoms[i];
    QFNodePtr lit = atom.is_eq ? qf_eq() : qf_atom(atom.pred, atom.arity);
    lits.push_back(tau.atom_true(i) ? lit : qf_not(lit));
  }
  return {basis.depth, qf_and_all(std::move(lits))};
}

FlutedType compute_ftp(const Structure& a, const std::vector<uint32_t>& tuple,
                       const AtomBasis& basis) {
  if (tuple.size() != basis.depth)
    throw std::invalid_argument("compute_ftp: tuple length must equal the basis depth");
  for (uint32_t e : tuple)
    if (e >= a.domain) throw std::invalid_argument("compute_ftp: element outside the domain");
  uint32_t bits = 0;
  for (const BasisAtom& atom : basis.atoms) {
    bool v;
    if (atom.is_eq) {
      v = tuple[basis.depth - 2] == tuple[basis.depth - 1];
    } else {
      std::vector<uint32_t> args(tuple.end() - atom.arity, tuple.end());
      v = a.holds(atom.pred, args);
    }
    bits = (bits << 1) | (v ? 1u : 0u);
  }
  return {&basis, bits};
}

ExtNat Profile::at(uint32_t bits) const {
  auto it = counts.find(bits);
  return it == counts.end() ? ExtNat(0) : it->second;
}

ExtNat Profile::total() const {
  ExtNat sum(0);
  for (const auto& [bits, k] : counts) sum += k;
  return sum;
}

Profile compute_profile(const Structure& a, const std::vector<uint32_t>& prefix,
                        const AtomBasis& basis) {
  if (prefix.size() + 1 != basis.depth)
    throw std::invalid_argument("compute_profile: prefix length must be depth - 1");
  Profile rho;
  rho.basis = &basis;
  std::vector<uint32_t> tuple = prefix;
  tuple.push_back(0);
  for (uint32_t c = 0; c < a.domain; ++c) {
    tuple.back() = c;
    FlutedType tau = compute_ftp(a, tuple, basis);
    rho.counts[tau.bits] += ExtNat(1);
  }
  return rho;
}

bool profile_satisfies(const Profile& rho, const CountSpec& count, const QFFormula& phi) {
  ExtNat sum(0);
  for (const auto& [bits, k] : rho.counts) {
    FlutedType tau{rho.basis, bits};
    if (type_satisfies(tau, phi)) sum += k;
  }
  return linear_set_contains(sum, count.base, count.period);
}

}  // namespace flpc
