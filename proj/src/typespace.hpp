#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "extnat.hpp"
#include "modeltools.hpp"
#include "qfformula.hpp"
#include "syntax.hpp"

namespace flpc {

struct BasisAtom {
  std::string pred;  // empty for the equality atom
  uint32_t arity = 0;
  bool is_eq = false;
};

// The atoms a fluted type at depth ell can mention: every signature predicate
// of arity 1..ell, ordered by name, followed by the equality atom x_{ell-1} =
// x_ell when ell >= 2. Nullary predicates are excluded; they are resolved
// before type spaces are built.
struct AtomBasis {
  uint32_t depth = 0;
  std::vector<BasisAtom> atoms;

  std::optional<uint32_t> index_of(const std::string& pred, uint32_t arity) const;
  std::optional<uint32_t> eq_index() const;
};

// pre: depth >= 1.
AtomBasis atom_basis(const Signature& sig, uint32_t depth);

// Truth assignment over a basis. Atom i lives at bit (|atoms|-1-i), so the
// numeric order of bits is the lexicographic order of assignments with the
// first basis atom most significant.
struct FlutedType {
  const AtomBasis* basis = nullptr;
  uint32_t bits = 0;

  bool atom_true(uint32_t atom_index) const;

  friend bool operator==(const FlutedType& a, const FlutedType& b) {
    return a.basis == b.basis && a.bits == b.bits;
  }
};

struct TypeSpaceCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All 2^{|atoms|} assignments in ascending bits order (= lexicographic).
// Throws TypeSpaceCapExceeded when the basis has more than cap_bits atoms.
std::vector<FlutedType> enumerate_types(const AtomBasis& basis, uint32_t cap_bits = 24);

// Restriction of a depth-(ell+1) type to depth ell: keeps exactly the atoms
// that still fit (arity <= ell; equality survives unless ell < 2). The lower
// basis must be the depth-ell basis over the same signature.
FlutedType restrict_type(const FlutedType& tau, const AtomBasis& lower);

// Boolean evaluation of a quantifier-free formula under the assignment tau.
// Throws std::invalid_argument on depth mismatch, reversed atoms, or atoms
// missing from the basis.
bool type_satisfies(const FlutedType& tau, const QFFormula& phi);

// The conjunction of literals pinning tau exactly, at the basis depth.
QFFormula type_formula(const FlutedType& tau);

// Reads each basis atom off the structure at the given tuple (length = basis
// depth, elements in the domain).
FlutedType compute_ftp(const Structure& a, const std::vector<uint32_t>& tuple,
                       const AtomBasis& basis);

// Multiset of extension types: counts[t.bits] = |{c : ftp(prefix.c) = t}|.
// Absent keys denote zero.
struct Profile {
  const AtomBasis* basis = nullptr;
  std::map<uint32_t, ExtNat> counts;

  ExtNat at(uint32_t bits) const;
  ExtNat total() const;
};

// prefix has length basis.depth - 1.
Profile compute_profile(const Structure& a, const std::vector<uint32_t>& prefix,
                        const AtomBasis& basis);

// True iff the number of extension types satisfying phi lies in the linear
// set of count. The infinite value is never a member.
bool profile_satisfies(const Profile& rho, const CountSpec& count, const QFFormula& phi);

}  // namespace flpc
