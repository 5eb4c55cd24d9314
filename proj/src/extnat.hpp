#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace flpc {

// Naturals extended with a single infinite value, written "inf" in all
// serialized forms. Addition absorbs into inf; multiplication by zero wins
// over inf (0 * inf == 0). The ordering is total with inf on top.
class ExtNat {
public:
  constexpr ExtNat() = default;
  constexpr ExtNat(uint64_t n) : v_(n) {
    if (n == kInf) throw std::overflow_error("ExtNat: finite value too large");
  }

  static constexpr ExtNat inf() {
    ExtNat e;
    e.v_ = kInf;
    return e;
  }

  constexpr bool is_inf() const { return v_ == kInf; }
  constexpr bool is_zero() const { return v_ == 0; }

  constexpr uint64_t value() const {
    if (is_inf()) throw std::logic_error("ExtNat: value() of inf");
    return v_;
  }

  friend constexpr ExtNat operator+(ExtNat a, ExtNat b) {
    if (a.is_inf() || b.is_inf()) return inf();
    uint64_t r = 0;
    if (__builtin_add_overflow(a.v_, b.v_, &r) || r == kInf)
      throw std::overflow_error("ExtNat: addition overflow");
    ExtNat e;
    e.v_ = r;
    return e;
  }

  friend constexpr ExtNat operator*(ExtNat a, ExtNat b) {
    if (a.is_zero() || b.is_zero()) return ExtNat(0);
    if (a.is_inf() || b.is_inf()) return inf();
    uint64_t r = 0;
    if (__builtin_mul_overflow(a.v_, b.v_, &r) || r == kInf)
      throw std::overflow_error("ExtNat: multiplication overflow");
    ExtNat e;
    e.v_ = r;
    return e;
  }

  ExtNat& operator+=(ExtNat o) { return *this = *this + o; }

  friend constexpr bool operator==(ExtNat a, ExtNat b) { return a.v_ == b.v_; }
  friend constexpr std::strong_ordering operator<=>(ExtNat a, ExtNat b) {
    return a.v_ <=> b.v_;
  }

  std::string str() const { return is_inf() ? "inf" : std::to_string(v_); }

private:
  static constexpr uint64_t kInf = UINT64_MAX;
  uint64_t v_ = 0;
};

// Membership in the linear set {base + i*period | i in N}. The infinite
// value is never a member (linear sets live inside N).
inline bool linear_set_contains(ExtNat k, uint64_t base, uint64_t period) {
  if (k.is_inf()) return false;
  uint64_t v = k.value();
  if (v < base) return false;
  if (period == 0) return v == base;
  return (v - base) % period == 0;
}

}  // namespace flpc
