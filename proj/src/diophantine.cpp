#include "diophantine.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "json.hpp"

namespace flpc {

const char* relop_str(RelOp op) {
  switch (op) {
    case RelOp::Eq: return "=";
    case RelOp::Ne: return "!=";
    case RelOp::Le: return "<=";
    case RelOp::Lt: return "<";
    case RelOp::Ge: return ">=";
    case RelOp::Gt: return ">";
  }
  return "?";
}

void LinExpr::add_term(int var, ExtNat coeff) {
  if (coeff.is_zero()) return;
  auto it = std::lower_bound(
      terms.begin(), terms.end(), var,
      [](const std::pair<int, ExtNat>& t, int v) { return t.first < v; });
  if (it != terms.end() && it->first == var) {
    it->second = it->second + coeff;
    if (it->second.is_zero()) terms.erase(it);
  } else {
    terms.insert(it, {var, coeff});
  }
}

LinExpr LinExpr::of_constant(ExtNat c) {
  LinExpr e;
  e.constant = c;
  return e;
}

LinExpr LinExpr::of_var(int v) {
  LinExpr e;
  e.add_term(v, 1);
  return e;
}

int LinearSystem::add_var(const std::string& name, bool finite_only) {
  vars.push_back({name, finite_only});
  return static_cast<int>(vars.size()) - 1;
}

int LinearSystem::var_index(const std::string& name) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return static_cast<int>(i);
  return -1;
}

ExtNat eval_expr(const LinExpr& e, const Assignment& a) {
  ExtNat sum = e.constant;
  for (const auto& [v, c] : e.terms) sum += c * a.values.at(v);
  return sum;
}

bool eval_comparison(const Comparison& c, const Assignment& a) {
  ExtNat l = eval_expr(c.lhs, a), r = eval_expr(c.rhs, a);
  switch (c.op) {
    case RelOp::Eq: return l == r;
    case RelOp::Ne: return l != r;
    case RelOp::Le: return l <= r;
    case RelOp::Lt: return l < r;
    case RelOp::Ge: return l >= r;
    case RelOp::Gt: return l > r;
  }
  return false;
}

bool eval_clause(const Clause& c, const Assignment& a) {
  for (const auto& d : c.disjuncts)
    if (eval_comparison(d, a)) return true;
  return false;
}

bool satisfies(const LinearSystem& s, const Assignment& a) {
  if (a.values.size() != s.vars.size()) return false;
  for (size_t i = 0; i < s.vars.size(); ++i)
    if (s.vars[i].finite_only && a.values[i].is_inf()) return false;
  for (const auto& c : s.clauses)
    if (!eval_clause(c, a)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Solver.
//
// Search space: per clause a disjunct, per disjunct one of four shapes of
// being true. Shape A keeps both sides finite and turns the comparison into
// integer rows solved by branch and bound; the other shapes commit selected
// variables to the infinite value and decide the comparison by the order
// rules for inf. Finite shapes are explored first, so witnesses prefer small
// finite values and the finite fragment of the search degenerates to plain
// branch and bound.

namespace {

using i128 = __int128;

enum class VState : uint8_t { Unknown, Fin, Inf };

struct Row {
  // sum of coeff*var <= bound
  std::vector<std::pair<int, int64_t>> terms;
  int64_t bound = 0;
};

struct Cong {
  // sum of coeff*var == residue (mod mod), mod >= 2
  std::vector<std::pair<int, int64_t>> terms;
  int64_t mod = 2;
  int64_t residue = 0;
};

struct Elim {
  // var = (k - sum(delta))/gamma, back-computed after search
  int var = -1;
  int64_t gamma = 1;
  int64_t k = 0;
  std::vector<std::pair<int, int64_t>> delta;
};

struct State {
  std::vector<VState> status;
  std::vector<int64_t> lo, hi;
  std::vector<Row> rows;
  std::vector<Cong> congs;
  std::vector<Elim> elims;
  std::vector<char> done;
};

struct Alternative {
  std::vector<std::pair<int, VState>> commits;
  std::vector<Row> rows;
  std::vector<Cong> congs;
  std::vector<Elim> elims;
};

int64_t floordiv(i128 x, i128 d) {
  i128 q = x / d;
  if (x % d != 0 && ((x < 0) != (d < 0))) q -= 1;
  if (q > INT64_MAX) return INT64_MAX;
  if (q < INT64_MIN) return INT64_MIN;
  return static_cast<int64_t>(q);
}

int64_t ceildiv(i128 x, i128 d) {
  i128 q = x / d;
  if (x % d != 0 && ((x < 0) == (d < 0))) q += 1;
  if (q > INT64_MAX) return INT64_MAX;
  if (q < INT64_MIN) return INT64_MIN;
  return static_cast<int64_t>(q);
}

int64_t pos_mod(i128 x, int64_t m) {
  i128 r = x % m;
  if (r < 0) r += m;
  return static_cast<int64_t>(r);
}

struct CapExceeded {};

class Solver {
public:
  Solver(const LinearSystem& s, SolveMode mode, const SolverLimits& lim)
      : sys_(s), mode_(mode), limits_(lim) {
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::milliseconds(limits_.time_limit_ms);
    count_occurrences();
    compute_value_bound();
  }

  SolveResult run() {
    SolveResult res;
    try {
      // Escalating search boxes: small witnesses are found without touching
      // the astronomic ranges the completeness bound admits. Only the round
      // at the full bound may conclude UNSAT.
      bool sat = false;
      for (int64_t box : {int64_t{64}, int64_t{4096}, int64_t{1} << 20,
                          value_bound_}) {
        box = std::min(box, value_bound_);
        sat = attempt(box);
        if (sat || box == value_bound_) break;
      }
      res.status = sat ? SolveStatus::Sat : SolveStatus::Unsat;
      if (sat) res.assignment = std::move(witness_);
    } catch (const CapExceeded&) {
      res.status = SolveStatus::CapExceeded;
    }
    res.nodes = nodes_;
    return res;
  }

  bool attempt(int64_t box) {
    State st;
    size_t n = sys_.vars.size();
    st.status.assign(n, VState::Unknown);
    st.lo.assign(n, 0);
    st.hi.assign(n, box);
    st.done.assign(sys_.clauses.size(), 0);
    for (size_t v = 0; v < n; ++v)
      if (mode_ == SolveMode::OverN || sys_.vars[v].finite_only)
        st.status[v] = VState::Fin;
    return search(std::move(st));
  }

private:
  const LinearSystem& sys_;
  SolveMode mode_;
  SolverLimits limits_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<int> occurrences_;
  int64_t value_bound_ = 0;
  uint64_t nodes_ = 0;
  Assignment witness_;

  void count_occurrences() {
    occurrences_.assign(sys_.vars.size(), 0);
    for (const auto& cl : sys_.clauses)
      for (const auto& d : cl.disjuncts) {
        std::vector<char> seen(sys_.vars.size(), 0);
        for (const auto& [v, c] : d.lhs.terms) seen[v] = 1;
        for (const auto& [v, c] : d.rhs.terms) seen[v] = 1;
        for (size_t v = 0; v < seen.size(); ++v) occurrences_[v] += seen[v];
      }
  }

  // Classical small-solution bound, determinant-style, saturating. Real
  // searches are decided by propagation long before boxes this wide are
  // exhausted; exhausting them anyway is what makes UNSAT answers final.
  void compute_value_bound() {
    double prod = 1.0;
    for (const auto& cl : sys_.clauses)
      for (const auto& d : cl.disjuncts) {
        double norm = 1.0;
        auto acc = [&norm](const LinExpr& e) {
          for (const auto& [v, c] : e.terms)
            if (!c.is_inf()) norm += static_cast<double>(c.value());
          if (!e.constant.is_inf())
            norm += static_cast<double>(e.constant.value());
        };
        acc(d.lhs);
        acc(d.rhs);
        prod *= norm;
        if (prod > 1e17) {
          value_bound_ = int64_t{1} << 60;
          return;
        }
      }
    prod *= static_cast<double>(sys_.vars.size() + 1);
    value_bound_ = std::max<int64_t>(64, static_cast<int64_t>(
                                             std::min(prod, 1e17)));
  }

  void tick() {
    if (++nodes_ > limits_.max_nodes) throw CapExceeded{};
    if ((nodes_ & 1023) == 0 &&
        std::chrono::steady_clock::now() > deadline_)
      throw CapExceeded{};
  }

  // --- side classification ------------------------------------------------

  bool side_definitely_inf(const LinExpr& e, const State& st) const {
    if (e.constant.is_inf()) return true;
    for (const auto& [v, c] : e.terms) {
      if (st.status[v] == VState::Inf && !c.is_zero()) return true;
      if (c.is_inf() && st.status[v] != VState::Inf && st.lo[v] >= 1)
        return true;
    }
    return false;
  }

  bool side_definitely_fin(const LinExpr& e, const State& st) const {
    if (e.constant.is_inf()) return false;
    for (const auto& [v, c] : e.terms) {
      if (st.status[v] != VState::Fin) return false;
      if (c.is_inf() && st.hi[v] > 0) return false;
    }
    return true;
  }

  void side_range(const LinExpr& e, const State& st, i128& mn, i128& mx) const {
    mn = mx = static_cast<i128>(e.constant.value());
    for (const auto& [v, c] : e.terms) {
      if (c.is_inf()) continue;  // callers ensure hi[v] == 0 here
      i128 k = static_cast<i128>(c.value());
      mn += k * st.lo[v];
      mx += k * st.hi[v];
    }
  }

  // -1 decided false, +1 decided true, 0 open
  int comparison_status(const Comparison& cmp, const State& st) const {
    bool linf = side_definitely_inf(cmp.lhs, st);
    bool rinf = side_definitely_inf(cmp.rhs, st);
    bool lfin = side_definitely_fin(cmp.lhs, st);
    bool rfin = side_definitely_fin(cmp.rhs, st);
    if (linf && rinf) {
      switch (cmp.op) {
        case RelOp::Eq: case RelOp::Le: case RelOp::Ge: return 1;
        default: return -1;
      }
    }
    if (lfin && rinf) {
      switch (cmp.op) {
        case RelOp::Lt: case RelOp::Le: case RelOp::Ne: return 1;
        default: return -1;
      }
    }
    if (linf && rfin) {
      switch (cmp.op) {
        case RelOp::Gt: case RelOp::Ge: case RelOp::Ne: return 1;
        default: return -1;
      }
    }
    if (lfin && rfin) {
      i128 lmn, lmx, rmn, rmx;
      side_range(cmp.lhs, st, lmn, lmx);
      side_range(cmp.rhs, st, rmn, rmx);
      i128 dmn = lmn - rmx, dmx = lmx - rmn;  // range of lhs - rhs
      switch (cmp.op) {
        case RelOp::Le: return dmx <= 0 ? 1 : (dmn > 0 ? -1 : 0);
        case RelOp::Lt: return dmx < 0 ? 1 : (dmn >= 0 ? -1 : 0);
        case RelOp::Ge: return dmn >= 0 ? 1 : (dmx < 0 ? -1 : 0);
        case RelOp::Gt: return dmn > 0 ? 1 : (dmx <= 0 ? -1 : 0);
        case RelOp::Eq:
          if (dmn == 0 && dmx == 0) return 1;
          return (dmn > 0 || dmx < 0) ? -1 : 0;
        case RelOp::Ne:
          if (dmn > 0 || dmx < 0) return 1;
          return (dmn == 0 && dmx == 0) ? -1 : 0;
      }
    }
    return 0;
  }

  // --- alternative construction -------------------------------------------

  // Combined integer form of lhs-rhs. Inf coefficients are excluded here;
  // the caller pins those variables to zero. Magnitudes beyond what the
  // propagation arithmetic tolerates abort the whole solve rather than
  // silently dropping an alternative.
  static void combine(const Comparison& cmp,
                      std::vector<std::pair<int, int64_t>>& terms,
                      int64_t& k) {
    constexpr i128 kCoeffCap = i128{1} << 40;
    std::map<int, i128> acc;
    for (const auto& [v, c] : cmp.lhs.terms)
      if (!c.is_inf()) acc[v] += static_cast<i128>(c.value());
    for (const auto& [v, c] : cmp.rhs.terms)
      if (!c.is_inf()) acc[v] -= static_cast<i128>(c.value());
    i128 kk = static_cast<i128>(cmp.rhs.constant.value()) -
              static_cast<i128>(cmp.lhs.constant.value());
    if (kk > kCoeffCap || kk < -kCoeffCap) throw CapExceeded{};
    k = static_cast<int64_t>(kk);
    terms.clear();
    for (const auto& [v, c] : acc) {
      if (c == 0) continue;
      if (c > kCoeffCap || c < -kCoeffCap) throw CapExceeded{};
      terms.push_back({v, static_cast<int64_t>(c)});
    }
  }

  // Equality sum(terms) = k. False when the gcd of the coefficients does not
  // divide k, which already has no integer solutions. Otherwise prefers
  // eliminating a variable that occurs in no other comparison of the system;
  // its coefficient becomes a congruence.
  bool equality_rows(const std::vector<std::pair<int, int64_t>>& terms,
                     int64_t k, Alternative& alt) const {
    int64_t g = 0;
    for (const auto& [v, c] : terms) g = std::gcd(g, c < 0 ? -c : c);
    if (g == 0) return k == 0;
    if (k % g != 0) return false;
    int pick = -1;
    int64_t pick_coeff = 0;
    for (const auto& [v, c] : terms) {
      if (occurrences_[v] != 1) continue;
      int64_t mag = c < 0 ? -c : c;
      int64_t cur = pick_coeff < 0 ? -pick_coeff : pick_coeff;
      if (pick == -1 || mag > cur) {
        pick = v;
        pick_coeff = c;
      }
    }
    if (pick >= 0) {
      Elim el;
      el.var = pick;
      el.gamma = pick_coeff;
      el.k = k;
      for (const auto& t : terms)
        if (t.first != pick) el.delta.push_back(t);
      // gamma*v = k - sum(delta) with v >= 0
      Row r;
      if (pick_coeff > 0) {
        r.terms = el.delta;
        r.bound = k;  // sum(delta) <= k
      } else {
        for (const auto& [v, c] : el.delta) r.terms.push_back({v, -c});
        r.bound = -k;  // sum(delta) >= k
      }
      alt.rows.push_back(std::move(r));
      int64_t mod = pick_coeff < 0 ? -pick_coeff : pick_coeff;
      if (mod >= 2) {
        Cong cg;
        cg.terms = el.delta;
        cg.mod = mod;
        cg.residue = pos_mod(k, mod);
        alt.congs.push_back(std::move(cg));
      }
      alt.elims.push_back(std::move(el));
      return true;
    }
    Row a, b;
    a.terms = terms;
    a.bound = k;
    for (const auto& [v, c] : terms) b.terms.push_back({v, -c});
    b.bound = -k;
    alt.rows.push_back(std::move(a));
    alt.rows.push_back(std::move(b));
    return true;
  }

  // variant: 0 plain, 1 the '<' half of !=, 2 the '>' half of !=
  bool pattern_fin(const Comparison& cmp, const State& st, int variant,
                   Alternative& alt) const {
    if (cmp.lhs.constant.is_inf() || cmp.rhs.constant.is_inf()) return false;
    auto commit_side = [&](const LinExpr& e) {
      for (const auto& [v, c] : e.terms) {
        if (st.status[v] == VState::Inf) return false;
        alt.commits.push_back({v, VState::Fin});
        if (c.is_inf()) {
          Row z;
          z.terms.push_back({v, 1});
          z.bound = 0;  // v == 0, drops the term
          alt.rows.push_back(std::move(z));
        }
      }
      return true;
    };
    if (!commit_side(cmp.lhs) || !commit_side(cmp.rhs)) return false;
    std::vector<std::pair<int, int64_t>> terms;
    int64_t k = 0;
    combine(cmp, terms, k);
    RelOp op = cmp.op;
    if (op == RelOp::Ne) op = variant == 1 ? RelOp::Lt : RelOp::Gt;
    switch (op) {
      case RelOp::Le: {
        Row r{terms, k};
        alt.rows.push_back(std::move(r));
        break;
      }
      case RelOp::Lt: {
        Row r{terms, k - 1};
        alt.rows.push_back(std::move(r));
        break;
      }
      case RelOp::Ge: {
        Row r;
        for (const auto& [v, c] : terms) r.terms.push_back({v, -c});
        r.bound = -k;
        alt.rows.push_back(std::move(r));
        break;
      }
      case RelOp::Gt: {
        Row r;
        for (const auto& [v, c] : terms) r.terms.push_back({v, -c});
        r.bound = -k - 1;
        alt.rows.push_back(std::move(r));
        break;
      }
      case RelOp::Eq:
        if (!equality_rows(terms, k, alt)) return false;
        break;
      case RelOp::Ne:
        return false;  // unreachable, handled by variant
    }
    return true;
  }

  // Ways a side can be infinite: one commitment (or none for an inf
  // constant) per source, enumerated in term order.
  void inf_sources(const LinExpr& e, const State& st,
                   std::vector<Alternative>& out) const {
    if (e.constant.is_inf()) {
      out.push_back({});
      return;
    }
    for (const auto& [v, c] : e.terms) {
      if (c.is_zero()) continue;
      bool can_inf = st.status[v] != VState::Fin && !sys_.vars[v].finite_only;
      if (can_inf) {
        Alternative a;
        a.commits.push_back({v, VState::Inf});
        out.push_back(std::move(a));
      }
      if (c.is_inf()) {
        Alternative a;
        Row r;  // v >= 1 makes inf*v infinite with v still finite
        r.terms.push_back({v, -1});
        r.bound = -1;
        a.rows.push_back(std::move(r));
        out.push_back(std::move(a));
      }
    }
  }

  // Commitments making a side finite; false if impossible.
  bool fin_side(const LinExpr& e, const State& st, Alternative& alt) const {
    if (e.constant.is_inf()) return false;
    for (const auto& [v, c] : e.terms) {
      if (st.status[v] == VState::Inf) return false;
      alt.commits.push_back({v, VState::Fin});
      if (c.is_inf()) {
        Row z;
        z.terms.push_back({v, 1});
        z.bound = 0;
        alt.rows.push_back(std::move(z));
      }
    }
    return true;
  }

  static void merge_into(Alternative& dst, const Alternative& src) {
    dst.commits.insert(dst.commits.end(), src.commits.begin(),
                       src.commits.end());
    dst.rows.insert(dst.rows.end(), src.rows.begin(), src.rows.end());
    dst.congs.insert(dst.congs.end(), src.congs.begin(), src.congs.end());
    dst.elims.insert(dst.elims.end(), src.elims.begin(), src.elims.end());
  }

  std::vector<Alternative> alternatives(const Comparison& cmp,
                                        const State& st) const {
    std::vector<Alternative> out;
    // finite shapes first
    if (cmp.op == RelOp::Ne) {
      for (int variant : {1, 2}) {
        Alternative a;
        if (pattern_fin(cmp, st, variant, a)) out.push_back(std::move(a));
      }
    } else {
      Alternative a;
      if (pattern_fin(cmp, st, 0, a)) out.push_back(std::move(a));
    }
    if (mode_ == SolveMode::OverN) return out;
    bool b_ok = cmp.op == RelOp::Eq || cmp.op == RelOp::Le || cmp.op == RelOp::Ge;
    bool c_ok = cmp.op == RelOp::Lt || cmp.op == RelOp::Le || cmp.op == RelOp::Ne;
    bool d_ok = cmp.op == RelOp::Gt || cmp.op == RelOp::Ge || cmp.op == RelOp::Ne;
    if (b_ok) {
      std::vector<Alternative> ls, rs;
      inf_sources(cmp.lhs, st, ls);
      inf_sources(cmp.rhs, st, rs);
      for (const auto& l : ls)
        for (const auto& r : rs) {
          Alternative a = l;
          merge_into(a, r);
          out.push_back(std::move(a));
        }
    }
    if (c_ok) {
      Alternative base;
      if (fin_side(cmp.lhs, st, base)) {
        std::vector<Alternative> rs;
        inf_sources(cmp.rhs, st, rs);
        for (const auto& r : rs) {
          Alternative a = base;
          merge_into(a, r);
          out.push_back(std::move(a));
        }
      }
    }
    if (d_ok) {
      Alternative base;
      if (fin_side(cmp.rhs, st, base)) {
        std::vector<Alternative> ls;
        inf_sources(cmp.lhs, st, ls);
        for (const auto& l : ls) {
          Alternative a = base;
          merge_into(a, l);
          out.push_back(std::move(a));
        }
      }
    }
    return out;
  }

  bool apply(State& st, const Alternative& alt) const {
    for (const auto& [v, s] : alt.commits) {
      if (st.status[v] == VState::Unknown) {
        st.status[v] = s;
      } else if (st.status[v] != s) {
        return false;
      }
      if (s == VState::Inf && sys_.vars[v].finite_only) return false;
    }
    for (const auto& r : alt.rows) st.rows.push_back(r);
    for (const auto& cg : alt.congs)
      if (!insert_cong(st, cg)) return false;
    for (const auto& el : alt.elims) st.elims.push_back(el);
    return true;
  }

  // gcd with Bezout coefficient for the first argument
  static int64_t egcd(int64_t a, int64_t b, i128& x) {
    i128 x0 = 1, x1 = 0;
    while (b != 0) {
      int64_t q = a / b;
      int64_t t = a - q * b;
      a = b;
      b = t;
      i128 xt = x0 - static_cast<i128>(q) * x1;
      x0 = x1;
      x1 = xt;
    }
    x = x0;
    return a;
  }

  static bool insert_cong(State& st, const Cong& cg) {
    for (auto& ex : st.congs) {
      if (ex.terms != cg.terms) continue;
      // merge x = ex.residue (mod ex.mod) with x = cg.residue (mod cg.mod)
      i128 inv;
      int64_t g = egcd(ex.mod, cg.mod, inv);
      int64_t diff = cg.residue - ex.residue;
      if (diff % g != 0) return false;
      i128 lcm = static_cast<i128>(ex.mod) / g * cg.mod;
      if (lcm > (int64_t{1} << 40)) {  // keep mods sane; keep both instead
        st.congs.push_back(cg);
        return true;
      }
      int64_t merged_mod = static_cast<int64_t>(lcm);
      i128 t = (static_cast<i128>(diff) / g) % (cg.mod / g) * inv;
      i128 x = ex.residue + static_cast<i128>(ex.mod) * pos_mod(t, cg.mod / g);
      ex.mod = merged_mod;
      ex.residue = pos_mod(x, merged_mod);
      return true;
    }
    st.congs.push_back(cg);
    return true;
  }

  // --- propagation ---------------------------------------------------------

  // The negation check only matters right after new rows arrive; bb skips it.
  bool propagate(State& st) const {
    bool changed = true;
    int sweeps = 0;
    while (changed && sweeps < 64) {
      changed = false;
      ++sweeps;
      for (size_t ri = 0; ri < st.rows.size(); ++ri) {
        Row& row = st.rows[ri];
        i128 mn = 0, mx = 0;
        for (const auto& [v, a] : row.terms) {
          if (a > 0) {
            mn += static_cast<i128>(a) * st.lo[v];
            mx += static_cast<i128>(a) * st.hi[v];
          } else {
            mn += static_cast<i128>(a) * st.hi[v];
            mx += static_cast<i128>(a) * st.lo[v];
          }
        }
        if (mn > row.bound) return false;
        if (mx <= row.bound) {
          st.rows[ri] = std::move(st.rows.back());
          st.rows.pop_back();
          --ri;
          changed = true;
          continue;
        }
        for (const auto& [v, a] : row.terms) {
          i128 term_min = a > 0 ? static_cast<i128>(a) * st.lo[v]
                                : static_cast<i128>(a) * st.hi[v];
          i128 rest = mn - term_min;
          if (a > 0) {
            int64_t nh = floordiv(row.bound - rest, a);
            if (nh < st.hi[v]) {
              st.hi[v] = nh;
              changed = true;
            }
          } else {
            int64_t nl = ceildiv(row.bound - rest, a);
            if (nl > st.lo[v]) {
              st.lo[v] = nl;
              changed = true;
            }
          }
          if (st.lo[v] > st.hi[v]) return false;
        }
      }
      for (size_t ci = 0; ci < st.congs.size(); ++ci) {
        const Cong& cg = st.congs[ci];
        // the sum only takes values in the lattice of the coefficient gcd
        int64_t g = 0;
        for (const auto& [v, a] : cg.terms) g = std::gcd(g, a < 0 ? -a : a);
        if (g == 0) {
          if (pos_mod(-cg.residue, cg.mod) != 0) return false;
        } else if (cg.residue % std::gcd(g, cg.mod) != 0) {
          return false;
        }
        i128 mn = 0, mx = 0;
        for (const auto& [v, a] : cg.terms) {
          if (a > 0) {
            mn += static_cast<i128>(a) * st.lo[v];
            mx += static_cast<i128>(a) * st.hi[v];
          } else {
            mn += static_cast<i128>(a) * st.hi[v];
            mx += static_cast<i128>(a) * st.lo[v];
          }
        }
        i128 first = mn + pos_mod(static_cast<i128>(cg.residue) - mn, cg.mod);
        if (first > mx) return false;
        if (mn == mx) {  // fully determined and admissible
          st.congs[ci] = std::move(st.congs.back());
          st.congs.pop_back();
          --ci;
          changed = true;
        }
      }
    }
    return brackets_admissible(st);
  }

  // Opposite rows over the same term vector bracket a common sum into a
  // window L <= T <= U; fixed variables are folded away first. An empty
  // window, or one that misses every residue of a congruence agreeing with T
  // modulo its modulus, is a contradiction intervals alone never notice
  // (a periodic escape window always slides past plain bound reasoning).
  bool brackets_admissible(const State& st) const {
    std::map<std::vector<std::pair<int, int64_t>>, i128> min_bound;
    std::vector<std::pair<int, int64_t>> terms;
    for (const auto& r : st.rows) {
      terms.clear();
      i128 b = r.bound;
      for (const auto& [v, a] : r.terms) {
        if (st.lo[v] == st.hi[v])
          b -= static_cast<i128>(a) * st.lo[v];
        else
          terms.push_back({v, a});
      }
      auto it = min_bound.find(terms);
      if (it == min_bound.end())
        min_bound.emplace(terms, b);
      else
        it->second = std::min(it->second, b);
    }
    std::vector<std::pair<int, int64_t>> neg;
    for (const auto& [t, ub] : min_bound) {
      if (t.empty()) {
        if (ub < 0) return false;
        continue;
      }
      neg.clear();
      for (const auto& [v, a] : t) neg.push_back({v, -a});
      auto it = min_bound.find(neg);
      if (it == min_bound.end()) continue;
      i128 lb = -it->second;
      if (lb > ub) return false;
      for (const auto& cg : st.congs) {
        i128 residue = cg.residue;
        std::map<int, int64_t> d;
        for (const auto& [v, a] : cg.terms) {
          if (st.lo[v] == st.hi[v])
            residue -= static_cast<i128>(a) * st.lo[v];
          else
            d[v] += a;
        }
        bool agrees = true;
        for (const auto& [v, a] : t) {
          auto jt = d.find(v);
          int64_t dc = jt == d.end() ? 0 : jt->second;
          if (pos_mod(a - dc, cg.mod) != 0) {
            agrees = false;
            break;
          }
          if (jt != d.end()) d.erase(jt);
        }
        if (agrees)
          for (const auto& [v, dc] : d)
            if (pos_mod(dc, cg.mod) != 0) {
              agrees = false;
              break;
            }
        if (!agrees) continue;
        i128 first = lb + pos_mod(residue - lb, cg.mod);
        if (first > ub) return false;
      }
    }
    return true;
  }

  // --- search ----------------------------------------------------------------

  bool search(State st) {
    tick();
    for (;;) {
      if (!propagate(st)) return false;
      bool progress = false;
      for (size_t ci = 0; ci < sys_.clauses.size(); ++ci) {
        if (st.done[ci]) continue;
        const Clause& cl = sys_.clauses[ci];
        int open = 0, last_open = -1;
        bool sat = false;
        for (size_t di = 0; di < cl.disjuncts.size(); ++di) {
          int v = comparison_status(cl.disjuncts[di], st);
          if (v > 0) {
            sat = true;
            break;
          }
          if (v == 0) {
            ++open;
            last_open = static_cast<int>(di);
          }
        }
        if (sat) {
          st.done[ci] = 1;
          progress = true;
          continue;
        }
        if (open == 0) return false;
        if (open == 1) {
          auto alts = alternatives(cl.disjuncts[last_open], st);
          if (alts.empty()) return false;
          if (alts.size() == 1) {
            if (!apply(st, alts[0])) return false;
            st.done[ci] = 1;
            progress = true;
          }
        }
      }
      if (!progress) break;
    }
    int branch_clause = -1;
    int best_open = 0;
    for (size_t ci = 0; ci < sys_.clauses.size(); ++ci) {
      if (st.done[ci]) continue;
      int open = 0;
      for (const auto& d : sys_.clauses[ci].disjuncts)
        if (comparison_status(d, st) == 0) ++open;
      if (branch_clause < 0 || open < best_open) {
        branch_clause = static_cast<int>(ci);
        best_open = open;
      }
    }
    if (branch_clause < 0) return bb(std::move(st));
    const Clause& cl = sys_.clauses[branch_clause];
    // Disjuncts are tried with the refusals of their predecessors asserted,
    // so a choice like "this 1-type is empty" is never reopened downstream.
    std::vector<Row> refused;
    for (const auto& d : cl.disjuncts) {
      if (comparison_status(d, st) < 0) continue;
      for (const auto& alt : alternatives(d, st)) {
        State child = st;
        for (const auto& r : refused) child.rows.push_back(r);
        if (!apply(child, alt)) continue;
        child.done[branch_clause] = 1;
        if (search(std::move(child))) return true;
      }
      int v = var_eq_zero(d);
      if (v >= 0 && st.status[v] == VState::Fin)
        refused.push_back(Row{{{v, -1}}, -1});  // v >= 1 from here on
    }
    return false;
  }

  // Recognizes c*v = 0 (c >= 1, either orientation), whose finite refusal is
  // the row v >= 1.
  static int var_eq_zero(const Comparison& cmp) {
    if (cmp.op != RelOp::Eq) return -1;
    auto single = [](const LinExpr& e) {
      return e.terms.size() == 1 && e.constant.is_zero() &&
             !e.terms[0].second.is_zero();
    };
    auto zero = [](const LinExpr& e) {
      return e.terms.empty() && e.constant.is_zero();
    };
    if (single(cmp.lhs) && zero(cmp.rhs)) return cmp.lhs.terms[0].first;
    if (zero(cmp.lhs) && single(cmp.rhs)) return cmp.rhs.terms[0].first;
    return -1;
  }

  // Variables still relevant for the residue search.
  int pick_bb_var(const State& st) const {
    int best = -1;
    int64_t best_range = 0;
    auto consider = [&](int v) {
      if (st.lo[v] >= st.hi[v]) return;
      int64_t range = st.hi[v] - st.lo[v];
      if (best == -1 || range < best_range) {
        best = v;
        best_range = range;
      }
    };
    for (const auto& r : st.rows)
      for (const auto& [v, a] : r.terms) consider(v);
    for (const auto& cg : st.congs)
      for (const auto& [v, a] : cg.terms) consider(v);
    return best;
  }

  bool bb(State st) {
    tick();
    if (!propagate(st)) return false;
    int v = pick_bb_var(st);
    if (v < 0) {
      // whatever survived propagation is now over fixed variables only
      for (const auto& r : st.rows) {
        i128 sum = 0;
        for (const auto& [rv, a] : r.terms) sum += static_cast<i128>(a) * st.lo[rv];
        if (sum > r.bound) return false;
      }
      for (const auto& cg : st.congs) {
        i128 sum = 0;
        for (const auto& [cv, a] : cg.terms) sum += static_cast<i128>(a) * st.lo[cv];
        if (pos_mod(sum - cg.residue, cg.mod) != 0) return false;
      }
      finalize(st);
      return true;
    }
    int64_t lo = st.lo[v], hi = st.hi[v];
    for (int64_t val = lo; val <= hi; ++val) {
      tick();
      State child = st;
      child.lo[v] = child.hi[v] = val;
      if (bb(std::move(child))) return true;
    }
    return false;
  }

  void finalize(const State& st) {
    witness_.values.assign(sys_.vars.size(), ExtNat(0));
    std::vector<char> eliminated(sys_.vars.size(), 0);
    for (const auto& el : st.elims) eliminated[el.var] = 1;
    for (size_t v = 0; v < sys_.vars.size(); ++v) {
      if (st.status[v] == VState::Inf)
        witness_.values[v] = ExtNat::inf();
      else if (!eliminated[v])
        witness_.values[v] = ExtNat(static_cast<uint64_t>(st.lo[v]));
    }
    for (const auto& el : st.elims) {
      i128 sum = 0;
      for (const auto& [v, c] : el.delta)
        sum += static_cast<i128>(c) *
               static_cast<int64_t>(witness_.values[v].value());
      i128 num = static_cast<i128>(el.k) - sum;
      if (num % el.gamma != 0 || num / el.gamma < 0)
        throw std::logic_error("solver: bad eliminated value");
      witness_.values[el.var] =
          ExtNat(static_cast<uint64_t>(num / el.gamma));
    }
    if (!flpc::satisfies(sys_, witness_))
      throw std::logic_error("solver: witness failed verification");
  }
};

}  // namespace

// Partition the variables into interchangeability classes: same finite_only
// flag and the same coefficient in every comparison side (absent counts as
// zero). Such columns are indistinguishable to the system, so the class can
// travel as one aggregate variable; a witness puts the aggregate back on the
// representative and zero on the rest.
static std::vector<int> column_classes(const LinearSystem& s) {
  std::vector<int> cls(s.vars.size());
  for (size_t v = 0; v < s.vars.size(); ++v)
    cls[v] = s.vars[v].finite_only ? 1 : 0;
  int next = 2;
  std::vector<std::pair<int, int>> updates;
  auto refine = [&](const LinExpr& e) {
    std::map<std::pair<int, std::pair<uint64_t, bool>>, int> fresh;
    updates.clear();
    for (const auto& [v, c] : e.terms) {
      std::pair<int, std::pair<uint64_t, bool>> key{
          cls[v], {c.is_inf() ? 0 : c.value(), c.is_inf()}};
      auto [it, inserted] = fresh.try_emplace(key, 0);
      if (inserted) it->second = next++;
      updates.push_back({v, it->second});
    }
    for (auto [v, k] : updates) cls[v] = k;
  };
  for (const auto& cl : s.clauses)
    for (const auto& d : cl.disjuncts) {
      refine(d.lhs);
      refine(d.rhs);
    }
  return cls;
}

SolveResult solve(const LinearSystem& s, SolveMode mode,
                  const SolverLimits& limits) {
  std::vector<int> cls = column_classes(s);
  std::map<int, int> seen;  // class -> merged index
  std::vector<int> newidx(s.vars.size(), -1);
  std::vector<size_t> rep_of;
  LinearSystem m;
  for (size_t v = 0; v < s.vars.size(); ++v) {
    auto [it, inserted] = seen.try_emplace(cls[v], 0);
    if (inserted) {
      it->second = m.add_var(s.vars[v].name, s.vars[v].finite_only);
      newidx[v] = it->second;
      rep_of.push_back(v);
    }
  }
  if (m.vars.size() == s.vars.size()) {
    Solver solver(s, mode, limits);
    return solver.run();
  }
  auto fold = [&](const LinExpr& e) {
    LinExpr out;
    out.constant = e.constant;
    for (const auto& [v, c] : e.terms)
      if (newidx[v] >= 0) out.add_term(newidx[v], c);
    return out;
  };
  for (const auto& cl : s.clauses) {
    Clause mc;
    for (const auto& d : cl.disjuncts)
      mc.disjuncts.push_back({fold(d.lhs), d.op, fold(d.rhs)});
    m.clauses.push_back(std::move(mc));
  }
  Solver solver(m, mode, limits);
  SolveResult r = solver.run();
  if (r.status == SolveStatus::Sat) {
    Assignment full;
    full.values.assign(s.vars.size(), ExtNat(0));
    for (size_t mv = 0; mv < m.vars.size(); ++mv)
      full.values[rep_of[mv]] = r.assignment.values[mv];
    r.assignment = std::move(full);
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

namespace {

json extnat_json(ExtNat v) {
  if (v.is_inf()) return json("inf");
  return json(v.value());
}

ExtNat extnat_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf")
      throw std::runtime_error("bad extended natural: " + j.dump());
    return ExtNat::inf();
  }
  return ExtNat(j.get<uint64_t>());
}

json expr_json(const LinearSystem& s, const LinExpr& e) {
  json terms = json::object();
  for (const auto& [v, c] : e.terms) terms[s.vars[v].name] = extnat_json(c);
  return json{{"terms", terms}, {"const", extnat_json(e.constant)}};
}

LinExpr expr_from_json(const LinearSystem& s, const json& j) {
  LinExpr e;
  e.constant = extnat_from_json(j.at("const"));
  for (const auto& [name, c] : j.at("terms").items()) {
    int v = s.var_index(name);
    if (v < 0) throw std::runtime_error("unknown variable: " + name);
    e.add_term(v, extnat_from_json(c));
  }
  return e;
}

RelOp relop_from_str(const std::string& s) {
  if (s == "=") return RelOp::Eq;
  if (s == "!=") return RelOp::Ne;
  if (s == "<=") return RelOp::Le;
  if (s == "<") return RelOp::Lt;
  if (s == ">=") return RelOp::Ge;
  if (s == ">") return RelOp::Gt;
  throw std::runtime_error("bad comparison operator: " + s);
}

}  // namespace

std::string system_to_json(const LinearSystem& s, bool pretty) {
  json vars = json::array();
  for (const auto& v : s.vars)
    vars.push_back(json{{"name", v.name}, {"finite_only", v.finite_only}});
  json clauses = json::array();
  for (const auto& cl : s.clauses) {
    json dis = json::array();
    for (const auto& d : cl.disjuncts)
      dis.push_back(json{{"lhs", expr_json(s, d.lhs)},
                         {"op", relop_str(d.op)},
                         {"rhs", expr_json(s, d.rhs)}});
    clauses.push_back(dis);
  }
  json out{{"variables", vars}, {"clauses", clauses}};
  return pretty ? out.dump(2) : out.dump();
}

LinearSystem system_from_json(const std::string& text) {
  json j = json::parse(text);
  LinearSystem s;
  for (const auto& v : j.at("variables"))
    s.add_var(v.at("name").get<std::string>(),
              v.value("finite_only", false));
  for (const auto& cl : j.at("clauses")) {
    Clause c;
    for (const auto& d : cl)
      c.disjuncts.push_back(
          Comparison{expr_from_json(s, d.at("lhs")),
                     relop_from_str(d.at("op").get<std::string>()),
                     expr_from_json(s, d.at("rhs"))});
    if (c.disjuncts.empty()) throw std::runtime_error("empty clause");
    s.clauses.push_back(std::move(c));
  }
  return s;
}

std::string assignment_to_json(const LinearSystem& s, const Assignment& a,
                               bool pretty) {
  json out = json::object();
  for (size_t v = 0; v < s.vars.size(); ++v)
    out[s.vars[v].name] = extnat_json(a.values.at(v));
  return pretty ? out.dump(2) : out.dump();
}

Assignment assignment_from_json(const LinearSystem& s,
                                const std::string& text) {
  json j = json::parse(text);
  Assignment a;
  a.values.assign(s.vars.size(), ExtNat(0));
  for (const auto& [name, val] : j.items()) {
    int v = s.var_index(name);
    if (v < 0) throw std::runtime_error("unknown variable: " + name);
    a.values[v] = extnat_from_json(val);
  }
  return a;
}

}  // namespace flpc
