#include "dgla/weil.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dgla {

namespace {

constexpr int kExpBits = 7;
constexpr uint64_t kExpMask = (1u << kExpBits) - 1;

int exp_of(uint64_t pack, int a) { return static_cast<int>((pack >> (8 + kExpBits * a)) & kExpMask); }

uint64_t with_exp(uint64_t pack, int a, int e) {
  uint64_t cleared = pack & ~(kExpMask << (8 + kExpBits * a));
  return cleared | (uint64_t(e) << (8 + kExpBits * a));
}

int total_exp(uint64_t pack, int dim) {
  int s = 0;
  for (int a = 0; a < dim; ++a) s += exp_of(pack, a);
  return s;
}

int mono_degree(uint64_t pack, int dim) {
  return std::popcount(static_cast<uint32_t>(pack & 0xff)) + 2 * total_exp(pack, dim);
}

}  // namespace

int wedge_sign(uint32_t m1, uint32_t m2) {
  // (-1)^{#{(i,j): i in m1, j in m2, i > j}}
  int inv = 0;
  for (uint32_t j = m2; j;) {
    int b = std::countr_zero(j);
    j &= j - 1;
    inv += std::popcount(m1 >> (b + 1));
  }
  return (inv & 1) ? -1 : 1;
}

WeilAlgebra::WeilAlgebra(LieData L, int poly_cutoff) : lie_(std::move(L)), cutoff_(poly_cutoff) {
  if (lie_.dim > 8) throw std::invalid_argument("WeilAlgebra: dim g > 8 unsupported");
  if (cutoff_ < 0) throw std::invalid_argument("WeilAlgebra: negative cutoff");
  // Enumerate all monomials, bucketed by total degree, lexicographic by
  // packed value inside one degree: a stable canonical basis order.
  std::vector<uint64_t> exps;
  std::vector<int> cur(static_cast<size_t>(lie_.dim), 0);
  std::function<void(int, int)> rec = [&](int a, int left) {
    if (a == lie_.dim) {
      uint64_t p = 0;
      for (int i = 0; i < lie_.dim; ++i) p = with_exp(p, i, cur[static_cast<size_t>(i)]);
      exps.push_back(p);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[static_cast<size_t>(a)] = e;
      rec(a + 1, left - e);
    }
    cur[static_cast<size_t>(a)] = 0;
  };
  rec(0, cutoff_);

  std::vector<std::vector<uint64_t>> by_degree(static_cast<size_t>(max_degree() + 1));
  for (uint64_t ep : exps)
    for (uint32_t mask = 0; mask < (1u << lie_.dim); ++mask) {
      uint64_t p = ep | mask;
      by_degree[static_cast<size_t>(mono_degree(p, lie_.dim))].push_back(p);
    }
  for (auto& bucket : by_degree) std::sort(bucket.begin(), bucket.end());
  for (int deg = 0; deg <= max_degree(); ++deg)
    for (uint64_t p : by_degree[static_cast<size_t>(deg)]) {
      SymId id = syms_.intern(mono_name(p), deg);
      packs_.push_back(p);
      by_pack_[p] = id;
    }
  unit_ = by_pack_.at(0);
}

std::string WeilAlgebra::mono_name(uint64_t pack) const {
  if (pack == 0) return "1";
  std::ostringstream os;
  bool first = true;
  for (int a = 0; a < lie_.dim; ++a)
    if (pack & (1u << a)) {
      if (!first) os << "*";
      os << "th(" << lie_.names[static_cast<size_t>(a)] << ")";
      first = false;
    }
  for (int a = 0; a < lie_.dim; ++a) {
    int e = exp_of(pack, a);
    if (e > 0) {
      if (!first) os << "*";
      os << "t(" << lie_.names[static_cast<size_t>(a)] << ")";
      if (e > 1) os << "^" << e;
      first = false;
    }
  }
  return os.str();
}

SymId WeilAlgebra::id_of_packed(uint64_t p) const {
  auto it = by_pack_.find(p);
  if (it == by_pack_.end())
    throw CutoffRefusal("Weil monomial outside polynomial cutoff " + std::to_string(cutoff_));
  return it->second;
}

std::vector<SymId> WeilAlgebra::basis(int degree) const {
  std::vector<SymId> out;
  if (degree < 0 || degree > max_degree()) return out;
  for (SymId s = 0; s < syms_.size(); ++s)
    if (syms_.degree(s) == degree) out.push_back(s);
  return out;
}

SymId WeilAlgebra::theta(int a) const { return by_pack_.at(1u << a); }

SymId WeilAlgebra::t(int a) const { return id_of_packed(with_exp(0, a, 1)); }

SymId WeilAlgebra::t_monomial(const Multiset& m) const {
  uint64_t p = 0;
  for (uint8_t a : m) p = with_exp(p, a, exp_of(p, a) + 1);
  return id_of_packed(p);
}

SparseVec WeilAlgebra::mul(SymId a, SymId b) const {
  uint64_t pa = packed(a), pb = packed(b);
  uint32_t ma = pa & 0xff, mb = pb & 0xff;
  if (ma & mb) return SparseVec();
  if (total_exp(pa, lie_.dim) + total_exp(pb, lie_.dim) > cutoff_)
    throw CutoffRefusal("Weil product exceeds polynomial cutoff " + std::to_string(cutoff_));
  uint64_t p = (pa & ~0xffull) + (pb & ~0xffull);  // exponents add fieldwise (7 bits never carry)
  p |= (ma | mb);
  return SparseVec::unit(by_pack_.at(p), Rational(wedge_sign(ma, mb)));
}

SparseVec WeilAlgebra::mul(const SparseVec& x, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [a, ca] : x.terms())
    for (const auto& [b, cb] : y.terms()) out.axpy(ca * cb, mul(a, b));
  return out;
}

SparseVec WeilAlgebra::d_sym(SymId s) const {
  auto memo = d_memo_.find(s);
  if (memo != d_memo_.end()) return memo->second;
  uint64_t p = packed(s);
  uint32_t mask = p & 0xff;
  SparseVec out;
  // theta factors: pull th^a to the front, differentiate, wedge back.
  for (uint32_t m = mask; m;) {
    int a = std::countr_zero(m);
    m &= m - 1;
    int sign = (std::popcount(mask & ((1u << a) - 1)) & 1) ? -1 : 1;
    uint64_t rest = p & ~(1ull << a);
    // d th^a = t^a - 1/2 f^a_{bc} th^b th^c
    SparseVec dth = SparseVec::unit(t(a));
    for (int b = 0; b < lie_.dim; ++b)
      for (int c = 0; c < lie_.dim; ++c) {
        Rational fabc = lie_.structure_const(a, b, c);
        if (fabc.is_zero() || b >= c) continue;
        // th^b th^c and th^c th^b together: antisymmetry gives a single term
        dth.axpy(-fabc, SparseVec::unit(by_pack_.at((1ull << b) | (1ull << c))));
      }
    out.axpy(Rational(sign), mul(dth, SparseVec::unit(id_of_packed(rest))));
  }
  // t factors: pulling the even t^a out front is free, and moving the odd
  // dt^a back to the front cancels the Koszul prefix over the theta block,
  // so the net coefficient is just the exponent.
  for (int a = 0; a < lie_.dim; ++a) {
    int e = exp_of(p, a);
    if (e == 0) continue;
    uint64_t rest = with_exp(p, a, e - 1);
    // d t^a = -f^a_{bc} th^b t^c
    SparseVec dt;
    for (int b = 0; b < lie_.dim; ++b)
      for (int c = 0; c < lie_.dim; ++c) {
        Rational fabc = lie_.structure_const(a, b, c);
        if (fabc.is_zero()) continue;
        dt.axpy(-fabc, mul(SparseVec::unit(theta(b)), SparseVec::unit(t(c))));
      }
    out.axpy(Rational(e), mul(dt, SparseVec::unit(id_of_packed(rest))));
  }
  d_memo_[s] = out;
  return out;
}

SparseVec WeilAlgebra::d(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.axpy(c, d_sym(s));
  return out;
}

SparseVec WeilAlgebra::contract_sym(int a, SymId s) const {
  uint64_t p = packed(s);
  uint32_t mask = p & 0xff;
  if (!(mask & (1u << a))) return SparseVec();
  int sign = (std::popcount(mask & ((1u << a) - 1)) & 1) ? -1 : 1;
  return SparseVec::unit(by_pack_.at(p & ~(1ull << a)), Rational(sign));
}

SparseVec WeilAlgebra::contract(int a, const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.axpy(c, contract_sym(a, s));
  return out;
}

SparseVec WeilAlgebra::contract_x(const SparseVec& x_coords, const SparseVec& w) const {
  SparseVec out;
  for (const auto& [a, c] : x_coords.terms()) out.axpy(c, contract(static_cast<int>(a), w));
  return out;
}

SparseVec WeilAlgebra::lie_der_sym(int cgen, SymId s) const {
  uint64_t p = packed(s);
  uint32_t mask = p & 0xff;
  SparseVec out;
  // theta slots: L_c th^a = -f^a_{cb} th^b
  for (uint32_t m = mask; m;) {
    int a = std::countr_zero(m);
    m &= m - 1;
    int sign = (std::popcount(mask & ((1u << a) - 1)) & 1) ? -1 : 1;
    uint64_t rest = p & ~(1ull << a);
    SparseVec lth;
    for (int b = 0; b < lie_.dim; ++b) {
      Rational fa = lie_.structure_const(a, cgen, b);
      if (!fa.is_zero()) lth.axpy(-fa, SparseVec::unit(theta(b)));
    }
    out.axpy(Rational(sign), mul(lth, SparseVec::unit(id_of_packed(rest))));
  }
  // t slots: L_c t^a = -f^a_{cb} t^b, even replacement, no reordering signs.
  for (int a = 0; a < lie_.dim; ++a) {
    int e = exp_of(p, a);
    if (e == 0) continue;
    uint64_t rest = with_exp(p, a, e - 1);
    for (int b = 0; b < lie_.dim; ++b) {
      Rational fa = lie_.structure_const(a, cgen, b);
      if (fa.is_zero()) continue;
      uint64_t np = with_exp(rest, b, exp_of(rest, b) + 1);
      out.add_term(by_pack_.at(np), -fa * Rational(e));
    }
  }
  return out;
}

SparseVec WeilAlgebra::lie_der(int a, const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.axpy(c, lie_der_sym(a, s));
  return out;
}

SparseVec WeilAlgebra::poly_in_t(const InvariantPolynomial& p) const {
  SparseVec out;
  for (const Multiset& m : multisets_of_size(lie_.dim, p.n)) {
    Rational v = p.eval(m);
    if (v.is_zero()) continue;
    out.add_term(t_monomial(m), multinomial(m) * v);
  }
  return out;
}

SparseVec WeilAlgebra::poly_t_theta(const InvariantPolynomial& p) const {
  SparseVec out;
  for (const Multiset& m : multisets_of_size(lie_.dim, p.n - 1)) {
    Rational w = multinomial(m);
    SymId tm = t_monomial(m);
    for (int a = 0; a < lie_.dim; ++a) {
      Multiset full = m;
      full.push_back(static_cast<uint8_t>(a));
      Rational v = p.eval(std::move(full));
      if (v.is_zero()) continue;
      out.axpy(w * v, mul(SymId(theta(a)), tm));
    }
  }
  return out;
}

std::vector<SparseVec> WeilAlgebra::invariant_basis(int degree) const {
  std::vector<SymId> bas = basis(degree);
  std::vector<SparseVec> cols(bas.size());
  int32_t stride = syms_.size();
  for (size_t j = 0; j < bas.size(); ++j)
    for (int a = 0; a < lie_.dim; ++a) {
      SparseVec la = lie_der_sym(a, bas[j]);
      for (const auto& [s, c] : la.terms())
        cols[j].add_term(static_cast<SymId>(a) * stride + s, c);
    }
  std::vector<SparseVec> raw = nullspace_of_columns(cols, std::vector<SymId>(bas.begin(), bas.end()));
  return raw;
}

std::vector<SparseVec> WeilAlgebra::basic_basis(int degree) const {
  std::vector<SymId> bas;
  for (SymId s : basis(degree))
    if (theta_mask(s) == 0) bas.push_back(s);
  std::vector<SparseVec> cols(bas.size());
  int32_t stride = syms_.size();
  for (size_t j = 0; j < bas.size(); ++j)
    for (int a = 0; a < lie_.dim; ++a) {
      SparseVec la = lie_der_sym(a, bas[j]);
      for (const auto& [s, c] : la.terms())
        cols[j].add_term(static_cast<SymId>(a) * stride + s, c);
    }
  return nullspace_of_columns(cols, std::vector<SymId>(bas.begin(), bas.end()));
}

int WeilAlgebra::poly_degree(SymId s) const { return total_exp(packed(s), lie_.dim); }

CeAlgebra::CeAlgebra(LieData L) : lie_(std::move(L)) {
  if (lie_.dim > 16) throw std::invalid_argument("CeAlgebra: dim g > 16 unsupported");
  // Basis = all theta masks; id equals the mask for direct indexing, so the
  // intern order runs over masks, not degrees.
  for (uint32_t mask = 0; mask < (1u << lie_.dim); ++mask) {
    std::string n;
    if (mask == 0) {
      n = "1";
    } else {
      for (int a = 0; a < lie_.dim; ++a)
        if (mask & (1u << a)) {
          if (!n.empty()) n += "*";
          n += "th(" + lie_.names[static_cast<size_t>(a)] + ")";
        }
    }
    syms_.intern(n, std::popcount(mask));
  }
}

std::vector<SymId> CeAlgebra::basis(int degree) const {
  std::vector<SymId> out;
  for (SymId s = 0; s < syms_.size(); ++s)
    if (syms_.degree(s) == degree) out.push_back(s);
  return out;
}

SymId CeAlgebra::theta(int a) const { return static_cast<SymId>(1u << a); }

SparseVec CeAlgebra::mul(SymId a, SymId b) const {
  uint32_t ma = static_cast<uint32_t>(a), mb = static_cast<uint32_t>(b);
  if (ma & mb) return SparseVec();
  return SparseVec::unit(static_cast<SymId>(ma | mb), Rational(wedge_sign(ma, mb)));
}

SparseVec CeAlgebra::mul(const SparseVec& x, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [a, ca] : x.terms())
    for (const auto& [b, cb] : y.terms()) out.axpy(ca * cb, mul(a, b));
  return out;
}

SparseVec CeAlgebra::d_sym(SymId s) const {
  uint32_t mask = static_cast<uint32_t>(s);
  SparseVec out;
  for (uint32_t m = mask; m;) {
    int a = std::countr_zero(m);
    m &= m - 1;
    int sign = (std::popcount(mask & ((1u << a) - 1)) & 1) ? -1 : 1;
    SymId rest = static_cast<SymId>(mask & ~(1u << a));
    SparseVec dth;
    for (int b = 0; b < lie_.dim; ++b)
      for (int c = b + 1; c < lie_.dim; ++c) {
        Rational fabc = lie_.structure_const(a, b, c);
        if (!fabc.is_zero())
          dth.axpy(-fabc, SparseVec::unit(static_cast<SymId>((1u << b) | (1u << c))));
      }
    out.axpy(Rational(sign), mul(dth, SparseVec::unit(rest)));
  }
  return out;
}

SparseVec CeAlgebra::d(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.axpy(c, d_sym(s));
  return out;
}

SparseVec CeAlgebra::contract_sym(int a, SymId s) const {
  uint32_t mask = static_cast<uint32_t>(s);
  if (!(mask & (1u << a))) return SparseVec();
  int sign = (std::popcount(mask & ((1u << a) - 1)) & 1) ? -1 : 1;
  return SparseVec::unit(static_cast<SymId>(mask & ~(1u << a)), Rational(sign));
}

SparseVec CeAlgebra::lie_der_sym(int cgen, SymId s) const {
  uint32_t mask = static_cast<uint32_t>(s);
  SparseVec out;
  for (uint32_t m = mask; m;) {
    int a = std::countr_zero(m);
    m &= m - 1;
    int sign = (std::popcount(mask & ((1u << a) - 1)) & 1) ? -1 : 1;
    SymId rest = static_cast<SymId>(mask & ~(1u << a));
    SparseVec lth;
    for (int b = 0; b < lie_.dim; ++b) {
      Rational fa = lie_.structure_const(a, cgen, b);
      if (!fa.is_zero()) lth.axpy(-fa, SparseVec::unit(theta(b)));
    }
    out.axpy(Rational(sign), mul(lth, SparseVec::unit(rest)));
  }
  return out;
}

}  // namespace dgla
