#include "dgla/tensor_dgla.hpp"

#include <stdexcept>

#include "dgla/cone.hpp"
#include "dgla/dg.hpp"

namespace dgla {

TensorDgla::TensorDgla(const WeilAlgebra& W, const Dgla& A, std::string lbl)
    : label(std::move(lbl)), w_(W), a_(A) {}

SymId TensorDgla::pair_sym(SymId w, SymId a) const {
  uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(w)) << 32) |
                 static_cast<uint32_t>(a);
  auto it = by_pair_.find(key);
  if (it != by_pair_.end()) return it->second;
  int deg = w_.symbols().degree(w) + a_.symbols().degree(a);
  SymId s = tab_.intern("(" + w_.symbols().name(w) + ")⊗(" + a_.symbols().name(a) + ")", deg);
  if (static_cast<size_t>(s) != parts_.size()) throw std::logic_error("pair symbol re-interned");
  parts_.emplace_back(w, a);
  by_pair_.emplace(key, s);
  return s;
}

std::pair<SymId, SymId> TensorDgla::split(SymId s) const {
  return parts_.at(static_cast<size_t>(s));
}

SparseVec TensorDgla::embed(const SparseVec& w, const SparseVec& a) const {
  SparseVec out;
  for (const auto& [ws, wc] : w.terms())
    for (const auto& [as, ac] : a.terms()) out.add_term(pair_sym(ws, as), wc * ac);
  return out;
}

std::vector<SymId> TensorDgla::basis(int degree) const {
  std::vector<SymId> out;
  for (int wd = 0; wd <= w_.max_degree(); ++wd) {
    int ad = degree - wd;
    if (ad < a_.min_degree() || ad > a_.max_degree()) continue;
    for (SymId w : w_.basis(wd))
      for (SymId a : a_.basis(ad)) out.push_back(pair_sym(w, a));
  }
  return out;
}

int TensorDgla::min_degree() const { return a_.min_degree(); }
int TensorDgla::max_degree() const { return w_.max_degree() + a_.max_degree(); }

SparseVec TensorDgla::bracket_sym(SymId a, SymId b) const {
  auto [w1, a1] = split(a);
  auto [w2, a2] = split(b);
  SparseVec ab = a_.bracket_sym(a1, a2);
  if (ab.is_zero()) return {};
  SparseVec ww = w_.mul(w1, w2);
  SparseVec out = embed(ww, ab);
  bool sign = (a_.symbols().degree(a1) & 1) && (w_.symbols().degree(w2) & 1);
  if (sign) out.scale(Rational(-1));
  return out;
}

SparseVec TensorDgla::d_sym(SymId s) const {
  auto [w, a] = split(s);
  SparseVec out = embed(w_.d_sym(w), SparseVec::unit(a));
  SparseVec da = a_.d_sym(a);
  if (!da.is_zero()) {
    SparseVec part = embed(SparseVec::unit(w), da);
    if (w_.symbols().degree(w) & 1) part.scale(Rational(-1));
    out += part;
  }
  return out;
}

McReport mc_check(const TensorDgla& T, const SparseVec& elem) {
  auto deg = homogeneous_degree(elem, T.symbols());
  if (!elem.is_zero() && (!deg || *deg != 1))
    throw DegreeMismatch("Maurer-Cartan element must be homogeneous of degree 1");
  McReport rep;
  for (const auto& [s, c] : elem.terms()) {
    try {
      rep.residual.axpy(c, T.d_sym(s));
    } catch (const CutoffRefusal& e) {
      ++rep.refused_terms;
      if (rep.first_refusal.empty()) rep.first_refusal = e.what();
    }
  }
  Rational half(1, 2);
  for (const auto& [s1, c1] : elem.terms())
    for (const auto& [s2, c2] : elem.terms()) {
      try {
        rep.residual.axpy(-half * c1 * c2, T.bracket_sym(s1, s2));
      } catch (const CutoffRefusal& e) {
        ++rep.refused_terms;
        if (rep.first_refusal.empty()) rep.first_refusal = e.what();
      }
    }
  rep.zero = rep.residual.is_zero();
  return rep;
}

SparseVec cone_mc_element(const TensorDgla& T, const LieData& L) {
  SparseVec out;
  for (int a = 0; a < L.dim; ++a) {
    out.add_term(T.pair_sym(T.weil().t(a), cone_I(L, a)), Rational(1));
    out.add_term(T.pair_sym(T.weil().theta(a), cone_L(L, a)), Rational(-1));
  }
  return out;
}

SparseVec dg_mc_element(const TensorDgla& T, const DgAlgebra& A) {
  SparseVec out;
  const WeilAlgebra& W = T.weil();
  for (int g = 0; g < A.letter_count(); ++g) {
    const Multiset& m = A.letter_multiset(g);
    if (static_cast<int>(m.size()) > W.poly_cutoff()) continue;
    out.add_term(T.pair_sym(W.t_monomial(m), A.letter_sym(g)), A.letter_multinomial(g));
  }
  for (int a = 0; a < A.lie().dim; ++a)
    out.add_term(T.pair_sym(W.theta(a), A.l_sym(a)), Rational(-1));
  return out;
}

}  // namespace dgla
