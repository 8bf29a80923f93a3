#include "dgla/cone.hpp"

#include <stdexcept>

namespace dgla {

TableDgla build_cone(const LieData& L) {
  TableDgla A;
  A.label = "cone(" + L.label + ")";
  for (int a = 0; a < L.dim; ++a) A.add_symbol("L(" + L.names[static_cast<size_t>(a)] + ")", 0);
  for (int a = 0; a < L.dim; ++a) A.add_symbol("I(" + L.names[static_cast<size_t>(a)] + ")", -1);
  auto lift = [&](const SparseVec& g_vec, int offset) {
    SparseVec v;
    for (const auto& [b, c] : g_vec.terms()) v.add_term(b + offset, c);
    return v;
  };
  for (int a = 0; a < L.dim; ++a) {
    for (int b = 0; b < L.dim; ++b) {
      const SparseVec& br = L.bracket(a, b);
      A.set_bracket(cone_L(L, a), cone_L(L, b), lift(br, 0));
      A.set_bracket(cone_L(L, a), cone_I(L, b), lift(br, L.dim));
      A.set_bracket(cone_I(L, a), cone_L(L, b), lift(br, L.dim));  // = -[L(y),I(x)] with x<->y
      // [I,I] = 0 left unset
    }
    A.set_d(cone_I(L, a), SparseVec::unit(cone_L(L, a)));
  }
  return A;
}

TableDgla build_cone_p(const LieData& L, const InvariantPolynomial& p) {
  if (p.n != 2) throw std::invalid_argument("build_cone_p: p must be bilinear");
  p.validate(L);  // rejects non-invariant forms with a witness
  TableDgla A = build_cone(L);
  A.label = "cone_p(" + L.label + ")";
  SymId c = A.add_symbol("c", -2);
  for (int a = 0; a < L.dim; ++a)
    for (int b = 0; b < L.dim; ++b) {
      Rational pv = p.eval_indices({a, b});
      if (!pv.is_zero())
        A.set_bracket(cone_I(L, a), cone_I(L, b), SparseVec::unit(c, Rational(-2) * pv));
    }
  // c is central with dc = 0: all its brackets and differential stay unset.
  return A;
}

}  // namespace dgla
