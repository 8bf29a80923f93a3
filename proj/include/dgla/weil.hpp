#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dgla/basis.hpp"
#include "dgla/lie.hpp"
#include "dgla/linalg.hpp"

namespace dgla {

// W(g) = Lambda(g*) tensor S(g*) on odd generators th_a (degree 1) and even
// generators t_a (degree 2), truncated in polynomial degree only:
//   d th^a = t^a - 1/2 f^a_{bc} th^b th^c
//   d t^a  = -f^a_{bc} th^b t^c
// Products or differentials that would exceed the polynomial cutoff throw
// CutoffRefusal; everything of total degree <= 2*cutoff is safe.
class WeilAlgebra {
 public:
  WeilAlgebra(LieData L, int poly_cutoff);

  const LieData& lie() const { return lie_; }
  int poly_cutoff() const { return cutoff_; }
  const SymbolTable& symbols() const { return syms_; }
  int dim_g() const { return lie_.dim; }
  int max_degree() const { return 2 * cutoff_ + lie_.dim; }
  std::vector<SymId> basis(int degree) const;

  SymId unit() const { return unit_; }
  SymId theta(int a) const;
  SymId t(int a) const;
  SymId t_monomial(const Multiset& m) const;

  SparseVec mul(SymId a, SymId b) const;
  SparseVec mul(const SparseVec& x, const SparseVec& y) const;
  SparseVec d_sym(SymId s) const;
  SparseVec d(const SparseVec& x) const;
  SparseVec contract_sym(int a, SymId s) const;  // I_W(e_a), odd derivation
  SparseVec contract(int a, const SparseVec& x) const;
  SparseVec contract_x(const SparseVec& x_coords, const SparseVec& w) const;
  SparseVec lie_der_sym(int a, SymId s) const;  // L_W(e_a), even derivation
  SparseVec lie_der(int a, const SparseVec& x) const;

  // Invariant polynomial p embedded as a polynomial in the curvature
  // generators: sum over monomials multinom(m) p(m) t^m.
  SparseVec poly_in_t(const InvariantPolynomial& p) const;

  // p with one slot fed by th and the rest by t: sum_m' ... used for
  // transgression witnesses; computed from p exactly.
  //   poly_t_theta(p): sum over (n-1)-multisets m, letters a:
  //     multinom(m) p(m,a) t^m th^a
  SparseVec poly_t_theta(const InvariantPolynomial& p) const;

  // g-invariant subspace of one degree (kernel of all L_W(e_a)).
  std::vector<SparseVec> invariant_basis(int degree) const;
  // basic = invariant and free of th generators (curvature polynomials).
  std::vector<SparseVec> basic_basis(int degree) const;

  uint64_t packed(SymId s) const { return packs_.at(static_cast<size_t>(s)); }
  SymId id_of_packed(uint64_t p) const;
  int theta_mask(SymId s) const { return static_cast<int>(packed(s) & 0xff); }
  int poly_degree(SymId s) const;

 private:
  LieData lie_;
  int cutoff_;
  SymbolTable syms_;
  std::vector<uint64_t> packs_;
  std::unordered_map<uint64_t, SymId> by_pack_;
  SymId unit_;
  mutable std::unordered_map<SymId, SparseVec> d_memo_;

  std::string mono_name(uint64_t pack) const;
};

// Chevalley-Eilenberg complex Lambda(g*): wedge of the odd generators with
// d th^a = -1/2 f^a_{bc} th^b th^c, plus the contraction/Lie-derivative
// module tables.
class CeAlgebra {
 public:
  explicit CeAlgebra(LieData L);

  const LieData& lie() const { return lie_; }
  const SymbolTable& symbols() const { return syms_; }
  int top_degree() const { return lie_.dim; }
  std::vector<SymId> basis(int degree) const;

  SymId unit() const { return 0; }
  SymId theta(int a) const;
  SymId of_mask(int mask) const { return static_cast<SymId>(mask); }
  int mask_of(SymId s) const { return static_cast<int>(s); }

  SparseVec mul(SymId a, SymId b) const;
  SparseVec mul(const SparseVec& x, const SparseVec& y) const;
  SparseVec d_sym(SymId s) const;
  SparseVec d(const SparseVec& x) const;
  SparseVec contract_sym(int a, SymId s) const;
  SparseVec lie_der_sym(int a, SymId s) const;

 private:
  LieData lie_;
  SymbolTable syms_;
};

// Wedge reordering sign for disjoint ascending masks (count of inversions).
int wedge_sign(uint32_t mask1, uint32_t mask2);

}  // namespace dgla
