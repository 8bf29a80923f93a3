#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgla/basis.hpp"
#include "dgla/linalg.hpp"

namespace dgla {

// Finite-dimensional Lie algebra given by exact structure constants.
// Construction validates antisymmetry and the Jacobi identity and reports a
// witness triple on failure.
struct LieData {
  std::string label;
  int dim = 0;
  std::vector<std::string> names;
  // bracket [e_a, e_b] as a sparse coefficient vector over basis indices
  std::vector<std::vector<SparseVec>> f;

  static LieData builtin(const std::string& name);
  static LieData from_file(const std::string& path);

  void validate() const;

  SparseVec bracket(int a, int b) const { return f[static_cast<size_t>(a)][static_cast<size_t>(b)]; }
  SparseVec ad(int a, const SparseVec& v) const;
  SparseVec bracket_vec(const SparseVec& x, const SparseVec& y) const;
  Rational structure_const(int c, int a, int b) const;  // coefficient of e_c in [e_a,e_b]
  Rational killing(int a, int b) const;                 // trace form tr(ad_a ad_b)
};

// Sorted multiset of basis indices (a monomial in S(g)); indices are small.
using Multiset = std::vector<uint8_t>;

uint64_t multiset_key(const Multiset& m);
Rational multinomial(const Multiset& m);  // |m|! / prod (multiplicities!)
std::string multiset_name(const Multiset& m, const LieData& L);

// ad-action of e_a on a monomial: sum over slots of replacing one letter by
// its bracket with e_a. Returned as multiset -> coefficient pairs.
std::vector<std::pair<Multiset, Rational>> ad_on_multiset(const LieData& L, int a,
                                                          const Multiset& m);

// Symmetric n-linear invariant form, stored by value on sorted index tuples.
struct InvariantPolynomial {
  int n = 0;
  int dim = 0;
  std::unordered_map<uint64_t, Rational> vals;

  Rational eval(Multiset m) const;  // sorts, missing entries are 0
  Rational eval_indices(std::initializer_list<int> idxs) const;
  void set(Multiset m, Rational v);
  bool is_zero() const;
  InvariantPolynomial scaled(const Rational& r) const;

  // Checks full ad-invariance: sum over slots p(..,[z,x_i],..) = 0.
  void validate(const LieData& L) const;

  static InvariantPolynomial zero(const LieData& L, int n);
  static InvariantPolynomial killing_form(const LieData& L);
  static InvariantPolynomial sl3_cubic(const LieData& L);
};

// Non-throwing Jacobi test: true when the identity holds on all basis
// triples, otherwise false plus the violating triple.
std::pair<bool, std::string> check_jacobi(const LieData& L);

// All ad-invariant symmetric n-forms, as a deterministic basis of the
// solution space of the invariance equations over Sym^n(g^*).
std::vector<InvariantPolynomial> invariant_polynomials(const LieData& L, int n);

// Enumerates all multisets of size k over {0..dim-1} in lexicographic order.
std::vector<Multiset> multisets_of_size(int dim, int k);

}  // namespace dgla
