#pragma once

#include <string>

#include "dgla/lie.hpp"
#include "dgla/weil.hpp"

namespace dgla {

// Invariant primitive of the symmetric form inside the Weil algebra:
//   d_W e = orientation * p_W,   p_W = sum_m multinom(m) p(m) t^m,
// with e in the g-invariant part at degree 2n-1. The solve is deterministic
// (lowest basis order wins), so the result is canonical for a given table.
struct TransgressionResult {
  SparseVec e;
  SparseVec eta;  // boundary restriction e(theta, 0): the t-free part of e
  SparseVec p_w;
  int orientation = 1;
  int invariant_dim = 0;  // dimension of the invariant subspace searched
};

TransgressionResult transgress_solve(const WeilAlgebra& W, const InvariantPolynomial& p);

// Closed-form primitive for quadratic forms: the standard combination of
// p(t, theta) and p(theta, [theta, theta]), oriented so that its d_W equals
// +p_W, matching transgress_solve.
SparseVec transgression_witness_quadratic(const WeilAlgebra& W, const InvariantPolynomial& p);

// Transgression read off from holonomy: transporting the group-like element
// into the central extension by q = -p and conjugating the extended
// differential yields -i(t) + l(theta) + E (x) c, and e := -E is a primitive
// with the same orientation as transgress_solve. Quadratic forms only.
// Results are expressed over the caller's Weil table W_out.
struct ConjugationTransgression {
  SparseVec e;               // over W_out
  SparseVec exact_gap;       // e minus the solver's primitive (d_W-closed)
  bool form_matches = false; // conjugated form had exactly the expected shape
  bool gap_is_exact = false; // gap is zero or a d_W of an invariant element
  std::string witness;       // first offending term when !form_matches
  int invariant_dim = 0;     // from the solver run on W_out
};

ConjugationTransgression transgress_via_conjugation(const LieData& L,
                                                    const InvariantPolynomial& p,
                                                    const WeilAlgebra& W_out);

}  // namespace dgla
