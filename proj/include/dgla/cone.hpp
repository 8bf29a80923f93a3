#pragma once

#include "dgla/dgla_iface.hpp"
#include "dgla/lie.hpp"

namespace dgla {

// Cone DGLA Cg on generators L(x) in degree 0 and I(x) in degree -1:
//   [L(x),L(y)] = L([x,y]),  [L(x),I(y)] = I([x,y]),  [I,I] = 0,
//   d I(x) = L(x),  d L(x) = 0.
// Symbol order: L(e_1)..L(e_n), I(e_1)..I(e_n).
TableDgla build_cone(const LieData& L);

// Central extension of the cone by a degree -2 class c determined by an
// invariant symmetric bilinear form:
//   [I(x),I(y)] = -2 p(x,y) c,  c central,  d c = 0.
// p must be ad-invariant; a non-invariant form is rejected (the Jacobi sweep
// on the table would fail, and the constructor checks invariance up front).
TableDgla build_cone_p(const LieData& L, const InvariantPolynomial& p);

// Symbol helpers for cone-shaped tables.
inline SymId cone_L(const LieData& L, int a) { return a; }
inline SymId cone_I(const LieData& L, int a) { return L.dim + a; }

}  // namespace dgla
