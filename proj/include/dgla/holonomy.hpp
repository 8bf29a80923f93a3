#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dgla/cone.hpp"
#include "dgla/dg.hpp"
#include "dgla/envelope.hpp"
#include "dgla/report.hpp"
#include "dgla/tensor_dgla.hpp"
#include "dgla/weil.hpp"

namespace dgla {

// phi = exp(-I(theta)) in Wg (x) U(Cg). The element x = I(theta) has total
// degree zero, so the exponential is cut off by the vanishing of theta
// powers, not by x^2 = 0. verify() checks
//   phi^{-1} d phi = -I(t) + L(theta),
// group-likeness, the counit normalization, and g-invariance.
struct ConeHolonomy {
  LieData L;
  WeilAlgebra W;
  TableDgla cone;
  std::unique_ptr<Envelope> U;
  std::unique_ptr<WgEnvelope> E;
  SparseVec phi, phi_inv;

  ConeHolonomy(const LieData& lie, int poly_cutoff);
  void verify(Reporter& rep) const;
};

// Parallel transport Phi of the connection
//   b(s) ds = -< di( s t + (s^2-s)/2 [theta,theta] ), theta > ds
// from s = 0 to 1, computed layer by layer in the Weil-side degree with
// exact polynomial coefficients in s. Layers 0..N are produced; verify()
// checks Phi^{-1} d Phi = -i(t) + l(theta) per layer (a failing layer is
// named), group-likeness, the counit, and g-invariance.
struct BigHolonomy {
  const DgAlgebra& A;
  int layers;
  bool transpose;  // false: U' = U b (recorded in the reports)
  WeilAlgebra W;
  std::unique_ptr<Envelope> U;
  std::unique_ptr<WgEnvelope> E;
  std::vector<SparseVec> phi_layers, phi_inv_layers;

  BigHolonomy(const DgAlgebra& a, int n_layers, bool transpose_orientation = false);

  SparseVec phi_full() const;
  SparseVec phi_inv_full() const;
  // -i(t) + l(theta) restricted to Weil degree <= layers
  SparseVec rhs_element() const;
  // Y(x_a) = -(I_W(e_a) Phi) Phi^{-1}
  SparseVec y_element(int a) const;

  void verify(Reporter& rep) const;
};

// U(pi) applied to a group-like element of Wg (x) U(Dg): every generator of
// every word is replaced by its cone image and the results are multiplied in
// Wg (x) U(Cg). Returns the image expressed over the cone pair table.
SparseVec project_group_element(const BigHolonomy& big, const DglaMorphism& pi,
                                const ConeHolonomy& cone);

// Group-likeness defect of a layered element: (id (x) Delta)(Phi) minus
// Phi (x) Phi, collected over (Weil symbol, U (x) U symbol) pairs. Zero means
// group-like. Exposed for tests; verify() uses it internally.
bool group_like_defect(const WgEnvelope& E, const std::vector<SparseVec>& layers,
                       std::string& witness);

}  // namespace dgla
