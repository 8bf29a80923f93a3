#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dgla/dgla_iface.hpp"
#include "dgla/lie.hpp"
#include "dgla/weil.hpp"

namespace dgla {

class DgAlgebra;

// W(g) (x) A for a DGLA A, with the usual tensor conventions:
//   d(w (x) a) = dw (x) a + (-1)^{|w|} w (x) da
//   [w1 (x) a1, w2 (x) a2] = (-1)^{|a1||w2|} w1 w2 (x) [a1, a2]
// Pair symbols are interned on demand; brackets and differentials propagate
// CutoffRefusal from either factor. When the A-side bracket is zero the Weil
// product is skipped, so vanishing brackets never refuse.
class TensorDgla : public Dgla {
 public:
  TensorDgla(const WeilAlgebra& W, const Dgla& A, std::string label);

  const WeilAlgebra& weil() const { return w_; }
  const Dgla& factor() const { return a_; }

  SymId pair_sym(SymId w, SymId a) const;
  std::pair<SymId, SymId> split(SymId s) const;
  // bilinear embedding of w (x) a, no sign (both arguments are plain vectors)
  SparseVec embed(const SparseVec& w, const SparseVec& a) const;

  const SymbolTable& symbols() const override { return tab_; }
  std::vector<SymId> basis(int degree) const override;
  int min_degree() const override;
  int max_degree() const override;
  SparseVec bracket_sym(SymId a, SymId b) const override;
  SparseVec d_sym(SymId s) const override;

  std::string label;

 private:
  const WeilAlgebra& w_;
  const Dgla& a_;
  mutable SymbolTable tab_;
  mutable std::vector<std::pair<SymId, SymId>> parts_;
  mutable std::unordered_map<uint64_t, SymId> by_pair_;
};

// Maurer-Cartan residual d(a) - 1/2 [a,a], evaluated termwise. Pairs whose
// bracket (or differential terms whose image) would leave a truncation are
// counted as refused instead of aborting the whole check, so the reported
// residual is exactly the served part.
struct McReport {
  SparseVec residual;
  bool zero = false;
  int refused_terms = 0;
  std::string first_refusal;
};

McReport mc_check(const TensorDgla& T, const SparseVec& elem);

// I(t) - L(theta) in Wg (x) Cg, the degree-1 element whose Maurer-Cartan
// residual vanishes identically (cone is untruncated).
SparseVec cone_mc_element(const TensorDgla& T, const LieData& L);

// i(t) - l(theta) in Wg (x) Dg with i(t) = sum_m multinom(m) t^m (x) i(m)
// over every generator layer the two truncations can serve.
SparseVec dg_mc_element(const TensorDgla& T, const DgAlgebra& A);

}  // namespace dgla
