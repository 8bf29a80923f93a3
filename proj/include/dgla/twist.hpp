#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dgla/dg.hpp"
#include "dgla/dgla_iface.hpp"
#include "dgla/lie.hpp"
#include "dgla/modules.hpp"
#include "dgla/weil.hpp"

namespace dgla {

// A g-differential space whose underlying complex is a graded-commutative
// algebra: the space plus its product and unit.
struct GDiffAlgebra {
  GDiffSpace V;
  std::function<SparseVec(SymId, SymId)> mul;
  SparseVec one;
  std::string name;
};

GDiffAlgebra weil_algebra_space(std::shared_ptr<WeilAlgebra> W);
GDiffAlgebra ce_algebra_space(const LieData& L);

// Equivariant polynomial map g -> B stored by raw monomial coefficients:
// phi(t) = sum over multisets m of t^m phi_m. Coefficients live over B's
// symbol table. Missing multisets are zero.
using PolyChain = std::vector<std::pair<Multiset, SparseVec>>;

SparseVec poly_chain_part(const PolyChain& c, const Multiset& m);

// The cone extended by a degree-shifted Weil algebra viewed as an abelian
// ideal, with the differential twisted by an invariant element e0 of total
// degree one:
//
//   A = Cg (semidirect) Wg[shift],   d' I(x) = L(x) - I_W(x) e0,
//
// while d' agrees with the usual differential on L(x) and on Wg. Symbols are
// laid out as L(x_a), I(x_a) (cone order), then every Weil symbol w at degree
// deg_W(w) - shift.
class FmsDgla : public Dgla {
 public:
  FmsDgla(LieData L, std::shared_ptr<WeilAlgebra> W, int shift, SparseVec e0);

  const SymbolTable& symbols() const override { return tab_; }
  std::vector<SymId> basis(int degree) const override;
  int min_degree() const override { return -shift_; }
  int max_degree() const override;
  SparseVec bracket_sym(SymId a, SymId b) const override;
  SparseVec d_sym(SymId s) const override;

  const LieData& lie() const { return L_; }
  const WeilAlgebra& weil() const { return *W_; }
  int shift() const { return shift_; }
  const SparseVec& e0() const { return e0_; }

  SymId cone_l(int a) const { return static_cast<SymId>(a); }
  SymId cone_i(int a) const { return static_cast<SymId>(L_.dim + a); }
  bool is_weil(SymId s) const { return s >= 2 * L_.dim; }
  SymId of_weil(SymId w) const { return static_cast<SymId>(2 * L_.dim) + w; }
  SymId weil_part(SymId s) const { return s - static_cast<SymId>(2 * L_.dim); }
  SparseVec embed_weil(const SparseVec& x) const;
  SparseVec project_weil(const SparseVec& x) const;  // drop cone terms, unshift

 private:
  LieData L_;
  std::shared_ptr<WeilAlgebra> W_;
  int shift_;
  SparseVec e0_;
  SymbolTable tab_;
};

struct FmsChecks {
  bool chain_equation = false;   // d_g e = p (x) 1 - 1 (x) p_W in the basic model
  bool chain_invariant = false;  // every L_tot(a) kills the embedded chain
  bool z_matches = false;        // d_W e0 == -(polynomial part of p)
  bool z_central = false;        // z is basic, hence central for the twisted d
  bool d_squared = false;        // probe window sweep
  bool leibniz = false;          // mixed probe pairs
  bool jacobi = false;           // cone-cone-ideal probe triples
  long checked = 0;
  std::string witness;
};

// The twisted-cone algebra together with its defining transgression chain.
struct FmsAlgebra {
  int n = 0;
  std::shared_ptr<WeilAlgebra> W;
  std::shared_ptr<FmsDgla> A;
  PolyChain chain;  // e(t), top coefficient e0 at the empty multiset
  SparseVec e0;     // over W
  SparseVec z;      // d_W e0, central in A when checks pass
  FmsChecks checks;

  // I_W(x) I_W(y) e0 over W: the value the bracket relation adds to the cone.
  SparseVec cocycle_kernel(int x, int y) const;
  // I_W(x) e0 over W: how far d' I(x) is from L(x).
  SparseVec deformation_residual(int x) const;
};

// Build the twisted cone for an invariant form of degree n in {2, 3}. The
// chain e(t) solves d_g e = p (x) 1 - 1 (x) p_W: quadratic forms use the
// closed-form primitive, cubic forms a joint linear solve over the invariant
// subspace of g* (x) Wg^3. Throws on unsolvable chains or failed checks that
// indicate a construction bug; soft findings land in `checks`.
FmsAlgebra fms_dgla(const LieData& L, const InvariantPolynomial& p,
                    std::shared_ptr<WeilAlgebra> W);

// Finite quotient of the twisted cone for a cubic form: generated by L(x),
// Itil(x) = I(x) + E_x, mu(xi) = d_W theta(xi), theta(xi) = -xi_a theta^a,
// and the central unit c = -1_W. Every bracket and differential value is
// certified to stay inside the span of the generators.
struct BfmsAlgebra {
  std::shared_ptr<TableDgla> table;
  // generator ids inside `table`, indexed by Lie basis index
  std::vector<SymId> l_sym, itil_sym, mu_sym, theta_sym;
  SymId c_sym = -1;
  std::vector<int> dims;  // component dimensions at degrees 0,-1,-2,-3,-4

  // images of the generators inside the ambient twisted cone
  std::vector<SparseVec> l_img, itil_img, mu_img, theta_img;
  SparseVec c_img;

  bool axioms_ok = false;
  bool bracket_relation = false;  // [Itil(x), Itil(y)] == 2 mu(p(x,y,.))
  bool pairing_relation = false;  // [Itil(x), theta(xi)] == xi(x) c
  bool theta_mu_relation = false; // [Itil(x), mu(xi)] reproduced inside the span
  bool morphism_ok = false;       // letter equations of the centrally extended model
  bool equivariance_ok = false;   // [rho l(x), rho i(m)] == rho i(ad_x m)
  Rational central_scale;         // kappa with rho(central) = kappa * c
  long checked = 0;
  std::string witness;
};

// Requires p.n == 3 and an FmsAlgebra built from the same form. D supplies
// the centrally extended acyclic model whose letter differentials carry the
// central charge the morphism equations must reproduce.
BfmsAlgebra build_bfms(const FmsAlgebra& F, const InvariantPolynomial& p,
                       const DpAlgebra& D);

// Action of the acyclic model on B (x) Q[s], s of degree 2n-2, twisted by an
// equivariant cocycle phi: d s = -phi(0), letters of size 1 act by
// I_B + phi_1 d/ds, sizes 2..n-1 by phi_k d/ds, sizes >= n by zero. The
// central generator of the degree-n extension acts by a multiple of d/ds;
// that multiple is measured and reported.
struct TwistedAction {
  int n = 0;
  int s_cap = 0;
  DgModuleAction action;
  SparseVec c;        // over B: the basic cocycle d(phi) - p (x) 1 evaluates to
  PolyChain images;   // phi_m / multinomial(m): the morphism coefficients
  RelationReport cocycle_checks;   // c is basic and the validation residuals
  RelationReport module_checks;    // validate_dg_module through layer n-1
  bool central_consistent = false; // layer-n defect is one multiple of d/ds
  Rational central_scale;          // lambda with rho(central) = lambda d/ds
  long central_checked = 0;
  std::string central_witness;
};

// phi is given over B's symbol table by raw monomial coefficients. Validation
// of d(phi) = p (x) 1 + 1 (x) c runs in the basic Cartan model over W; the
// extracted c must be window-independent (basic and closed), otherwise the
// input cocycle is rejected.
TwistedAction twist_action(const GDiffAlgebra& B, std::shared_ptr<WeilAlgebra> W,
                           const PolyChain& phi, const InvariantPolynomial& p,
                           int s_cap = 2);

}  // namespace dgla
