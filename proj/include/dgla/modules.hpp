#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dgla/dg.hpp"
#include "dgla/holonomy.hpp"
#include "dgla/lie.hpp"
#include "dgla/weil.hpp"

namespace dgla {

// Operator on a symbol-indexed graded space, served column by column.
// Columns that would leave a truncated table throw CutoffRefusal.
using ColumnOp = std::function<SparseVec(SymId)>;

SparseVec apply_columns(const ColumnOp& op, const SparseVec& x);

// A g-differential space: a complex with contraction and Lie-derivative
// operators indexed by the Lie algebra basis, served over an explicit symbol
// table. `state` keeps any backing tables alive; `basis_of` enumerates one
// degree of the table.
struct GDiffSpace {
  const LieData* lie = nullptr;
  const SymbolTable* syms = nullptr;
  std::function<std::vector<SymId>(int)> basis_of;
  ColumnOp d;
  std::vector<ColumnOp> I, L;
  int min_deg = 0, max_deg = 0;
  bool pair_backed = false;  // true for the tensor models below
  std::shared_ptr<void> state;
};

// Pair-table access for the tensor models (Cartan, Weil, Kalkman spaces);
// throws std::invalid_argument on spaces that are not pair-backed.
std::pair<SymId, SymId> tensor_parts(const GDiffSpace& U, SymId s);
SymId tensor_pair(const GDiffSpace& U, SymId w, SymId v);

GDiffSpace g_diff_point(const LieData& L);
GDiffSpace g_diff_ce(const LieData& L);
GDiffSpace g_diff_weil(std::shared_ptr<WeilAlgebra> W);

struct RelationReport {
  bool ok = true;
  std::string witness;  // first failing relation instance
  long checked = 0;
  long refused = 0;  // instances skipped at a truncation edge
};

// Full relation sweep of a module over the cone: d^2 = 0, [d,I(x)] = L(x),
// [d,L(x)] = 0, [L(x),I(y)] = I([x,y]), [L(x),L(y)] = L([x,y]),
// [I(x),I(y)] = 0, over every symbol in the degree window.
RelationReport check_g_differential_space(const GDiffSpace& V);
RelationReport check_g_differential_space(const GDiffSpace& V, int deg_lo, int deg_hi);

// Action of the acyclic DGLA on a finite complex: the degree-0 action of g
// plus one odd operator per generator layer letter up to layer_cutoff;
// deeper letters act as zero.
struct DgModuleAction {
  GDiffSpace V;
  int layer_cutoff = 1;
  std::vector<Multiset> letters;  // sizes 1..layer_cutoff, enumeration order
  std::vector<ColumnOp> i_of;     // aligned with letters
  std::vector<ColumnOp> l_of;     // per Lie basis index

  int letter_index(const Multiset& m) const;  // -1 beyond the cutoff
};

// A cone module pulled back along the projection: the first layer acts by
// the contraction, deeper letters by zero.
DgModuleAction pullback_module(const GDiffSpace& V);

// Homomorphism equations, layer by layer: the differential equation on every
// letter of size <= layers_to_check (letters beyond the stored cutoff taken
// as zero), ad-equivariance of every stored letter, and the Lie equations of
// the degree-0 action. A failing layer is named in the witness.
RelationReport validate_dg_module(const DgModuleAction& A, int layers_to_check);

// Wg (x) V with d = d_W + d_V - i_V(t) + l_V(theta), I = I_W, L = L_W + l_V,
// over an interned pair table. Construction validates the action (rejecting
// with the failing layer) and sweeps the cone-module relations over the
// window [sweep_lo, sweep_hi].
struct CartanModel {
  std::shared_ptr<WeilAlgebra> W;
  DgModuleAction A;
  GDiffSpace U;
  RelationReport relations;
};

CartanModel cartan_model(std::shared_ptr<WeilAlgebra> W, const DgModuleAction& A, int sweep_lo,
                         int sweep_hi, int validate_layers);

// Conjugation by the action image of the holonomy: the transformed space
// carries d_W + d_V with I = I_W + Y_V, L = L_W + l_V, where
// Y(x) = -(I_W(x) Phi) Phi^{-1}. `conjugation` records the columnwise
// comparison of the conjugated operators against those closed forms.
struct KalkmanModel {
  GDiffSpace Uprime;
  ColumnOp phi_op, phi_inv_op;
  std::vector<ColumnOp> Y;
  RelationReport conjugation;
};

KalkmanModel kalkman_transform(const CartanModel& U, const BigHolonomy& phi, int sweep_lo,
                               int sweep_hi);

// The two standard basic models served directly:
//   cartan_basic_model: theta-free pairs with d = d_V - i_V(t), I = 0,
//     L = L_W + l_V (its basic subcomplex is the invariant part).
//   weil_model_pullback: all pairs with d = d_W + d_V, I = I_W + I_V,
//     L = L_W + L_V, for a cone module V.
GDiffSpace cartan_basic_model(std::shared_ptr<WeilAlgebra> W, const DgModuleAction& A);
GDiffSpace weil_model_pullback(std::shared_ptr<WeilAlgebra> W, const GDiffSpace& V);

// Cohomology dimensions of the basic subcomplex (joint kernel of all I, L)
// in degrees [k_lo, k_hi].
std::vector<int> basic_cohomology_dims(const GDiffSpace& U, int k_lo, int k_hi);

// Basic cohomology served at two consecutive polynomial cutoffs; a
// disagreement throws CutoffRefusal naming the degree and both dimensions.
struct EquivariantReport {
  std::vector<int> dims;       // degrees k_lo..k_hi at `cutoff`
  std::vector<int> dims_next;  // the cutoff+1 run
  int k_lo = 0, k_hi = 0, cutoff = 0;
  bool stable = false;
};

EquivariantReport equivariant_cohomology(const std::function<GDiffSpace(int)>& model_at_cutoff,
                                         int k_lo, int k_hi, int cutoff);

}  // namespace dgla
