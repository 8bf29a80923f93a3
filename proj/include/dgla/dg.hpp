#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgla/dgla_iface.hpp"
#include "dgla/freelie.hpp"
#include "dgla/lie.hpp"
#include "dgla/report.hpp"

namespace dgla {

// The acyclic DGLA generated by a Lie algebra g: degree-0 symbols l(e_a)
// acting on a free graded Lie algebra with one odd generator i(m) of degree
// 1-2k per monomial m in S^k g. The differential sends i(x) to l(x) and
// splits deeper generators into brackets of smaller ones, weighted by
// multinomial ratios.
//
// Brackets and differentials are served from tables keyed by basis symbols.
// The tables are assembled from the spanning-candidate data of the free Lie
// build together with the derivation rules; verify() recomputes every served
// entry against tensor-algebra ground truth and sweeps all axioms.
class DgAlgebra : public Dgla {
 public:
  // Strata of degree -1..-cutoff are constructed. letter_layers extends the
  // set of generator symbols i(m) beyond the window (their differentials are
  // still served when the image degree is inside the window); 0 means
  // exactly the layers whose generators fit in the window.
  DgAlgebra(const LieData& L, int cutoff, int letter_layers = 0);

  const LieData& lie() const { return L_; }
  const FreeLieAlgebra& free_lie() const { return *fl_; }
  int cutoff() const { return cutoff_; }
  const std::string& label() const { return label_; }

  const SymbolTable& symbols() const override { return tab_; }
  std::vector<SymId> basis(int degree) const override;
  int min_degree() const override { return -cutoff_; }
  int max_degree() const override { return 0; }
  SparseVec bracket_sym(SymId a, SymId b) const override;
  SparseVec d_sym(SymId a) const override;

  SymId l_sym(int a) const { return l_syms_[static_cast<size_t>(a)]; }
  int l_index_of(SymId s) const;

  int letter_count() const { return static_cast<int>(letters_.size()); }
  SymId letter_sym(int li) const { return letters_[static_cast<size_t>(li)].sym; }
  int letter_index_of(SymId s) const;  // -1 when s is not a generator symbol
  int letter_index(const Multiset& m) const;
  const Multiset& letter_multiset(int li) const { return letters_[static_cast<size_t>(li)].m; }
  int letter_size(int li) const { return static_cast<int>(letters_[static_cast<size_t>(li)].m.size()); }
  Rational letter_multinomial(int li) const { return letters_[static_cast<size_t>(li)].multinom; }
  // index of this letter in the free Lie alphabet; -1 beyond the window
  int letter_fl_index(int li) const { return letters_[static_cast<size_t>(li)].fl_index; }

  int dim(int degree) const { return static_cast<int>(basis(degree).size()); }

  // Tensor-word coordinates of an in-window element of homogeneous negative
  // degree, and the inverse decomposition.
  SparseVec tensor_of(int degree, const SparseVec& element) const;
  std::optional<SparseVec> from_tensor(int degree, const SparseVec& words) const;

  // Axiom sweeps over the served tables plus per-entry certification of all
  // brackets, l-actions and differentials against the tensor realization.
  void verify(Reporter& rep) const;

 private:
  struct Letter {
    Multiset m;
    int degree;
    Rational multinom;
    SymId sym;
    int fl_index;  // index in the free Lie letter list, -1 beyond the window
  };
  struct SymInfo {
    int kind;  // 0 = l, 1 = window basis row, 2 = generator beyond the window
    int x;     // l index / depth / letter index
    int y;     // row index within stratum for kind 1
  };

  const SparseVec& bracket_ref(SymId a, SymId b) const;
  const SparseVec& d_ref(SymId a) const;
  SparseVec compute_bracket(SymId a, SymId b) const;
  SparseVec compute_d(SymId a) const;
  SparseVec bracket_vec_ref(const SparseVec& x, SymId b) const;        // sum over x terms
  SparseVec bracket_sym_vec(SymId a, const SparseVec& y) const;
  SparseVec stratum_from_coords(int degree, const SparseVec& coords) const;
  SparseVec l_action_tensor(int a, int degree, const SparseVec& words) const;
  // Word-level differential: splitting insertions; l-remainder terms are
  // pushed to the right end and returned separately as (word, x) pairs.
  void tensor_d(int degree, const SparseVec& words, SparseVec& word_part,
                std::vector<std::pair<int64_t, Rational>>& l_remainder) const;

  LieData L_;
  int cutoff_;
  int layers_;
  std::string label_;
  std::unique_ptr<FreeLieAlgebra> fl_;
  SymbolTable tab_;
  std::vector<SymId> l_syms_;
  std::vector<Letter> letters_;
  std::unordered_map<uint64_t, int> letter_by_key_;
  std::vector<std::vector<SymId>> stratum_syms_;  // by depth 1..cutoff
  std::vector<SymInfo> info_;
  mutable std::unordered_map<uint64_t, SparseVec> br_memo_;
  mutable std::unordered_map<SymId, SparseVec> d_memo_;
};

struct AcyclicityReport {
  int k_lo = 0;
  int k_hi = 0;
  std::vector<int> h_dims;
  bool all_zero = true;
};

// Cohomology dimensions of the window strata. Requested degrees must keep
// both neighbouring differentials inside the window: k_lo-1 >= -cutoff and
// k_hi <= 0, otherwise a CutoffRefusal is thrown.
AcyclicityReport acyclicity_report(const DgAlgebra& A, int k_lo, int k_hi);

// Morphism between two table-served DGLAs, stored as images of source
// symbols.
struct DglaMorphism {
  const Dgla* src = nullptr;
  const Dgla* dst = nullptr;
  std::unordered_map<SymId, SparseVec> images;

  SparseVec apply(const SparseVec& v) const;
  SparseVec apply_sym(SymId s) const;
};

// The quotient map onto the cone of g: l(x) -> L(x), i(x) -> I(x), and all
// deeper generators to zero.
DglaMorphism projection_pi(const DgAlgebra& A, const Dgla& cone);

// Chain-map and bracket-compatibility sweep over all symbols plus seeded
// random elements; also records surjectivity in degrees 0 and -1.
void verify_projection(const DglaMorphism& pi, Reporter& rep, int random_elements,
                       uint64_t seed);

// Central extension by a one-dimensional center c of degree 2-2n against an
// ad-invariant symmetric n-form q: brackets are unchanged, the differential
// gains q(m) c on the generator layer i(m), m in S^n g. Construction
// validates the invariance of q (Leibniz for the extended differential is
// equivalent to it).
class CentralExtensionDgla : public Dgla {
 public:
  CentralExtensionDgla(const DgAlgebra& base, InvariantPolynomial q);

  const DgAlgebra& base() const { return base_; }
  SymId c_sym() const { return c_; }
  const InvariantPolynomial& q() const { return q_; }

  const SymbolTable& symbols() const override { return tab_; }
  std::vector<SymId> basis(int degree) const override;
  int min_degree() const override;
  int max_degree() const override { return 0; }
  SparseVec bracket_sym(SymId a, SymId b) const override;
  SparseVec d_sym(SymId a) const override;

 private:
  const DgAlgebra& base_;
  InvariantPolynomial q_;
  SymbolTable tab_;
  SymId c_;
};

// The extension of the acyclic DGLA of g by q = -p; its currents reproduce
// the level term of the affinization (the circle pairing of cos and sin
// makes the bilinear route come out at -p).
struct DpAlgebra {
  std::unique_ptr<DgAlgebra> base;
  std::unique_ptr<CentralExtensionDgla> ext;
};

DpAlgebra build_d_p(const LieData& L, const InvariantPolynomial& p, int cutoff,
                    int letter_layers = 0);

}  // namespace dgla
