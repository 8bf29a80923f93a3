#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dgla/dgla_iface.hpp"
#include "dgla/weil.hpp"

namespace dgla {

// Truncated universal enveloping algebra U(A^{<=0}) presented on PBW words:
// nondecreasing sequences of basis symbols of A of nonpositive degree (odd
// symbols squarefree), ordered by (degree, symbol id). Products straighten
// out-of-order pairs through the graded commutation rule
//   g h = (-1)^{|g||h|} h g + [g,h],     g g = 1/2 [g,g]  (g odd),
// so every identity proved here reduces to bracket-table lookups in A.
// Words of degree below the floor refuse, as do words with more degree-zero
// letters than the cap (their span is not truncated by degree).
class Envelope {
 public:
  Envelope(const Dgla& A, int degree_floor, int zero_cap);

  const Dgla& algebra() const { return a_; }
  int degree_floor() const { return floor_; }
  const SymbolTable& symbols() const { return tab_; }

  SymId unit() const { return unit_; }
  SymId word_sym(const std::vector<SymId>& gens) const;  // must already be in PBW order
  const std::vector<SymId>& word(SymId u) const;

  bool gen_less(SymId g, SymId h) const;  // PBW generator order

  SparseVec mul(SymId u, SymId v) const;
  SparseVec mul(const SparseVec& x, const SparseVec& y) const;
  // d as a super-derivation over the generators (images of d stay in A^{<=0}
  // for every algebra used here).
  SparseVec d_word(SymId u) const;
  SparseVec d(const SparseVec& x) const;
  // graded commutator ad_g(u) = g u - (-1)^{|g||u|} u g
  SparseVec ad_gen(SymId g, SymId u) const;

  // Coproduct into pair-interned U (x) U symbols; PBW subsequences stay
  // ordered, so no straightening occurs here.
  SymId pair_sym(SymId u, SymId v) const;
  std::pair<SymId, SymId> pair_split(SymId s) const;
  const SymbolTable& pair_symbols() const { return pair_tab_; }
  SparseVec coproduct(SymId u) const;

  int degree_of(SymId u) const { return tab_.degree(u); }

 private:
  SparseVec normalize(std::vector<SymId> gens) const;
  static std::string key_of(const std::vector<SymId>& gens);

  const Dgla& a_;
  int floor_;
  int zero_cap_;
  mutable SymbolTable tab_;
  mutable std::vector<std::vector<SymId>> words_;
  mutable std::unordered_map<std::string, SymId> by_key_;
  mutable std::unordered_map<std::string, SparseVec> norm_memo_;
  mutable SymbolTable pair_tab_;
  mutable std::vector<std::pair<SymId, SymId>> pair_parts_;
  mutable std::unordered_map<uint64_t, SymId> by_pair_;
  SymId unit_ = 0;
};

// Wg (x) U(A) with the usual Koszul conventions; the home of the group-like
// elements. Pair symbols are interned on demand.
class WgEnvelope {
 public:
  WgEnvelope(const WeilAlgebra& W, const Envelope& U);

  const WeilAlgebra& weil() const { return w_; }
  const Envelope& env() const { return u_; }
  const SymbolTable& symbols() const { return tab_; }

  SymId pair_sym(SymId w, SymId u) const;
  std::pair<SymId, SymId> split(SymId s) const;
  SparseVec embed(const SparseVec& w, const SparseVec& u) const;
  SparseVec one() const;

  // (w1 (x) u1)(w2 (x) u2) = (-1)^{|u1||w2|} w1 w2 (x) u1 u2
  SparseVec mul(const SparseVec& x, const SparseVec& y) const;
  // d(w (x) u) = dw (x) u + (-1)^{|w|} w (x) du
  SparseVec d(const SparseVec& x) const;
  // I_W(e_a) and L_W(e_a) acting on the Weil side only
  SparseVec contract_w(int a, const SparseVec& x) const;
  SparseVec lie_der_w(int a, const SparseVec& x) const;
  // 1 (x) ad_g on the envelope side
  SparseVec ad_env(SymId g, const SparseVec& x) const;

  int w_degree(SymId pairsym) const { return w_.symbols().degree(split(pairsym).first); }
  // component of x whose Weil-side degree is exactly k
  SparseVec w_component(const SparseVec& x, int k) const;

 private:
  const WeilAlgebra& w_;
  const Envelope& u_;
  mutable SymbolTable tab_;
  mutable std::vector<std::pair<SymId, SymId>> parts_;
  mutable std::unordered_map<uint64_t, SymId> by_pair_;
};

// Inverse of 1 + (layers >= 1) computed layerwise in the Weil-side degree.
std::vector<SparseVec> layered_inverse(const WgEnvelope& E,
                                       const std::vector<SparseVec>& layers);

}  // namespace dgla
