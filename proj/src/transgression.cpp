#include "dgla/transgression.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dgla/dg.hpp"
#include "dgla/envelope.hpp"
#include "dgla/holonomy.hpp"
#include "dgla/linalg.hpp"

namespace dgla {

TransgressionResult transgress_solve(const WeilAlgebra& W, const InvariantPolynomial& p) {
  TransgressionResult out;
  out.p_w = W.poly_in_t(p);
  out.orientation = 1;

  std::vector<SparseVec> gens = W.invariant_basis(2 * p.n - 1);
  out.invariant_dim = static_cast<int>(gens.size());

  std::vector<SparseVec> dgens;
  dgens.reserve(gens.size());
  for (const auto& g : gens) dgens.push_back(W.d(g));

  auto coords = solve_in_span(dgens, out.p_w);
  if (!coords) {
    throw std::runtime_error("transgress_solve: no invariant primitive at degree " +
                             std::to_string(2 * p.n - 1) + " (searched a " +
                             std::to_string(out.invariant_dim) + "-dimensional subspace)");
  }
  for (const auto& [i, c] : coords->terms()) {
    out.e.axpy(c, gens[static_cast<size_t>(i)]);
  }
  for (const auto& [s, c] : out.e.terms()) {
    if (W.poly_degree(s) == 0) out.eta.add_term(s, c);
  }
  return out;
}

SparseVec transgression_witness_quadratic(const WeilAlgebra& W, const InvariantPolynomial& p) {
  if (p.n != 2) {
    throw std::invalid_argument("transgression_witness_quadratic: quadratic forms only");
  }
  const LieData& L = W.lie();

  // p(theta, [theta, theta]) with the bracket expanded over the full double
  // sum of structure constants.
  SparseVec cubic;
  for (int d = 0; d < L.dim; ++d) {
    for (int c = 0; c < L.dim; ++c) {
      Rational pv = p.eval_indices({d, c});
      if (pv.is_zero()) continue;
      for (int a = 0; a < L.dim; ++a) {
        for (int b = 0; b < L.dim; ++b) {
          Rational f = L.structure_const(c, a, b);
          if (f.is_zero()) continue;
          cubic.axpy(pv * f, W.mul(SparseVec::unit(W.theta(d)), W.mul(W.theta(a), W.theta(b))));
        }
      }
    }
  }

  SparseVec e = W.poly_t_theta(p);
  e.axpy(Rational(-1, 6), cubic);
  return e;
}

namespace {

// Re-key a vector over one WgEnvelope's pair table into another whose Weil
// side is the same table and whose envelope side extends the original's
// algebra without renumbering its symbols.
SparseVec transfer_pairs(const WgEnvelope& from, const Envelope& from_u, const WgEnvelope& to,
                         const Envelope& to_u, const SparseVec& x) {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) {
    auto [w, u] = from.split(s);
    SymId u2 = to_u.word_sym(from_u.word(u));
    out.add_term(to.pair_sym(w, u2), c);
  }
  return out;
}

}  // namespace

ConjugationTransgression transgress_via_conjugation(const LieData& L,
                                                    const InvariantPolynomial& p,
                                                    const WeilAlgebra& W_out) {
  if (p.n != 2) {
    throw std::invalid_argument("transgress_via_conjugation: quadratic forms only");
  }
  const int layers = 4;

  DpAlgebra D = build_d_p(L, p, layers, 0);
  BigHolonomy B(*D.base, layers, false);

  // Envelope over the extension. Base symbol ids survive verbatim (c is
  // appended last), so PBW words transfer without reordering.
  Envelope Ue(*D.ext, -2 * layers, 2);
  WgEnvelope Ee(B.W, Ue);

  std::vector<SparseVec> phi(static_cast<size_t>(layers) + 1);
  std::vector<SparseVec> phi_inv(static_cast<size_t>(layers) + 1);
  for (int k = 0; k <= layers; ++k) {
    phi[static_cast<size_t>(k)] =
        transfer_pairs(*B.E, *B.U, Ee, Ue, B.phi_layers[static_cast<size_t>(k)]);
    phi_inv[static_cast<size_t>(k)] =
        transfer_pairs(*B.E, *B.U, Ee, Ue, B.phi_inv_layers[static_cast<size_t>(k)]);
  }

  // The extended differential of each layer, bucketed by Weil degree.
  std::vector<SparseVec> bucket(static_cast<size_t>(layers) + 1);
  for (int k = 0; k <= layers; ++k) {
    SparseVec dk = Ee.d(phi[static_cast<size_t>(k)]);
    for (int w = k; w <= layers && w <= k + 1; ++w) {
      bucket[static_cast<size_t>(w)] += Ee.w_component(dk, w);
    }
  }

  SparseVec psi;
  for (int lam = 0; lam <= layers; ++lam) {
    for (int mu = 0; mu <= lam; ++mu) {
      psi += Ee.mul(phi_inv[static_cast<size_t>(mu)], bucket[static_cast<size_t>(lam - mu)]);
    }
  }

  // Expected shape: -i(t) + l(theta), plus a pure central column E (x) c.
  SparseVec expected = transfer_pairs(*B.E, *B.U, Ee, Ue, B.rhs_element());
  SparseVec diff = psi - expected;

  ConjugationTransgression out;
  const SymId c_word = Ue.word_sym({D.ext->c_sym()});
  SparseVec big_e;  // over B.W
  SparseVec defect;
  for (const auto& [s, c] : diff.terms()) {
    auto [w, u] = Ee.split(s);
    if (u == c_word) {
      big_e.add_term(w, c);
    } else {
      defect.add_term(s, c);
    }
  }
  out.form_matches = defect.is_zero();
  if (!out.form_matches) {
    out.witness = "unexpected term " + Ee.symbols().name(defect.lead()) + " (and " +
                  std::to_string(defect.size() - 1) + " more)";
  }

  for (const auto& [w, c] : big_e.terms()) {
    out.e.add_term(W_out.id_of_packed(B.W.packed(w)), -c);
  }

  TransgressionResult solved = transgress_solve(W_out, p);
  out.invariant_dim = solved.invariant_dim;
  out.exact_gap = out.e - solved.e;
  if (out.exact_gap.is_zero()) {
    out.gap_is_exact = true;
  } else if (W_out.d(out.exact_gap).is_zero()) {
    std::vector<SparseVec> lower = W_out.invariant_basis(2 * p.n - 2);
    std::vector<SparseVec> dlower;
    dlower.reserve(lower.size());
    for (const auto& g : lower) dlower.push_back(W_out.d(g));
    out.gap_is_exact = solve_in_span(dlower, out.exact_gap).has_value();
  }
  return out;
}

}  // namespace dgla
