#include "dgla/holonomy.hpp"

#include <map>
#include <stdexcept>

namespace dgla {

namespace {

// Exact polynomial in the path parameter s.
struct SPoly {
  std::vector<Rational> c;  // c[k] s^k

  static SPoly constant(Rational r) {
    SPoly p;
    if (!(r == Rational(0))) p.c = {std::move(r)};
    return p;
  }
  bool is_zero() const { return c.empty(); }
  void trim() {
    while (!c.empty() && c.back() == Rational(0)) c.pop_back();
  }
  SPoly operator+(const SPoly& o) const {
    SPoly r;
    r.c.resize(std::max(c.size(), o.c.size()), Rational(0));
    for (size_t i = 0; i < c.size(); ++i) r.c[i] += c[i];
    for (size_t i = 0; i < o.c.size(); ++i) r.c[i] += o.c[i];
    r.trim();
    return r;
  }
  SPoly operator*(const SPoly& o) const {
    SPoly r;
    if (c.empty() || o.c.empty()) return r;
    r.c.assign(c.size() + o.c.size() - 1, Rational(0));
    for (size_t i = 0; i < c.size(); ++i)
      for (size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
    r.trim();
    return r;
  }
  SPoly scaled(const Rational& r) const {
    SPoly p = *this;
    for (auto& x : p.c) x = x * r;
    p.trim();
    return p;
  }
  SPoly integral() const {  // from 0 to s
    SPoly r;
    r.c.assign(c.size() + 1, Rational(0));
    for (size_t i = 0; i < c.size(); ++i) r.c[i + 1] = c[i] / Rational(static_cast<int>(i) + 1);
    r.trim();
    return r;
  }
  Rational at_one() const {
    Rational v(0);
    for (const auto& x : c) v += x;
    return v;
  }
};

using PolyElem = std::map<SymId, SPoly>;  // over Weil symbols or pair symbols

void pe_add(PolyElem& acc, SymId s, const SPoly& p) {
  if (p.is_zero()) return;
  auto [it, fresh] = acc.emplace(s, p);
  if (!fresh) {
    it->second = it->second + p;
    if (it->second.is_zero()) acc.erase(it);
  }
}

PolyElem weil_pe_mul(const WeilAlgebra& W, const PolyElem& a, const PolyElem& b) {
  PolyElem out;
  for (const auto& [sa, pa] : a)
    for (const auto& [sb, pb] : b) {
      SparseVec prod = W.mul(sa, sb);
      SPoly pp = pa * pb;
      for (const auto& [s, c] : prod.terms()) pe_add(out, s, pp.scaled(c));
    }
  return out;
}

PolyElem env_pe_mul(const WgEnvelope& E, const PolyElem& a, const PolyElem& b, bool flip) {
  PolyElem out;
  for (const auto& [sa, pa] : a)
    for (const auto& [sb, pb] : b) {
      SparseVec prod = flip ? E.mul(SparseVec::unit(sb), SparseVec::unit(sa))
                            : E.mul(SparseVec::unit(sa), SparseVec::unit(sb));
      SPoly pp = pa * pb;
      for (const auto& [s, c] : prod.terms()) pe_add(out, s, pp.scaled(c));
    }
  return out;
}

}  // namespace

ConeHolonomy::ConeHolonomy(const LieData& lie, int poly_cutoff)
    : L(lie), W(lie, poly_cutoff), cone(build_cone(lie)) {
  // products of two theta-exponentials reach nominal degree -2 dim before
  // straightening collapses the repeated odd letters
  U = std::make_unique<Envelope>(cone, -2 * L.dim - 2, 2);
  E = std::make_unique<WgEnvelope>(W, *U);
  SparseVec x;
  for (int a = 0; a < L.dim; ++a)
    x += E->embed(SparseVec::unit(W.theta(a)),
                  SparseVec::unit(U->word_sym({cone_I(L, a)})));
  auto exponential = [&](const SparseVec& arg) {
    SparseVec acc = E->one();
    SparseVec term = E->one();
    for (int k = 1; !term.is_zero(); ++k) {
      term = E->mul(term, arg);
      term.scale(Rational(1, k));
      acc += term;
    }
    return acc;
  };
  phi = exponential(-x);
  phi_inv = exponential(x);
}

bool group_like_defect(const WgEnvelope& E, const std::vector<SparseVec>& layers,
                       std::string& witness) {
  const Envelope& U = E.env();
  const WeilAlgebra& W = E.weil();
  int n = static_cast<int>(layers.size()) - 1;
  for (int lam = 0; lam <= n; ++lam) {
    std::map<std::pair<SymId, SymId>, Rational> acc;
    for (const auto& [s, c] : layers[static_cast<size_t>(lam)].terms()) {
      auto [w, u] = E.split(s);
      SparseVec cop = U.coproduct(u);
      for (const auto& [pu, cc] : cop.terms()) {
        auto& slot = acc[{w, pu}];
        slot += c * cc;
      }
    }
    for (int mu = 0; mu <= lam; ++mu) {
      int nu = lam - mu;
      for (const auto& [s1, c1] : layers[static_cast<size_t>(mu)].terms()) {
        auto [w1, u1] = E.split(s1);
        bool u1odd = U.symbols().degree(u1) & 1;
        for (const auto& [s2, c2] : layers[static_cast<size_t>(nu)].terms()) {
          auto [w2, u2] = E.split(s2);
          Rational coef = c1 * c2;
          if (u1odd && (W.symbols().degree(w2) & 1)) coef = -coef;
          SparseVec ww = W.mul(w1, w2);
          SymId pu = U.pair_sym(u1, u2);
          for (const auto& [ws, wc] : ww.terms()) {
            auto& slot = acc[{ws, pu}];
            slot -= coef * wc;
          }
        }
      }
    }
    for (const auto& [key, val] : acc)
      if (!(val == Rational(0))) {
        witness = "layer " + std::to_string(lam) + ", component (" +
                  W.symbols().name(key.first) + ")⊗(" + U.pair_symbols().name(key.second) + ")";
        return false;
      }
  }
  witness.clear();
  return true;
}

void ConeHolonomy::verify(Reporter& rep) const {
  SparseVec lhs = E->mul(phi_inv, E->d(phi));
  SparseVec rhs;
  for (int a = 0; a < L.dim; ++a) {
    rhs -= E->embed(SparseVec::unit(W.t(a)), SparseVec::unit(U->word_sym({cone_I(L, a)})));
    rhs += E->embed(SparseVec::unit(W.theta(a)), SparseVec::unit(U->word_sym({cone_L(L, a)})));
  }
  SparseVec diff = lhs - rhs;
  rep.check(diff.is_zero(), "phi/dphi", "phi^{-1} d phi = -I(t) + L(theta)",
            diff.is_zero() ? "" : to_string(diff, E->symbols()));

  SparseVec li = E->mul(phi_inv, phi) - E->one();
  SparseVec ri = E->mul(phi, phi_inv) - E->one();
  rep.check(li.is_zero() && ri.is_zero(), "phi/inverse", "phi phi^{-1} = phi^{-1} phi = 1",
            "nonzero defect");

  std::vector<SparseVec> layers(static_cast<size_t>(L.dim) + 1);
  for (int k = 0; k <= L.dim; ++k) layers[static_cast<size_t>(k)] = E->w_component(phi, k);
  std::string witness;
  bool gl = group_like_defect(*E, layers, witness);
  rep.check(gl, "phi/group_like", "Delta phi = phi (x) phi", witness);

  bool counit = true;
  for (const auto& [s, c] : phi.terms()) {
    auto [w, u] = E->split(s);
    if (u == U->unit() && !(w == W.unit() && c == Rational(1))) counit = false;
  }
  rep.check(counit, "phi/counit", "counit(phi) = 1", "unit-word part differs from 1");

  SparseVec inv_defect;
  for (int a = 0; a < L.dim && inv_defect.is_zero(); ++a)
    inv_defect = E->lie_der_w(a, phi) + E->ad_env(cone_L(L, a), phi);
  rep.check(inv_defect.is_zero(), "phi/invariance", "L_tot(x) phi = 0",
            inv_defect.is_zero() ? "" : to_string(inv_defect, E->symbols()));
}

BigHolonomy::BigHolonomy(const DgAlgebra& a, int n_layers, bool transpose_orientation)
    : A(a), layers(n_layers), transpose(transpose_orientation), W(a.lie(), n_layers + 1) {
  if (layers < 2) throw std::invalid_argument("holonomy needs at least two layers");
  if (layers > a.cutoff())
    throw CutoffRefusal("holonomy layer count exceeds the algebra window");
  U = std::make_unique<Envelope>(A, -layers, 2);
  E = std::make_unique<WgEnvelope>(W, *U);
  const LieData& L = A.lie();

  // T^a(s) = s t^a + (s^2-s)/2 (f theta theta)^a, an even g-valued element
  std::vector<PolyElem> T(static_cast<size_t>(L.dim));
  SPoly s_lin;
  s_lin.c = {Rational(0), Rational(1)};
  SPoly s_quad;  // (s^2 - s)/2
  s_quad.c = {Rational(0), Rational(-1, 2), Rational(1, 2)};
  for (int x = 0; x < L.dim; ++x) {
    pe_add(T[static_cast<size_t>(x)], W.t(x), s_lin);
    for (int b = 0; b < L.dim; ++b)
      for (int c = 0; c < L.dim; ++c) {
        Rational f = L.structure_const(x, b, c);
        if (f == Rational(0)) continue;
        SparseVec thth = W.mul(W.theta(b), W.theta(c));
        for (const auto& [s, wc] : thth.terms())
          pe_add(T[static_cast<size_t>(x)], s, s_quad.scaled(f * wc));
      }
  }

  // b(s) = -sum_m multinom(m) sum_{x in m} mult_x(m) T^{m minus x} theta^x (x) i(m)
  std::vector<PolyElem> b(static_cast<size_t>(layers) + 1);
  for (int li = 0; li < A.letter_count(); ++li) {
    const Multiset& m = A.letter_multiset(li);
    int k = static_cast<int>(m.size());
    int layer = 2 * k - 1;
    if (layer > layers) continue;
    SymId word = U->word_sym({A.letter_sym(li)});
    for (size_t j = 0; j < m.size(); ++j) {
      if (j > 0 && m[j] == m[j - 1]) continue;  // one slot per distinct letter
      int x = m[j];
      int mult = 0;
      for (uint8_t y : m) mult += (y == x);
      PolyElem prod;
      pe_add(prod, W.unit(), SPoly::constant(Rational(1)));
      for (size_t i = 0; i < m.size(); ++i) {
        if (static_cast<int>(i) == static_cast<int>(j)) continue;
        prod = weil_pe_mul(W, prod, T[static_cast<size_t>(m[i])]);
      }
      PolyElem th;
      pe_add(th, W.theta(x), SPoly::constant(Rational(1)));
      prod = weil_pe_mul(W, prod, th);
      Rational coef = -A.letter_multinomial(li) * Rational(mult);
      for (const auto& [ws, pp] : prod)
        pe_add(b[static_cast<size_t>(layer)], E->pair_sym(ws, word), pp.scaled(coef));
    }
  }

  // layerwise parallel transport U' = U b (or b U), Phi = U(1)
  std::vector<PolyElem> Us(static_cast<size_t>(layers) + 1);
  pe_add(Us[0], E->pair_sym(W.unit(), U->unit()), SPoly::constant(Rational(1)));
  phi_layers.assign(static_cast<size_t>(layers) + 1, SparseVec{});
  for (const auto& [s, p] : Us[0]) phi_layers[0].add_term(s, p.at_one());
  for (int lam = 1; lam <= layers; ++lam) {
    PolyElem deriv;
    for (int nu = 1; nu <= lam; ++nu) {
      if (b[static_cast<size_t>(nu)].empty()) continue;
      PolyElem prod = env_pe_mul(*E, Us[static_cast<size_t>(lam - nu)],
                                 b[static_cast<size_t>(nu)], transpose);
      for (const auto& [s, p] : prod) pe_add(deriv, s, p);
    }
    for (const auto& [s, p] : deriv) pe_add(Us[static_cast<size_t>(lam)], s, p.integral());
    for (const auto& [s, p] : Us[static_cast<size_t>(lam)]) {
      Rational v = p.at_one();
      if (!(v == Rational(0))) phi_layers[static_cast<size_t>(lam)].add_term(s, v);
    }
  }
  phi_inv_layers = layered_inverse(*E, phi_layers);
}

SparseVec BigHolonomy::phi_full() const {
  SparseVec out;
  for (const auto& l : phi_layers) out += l;
  return out;
}

SparseVec BigHolonomy::phi_inv_full() const {
  SparseVec out;
  for (const auto& l : phi_inv_layers) out += l;
  return out;
}

SparseVec BigHolonomy::rhs_element() const {
  SparseVec out;
  const LieData& L = A.lie();
  for (int li = 0; li < A.letter_count(); ++li) {
    const Multiset& m = A.letter_multiset(li);
    int k = static_cast<int>(m.size());
    if (2 * k > layers) continue;
    out -= E->embed(SparseVec::unit(W.t_monomial(m)),
                    SparseVec::unit(U->word_sym({A.letter_sym(li)}))) *
           A.letter_multinomial(li);
  }
  for (int a = 0; a < L.dim; ++a)
    out += E->embed(SparseVec::unit(W.theta(a)), SparseVec::unit(U->word_sym({A.l_sym(a)})));
  return out;
}

SparseVec BigHolonomy::y_element(int a) const {
  SparseVec iphi = E->contract_w(a, phi_full());
  SparseVec out;
  for (int lam = 0; lam <= layers - 1; ++lam) {
    SparseVec x = E->w_component(iphi, lam);
    if (x.is_zero()) continue;
    for (int mu = 0; mu + lam <= layers - 1; ++mu) {
      SparseVec y = E->w_component(phi_inv_full(), mu);
      if (y.is_zero()) continue;
      out += E->mul(x, y);
    }
  }
  return -out;
}

void BigHolonomy::verify(Reporter& rep) const {
  // d Phi bucketed by Weil-side degree
  std::vector<SparseVec> dphi(static_cast<size_t>(layers) + 2);
  for (int lam = 0; lam <= layers; ++lam) {
    SparseVec d = E->d(phi_layers[static_cast<size_t>(lam)]);
    for (const auto& [s, c] : d.terms()) {
      int wd = E->w_degree(s);
      if (wd <= layers + 1) dphi[static_cast<size_t>(wd)].add_term(s, c);
    }
  }
  SparseVec rhs = rhs_element();
  int bad_layer = -1;
  for (int lam = 0; lam <= layers && bad_layer < 0; ++lam) {
    SparseVec lhs;
    for (int mu = 0; mu <= lam; ++mu)
      lhs += E->mul(phi_inv_layers[static_cast<size_t>(mu)], dphi[static_cast<size_t>(lam - mu)]);
    if (lhs - E->w_component(rhs, lam) != SparseVec{}) bad_layer = lam;
  }
  rep.check(bad_layer < 0, "Phi/dPhi",
            std::string("Phi^{-1} d Phi = -i(t) + l(theta), orientation ") +
                (transpose ? "b·U" : "U·b"),
            bad_layer < 0 ? "" : "first failing layer " + std::to_string(bad_layer));

  std::string witness;
  bool gl = group_like_defect(*E, phi_layers, witness);
  rep.check(gl, "Phi/group_like", "Delta Phi = Phi (x) Phi layerwise", witness);

  bool inv_ok = true;
  std::string inv_witness;
  for (int a = 0; a < A.lie().dim && inv_ok; ++a)
    for (int lam = 0; lam <= layers && inv_ok; ++lam) {
      SparseVec defect = E->lie_der_w(a, phi_layers[static_cast<size_t>(lam)]) +
                         E->ad_env(A.l_sym(a), phi_layers[static_cast<size_t>(lam)]);
      if (!defect.is_zero()) {
        inv_ok = false;
        inv_witness = "generator " + std::to_string(a) + ", layer " + std::to_string(lam);
      }
    }
  rep.check(inv_ok, "Phi/invariance", "L_W(x) Phi + ad_{l(x)} Phi = 0", inv_witness);

  bool counit = phi_layers[0] == E->one();
  rep.check(counit, "Phi/counit", "layer 0 of Phi is 1", "layer 0 differs from 1");

  bool inv_prod_ok = true;
  for (int lam = 0; lam <= layers && inv_prod_ok; ++lam) {
    SparseVec lp, rp;
    for (int mu = 0; mu <= lam; ++mu) {
      lp += E->mul(phi_inv_layers[static_cast<size_t>(mu)], phi_layers[static_cast<size_t>(lam - mu)]);
      rp += E->mul(phi_layers[static_cast<size_t>(mu)], phi_inv_layers[static_cast<size_t>(lam - mu)]);
    }
    SparseVec want = lam == 0 ? E->one() : SparseVec{};
    if (lp != want || rp != want) inv_prod_ok = false;
  }
  rep.check(inv_prod_ok, "Phi/inverse", "Phi Phi^{-1} = Phi^{-1} Phi = 1 layerwise",
            "nonzero defect");
}

SparseVec project_group_element(const BigHolonomy& big, const DglaMorphism& pi,
                                const ConeHolonomy& cone) {
  SparseVec acc;
  SparseVec full = big.phi_full();
  for (const auto& [s, c] : full.terms()) {
    auto [w, u] = big.E->split(s);
    SymId wc = cone.W.id_of_packed(big.W.packed(w));
    SparseVec img = SparseVec::unit(cone.U->unit());
    for (SymId g : big.U->word(u)) {
      SparseVec pg = pi.apply_sym(g);
      SparseVec lifted;
      for (const auto& [cs, cc] : pg.terms())
        lifted.add_term(cone.U->word_sym({cs}), cc);
      img = cone.U->mul(img, lifted);
      if (img.is_zero()) break;
    }
    if (img.is_zero()) continue;
    acc += cone.E->embed(SparseVec::unit(wc), img) * c;
  }
  return acc - cone.phi;
}

}  // namespace dgla
