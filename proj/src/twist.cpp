#include "dgla/twist.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "dgla/transgression.hpp"

namespace dgla {

namespace {

// Ordered proper splittings (m1, m2) of a multiset, with the weight
// multinomial(m1) * multinomial(m2) / multinomial(m) used by the generator
// differential.
struct Split {
  Multiset m1, m2;
  Rational w;
};

std::vector<Split> ordered_splits(const Multiset& m) {
  std::vector<uint8_t> vals;
  std::vector<int> mult;
  for (uint8_t v : m) {
    if (!vals.empty() && vals.back() == v) {
      ++mult.back();
    } else {
      vals.push_back(v);
      mult.push_back(1);
    }
  }
  const size_t k = vals.size();
  const Rational mn_m = multinomial(m);
  std::vector<int> take(k, 0);
  std::vector<Split> out;
  while (true) {
    size_t i = 0;
    while (i < k) {
      if (take[i] < mult[i]) {
        ++take[i];
        break;
      }
      take[i] = 0;
      ++i;
    }
    if (i == k) break;
    bool full = true;
    for (size_t j = 0; j < k; ++j) {
      if (take[j] != mult[j]) {
        full = false;
        break;
      }
    }
    if (full) continue;
    Split s;
    for (size_t j = 0; j < k; ++j) {
      for (int c = 0; c < take[j]; ++c) s.m1.push_back(vals[j]);
      for (int c = take[j]; c < mult[j]; ++c) s.m2.push_back(vals[j]);
    }
    s.w = multinomial(s.m1) * multinomial(s.m2) / mn_m;
    out.push_back(std::move(s));
  }
  return out;
}

SparseVec mul_vec(const std::function<SparseVec(SymId, SymId)>& mul, const SparseVec& x,
                  const SparseVec& y) {
  SparseVec out;
  for (const auto& [sa, ca] : x.terms()) {
    for (const auto& [sb, cb] : y.terms()) {
      out.axpy(ca * cb, mul(sa, sb));
    }
  }
  return out;
}

}  // namespace

SparseVec poly_chain_part(const PolyChain& c, const Multiset& m) {
  Multiset key = m;
  std::sort(key.begin(), key.end());
  for (const auto& [mm, v] : c) {
    if (mm == key) return v;
  }
  return SparseVec{};
}

GDiffAlgebra weil_algebra_space(std::shared_ptr<WeilAlgebra> W) {
  GDiffAlgebra B;
  B.V = g_diff_weil(W);
  B.one = SparseVec::unit(W->unit());
  B.name = "Wg(" + W->lie().label + ", cutoff " + std::to_string(W->poly_cutoff()) + ")";
  B.mul = [W](SymId a, SymId b) { return W->mul(a, b); };
  return B;
}

GDiffAlgebra ce_algebra_space(const LieData& L) {
  GDiffAlgebra B;
  B.V = g_diff_ce(L);
  auto ce = std::make_shared<CeAlgebra>(L);
  B.one = SparseVec::unit(ce->unit());
  B.name = "CE(" + L.label + ")";
  B.mul = [ce](SymId a, SymId b) { return ce->mul(a, b); };
  return B;
}

// ---------------------------------------------------------------------------
// FmsDgla

FmsDgla::FmsDgla(LieData L, std::shared_ptr<WeilAlgebra> W, int shift, SparseVec e0)
    : L_(std::move(L)), W_(std::move(W)), shift_(shift), e0_(std::move(e0)) {
  if (shift_ <= 0 || (shift_ & 1) != 0) {
    throw std::invalid_argument("the ideal must be shifted by a positive even degree");
  }
  for (int a = 0; a < L_.dim; ++a) tab_.intern("L(" + L_.names[static_cast<size_t>(a)] + ")", 0);
  for (int a = 0; a < L_.dim; ++a) tab_.intern("I(" + L_.names[static_cast<size_t>(a)] + ")", -1);
  const SymbolTable& wt = W_->symbols();
  for (SymId w = 0; w < wt.size(); ++w) {
    tab_.intern("w[" + wt.name(w) + "]", wt.degree(w) - shift_);
  }
  for (const auto& [s, c] : e0_.terms()) {
    (void)c;
    if (wt.degree(s) - shift_ != 1) {
      throw std::invalid_argument("twisting element is not of total degree one: term " + wt.name(s));
    }
  }
  for (int a = 0; a < L_.dim; ++a) {
    if (!W_->lie_der(a, e0_).is_zero()) {
      throw std::invalid_argument("twisting element is not invariant under L(" +
                                  L_.names[static_cast<size_t>(a)] + ")");
    }
  }
}

std::vector<SymId> FmsDgla::basis(int degree) const {
  std::vector<SymId> out;
  if (degree == 0) {
    for (int a = 0; a < L_.dim; ++a) out.push_back(cone_l(a));
  } else if (degree == -1) {
    for (int a = 0; a < L_.dim; ++a) out.push_back(cone_i(a));
  }
  const int wdeg = degree + shift_;
  if (wdeg >= 0 && wdeg <= W_->max_degree()) {
    for (SymId w : W_->basis(wdeg)) out.push_back(of_weil(w));
  }
  return out;
}

int FmsDgla::max_degree() const { return W_->max_degree() - shift_; }

SparseVec FmsDgla::embed_weil(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.add_term(of_weil(s), c);
  return out;
}

SparseVec FmsDgla::project_weil(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) {
    if (is_weil(s)) out.add_term(weil_part(s), c);
  }
  return out;
}

SparseVec FmsDgla::bracket_sym(SymId a, SymId b) const {
  const int dim = L_.dim;
  const bool aw = is_weil(a), bw = is_weil(b);
  if (aw && bw) return SparseVec{};  // the shifted Weil algebra is an abelian ideal
  if (!aw && !bw) {
    const bool ai = a >= dim, bi = b >= dim;
    const int x = ai ? a - dim : a;
    const int y = bi ? b - dim : b;
    if (ai && bi) return SparseVec{};
    SparseVec g = L_.bracket(x, y);  // [I(x), L(y)] = I([x,y]) matches [L(x), I(y)] = I([x,y])
    SparseVec out;
    for (const auto& [s, c] : g.terms()) {
      out.add_term((ai || bi) ? cone_i(static_cast<int>(s)) : cone_l(static_cast<int>(s)), c);
    }
    return out;
  }
  if (aw) {
    // [w, cone] = -(-1)^{|w||cone|} [cone, w]
    SparseVec v = bracket_sym(b, a);
    const bool wodd = (degree(a) & 1) != 0;
    const bool codd = (degree(b) & 1) != 0;
    if (!(wodd && codd)) v.scale(Rational(-1));
    return v;
  }
  const SymId w = weil_part(b);
  if (a < dim) return embed_weil(W_->lie_der_sym(a, w));
  return embed_weil(W_->contract_sym(a - dim, w));
}

SparseVec FmsDgla::d_sym(SymId s) const {
  const int dim = L_.dim;
  if (is_weil(s)) return embed_weil(W_->d_sym(weil_part(s)));
  if (s < dim) return SparseVec{};  // d' L(x) = -[e0, L(x)] = 0 by invariance
  const int a = s - dim;
  SparseVec out = SparseVec::unit(cone_l(a));
  out -= embed_weil(W_->contract(a, e0_));
  return out;
}

// ---------------------------------------------------------------------------
// fms_dgla

SparseVec FmsAlgebra::cocycle_kernel(int x, int y) const {
  return W->contract(x, W->contract(y, e0));
}

SparseVec FmsAlgebra::deformation_residual(int x) const { return W->contract(x, e0); }

namespace {

// Chain coefficients at one polynomial degree below the top: the value the
// joint solve must produce for a cubic form. Compound coordinates pack
// (row block, Weil symbol) with a fixed stride.
constexpr SymId kStride = 1 << 24;

std::vector<SparseVec> cubic_middle_layer(const WeilAlgebra& W, const InvariantPolynomial& p) {
  const LieData& L = W.lie();
  const int dim = L.dim;
  const std::vector<SymId> w3 = W.basis(3);
  const int w3n = static_cast<int>(w3.size());

  // invariant subspace of slotted vectors (E_0, ..., E_{dim-1}), E_a in Wg^3:
  // for every Lie index c and slot b:  L_c(E_b) - sum_a f^a_{cb} E_a = 0
  std::vector<SparseVec> cols;
  std::vector<SymId> labels;
  cols.reserve(static_cast<size_t>(dim) * static_cast<size_t>(w3n));
  for (int a = 0; a < dim; ++a) {
    for (int i = 0; i < w3n; ++i) {
      SparseVec col;
      for (int c = 0; c < dim; ++c) {
        const SparseVec lc = W.lie_der_sym(c, w3[static_cast<size_t>(i)]);
        for (const auto& [s, coef] : lc.terms()) {
          col.add_term(static_cast<SymId>(c * dim + a) * kStride + s, coef);
        }
        for (int b = 0; b < dim; ++b) {
          const Rational f = L.structure_const(a, c, b);
          if (!f.is_zero()) {
            col.add_term(static_cast<SymId>(c * dim + b) * kStride + w3[static_cast<size_t>(i)], -f);
          }
        }
      }
      cols.push_back(std::move(col));
      labels.push_back(static_cast<SymId>(a * w3n + i));
    }
  }
  const std::vector<SparseVec> inv = nullspace_of_columns(cols, labels);
  if (inv.empty()) {
    throw std::runtime_error("no invariant candidates for the middle chain layer");
  }

  auto slots_of = [&](const SparseVec& nv) {
    std::vector<SparseVec> E(static_cast<size_t>(dim));
    for (const auto& [lab, coef] : nv.terms()) {
      E[static_cast<size_t>(lab / w3n)].add_term(w3[static_cast<size_t>(lab % w3n)], coef);
    }
    return E;
  };

  // stacked equations: d_W E_a = I_a e0  and, per quadratic multiset,
  // I_a E_b + I_b E_a = -mn({a,b}) sum_c p(a,b,c) d_W theta^c
  const SparseVec e0 = -transgress_solve(W, p).e;
  const std::vector<Multiset> pairs = multisets_of_size(dim, 2);
  auto equations_of = [&](const std::vector<SparseVec>& E) {
    SparseVec img;
    for (int a = 0; a < dim; ++a) {
      const SparseVec da = W.d(E[static_cast<size_t>(a)]);
      for (const auto& [s, coef] : da.terms()) {
        img.add_term(static_cast<SymId>(a) * kStride + s, coef);
      }
    }
    for (size_t pi = 0; pi < pairs.size(); ++pi) {
      const int a = pairs[pi][0], b = pairs[pi][1];
      SparseVec v = W.contract(a, E[static_cast<size_t>(b)]);
      if (a != b) v += W.contract(b, E[static_cast<size_t>(a)]);
      for (const auto& [s, coef] : v.terms()) {
        img.add_term(static_cast<SymId>(dim + static_cast<int>(pi)) * kStride + s, coef);
      }
    }
    return img;
  };

  SparseVec target;
  for (int a = 0; a < dim; ++a) {
    const SparseVec ia = W.contract(a, e0);
    for (const auto& [s, coef] : ia.terms()) {
      target.add_term(static_cast<SymId>(a) * kStride + s, coef);
    }
  }
  for (size_t pi = 0; pi < pairs.size(); ++pi) {
    const int a = pairs[pi][0], b = pairs[pi][1];
    const Rational mn = multinomial(pairs[pi]);
    SparseVec rhs;
    for (int c = 0; c < dim; ++c) {
      const Rational pc = p.eval_indices({a, b, c});
      if (!pc.is_zero()) rhs.axpy(-(mn * pc), W.d_sym(W.theta(c)));
    }
    for (const auto& [s, coef] : rhs.terms()) {
      target.add_term(static_cast<SymId>(dim + static_cast<int>(pi)) * kStride + s, coef);
    }
  }

  std::vector<SparseVec> gen_images;
  gen_images.reserve(inv.size());
  for (const SparseVec& nv : inv) gen_images.push_back(equations_of(slots_of(nv)));
  const auto sol = solve_in_span(gen_images, target);
  if (!sol) {
    throw std::runtime_error("middle chain layer solve failed over " +
                             std::to_string(inv.size()) + " invariant candidates");
  }
  std::vector<SparseVec> E(static_cast<size_t>(dim));
  for (const auto& [gi, coef] : sol->terms()) {
    const std::vector<SparseVec> Eg = slots_of(inv[static_cast<size_t>(gi)]);
    for (int a = 0; a < dim; ++a) E[static_cast<size_t>(a)].axpy(coef, Eg[static_cast<size_t>(a)]);
  }
  return E;
}

}  // namespace

FmsAlgebra fms_dgla(const LieData& L, const InvariantPolynomial& p,
                    std::shared_ptr<WeilAlgebra> W) {
  p.validate(L);
  if (p.n != 2 && p.n != 3) {
    throw std::invalid_argument("twisted cones are built for forms of degree 2 or 3");
  }
  if (W->dim_g() != L.dim) throw std::invalid_argument("polynomial table built over a different algebra");
  if (W->poly_cutoff() < p.n + 1) {
    throw std::invalid_argument("polynomial cutoff too small: need at least " +
                                std::to_string(p.n + 1));
  }
  const int n = p.n;
  const int dim = L.dim;
  const int shift = 2 * n - 2;

  FmsAlgebra F;
  F.n = n;
  F.W = W;

  // Quadratic forms take the closed-form primitive: the solver is free to
  // land on any primitive of p_W, but the closed-form chain below pairs with
  // this particular one. Cubic middle layers are solved jointly against
  // whatever the solver returns, so there the solver's choice is fine.
  if (n == 2) {
    F.e0 = -transgression_witness_quadratic(*W, p);
  } else {
    F.e0 = -transgress_solve(*W, p).e;
  }
  F.z = W->d(F.e0);
  F.checks.z_matches = (F.z == -W->poly_in_t(p));

  F.chain.push_back({Multiset{}, F.e0});
  if (n == 2) {
    for (int a = 0; a < dim; ++a) {
      SparseVec phi;
      for (int b = 0; b < dim; ++b) {
        const Rational pc = p.eval_indices({a, b});
        if (!pc.is_zero()) phi.add_term(W->theta(b), -pc);
      }
      F.chain.push_back({Multiset{static_cast<uint8_t>(a)}, std::move(phi)});
    }
  } else {
    std::vector<SparseVec> E = cubic_middle_layer(*W, p);
    for (int a = 0; a < dim; ++a) {
      F.chain.push_back({Multiset{static_cast<uint8_t>(a)}, std::move(E[static_cast<size_t>(a)])});
    }
    for (const Multiset& m : multisets_of_size(dim, 2)) {
      const Rational mn = multinomial(m);
      SparseVec phi;
      for (int c = 0; c < dim; ++c) {
        const Rational pc = p.eval_indices({m[0], m[1], c});
        if (!pc.is_zero()) phi.add_term(W->theta(c), -(mn * pc));
      }
      F.chain.push_back({m, std::move(phi)});
    }
  }

  // chain equation and invariance, checked in the basic polynomial model
  {
    GDiffSpace cb = cartan_basic_model(W, pullback_module(g_diff_weil(W)));
    SparseVec emb;
    for (const auto& [m, phi] : F.chain) {
      const SymId tm = W->t_monomial(m);
      for (const auto& [v, c] : phi.terms()) emb.add_term(tensor_pair(cb, tm, v), c);
    }
    SparseVec target;
    for (const Multiset& m : multisets_of_size(dim, n)) {
      const Rational c = multinomial(m) * p.eval(m);
      if (!c.is_zero()) target.add_term(tensor_pair(cb, W->t_monomial(m), W->unit()), c);
    }
    {
      const SparseVec pw = W->poly_in_t(p);
      const SymId t0 = W->t_monomial(Multiset{});
      for (const auto& [v, c] : pw.terms()) target.add_term(tensor_pair(cb, t0, v), -c);
    }
    const SparseVec r = apply_columns(cb.d, emb) - target;
    F.checks.chain_equation = r.is_zero();
    if (!r.is_zero() && F.checks.witness.empty()) {
      F.checks.witness = "chain equation residual " + to_string(r, *cb.syms);
    }
    bool inv = true;
    for (int a = 0; a < dim && inv; ++a) {
      const SparseVec lv = apply_columns(cb.L[static_cast<size_t>(a)], emb);
      if (!lv.is_zero()) {
        inv = false;
        if (F.checks.witness.empty()) {
          F.checks.witness = "chain not invariant under L(" + L.names[static_cast<size_t>(a)] +
                             "): " + to_string(lv, *cb.syms);
        }
      }
    }
    F.checks.chain_invariant = inv;
    F.checks.checked += 1 + dim;
  }

  F.A = std::make_shared<FmsDgla>(L, W, shift, F.e0);
  const FmsDgla& A = *F.A;
  const SymbolTable& tab = A.symbols();

  // z central: basic in the Weil algebra, so every bracket with it vanishes
  {
    bool zb = true;
    for (int a = 0; a < dim && zb; ++a) {
      if (!W->contract(a, F.z).is_zero() || !W->lie_der(a, F.z).is_zero()) {
        zb = false;
        if (F.checks.witness.empty()) {
          F.checks.witness = "z fails to be basic against index " + std::to_string(a);
        }
      }
      F.checks.checked += 2;
    }
    F.checks.z_central = zb;
  }

  std::vector<SymId> cone_syms;
  for (int a = 0; a < dim; ++a) cone_syms.push_back(A.cone_l(a));
  for (int a = 0; a < dim; ++a) cone_syms.push_back(A.cone_i(a));

  auto weil_window = [&](int max_wdeg) {
    std::vector<SymId> out;
    const int top = std::min(max_wdeg, W->max_degree());
    for (int wd = 0; wd <= top; ++wd) {
      for (SymId w : W->basis(wd)) out.push_back(A.of_weil(w));
    }
    return out;
  };

  {
    bool ok = true;
    auto dd = [&](SymId s) {
      const SparseVec r = A.d(A.d_sym(s));
      ++F.checks.checked;
      if (!r.is_zero() && ok) {
        ok = false;
        if (F.checks.witness.empty()) {
          F.checks.witness = "d'^2(" + tab.name(s) + ") = " + to_string(r, tab);
        }
      }
    };
    for (SymId s : cone_syms) dd(s);
    for (SymId s : weil_window(2 * n + 1)) dd(s);
    F.checks.d_squared = ok;
  }

  {
    bool ok = true;
    std::vector<SymId> rights = cone_syms;
    for (SymId s : weil_window(2 * n - 1)) rights.push_back(s);
    for (SymId s1 : cone_syms) {
      const Rational sgn(A.odd(s1) ? -1 : 1);
      for (SymId s2 : rights) {
        const SparseVec lhs = A.d(A.bracket_sym(s1, s2));
        SparseVec rhs = A.bracket(A.d_sym(s1), SparseVec::unit(s2));
        rhs.axpy(sgn, A.bracket(SparseVec::unit(s1), A.d_sym(s2)));
        ++F.checks.checked;
        if (lhs != rhs && ok) {
          ok = false;
          if (F.checks.witness.empty()) {
            F.checks.witness = "Leibniz fails on [" + tab.name(s1) + ", " + tab.name(s2) + "]";
          }
        }
      }
    }
    F.checks.leibniz = ok;
  }

  {
    bool ok = true;
    std::vector<SymId> thirds = cone_syms;
    for (SymId s : weil_window(n)) thirds.push_back(s);
    for (SymId a : cone_syms) {
      for (SymId b : cone_syms) {
        const Rational sgn((A.odd(a) && A.odd(b)) ? -1 : 1);
        for (SymId c : thirds) {
          SparseVec r = A.bracket(SparseVec::unit(a), A.bracket_sym(b, c));
          r -= A.bracket(A.bracket_sym(a, b), SparseVec::unit(c));
          r.axpy(-sgn, A.bracket(SparseVec::unit(b), A.bracket_sym(a, c)));
          ++F.checks.checked;
          if (!r.is_zero() && ok) {
            ok = false;
            if (F.checks.witness.empty()) {
              F.checks.witness = "Jacobi fails on (" + tab.name(a) + ", " + tab.name(b) + ", " +
                                 tab.name(c) + ")";
            }
          }
        }
      }
    }
    F.checks.jacobi = ok;
  }

  return F;
}

// ---------------------------------------------------------------------------
// build_bfms

BfmsAlgebra build_bfms(const FmsAlgebra& F, const InvariantPolynomial& p, const DpAlgebra& D) {
  if (F.n != 3 || p.n != 3) {
    throw std::invalid_argument("the finite generator image is computed for cubic forms");
  }
  if (!F.A || !D.base || !D.ext) throw std::invalid_argument("incomplete inputs");
  const FmsDgla& A = *F.A;
  const WeilAlgebra& W = *F.W;
  const LieData& L = A.lie();
  const int dim = L.dim;

  BfmsAlgebra B;
  for (int a = 0; a < dim; ++a) {
    B.l_img.push_back(SparseVec::unit(A.cone_l(a)));
    const SparseVec Ea = poly_chain_part(F.chain, Multiset{static_cast<uint8_t>(a)});
    B.itil_img.push_back(SparseVec::unit(A.cone_i(a)) + A.embed_weil(Ea));
    B.theta_img.push_back(A.embed_weil(-SparseVec::unit(W.theta(a))));
    B.mu_img.push_back(A.embed_weil(-W.d_sym(W.theta(a))));
  }
  B.c_img = A.embed_weil(-SparseVec::unit(W.unit()));
  B.dims = {rank(B.l_img), rank(B.itil_img), rank(B.mu_img), rank(B.theta_img),
            rank(std::vector<SparseVec>{B.c_img})};

  auto T = std::make_shared<TableDgla>();
  T->label = "finite image over " + L.label;
  std::vector<SymId> all_syms;
  std::vector<const SparseVec*> all_imgs;
  for (int a = 0; a < dim; ++a) {
    B.l_sym.push_back(T->add_symbol("L(" + L.names[static_cast<size_t>(a)] + ")", 0));
  }
  for (int a = 0; a < dim; ++a) {
    B.itil_sym.push_back(T->add_symbol("Itil(" + L.names[static_cast<size_t>(a)] + ")", -1));
  }
  for (int a = 0; a < dim; ++a) {
    B.mu_sym.push_back(T->add_symbol("mu(" + L.names[static_cast<size_t>(a)] + "*)", -2));
  }
  for (int a = 0; a < dim; ++a) {
    B.theta_sym.push_back(T->add_symbol("th(" + L.names[static_cast<size_t>(a)] + "*)", -3));
  }
  B.c_sym = T->add_symbol("c", -4);
  for (int a = 0; a < dim; ++a) {
    all_syms.push_back(B.l_sym[static_cast<size_t>(a)]);
    all_imgs.push_back(&B.l_img[static_cast<size_t>(a)]);
  }
  for (int a = 0; a < dim; ++a) {
    all_syms.push_back(B.itil_sym[static_cast<size_t>(a)]);
    all_imgs.push_back(&B.itil_img[static_cast<size_t>(a)]);
  }
  for (int a = 0; a < dim; ++a) {
    all_syms.push_back(B.mu_sym[static_cast<size_t>(a)]);
    all_imgs.push_back(&B.mu_img[static_cast<size_t>(a)]);
  }
  for (int a = 0; a < dim; ++a) {
    all_syms.push_back(B.theta_sym[static_cast<size_t>(a)]);
    all_imgs.push_back(&B.theta_img[static_cast<size_t>(a)]);
  }
  all_syms.push_back(B.c_sym);
  all_imgs.push_back(&B.c_img);

  std::map<int, std::pair<std::vector<SparseVec>, std::vector<SymId>>> groups;
  for (size_t i = 0; i < all_syms.size(); ++i) {
    const int deg = T->symbols().degree(all_syms[i]);
    groups[deg].first.push_back(*all_imgs[i]);
    groups[deg].second.push_back(all_syms[i]);
  }

  auto represent = [&](const SparseVec& ambient, int deg, const std::string& what) {
    if (ambient.is_zero()) return SparseVec{};
    auto it = groups.find(deg);
    if (it == groups.end()) {
      throw std::runtime_error("image is not closed: " + what + " lands at degree " +
                               std::to_string(deg) + " with value " +
                               to_string(ambient, A.symbols()));
    }
    const auto sol = solve_in_span(it->second.first, ambient);
    if (!sol) {
      throw std::runtime_error("image is not closed: " + what + " = " +
                               to_string(ambient, A.symbols()));
    }
    SparseVec expr;
    for (const auto& [gi, coef] : sol->terms()) {
      expr.add_term(it->second.second[static_cast<size_t>(gi)], coef);
    }
    return expr;
  };

  for (size_t i = 0; i < all_syms.size(); ++i) {
    for (size_t j = i; j < all_syms.size(); ++j) {
      const SparseVec amb = A.bracket(*all_imgs[i], *all_imgs[j]);
      const int deg =
          T->symbols().degree(all_syms[i]) + T->symbols().degree(all_syms[j]);
      const std::string what = "[" + T->symbols().name(all_syms[i]) + ", " +
                               T->symbols().name(all_syms[j]) + "]";
      T->set_bracket_pair(all_syms[i], all_syms[j], represent(amb, deg, what));
      ++B.checked;
    }
  }
  for (size_t i = 0; i < all_syms.size(); ++i) {
    const SparseVec amb = A.d(*all_imgs[i]);
    const int deg = T->symbols().degree(all_syms[i]) + 1;
    T->set_d(all_syms[i], represent(amb, deg, "d(" + T->symbols().name(all_syms[i]) + ")"));
    ++B.checked;
  }
  B.table = T;

  {
    Reporter rep;
    AxiomSweepOptions opts;
    opts.id_prefix = "finite-image";
    verify_dgla_axioms(*T, rep, opts);
    B.axioms_ok = rep.all_pass();
    if (!B.axioms_ok && B.witness.empty()) {
      for (const auto& r : rep.records()) {
        if (r.status == "fail") {
          B.witness = r.id + ": " + r.witness;
          break;
        }
      }
    }
    B.checked += static_cast<long>(rep.records().size());
  }

  auto note = [&](bool ok, bool& flag, const std::string& msg) {
    flag = flag && ok;
    if (!ok && B.witness.empty()) B.witness = msg;
    ++B.checked;
  };

  B.bracket_relation = B.pairing_relation = B.theta_mu_relation = true;
  for (int x = 0; x < dim; ++x) {
    for (int y = 0; y < dim; ++y) {
      SparseVec rhs;
      for (int c = 0; c < dim; ++c) {
        const Rational pc = p.eval_indices({x, y, c});
        if (!pc.is_zero()) rhs.axpy(pc * Rational(2), B.mu_img[static_cast<size_t>(c)]);
      }
      note(A.bracket(B.itil_img[static_cast<size_t>(x)], B.itil_img[static_cast<size_t>(y)]) == rhs,
           B.bracket_relation,
           "[Itil, Itil] != 2 mu(p(x,y,.)) at (" + std::to_string(x) + "," + std::to_string(y) + ")");

      const SparseVec pv =
          A.bracket(B.itil_img[static_cast<size_t>(x)], B.theta_img[static_cast<size_t>(y)]);
      note(pv == (x == y ? B.c_img : SparseVec{}), B.pairing_relation,
           "[Itil(x), th(xi)] != xi(x) c at (" + std::to_string(x) + "," + std::to_string(y) + ")");

      // machine-determined companion: [Itil(x), mu(xi)] = th(coadjoint_x xi)
      SparseVec tm;
      for (int dd = 0; dd < dim; ++dd) {
        const Rational f = L.structure_const(y, x, dd);
        if (!f.is_zero()) tm.axpy(-f, B.theta_img[static_cast<size_t>(dd)]);
      }
      note(A.bracket(B.itil_img[static_cast<size_t>(x)], B.mu_img[static_cast<size_t>(y)]) == tm,
           B.theta_mu_relation,
           "[Itil(x), mu(xi)] != th(coadjoint) at (" + std::to_string(x) + "," +
               std::to_string(y) + ")");
    }
    note(A.d(B.itil_img[static_cast<size_t>(x)]) == B.l_img[static_cast<size_t>(x)],
         B.bracket_relation, "d Itil(x) != L(x) at " + std::to_string(x));
    note(A.d(B.theta_img[static_cast<size_t>(x)]) == B.mu_img[static_cast<size_t>(x)],
         B.theta_mu_relation, "d th(xi) != mu(xi) at " + std::to_string(x));
  }

  // the generator-layer equations of the centrally extended acyclic model,
  // letters only: d rho(i(m)) = (1/2) sum over splittings w [rho(i(m1)), rho(i(m2))]
  //               + [|m|=1] rho(l(m)) + qhat(m) kappa c
  const DgAlgebra& base = *D.base;
  const CentralExtensionDgla& ext = *D.ext;
  const SymId csym = ext.c_sym();

  auto rho_of = [&](const Multiset& m) -> SparseVec {
    if (m.size() == 1) return B.itil_img[static_cast<size_t>(m[0])];
    if (m.size() == 2) {
      SparseVec out;
      for (int c = 0; c < dim; ++c) {
        const Rational pc = p.eval_indices({m[0], m[1], c});
        if (!pc.is_zero()) out.axpy(pc, B.theta_img[static_cast<size_t>(c)]);
      }
      return out;
    }
    return SparseVec{};
  };

  B.morphism_ok = true;
  B.equivariance_ok = true;
  bool kappa_set = false;
  for (int li = 0; li < base.letter_count(); ++li) {
    const Multiset& m = base.letter_multiset(li);
    if (m.size() > 3) continue;
    const Rational qhat = ext.d_sym(base.letter_sym(li)).coeff(csym);
    SparseVec rhs;
    for (const Split& sp : ordered_splits(m)) {
      rhs.axpy(sp.w / Rational(2), A.bracket(rho_of(sp.m1), rho_of(sp.m2)));
    }
    if (m.size() == 1) rhs += B.l_img[static_cast<size_t>(m[0])];
    SparseVec defect = A.d(rho_of(m)) - rhs;
    ++B.checked;
    if (qhat.is_zero()) {
      if (!defect.is_zero()) {
        B.morphism_ok = false;
        if (B.witness.empty()) {
          B.witness = "letter equation fails with no central charge on " +
                      multiset_name(m, L) + ": " + to_string(defect, A.symbols());
        }
      }
      continue;
    }
    const auto sol = solve_in_span(std::vector<SparseVec>{B.c_img}, defect);
    if (!sol) {
      B.morphism_ok = false;
      if (B.witness.empty()) {
        B.witness = "central defect on " + multiset_name(m, L) +
                    " is not a multiple of c: " + to_string(defect, A.symbols());
      }
      continue;
    }
    const Rational kappa = sol->coeff(0) / qhat;
    if (!kappa_set) {
      B.central_scale = kappa;
      kappa_set = true;
    } else if (!(kappa - B.central_scale).is_zero()) {
      B.morphism_ok = false;
      if (B.witness.empty()) {
        B.witness = "inconsistent central scale on " + multiset_name(m, L);
      }
    }
  }

  for (int x = 0; x < dim; ++x) {
    for (int li = 0; li < base.letter_count(); ++li) {
      const Multiset& m = base.letter_multiset(li);
      if (m.size() > 2) continue;
      SparseVec rhs;
      for (const auto& [mm, coef] : ad_on_multiset(L, x, m)) {
        rhs.axpy(coef, rho_of(mm));
      }
      const SparseVec lhs = A.bracket(B.l_img[static_cast<size_t>(x)], rho_of(m));
      ++B.checked;
      if (lhs != rhs) {
        B.equivariance_ok = false;
        if (B.witness.empty()) {
          B.witness = "equivariance fails on [L(" + L.names[static_cast<size_t>(x)] + "), rho i(" +
                      multiset_name(m, L) + ")]";
        }
      }
    }
  }

  return B;
}

// ---------------------------------------------------------------------------
// twist_action

namespace {

struct SPowerState {
  SymbolTable tab;
  std::vector<std::pair<SymId, int>> parts;  // id -> (module symbol, s power)
  std::unordered_map<uint64_t, SymId> by;
  GDiffSpace base;  // keeps the underlying space alive
};

}  // namespace

TwistedAction twist_action(const GDiffAlgebra& B, std::shared_ptr<WeilAlgebra> W,
                           const PolyChain& phi, const InvariantPolynomial& p, int s_cap) {
  if (p.n < 2) throw std::invalid_argument("twists are built for forms of degree >= 2");
  if (B.V.lie == nullptr || B.V.syms == nullptr) {
    throw std::invalid_argument("the coefficient algebra has no symbol table");
  }
  const LieData& L = *B.V.lie;
  const int dim = L.dim;
  if (p.dim != dim || W->dim_g() != dim) throw std::invalid_argument("dimension mismatch");
  const int n = p.n;
  const int sdeg = 2 * n - 2;
  if (s_cap < 1) throw std::invalid_argument("need at least one power of the formal variable");

  TwistedAction T;
  T.n = n;
  T.s_cap = s_cap;

  // --- the defining equation, checked in the basic polynomial model over W
  {
    GDiffSpace cb = cartan_basic_model(W, pullback_module(B.V));
    SparseVec emb;
    for (const auto& [m, vs] : phi) {
      const SymId tm = W->t_monomial(m);
      for (const auto& [v, c] : vs.terms()) emb.add_term(tensor_pair(cb, tm, v), c);
    }
    for (int a = 0; a < dim; ++a) {
      const SparseVec lv = apply_columns(cb.L[static_cast<size_t>(a)], emb);
      ++T.cocycle_checks.checked;
      if (!lv.is_zero()) {
        throw std::invalid_argument("twist cocycle is not equivariant: L(" +
                                    L.names[static_cast<size_t>(a)] + ") image " +
                                    to_string(lv, *cb.syms));
      }
    }
    SparseVec r = apply_columns(cb.d, emb);
    for (const Multiset& m : multisets_of_size(dim, n)) {
      const Rational c = multinomial(m) * p.eval(m);
      if (c.is_zero()) continue;
      const SymId tm = W->t_monomial(m);
      for (const auto& [v, cb1] : B.one.terms()) {
        r.add_term(tensor_pair(cb, tm, v), -(c * cb1));
      }
    }
    const SymId t0 = W->t_monomial(Multiset{});
    for (const auto& [s, coef] : r.terms()) {
      const auto [w, v] = tensor_parts(cb, s);
      if (w != t0) {
        throw std::invalid_argument("twist cocycle equation fails: residual has term " +
                                    cb.syms->name(s) + " (coefficient " + coef.str() + ")");
      }
      T.c.add_term(v, coef);
    }
  }

  // --- the extracted constant part must be a basic cocycle of B
  {
    RelationReport& cr = T.cocycle_checks;
    auto basic = [&](const SparseVec& v, const std::string& what) {
      ++cr.checked;
      if (!v.is_zero() && cr.ok) {
        cr.ok = false;
        cr.witness = what + " = " + to_string(v, *B.V.syms);
      }
    };
    basic(apply_columns(B.V.d, T.c), "d(c)");
    for (int a = 0; a < dim; ++a) {
      basic(apply_columns(B.V.I[static_cast<size_t>(a)], T.c),
            "I(" + L.names[static_cast<size_t>(a)] + ")(c)");
      basic(apply_columns(B.V.L[static_cast<size_t>(a)], T.c),
            "L(" + L.names[static_cast<size_t>(a)] + ")(c)");
    }
    if (!cr.ok) {
      throw std::invalid_argument("constant part of the twist cocycle is not basic: " + cr.witness);
    }
  }

  for (const auto& [m, vs] : phi) {
    if (m.empty()) continue;
    T.images.push_back({m, vs * multinomial(m).inverse()});
  }

  // --- module on B tensor Q[s], s of degree 2n-2, d s = -phi(0)
  auto st = std::make_shared<SPowerState>();
  st->base = B.V;
  const SymbolTable& bt = *B.V.syms;
  for (SymId v = 0; v < bt.size(); ++v) {
    for (int j = 0; j <= s_cap; ++j) {
      const std::string nm = j == 0 ? bt.name(v) : bt.name(v) + "*s^" + std::to_string(j);
      const SymId id = st->tab.intern(nm, bt.degree(v) + j * sdeg);
      st->parts.push_back({v, j});
      st->by[(static_cast<uint64_t>(v) << 8) | static_cast<uint64_t>(j)] = id;
    }
  }
  auto pair_id = [st](SymId v, int j) {
    return st->by.at((static_cast<uint64_t>(v) << 8) | static_cast<uint64_t>(j));
  };
  auto lift = [st, pair_id](const SparseVec& bv, int j) {
    SparseVec out;
    for (const auto& [s, c] : bv.terms()) out.add_term(pair_id(s, j), c);
    return out;
  };

  const SparseVec phi0 = poly_chain_part(phi, Multiset{});
  const auto bmul = B.mul;
  auto mul_left = [bmul](const SparseVec& g, SymId v) {
    SparseVec out;
    for (const auto& [s, c] : g.terms()) out.axpy(c, bmul(s, v));
    return out;
  };

  GDiffSpace V2;
  V2.lie = B.V.lie;
  V2.syms = &st->tab;
  V2.state = st;
  V2.min_deg = B.V.min_deg;
  V2.max_deg = B.V.max_deg + s_cap * sdeg;
  V2.basis_of = [st](int k) {
    std::vector<SymId> out;
    for (SymId id = 0; id < st->tab.size(); ++id) {
      if (st->tab.degree(id) == k) out.push_back(id);
    }
    return out;
  };
  {
    const GDiffSpace bv = B.V;
    V2.d = [st, bv, phi0, mul_left, lift](SymId id) {
      const auto [v, j] = st->parts[static_cast<size_t>(id)];
      SparseVec out = lift(bv.d(v), j);
      // d(v s^j) = (dv) s^j + (-1)^{|v|} (-j) (v phi0) s^{j-1}; phi0 is odd,
      // so commuting it to the left cancels the parity sign entirely.
      if (j > 0 && !phi0.is_zero()) {
        out.axpy(Rational(-j), lift(mul_left(phi0, v), j - 1));
      }
      return out;
    };
    for (int a = 0; a < dim; ++a) {
      const ColumnOp la = bv.L[static_cast<size_t>(a)];
      V2.L.push_back([st, la, lift](SymId id) {
        const auto [v, j] = st->parts[static_cast<size_t>(id)];
        return lift(la(v), j);
      });
    }
    V2.I.reserve(static_cast<size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      const ColumnOp ia = bv.I[static_cast<size_t>(a)];
      const SparseVec ga = poly_chain_part(phi, Multiset{static_cast<uint8_t>(a)});
      V2.I.push_back([st, ia, ga, lift, mul_left](SymId id) {
        const auto [v, j] = st->parts[static_cast<size_t>(id)];
        SparseVec out = lift(ia(v), j);
        if (j > 0 && !ga.is_zero()) out.axpy(Rational(j), lift(mul_left(ga, v), j - 1));
        return out;
      });
    }
  }

  DgModuleAction act;
  act.V = V2;
  act.layer_cutoff = n - 1;
  for (int k = 1; k <= n - 1; ++k) {
    for (const Multiset& m : multisets_of_size(dim, k)) {
      act.letters.push_back(m);
      if (k == 1) {
        act.i_of.push_back(V2.I[static_cast<size_t>(m[0])]);
      } else {
        const SparseVec gm = poly_chain_part(phi, m) * multinomial(m).inverse();
        act.i_of.push_back([st, gm, lift, mul_left](SymId id) {
          const auto [v, j] = st->parts[static_cast<size_t>(id)];
          if (j == 0 || gm.is_zero()) return SparseVec{};
          SparseVec out = lift(mul_left(gm, v), j - 1);
          out.scale(Rational(j));
          return out;
        });
      }
    }
  }
  act.l_of = V2.L;
  T.action = act;
  T.module_checks = validate_dg_module(act, n - 1);

  // --- the top generator layer carries the central charge: with the letters
  // of size n acting by zero, the splitting sum must collapse to a single
  // multiple of the derivative in s. The extension convention pairs the
  // charge qhat(m) = -p(m) with each size-n letter.
  {
    T.central_consistent = true;
    bool scale_set = false;
    for (const Multiset& m : multisets_of_size(dim, n)) {
      const Rational qhat = -p.eval(m);
      const Rational mn_m = multinomial(m);
      const std::vector<Split> splits = ordered_splits(m);
      for (SymId id = 0; id < st->tab.size(); ++id) {
        const auto [v, j] = st->parts[static_cast<size_t>(id)];
        if (j < 1) continue;
        SparseVec defect;
        for (const Split& sp : splits) {
          const int i1 = act.letter_index(sp.m1);
          const int i2 = act.letter_index(sp.m2);
          const Rational w = multinomial(sp.m1) * multinomial(sp.m2);
          SparseVec v12 = apply_columns(act.i_of[static_cast<size_t>(i1)],
                                        act.i_of[static_cast<size_t>(i2)](id));
          v12 += apply_columns(act.i_of[static_cast<size_t>(i2)],
                               act.i_of[static_cast<size_t>(i1)](id));
          defect.axpy(-(w / Rational(2)), v12);
        }
        ++T.central_checked;
        if (qhat.is_zero()) {
          if (!defect.is_zero() && T.central_consistent) {
            T.central_consistent = false;
            T.central_witness = "uncharged letter " + multiset_name(m, L) +
                                " leaves a defect on " + st->tab.name(id);
          }
          continue;
        }
        if (!scale_set && !defect.is_zero()) {
          // expected shape: mn(m) * qhat * lambda * j * (v, j-1)
          const SymId want = pair_id(v, j - 1);
          const Rational* coef = defect.find(want);
          if (coef != nullptr) {
            T.central_scale = *coef / (mn_m * qhat * Rational(j));
            scale_set = true;
          }
        }
        SparseVec expect;
        if (scale_set) {
          expect.add_term(pair_id(v, j - 1), mn_m * qhat * T.central_scale * Rational(j));
        }
        if (defect != expect && T.central_consistent) {
          T.central_consistent = false;
          T.central_witness = "central action on " + st->tab.name(id) + " under " +
                              multiset_name(m, L) + ": " + to_string(defect, st->tab);
        }
      }
    }
  }

  return T;
}

}  // namespace dgla
