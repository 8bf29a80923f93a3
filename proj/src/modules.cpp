#include "dgla/modules.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "dgla/linalg.hpp"

namespace dgla {

SparseVec apply_columns(const ColumnOp& op, const SparseVec& x) {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.axpy(c, op(s));
  return out;
}

namespace {

ColumnOp zero_op() {
  return [](SymId) { return SparseVec(); };
}

struct PointState {
  LieData L;
  SymbolTable tab;
};

struct CeState {
  CeAlgebra C;
  explicit CeState(const LieData& L) : C(L) {}
};

}  // namespace

GDiffSpace g_diff_point(const LieData& L) {
  auto st = std::make_shared<PointState>();
  st->L = L;
  st->tab.intern("1", 0);
  GDiffSpace V;
  V.lie = &st->L;
  V.syms = &st->tab;
  V.basis_of = [](int k) { return k == 0 ? std::vector<SymId>{0} : std::vector<SymId>{}; };
  V.d = zero_op();
  V.I.assign(static_cast<size_t>(L.dim), zero_op());
  V.L.assign(static_cast<size_t>(L.dim), zero_op());
  V.min_deg = 0;
  V.max_deg = 0;
  V.state = st;
  return V;
}

GDiffSpace g_diff_ce(const LieData& L) {
  auto st = std::make_shared<CeState>(L);
  GDiffSpace V;
  V.lie = &st->C.lie();
  V.syms = &st->C.symbols();
  V.basis_of = [st](int k) { return st->C.basis(k); };
  V.d = [st](SymId s) { return st->C.d_sym(s); };
  for (int a = 0; a < L.dim; ++a) {
    V.I.push_back([st, a](SymId s) { return st->C.contract_sym(a, s); });
    V.L.push_back([st, a](SymId s) { return st->C.lie_der_sym(a, s); });
  }
  V.min_deg = 0;
  V.max_deg = st->C.top_degree();
  V.state = st;
  return V;
}

GDiffSpace g_diff_weil(std::shared_ptr<WeilAlgebra> W) {
  GDiffSpace V;
  V.lie = &W->lie();
  V.syms = &W->symbols();
  V.basis_of = [W](int k) { return W->basis(k); };
  V.d = [W](SymId s) { return W->d_sym(s); };
  for (int a = 0; a < W->dim_g(); ++a) {
    V.I.push_back([W, a](SymId s) { return W->contract_sym(a, s); });
    V.L.push_back([W, a](SymId s) { return W->lie_der_sym(a, s); });
  }
  V.min_deg = 0;
  V.max_deg = W->max_degree();
  V.state = std::move(W);
  return V;
}

namespace {

struct RelationScan {
  RelationReport rep;
  const SymbolTable* syms;

  void instance(const std::string& label, SymId s, const std::function<SparseVec()>& diff) {
    try {
      SparseVec r = diff();
      ++rep.checked;
      if (!r.is_zero() && rep.ok) {
        rep.ok = false;
        rep.witness = label + " fails at " + syms->name(s) + ", first residual term " +
                      syms->name(r.lead());
      }
    } catch (const CutoffRefusal&) {
      ++rep.refused;
    }
  }

  RelationReport finish() {
    if (rep.checked == 0 && rep.ok) {
      rep.ok = false;
      rep.witness = "every relation instance refused at the cutoff";
    }
    return rep;
  }
};

}  // namespace

RelationReport check_g_differential_space(const GDiffSpace& V, int deg_lo, int deg_hi) {
  RelationScan sc;
  sc.syms = V.syms;
  const LieData& L = *V.lie;
  for (int k = deg_lo; k <= deg_hi; ++k) {
    for (SymId s : V.basis_of(k)) {
      sc.instance("d^2", s, [&] { return apply_columns(V.d, V.d(s)); });
      for (int a = 0; a < L.dim; ++a) {
        sc.instance("[d,I(" + L.names[static_cast<size_t>(a)] + ")] = L", s, [&] {
          return apply_columns(V.d, V.I[static_cast<size_t>(a)](s)) +
                 apply_columns(V.I[static_cast<size_t>(a)], V.d(s)) -
                 V.L[static_cast<size_t>(a)](s);
        });
        sc.instance("[d,L(" + L.names[static_cast<size_t>(a)] + ")]", s, [&] {
          return apply_columns(V.d, V.L[static_cast<size_t>(a)](s)) -
                 apply_columns(V.L[static_cast<size_t>(a)], V.d(s));
        });
        for (int b = 0; b < L.dim; ++b) {
          sc.instance("[L,I] = I[.,.] on (" + L.names[static_cast<size_t>(a)] + "," +
                          L.names[static_cast<size_t>(b)] + ")",
                      s, [&] {
                        SparseVec r = apply_columns(V.L[static_cast<size_t>(a)],
                                                    V.I[static_cast<size_t>(b)](s)) -
                                      apply_columns(V.I[static_cast<size_t>(b)],
                                                    V.L[static_cast<size_t>(a)](s));
                        for (int c = 0; c < L.dim; ++c) {
                          Rational f = L.structure_const(c, a, b);
                          if (!f.is_zero()) r.axpy(-f, V.I[static_cast<size_t>(c)](s));
                        }
                        return r;
                      });
          sc.instance("[L,L] = L[.,.] on (" + L.names[static_cast<size_t>(a)] + "," +
                          L.names[static_cast<size_t>(b)] + ")",
                      s, [&] {
                        SparseVec r = apply_columns(V.L[static_cast<size_t>(a)],
                                                    V.L[static_cast<size_t>(b)](s)) -
                                      apply_columns(V.L[static_cast<size_t>(b)],
                                                    V.L[static_cast<size_t>(a)](s));
                        for (int c = 0; c < L.dim; ++c) {
                          Rational f = L.structure_const(c, a, b);
                          if (!f.is_zero()) r.axpy(-f, V.L[static_cast<size_t>(c)](s));
                        }
                        return r;
                      });
          if (a <= b) {
            sc.instance("I I + I I on (" + L.names[static_cast<size_t>(a)] + "," +
                            L.names[static_cast<size_t>(b)] + ")",
                        s, [&] {
                          return apply_columns(V.I[static_cast<size_t>(a)],
                                               V.I[static_cast<size_t>(b)](s)) +
                                 apply_columns(V.I[static_cast<size_t>(b)],
                                               V.I[static_cast<size_t>(a)](s));
                        });
          }
        }
      }
    }
  }
  return sc.finish();
}

RelationReport check_g_differential_space(const GDiffSpace& V) {
  return check_g_differential_space(V, V.min_deg, V.max_deg);
}

int DgModuleAction::letter_index(const Multiset& m) const {
  uint64_t key = multiset_key(m);
  for (size_t i = 0; i < letters.size(); ++i) {
    if (letters[i].size() == m.size() && multiset_key(letters[i]) == key)
      return static_cast<int>(i);
  }
  return -1;
}

DgModuleAction pullback_module(const GDiffSpace& V) {
  DgModuleAction A;
  A.V = V;
  A.layer_cutoff = 1;
  A.letters = multisets_of_size(V.lie->dim, 1);
  A.i_of = V.I;
  A.l_of = V.L;
  return A;
}

namespace {

// Distinct ordered pairs (m1, m2) of nonempty submultisets with m1 + m2 = m.
std::vector<std::pair<Multiset, Multiset>> ordered_splits(const Multiset& m) {
  std::vector<uint8_t> vals;
  std::vector<int> cnt;
  for (uint8_t x : m) {
    if (!vals.empty() && vals.back() == x) {
      ++cnt.back();
    } else {
      vals.push_back(x);
      cnt.push_back(1);
    }
  }
  std::vector<std::pair<Multiset, Multiset>> out;
  std::vector<int> pick(vals.size(), 0);
  while (true) {
    int total = 0;
    for (int p : pick) total += p;
    if (total != 0 && total != static_cast<int>(m.size())) {
      Multiset m1, m2;
      for (size_t i = 0; i < vals.size(); ++i) {
        for (int j = 0; j < pick[i]; ++j) m1.push_back(vals[i]);
        for (int j = pick[i]; j < cnt[i]; ++j) m2.push_back(vals[i]);
      }
      out.emplace_back(std::move(m1), std::move(m2));
    }
    size_t i = 0;
    while (i < pick.size() && pick[i] == cnt[i]) pick[i++] = 0;
    if (i == pick.size()) break;
    ++pick[i];
  }
  return out;
}

}  // namespace

RelationReport validate_dg_module(const DgModuleAction& A, int layers_to_check) {
  RelationScan sc;
  sc.syms = A.V.syms;
  const LieData& L = *A.V.lie;
  auto i_op = [&](int li) -> const ColumnOp& {
    static const ColumnOp zero = zero_op();
    return li < 0 ? zero : A.i_of[static_cast<size_t>(li)];
  };

  std::vector<SymId> all;
  for (int k = A.V.min_deg; k <= A.V.max_deg; ++k) {
    for (SymId s : A.V.basis_of(k)) all.push_back(s);
  }

  for (int a = 0; a < L.dim; ++a) {
    for (SymId s : all) {
      sc.instance("[d, l(" + L.names[static_cast<size_t>(a)] + ")]", s, [&] {
        return apply_columns(A.V.d, A.l_of[static_cast<size_t>(a)](s)) -
               apply_columns(A.l_of[static_cast<size_t>(a)], A.V.d(s));
      });
      for (int b = 0; b < L.dim; ++b) {
        sc.instance("[l,l] = l[.,.] on (" + L.names[static_cast<size_t>(a)] + "," +
                        L.names[static_cast<size_t>(b)] + ")",
                    s, [&] {
                      SparseVec r = apply_columns(A.l_of[static_cast<size_t>(a)],
                                                  A.l_of[static_cast<size_t>(b)](s)) -
                                    apply_columns(A.l_of[static_cast<size_t>(b)],
                                                  A.l_of[static_cast<size_t>(a)](s));
                      for (int c = 0; c < L.dim; ++c) {
                        Rational f = L.structure_const(c, a, b);
                        if (!f.is_zero()) r.axpy(-f, A.l_of[static_cast<size_t>(c)](s));
                      }
                      return r;
                    });
      }
    }
  }

  for (int k = 1; k <= layers_to_check; ++k) {
    for (const Multiset& m : multisets_of_size(L.dim, k)) {
      int li = A.letter_index(m);
      auto splits = ordered_splits(m);
      Rational mn = multinomial(m);
      std::string mname = multiset_name(m, L);
      for (SymId s : all) {
        sc.instance("layer " + std::to_string(k) + " differential equation on i(" + mname + ")",
                    s, [&] {
                      SparseVec lhs = apply_columns(A.V.d, i_op(li)(s)) +
                                      apply_columns(i_op(li), A.V.d(s));
                      lhs.scale(mn);
                      SparseVec rhs;
                      for (const auto& [m1, m2] : splits) {
                        int l1 = A.letter_index(m1);
                        int l2 = A.letter_index(m2);
                        Rational w = multinomial(m1) * multinomial(m2) * Rational(1, 2);
                        if (w.is_zero()) continue;
                        rhs.axpy(w, apply_columns(i_op(l1), i_op(l2)(s)));
                        rhs.axpy(w, apply_columns(i_op(l2), i_op(l1)(s)));
                      }
                      if (k == 1) rhs.axpy(mn, A.l_of[static_cast<size_t>(m[0])](s));
                      return lhs - rhs;
                    });
        if (li >= 0) {
          for (int a = 0; a < L.dim; ++a) {
            sc.instance("equivariance of i(" + mname + ") under l(" +
                            L.names[static_cast<size_t>(a)] + ")",
                        s, [&] {
                          SparseVec r = apply_columns(A.l_of[static_cast<size_t>(a)],
                                                      i_op(li)(s)) -
                                        apply_columns(i_op(li),
                                                      A.l_of[static_cast<size_t>(a)](s));
                          for (const auto& [m2, cf] : ad_on_multiset(L, a, m)) {
                            int l2 = A.letter_index(m2);
                            if (l2 >= 0) r.axpy(-cf, i_op(l2)(s));
                          }
                          return r;
                        });
          }
        }
      }
    }
  }
  return sc.finish();
}

namespace {

// Interned pair table (Weil symbol, module symbol) backing the tensor models.
struct PairState {
  std::shared_ptr<WeilAlgebra> W;
  DgModuleAction A;
  SymbolTable tab;
  std::vector<std::pair<SymId, SymId>> parts;
  std::unordered_map<uint64_t, SymId> by_pair;
  std::map<int, std::vector<SymId>> slices;
  std::vector<std::pair<Rational, SymId>> tmon;  // multinom(m), t^m per letter

  SymId intern(SymId w, SymId v) {
    uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(w)) << 32) |
                   static_cast<uint32_t>(v);
    auto it = by_pair.find(key);
    if (it != by_pair.end()) return it->second;
    int deg = W->symbols().degree(w) + A.V.syms->degree(v);
    SymId s = tab.intern(W->symbols().name(w) + " (x) " + A.V.syms->name(v), deg);
    parts.resize(static_cast<size_t>(s) + 1, {0, 0});
    parts[static_cast<size_t>(s)] = {w, v};
    by_pair.emplace(key, s);
    return s;
  }

  SparseVec embed(const SparseVec& wv, const SparseVec& vv) {
    SparseVec out;
    for (const auto& [w, cw] : wv.terms()) {
      for (const auto& [v, cv] : vv.terms()) out.add_term(intern(w, v), cw * cv);
    }
    return out;
  }

  const std::vector<SymId>& slice(int k) {
    auto it = slices.find(k);
    if (it != slices.end()) return it->second;
    std::vector<SymId> out;
    for (int d1 = 0; d1 <= W->max_degree(); ++d1) {
      int d2 = k - d1;
      if (d2 < A.V.min_deg || d2 > A.V.max_deg) continue;
      std::vector<SymId> vs = A.V.basis_of(d2);
      if (vs.empty()) continue;
      for (SymId w : W->basis(d1)) {
        for (SymId v : vs) out.push_back(intern(w, v));
      }
    }
    return slices.emplace(k, std::move(out)).first->second;
  }
};

std::shared_ptr<PairState> make_pair_state(std::shared_ptr<WeilAlgebra> W,
                                           const DgModuleAction& A) {
  auto ps = std::make_shared<PairState>();
  ps->W = std::move(W);
  ps->A = A;
  for (const Multiset& m : A.letters) {
    ps->tmon.emplace_back(multinomial(m), ps->W->t_monomial(m));
  }
  return ps;
}

// d = d_W + d_V - i_V(t) + l_V(theta) served on the pair table.
ColumnOp cartan_d(std::shared_ptr<PairState> ps) {
  return [ps](SymId s) {
    auto [w, v] = ps->parts[static_cast<size_t>(s)];
    const SparseVec ew = SparseVec::unit(w);
    const SparseVec ev = SparseVec::unit(v);
    bool wodd = (ps->W->symbols().degree(w) & 1) != 0;
    Rational sw = wodd ? Rational(-1) : Rational(1);
    SparseVec out = ps->embed(ps->W->d_sym(w), ev);
    out += ps->embed(ew, ps->A.V.d(v)).scale(sw);
    for (size_t li = 0; li < ps->A.letters.size(); ++li) {
      SparseVec iv = ps->A.i_of[li](v);
      if (iv.is_zero()) continue;
      out.axpy(-sw * ps->tmon[li].first, ps->embed(ps->W->mul(ps->tmon[li].second, w), iv));
    }
    for (int a = 0; a < ps->W->dim_g(); ++a) {
      SparseVec lv = ps->A.l_of[static_cast<size_t>(a)](v);
      if (lv.is_zero()) continue;
      out += ps->embed(ps->W->mul(ps->W->theta(a), w), lv);
    }
    return out;
  };
}

ColumnOp pair_i_w(std::shared_ptr<PairState> ps, int a) {
  return [ps, a](SymId s) {
    auto [w, v] = ps->parts[static_cast<size_t>(s)];
    return ps->embed(ps->W->contract_sym(a, w), SparseVec::unit(v));
  };
}

ColumnOp pair_l(std::shared_ptr<PairState> ps, int a) {
  return [ps, a](SymId s) {
    auto [w, v] = ps->parts[static_cast<size_t>(s)];
    SparseVec out = ps->embed(ps->W->lie_der_sym(a, w), SparseVec::unit(v));
    out += ps->embed(SparseVec::unit(w), ps->A.l_of[static_cast<size_t>(a)](v));
    return out;
  };
}

GDiffSpace pair_space(std::shared_ptr<PairState> ps, ColumnOp d, std::vector<ColumnOp> I,
                      std::vector<ColumnOp> L) {
  GDiffSpace U;
  U.lie = &ps->W->lie();
  U.syms = &ps->tab;
  U.basis_of = [ps](int k) { return ps->slice(k); };
  U.d = std::move(d);
  U.I = std::move(I);
  U.L = std::move(L);
  U.min_deg = ps->A.V.min_deg;
  U.max_deg = ps->W->max_degree() + ps->A.V.max_deg;
  U.pair_backed = true;
  U.state = ps;
  return U;
}

std::shared_ptr<PairState> pair_state_of(const GDiffSpace& U) {
  if (!U.pair_backed || !U.state) {
    throw std::invalid_argument("space is not backed by a pair table");
  }
  return std::static_pointer_cast<PairState>(U.state);
}

}  // namespace

std::pair<SymId, SymId> tensor_parts(const GDiffSpace& U, SymId s) {
  return pair_state_of(U)->parts.at(static_cast<size_t>(s));
}

SymId tensor_pair(const GDiffSpace& U, SymId w, SymId v) { return pair_state_of(U)->intern(w, v); }

CartanModel cartan_model(std::shared_ptr<WeilAlgebra> W, const DgModuleAction& A, int sweep_lo,
                         int sweep_hi, int validate_layers) {
  RelationReport mod = validate_dg_module(A, validate_layers);
  if (!mod.ok) {
    throw std::invalid_argument("not a module over the acyclic DGLA: " + mod.witness);
  }
  auto ps = make_pair_state(std::move(W), A);
  std::vector<ColumnOp> I, L;
  for (int a = 0; a < ps->W->dim_g(); ++a) {
    I.push_back(pair_i_w(ps, a));
    L.push_back(pair_l(ps, a));
  }
  CartanModel out{ps->W, A, pair_space(ps, cartan_d(ps), std::move(I), std::move(L)), {}};
  out.relations = check_g_differential_space(out.U, sweep_lo, sweep_hi);
  return out;
}

namespace {

// One layer of a translated group-like element: Weil symbol of the target
// table, the action operators of the word's letters, the word's parity, and
// the coefficient.
struct ActTerm {
  SymId w;
  std::vector<int> ops;  // indices into A.i_of
  bool odd;
  Rational c;
};

struct PhiState {
  std::shared_ptr<PairState> ps;
  std::vector<ActTerm> phi, phi_inv;
  std::vector<std::vector<ActTerm>> y;  // per Lie index
};

// rho-expansion of one algebra basis symbol into sums of action-letter
// compositions: a generator letter maps to its own action operator (deeper
// letters to zero), a window stratum row expands through the tensor-word
// realization of the free Lie algebra (concatenation products of letters).
using OpSeqs = std::vector<std::pair<std::vector<int>, Rational>>;

struct Translator {
  const PairState& ps;
  const BigHolonomy& big;
  std::vector<int> fl_to_letter;
  std::unordered_map<SymId, OpSeqs> memo;

  Translator(const PairState& p, const BigHolonomy& b) : ps(p), big(b) {
    for (int li = 0; li < big.A.letter_count(); ++li) {
      int fi = big.A.letter_fl_index(li);
      if (fi >= 0) {
        fl_to_letter.resize(std::max(fl_to_letter.size(), static_cast<size_t>(fi) + 1), -1);
        fl_to_letter[static_cast<size_t>(fi)] = li;
      }
    }
  }

  int action_index(int dg_letter) const {
    return ps.A.letter_index(big.A.letter_multiset(dg_letter));
  }

  const OpSeqs& expand(SymId g) {
    auto it = memo.find(g);
    if (it != memo.end()) return it->second;
    OpSeqs out;
    int li = big.A.letter_index_of(g);
    if (li >= 0) {
      int ai = action_index(li);
      if (ai >= 0) out.push_back({{ai}, Rational(1)});
    } else if (big.A.l_index_of(g) >= 0) {
      throw std::logic_error("group-like word contains a degree-zero generator");
    } else {
      int deg = big.A.symbols().degree(g);
      SparseVec words = big.A.tensor_of(deg, SparseVec::unit(g));
      for (const auto& [wid, c] : words.terms()) {
        const std::vector<uint8_t>& seq = big.A.free_lie().word(deg, wid);
        std::vector<int> ops;
        bool drop = false;
        for (uint8_t f : seq) {
          int ai = action_index(fl_to_letter[f]);
          if (ai < 0) {
            drop = true;
            break;
          }
          ops.push_back(ai);
        }
        if (!drop) out.push_back({std::move(ops), c});
      }
    }
    return memo.emplace(g, std::move(out)).first->second;
  }
};

std::vector<ActTerm> translate_element(Translator& tr, const SparseVec& elem) {
  std::vector<ActTerm> out;
  for (const auto& [pairsym, c] : elem.terms()) {
    auto [bw, bu] = tr.big.E->split(pairsym);
    SymId wsym = tr.ps.W->id_of_packed(tr.big.W.packed(bw));
    bool odd = (tr.big.U->degree_of(bu) & 1) != 0;
    OpSeqs partial;
    partial.push_back({{}, c});
    for (SymId g : tr.big.U->word(bu)) {
      const OpSeqs& ex = tr.expand(g);
      if (ex.empty()) {
        partial.clear();
        break;
      }
      OpSeqs next;
      for (const auto& [s0, c0] : partial) {
        for (const auto& [s1, c1] : ex) {
          std::vector<int> s = s0;
          s.insert(s.end(), s1.begin(), s1.end());
          next.push_back({std::move(s), c0 * c1});
        }
      }
      partial = std::move(next);
    }
    for (auto& [seq, cc] : partial) {
      out.push_back(ActTerm{wsym, std::move(seq), odd, cc});
    }
  }
  return out;
}

SparseVec act_by(const std::shared_ptr<PairState>& ps, const std::vector<ActTerm>& elem,
                 SymId s) {
  auto [w, v] = ps->parts[static_cast<size_t>(s)];
  bool wodd = (ps->W->symbols().degree(w) & 1) != 0;
  SparseVec out;
  for (const ActTerm& t : elem) {
    SparseVec vv = SparseVec::unit(v);
    for (auto it = t.ops.rbegin(); it != t.ops.rend() && !vv.is_zero(); ++it) {
      vv = apply_columns(ps->A.i_of[static_cast<size_t>(*it)], vv);
    }
    if (vv.is_zero()) continue;
    Rational coef = (t.odd && wodd) ? -t.c : t.c;
    out.axpy(coef, ps->embed(ps->W->mul(t.w, w), vv));
  }
  return out;
}

}  // namespace

KalkmanModel kalkman_transform(const CartanModel& U, const BigHolonomy& phi, int sweep_lo,
                               int sweep_hi) {
  auto ps = std::static_pointer_cast<PairState>(U.U.state);
  auto st = std::make_shared<PhiState>();
  st->ps = ps;
  Translator tr(*ps, phi);
  for (const SparseVec& layer : phi.phi_layers) {
    for (ActTerm& t : translate_element(tr, layer)) st->phi.push_back(std::move(t));
  }
  for (const SparseVec& layer : phi.phi_inv_layers) {
    for (ActTerm& t : translate_element(tr, layer)) st->phi_inv.push_back(std::move(t));
  }
  for (int a = 0; a < ps->W->dim_g(); ++a) {
    st->y.push_back(translate_element(tr, phi.y_element(a)));
  }

  KalkmanModel out;
  out.phi_op = [st](SymId s) { return act_by(st->ps, st->phi, s); };
  out.phi_inv_op = [st](SymId s) { return act_by(st->ps, st->phi_inv, s); };
  for (int a = 0; a < ps->W->dim_g(); ++a) {
    out.Y.push_back([st, a](SymId s) { return act_by(st->ps, st->y[static_cast<size_t>(a)], s); });
  }

  ColumnOp dprime = [st](SymId s) {
    auto& ps2 = st->ps;
    auto [w, v] = ps2->parts[static_cast<size_t>(s)];
    bool wodd = (ps2->W->symbols().degree(w) & 1) != 0;
    SparseVec outv = ps2->embed(ps2->W->d_sym(w), SparseVec::unit(v));
    SparseVec dv = ps2->A.V.d(v);
    if (!dv.is_zero()) {
      outv += ps2->embed(SparseVec::unit(w), dv).scale(wodd ? Rational(-1) : Rational(1));
    }
    return outv;
  };
  std::vector<ColumnOp> Iprime, Lprime;
  for (int a = 0; a < ps->W->dim_g(); ++a) {
    ColumnOp yop = out.Y[static_cast<size_t>(a)];
    ColumnOp iw = pair_i_w(ps, a);
    Iprime.push_back([yop, iw](SymId s) { return iw(s) + yop(s); });
    Lprime.push_back(pair_l(ps, a));
  }
  out.Uprime = pair_space(ps, dprime, std::move(Iprime), std::move(Lprime));

  RelationScan sc;
  sc.syms = &ps->tab;
  const LieData& L = ps->W->lie();
  for (int k = sweep_lo; k <= sweep_hi; ++k) {
    for (SymId s : ps->slice(k)) {
      sc.instance("conjugated differential vs d_W + d_V", s, [&] {
        return apply_columns(out.phi_op, apply_columns(U.U.d, out.phi_inv_op(s))) -
               out.Uprime.d(s);
      });
      for (int a = 0; a < L.dim; ++a) {
        sc.instance("conjugated I(" + L.names[static_cast<size_t>(a)] + ") vs I_W + Y", s, [&] {
          return apply_columns(out.phi_op,
                               apply_columns(U.U.I[static_cast<size_t>(a)], out.phi_inv_op(s))) -
                 out.Uprime.I[static_cast<size_t>(a)](s);
        });
        sc.instance("conjugated L(" + L.names[static_cast<size_t>(a)] + ") vs L_W + l_V", s, [&] {
          return apply_columns(out.phi_op,
                               apply_columns(U.U.L[static_cast<size_t>(a)], out.phi_inv_op(s))) -
                 out.Uprime.L[static_cast<size_t>(a)](s);
        });
      }
    }
  }
  out.conjugation = sc.finish();
  return out;
}

GDiffSpace cartan_basic_model(std::shared_ptr<WeilAlgebra> W, const DgModuleAction& A) {
  auto ps = make_pair_state(std::move(W), A);

  // theta-free slices only
  auto basis = [ps](int k) {
    std::vector<SymId> out;
    for (int d1 = 0; d1 <= ps->W->max_degree(); d1 += 2) {
      int d2 = k - d1;
      if (d2 < ps->A.V.min_deg || d2 > ps->A.V.max_deg) continue;
      std::vector<SymId> vs = ps->A.V.basis_of(d2);
      if (vs.empty()) continue;
      for (SymId w : ps->W->basis(d1)) {
        if (ps->W->theta_mask(w) != 0) continue;
        for (SymId v : vs) out.push_back(ps->intern(w, v));
      }
    }
    return out;
  };

  ColumnOp d = [ps](SymId s) {
    auto [w, v] = ps->parts[static_cast<size_t>(s)];
    SparseVec out = ps->embed(SparseVec::unit(w), ps->A.V.d(v));
    for (size_t li = 0; li < ps->A.letters.size(); ++li) {
      SparseVec iv = ps->A.i_of[li](v);
      if (iv.is_zero()) continue;
      out.axpy(-ps->tmon[li].first, ps->embed(ps->W->mul(ps->tmon[li].second, w), iv));
    }
    return out;
  };

  std::vector<ColumnOp> I, L;
  for (int a = 0; a < ps->W->dim_g(); ++a) {
    I.push_back(zero_op());
    L.push_back(pair_l(ps, a));
  }
  GDiffSpace U = pair_space(ps, std::move(d), std::move(I), std::move(L));
  U.basis_of = basis;
  return U;
}

GDiffSpace weil_model_pullback(std::shared_ptr<WeilAlgebra> W, const GDiffSpace& V) {
  DgModuleAction A = pullback_module(V);
  auto ps = make_pair_state(std::move(W), A);
  ColumnOp d = [ps](SymId s) {
    auto [w, v] = ps->parts[static_cast<size_t>(s)];
    bool wodd = (ps->W->symbols().degree(w) & 1) != 0;
    SparseVec out = ps->embed(ps->W->d_sym(w), SparseVec::unit(v));
    SparseVec dv = ps->A.V.d(v);
    if (!dv.is_zero()) {
      out += ps->embed(SparseVec::unit(w), dv).scale(wodd ? Rational(-1) : Rational(1));
    }
    return out;
  };
  std::vector<ColumnOp> I, L;
  for (int a = 0; a < ps->W->dim_g(); ++a) {
    ColumnOp iw = pair_i_w(ps, a);
    ColumnOp iv = [ps, a](SymId s) {
      auto [w, v] = ps->parts[static_cast<size_t>(s)];
      bool wodd = (ps->W->symbols().degree(w) & 1) != 0;
      SparseVec x = ps->A.V.I[static_cast<size_t>(a)](v);
      if (x.is_zero()) return SparseVec();
      return ps->embed(SparseVec::unit(w), x).scale(wodd ? Rational(-1) : Rational(1));
    };
    I.push_back([iw, iv](SymId s) { return iw(s) + iv(s); });
    L.push_back(pair_l(ps, a));
  }
  return pair_space(ps, std::move(d), std::move(I), std::move(L));
}

std::vector<int> basic_cohomology_dims(const GDiffSpace& U, int k_lo, int k_hi) {
  if (k_lo > k_hi) throw std::invalid_argument("empty degree range");
  const int dim = U.lie->dim;
  const int32_t stride = static_cast<int32_t>(1) << 24;

  std::map<int, std::vector<SparseVec>> basic;
  for (int k = k_lo - 1; k <= k_hi + 1; ++k) {
    std::vector<SymId> slice = U.basis_of(k);
    if (slice.empty()) {
      basic[k] = {};
      continue;
    }
    std::vector<SparseVec> cols;
    cols.reserve(slice.size());
    for (SymId s : slice) {
      SparseVec stacked;
      for (int a = 0; a < dim; ++a) {
        const SparseVec is = U.I[static_cast<size_t>(a)](s);
        for (const auto& [t, c] : is.terms()) {
          stacked.add_term(static_cast<SymId>(a) * stride + t, c);
        }
        const SparseVec ls = U.L[static_cast<size_t>(a)](s);
        for (const auto& [t, c] : ls.terms()) {
          stacked.add_term((static_cast<SymId>(dim + a)) * stride + t, c);
        }
      }
      cols.push_back(std::move(stacked));
    }
    basic[k] = nullspace_of_columns(cols, slice);
  }

  // coordinate table of the basic bases, then the induced differentials
  SymbolTable ctab;
  std::map<int, std::vector<SymId>> coords;
  for (int k = k_lo - 1; k <= k_hi + 1; ++k) {
    std::vector<SymId> ids;
    for (size_t i = 0; i < basic[k].size(); ++i) {
      ids.push_back(ctab.intern("basic " + std::to_string(k) + " #" + std::to_string(i), k));
    }
    coords[k] = std::move(ids);
  }

  auto d_map = [&](int k) {
    SparseLinearMap m(&ctab, coords[k], 1);
    for (size_t i = 0; i < basic[k].size(); ++i) {
      SparseVec db = apply_columns(U.d, basic[k][static_cast<size_t>(i)]);
      SparseVec col;
      if (!db.is_zero()) {
        auto c = solve_in_span(basic[k + 1], db);
        if (!c) {
          throw std::runtime_error(
              "differential leaves the basic subcomplex at degree " + std::to_string(k) +
              " (operator tables are inconsistent)");
        }
        for (const auto& [j, cf] : c->terms()) {
          col.add_term(coords[k + 1][static_cast<size_t>(j)], cf);
        }
      }
      m.set_column(coords[k][i], col);
    }
    return m;
  };

  std::vector<int> dims;
  for (int k = k_lo; k <= k_hi; ++k) {
    dims.push_back(cohomology_dim(d_map(k - 1), d_map(k)));
  }
  return dims;
}

EquivariantReport equivariant_cohomology(const std::function<GDiffSpace(int)>& model_at_cutoff,
                                         int k_lo, int k_hi, int cutoff) {
  EquivariantReport rep;
  rep.k_lo = k_lo;
  rep.k_hi = k_hi;
  rep.cutoff = cutoff;
  rep.dims = basic_cohomology_dims(model_at_cutoff(cutoff), k_lo, k_hi);
  rep.dims_next = basic_cohomology_dims(model_at_cutoff(cutoff + 1), k_lo, k_hi);
  for (size_t i = 0; i < rep.dims.size(); ++i) {
    if (rep.dims[i] != rep.dims_next[i]) {
      throw CutoffRefusal("basic cohomology unstable at degree " +
                          std::to_string(k_lo + static_cast<int>(i)) + ": dimension " +
                          std::to_string(rep.dims[i]) + " at cutoff " + std::to_string(cutoff) +
                          " vs " + std::to_string(rep.dims_next[i]) + " at cutoff " +
                          std::to_string(cutoff + 1));
    }
  }
  rep.stable = true;
  return rep;
}

}  // namespace dgla
