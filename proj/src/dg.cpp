#include "dgla/dg.hpp"

#include <algorithm>
#include <cassert>
#include <random>
#include <stdexcept>

#include "dgla/cone.hpp"

namespace dgla {

namespace {

int koszul_sign(int da, int db) { return (da & 1) && (db & 1) ? -1 : 1; }

uint64_t pair_key(SymId a, SymId b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

// All ordered splittings of a sorted multiset into two nonempty parts.
std::vector<std::pair<Multiset, Multiset>> ordered_splittings(const Multiset& m) {
  std::vector<std::pair<uint8_t, int>> runs;  // (value, multiplicity)
  for (uint8_t v : m) {
    if (!runs.empty() && runs.back().first == v)
      ++runs.back().second;
    else
      runs.emplace_back(v, 1);
  }
  std::vector<std::pair<Multiset, Multiset>> out;
  std::vector<int> take(runs.size(), 0);
  while (true) {
    Multiset m1, m2;
    for (size_t i = 0; i < runs.size(); ++i) {
      for (int t = 0; t < take[i]; ++t) m1.push_back(runs[i].first);
      for (int t = take[i]; t < runs[i].second; ++t) m2.push_back(runs[i].first);
    }
    if (!m1.empty() && !m2.empty()) out.emplace_back(std::move(m1), std::move(m2));
    size_t i = 0;
    for (; i < runs.size(); ++i) {
      if (take[i] < runs[i].second) {
        ++take[i];
        break;
      }
      take[i] = 0;
    }
    if (i == runs.size()) break;
  }
  return out;
}

}  // namespace

DgAlgebra::DgAlgebra(const LieData& L, int cutoff, int letter_layers)
    : L_(L), cutoff_(cutoff) {
  if (cutoff_ < 1) throw std::invalid_argument("cutoff must be >= 1");
  layers_ = std::max((cutoff_ + 1) / 2, letter_layers);
  label_ = L_.label + "@" + std::to_string(cutoff_);

  std::vector<int> fl_degrees;
  for (int k = 1; k <= layers_; ++k) {
    for (Multiset& m : multisets_of_size(L_.dim, k)) {
      Letter lt;
      lt.degree = 1 - 2 * k;
      lt.multinom = multinomial(m);
      lt.sym = -1;
      lt.fl_index = -1;
      if (lt.degree >= -cutoff_) {
        lt.fl_index = static_cast<int>(fl_degrees.size());
        fl_degrees.push_back(lt.degree);
      }
      letter_by_key_.emplace(multiset_key(m), static_cast<int>(letters_.size()));
      lt.m = std::move(m);
      letters_.push_back(std::move(lt));
    }
  }
  if (letters_.size() > 250) throw std::invalid_argument("generator alphabet too large");
  fl_ = std::make_unique<FreeLieAlgebra>(fl_degrees, cutoff_);

  for (int a = 0; a < L_.dim; ++a) {
    SymId s = tab_.intern("l(" + L_.names[static_cast<size_t>(a)] + ")", 0);
    l_syms_.push_back(s);
    info_.push_back({0, a, 0});
  }
  stratum_syms_.resize(static_cast<size_t>(cutoff_) + 1);
  for (int D = 1; D <= cutoff_; ++D) {
    const auto& prov = fl_->provenance(-D);
    for (size_t r = 0; r < prov.size(); ++r) {
      SymId s;
      if (prov[r].sub == -1) {
        // generator row: free Lie letter index == index in letters_
        Letter& lt = letters_[static_cast<size_t>(prov[r].gen)];
        s = tab_.intern("i(" + multiset_name(lt.m, L_) + ")", -D);
        lt.sym = s;
      } else {
        s = tab_.intern("b(" + std::to_string(-D) + "," + std::to_string(r) + ")", -D);
      }
      info_.push_back({1, D, static_cast<int>(r)});
      stratum_syms_[static_cast<size_t>(D)].push_back(s);
    }
  }
  for (size_t li = 0; li < letters_.size(); ++li) {
    if (letters_[li].fl_index >= 0) continue;
    SymId s = tab_.intern("i(" + multiset_name(letters_[li].m, L_) + ")", letters_[li].degree);
    letters_[li].sym = s;
    info_.push_back({2, static_cast<int>(li), 0});
  }
}

std::vector<SymId> DgAlgebra::basis(int degree) const {
  if (degree == 0) return l_syms_;
  if (degree <= -1 && degree >= -cutoff_) return stratum_syms_[static_cast<size_t>(-degree)];
  std::vector<SymId> out;
  if (degree < -cutoff_) {
    for (const Letter& lt : letters_)
      if (lt.fl_index < 0 && lt.degree == degree) out.push_back(lt.sym);
  }
  return out;
}

int DgAlgebra::l_index_of(SymId s) const {
  const SymInfo& in = info_[static_cast<size_t>(s)];
  return in.kind == 0 ? in.x : -1;
}

int DgAlgebra::letter_index_of(SymId s) const {
  const SymInfo& in = info_[static_cast<size_t>(s)];
  if (in.kind == 2) return in.x;
  if (in.kind == 1) {
    const auto& prov = fl_->provenance(-in.x);
    if (prov[static_cast<size_t>(in.y)].sub == -1) return prov[static_cast<size_t>(in.y)].gen;
  }
  return -1;
}

int DgAlgebra::letter_index(const Multiset& m) const {
  auto it = letter_by_key_.find(multiset_key(m));
  return it == letter_by_key_.end() ? -1 : it->second;
}

SparseVec DgAlgebra::stratum_from_coords(int degree, const SparseVec& coords) const {
  const auto& syms = stratum_syms_[static_cast<size_t>(-degree)];
  SparseVec out;
  std::vector<std::pair<SymId, Rational>> raw;
  raw.reserve(coords.terms().size());
  for (const auto& [row, c] : coords.terms()) raw.emplace_back(syms[static_cast<size_t>(row)], c);
  return SparseVec::collect(std::move(raw));
}

const SparseVec& DgAlgebra::bracket_ref(SymId a, SymId b) const {
  uint64_t key = pair_key(a, b);
  auto it = br_memo_.find(key);
  if (it != br_memo_.end()) return it->second;
  SparseVec v = compute_bracket(a, b);
  return br_memo_.emplace(key, std::move(v)).first->second;
}

SparseVec DgAlgebra::bracket_vec_ref(const SparseVec& x, SymId b) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) out.axpy(c, bracket_ref(s, b));
  return out;
}

SparseVec DgAlgebra::bracket_sym_vec(SymId a, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [s, c] : y.terms()) out.axpy(c, bracket_ref(a, s));
  return out;
}

SparseVec DgAlgebra::compute_bracket(SymId a, SymId b) const {
  const SymInfo& ia = info_[static_cast<size_t>(a)];
  const SymInfo& ib = info_[static_cast<size_t>(b)];
  int da = tab_.degree(a), db = tab_.degree(b);

  if (ia.kind == 0 && ib.kind == 0) {
    SparseVec out;
    SparseVec lb = L_.bracket(ia.x, ib.x);
    for (const auto& [c, coef] : lb.terms())
      out.add_term(l_syms_[static_cast<size_t>(c)], coef);
    return out;
  }
  if (ia.kind == 0) {
    int lib = letter_index_of(b);
    if (lib >= 0) {
      // [l(x), i(m)] = i(ad_x m), staying in the same generator layer
      std::vector<std::pair<SymId, Rational>> raw;
      for (auto& [mm, c] : ad_on_multiset(L_, ia.x, letters_[static_cast<size_t>(lib)].m)) {
        int lj = letter_index(mm);
        if (lj < 0) throw std::logic_error("ad image left the generator alphabet");
        raw.emplace_back(letters_[static_cast<size_t>(lj)].sym, c);
      }
      return SparseVec::collect(std::move(raw));
    }
    // derived row: expand its spanning candidate
    const auto& prov = fl_->provenance(-ib.x)[static_cast<size_t>(ib.y)];
    const auto& cand = fl_->candidates(-ib.x)[static_cast<size_t>(
        fl_->candidate_of(-ib.x, prov.gen, prov.sub))];
    SymId gsym = letters_[static_cast<size_t>(prov.gen)].sym;
    int wdeg = db - tab_.degree(gsym);
    SymId wsym = stratum_syms_[static_cast<size_t>(-wdeg)][static_cast<size_t>(prov.sub)];
    // [l, [g,w]] = [[l,g], w] + [g, [l,w]]
    SparseVec acc = bracket_vec_ref(bracket_ref(a, gsym), wsym);
    acc += bracket_sym_vec(gsym, bracket_ref(a, wsym));
    Rational lead;
    for (const auto& [row, c] : cand.coords.terms()) {
      if (row == ib.y) {
        lead = c;
        continue;
      }
      acc.axpy(-c, bracket_ref(a, stratum_syms_[static_cast<size_t>(ib.x)][static_cast<size_t>(row)]));
    }
    if (lead.is_zero()) throw std::logic_error("candidate lost its own row");
    acc.scale(lead.inverse());
    return acc;
  }
  if (ib.kind == 0) {
    SparseVec v = bracket_ref(b, a);
    v.scale(Rational(-koszul_sign(da, db)));
    return v;
  }

  // both of negative degree
  if (da + db < -cutoff_)
    throw CutoffRefusal("bracket at degree " + std::to_string(da + db) + " is below the window [-" +
                        std::to_string(cutoff_) + ", 0]; rebuild with a larger cutoff");
  int lia = letter_index_of(a);
  if (lia >= 0) {
    const auto& cand = fl_->candidates(da + db)[static_cast<size_t>(
        fl_->candidate_of(da + db, letters_[static_cast<size_t>(lia)].fl_index, ib.y))];
    return stratum_from_coords(da + db, cand.coords);
  }
  if (letter_index_of(b) >= 0) {
    SparseVec v = bracket_ref(b, a);
    v.scale(Rational(-koszul_sign(da, db)));
    return v;
  }
  // both derived: expand b's spanning candidate, [a,[g,w]] = [[a,g],w] + (-1)^{|a||g|}[g,[a,w]]
  const auto& prov = fl_->provenance(-ib.x)[static_cast<size_t>(ib.y)];
  const auto& cand = fl_->candidates(-ib.x)[static_cast<size_t>(
      fl_->candidate_of(-ib.x, prov.gen, prov.sub))];
  SymId gsym = letters_[static_cast<size_t>(prov.gen)].sym;
  int dg = tab_.degree(gsym);
  int wdeg = db - dg;
  SymId wsym = stratum_syms_[static_cast<size_t>(-wdeg)][static_cast<size_t>(prov.sub)];
  SparseVec acc = bracket_vec_ref(bracket_ref(a, gsym), wsym);
  acc.axpy(Rational(koszul_sign(da, dg)), bracket_sym_vec(gsym, bracket_ref(a, wsym)));
  Rational lead;
  for (const auto& [row, c] : cand.coords.terms()) {
    if (row == ib.y) {
      lead = c;
      continue;
    }
    acc.axpy(-c, bracket_ref(a, stratum_syms_[static_cast<size_t>(ib.x)][static_cast<size_t>(row)]));
  }
  if (lead.is_zero()) throw std::logic_error("candidate lost its own row");
  acc.scale(lead.inverse());
  return acc;
}

SparseVec DgAlgebra::bracket_sym(SymId a, SymId b) const { return bracket_ref(a, b); }

const SparseVec& DgAlgebra::d_ref(SymId s) const {
  auto it = d_memo_.find(s);
  if (it != d_memo_.end()) return it->second;
  SparseVec v = compute_d(s);
  return d_memo_.emplace(s, std::move(v)).first->second;
}

SparseVec DgAlgebra::compute_d(SymId s) const {
  const SymInfo& in = info_[static_cast<size_t>(s)];
  if (in.kind == 0) return {};
  int li = letter_index_of(s);
  if (li >= 0) {
    const Letter& lt = letters_[static_cast<size_t>(li)];
    int k = static_cast<int>(lt.m.size());
    if (k == 1) return SparseVec::unit(l_syms_[static_cast<size_t>(lt.m[0])]);
    if (2 - 2 * k < -cutoff_)
      throw CutoffRefusal("differential of the layer-" + std::to_string(k) +
                          " generator lands at degree " + std::to_string(2 - 2 * k) +
                          ", below the window; rebuild with a larger cutoff");
    // d i(m) = 1/2 sum over ordered splittings of w(m1,m2) [i(m1), i(m2)]
    SparseVec acc;
    Rational inv_mult = lt.multinom.inverse();
    for (auto& [m1, m2] : ordered_splittings(lt.m)) {
      Rational w = multinomial(m1) * multinomial(m2) * inv_mult;
      int l1 = letter_index(m1), l2 = letter_index(m2);
      if (l1 < 0 || l2 < 0) throw std::logic_error("splitting left the generator alphabet");
      acc.axpy(w * rat(1, 2), bracket_ref(letters_[static_cast<size_t>(l1)].sym,
                                          letters_[static_cast<size_t>(l2)].sym));
    }
    return acc;
  }
  // derived row: d[g,w] = [dg, w] + (-1)^{|g|}[g, dw]
  const auto& prov = fl_->provenance(-in.x)[static_cast<size_t>(in.y)];
  const auto& cand = fl_->candidates(-in.x)[static_cast<size_t>(
      fl_->candidate_of(-in.x, prov.gen, prov.sub))];
  SymId gsym = letters_[static_cast<size_t>(prov.gen)].sym;
  int dg = tab_.degree(gsym);
  int wdeg = -in.x - dg;
  SymId wsym = stratum_syms_[static_cast<size_t>(-wdeg)][static_cast<size_t>(prov.sub)];
  SparseVec acc = bracket_vec_ref(d_ref(gsym), wsym);
  acc.axpy(Rational((dg & 1) ? -1 : 1), bracket_sym_vec(gsym, d_ref(wsym)));
  Rational lead;
  for (const auto& [row, c] : cand.coords.terms()) {
    if (row == in.y) {
      lead = c;
      continue;
    }
    acc.axpy(-c, d_ref(stratum_syms_[static_cast<size_t>(in.x)][static_cast<size_t>(row)]));
  }
  if (lead.is_zero()) throw std::logic_error("candidate lost its own row");
  acc.scale(lead.inverse());
  return acc;
}

SparseVec DgAlgebra::d_sym(SymId s) const { return d_ref(s); }

SparseVec DgAlgebra::tensor_of(int degree, const SparseVec& element) const {
  SparseVec out;
  for (const auto& [s, c] : element.terms()) {
    const SymInfo& in = info_[static_cast<size_t>(s)];
    if (in.kind != 1 || -in.x != degree)
      throw std::logic_error("tensor realization needs window symbols of one negative degree");
    out.axpy(c, fl_->lie_basis(degree)[static_cast<size_t>(in.y)]);
  }
  return out;
}

std::optional<SparseVec> DgAlgebra::from_tensor(int degree, const SparseVec& words) const {
  auto coords = fl_->lie_coords(degree, words);
  if (!coords) return std::nullopt;
  return stratum_from_coords(degree, *coords);
}

SparseVec DgAlgebra::l_action_tensor(int a, int degree, const SparseVec& words) const {
  std::vector<std::pair<SymId, Rational>> raw;
  for (const auto& [wid, c] : words.terms()) {
    const auto& w = fl_->word(degree, wid);
    for (size_t pos = 0; pos < w.size(); ++pos) {
      const Letter& lt = letters_[static_cast<size_t>(w[pos])];
      for (auto& [mm, cc] : ad_on_multiset(L_, a, lt.m)) {
        int lj = letter_index(mm);
        std::vector<uint8_t> nw = w;
        nw[pos] = static_cast<uint8_t>(lj);
        raw.emplace_back(fl_->word_id(degree, nw), c * cc);
      }
    }
  }
  return SparseVec::collect(std::move(raw));
}

void DgAlgebra::tensor_d(int degree, const SparseVec& words, SparseVec& word_part,
                         std::vector<std::pair<int64_t, Rational>>& l_remainder) const {
  std::vector<std::pair<SymId, Rational>> raw;
  for (const auto& [wid, c] : words.terms()) {
    const auto& w = fl_->word(degree, wid);
    for (size_t pos = 0; pos < w.size(); ++pos) {
      // all generators are odd, so the Koszul prefix sign is (-1)^pos
      Rational s = (pos & 1) ? -c : c;
      const Letter& lt = letters_[static_cast<size_t>(w[pos])];
      int k = static_cast<int>(lt.m.size());
      if (k == 1) {
        int x = lt.m[0];
        // w1 l(x) w2 = w1 (ad_x w2) + (w1 w2) l(x)
        for (size_t q = pos + 1; q < w.size(); ++q) {
          const Letter& lq = letters_[static_cast<size_t>(w[q])];
          for (auto& [mm, cc] : ad_on_multiset(L_, x, lq.m)) {
            int lj = letter_index(mm);
            std::vector<uint8_t> nw;
            nw.reserve(w.size() - 1);
            nw.insert(nw.end(), w.begin(), w.begin() + static_cast<long>(pos));
            nw.insert(nw.end(), w.begin() + static_cast<long>(pos) + 1, w.end());
            nw[q - 1] = static_cast<uint8_t>(lj);
            raw.emplace_back(fl_->word_id(degree + 1, nw), s * cc);
          }
        }
        std::vector<uint8_t> rest;
        rest.reserve(w.size() - 1);
        rest.insert(rest.end(), w.begin(), w.begin() + static_cast<long>(pos));
        rest.insert(rest.end(), w.begin() + static_cast<long>(pos) + 1, w.end());
        int64_t key = static_cast<int64_t>(fl_->word_id(degree + 1, rest)) *
                          static_cast<int64_t>(L_.dim) + x;
        l_remainder.emplace_back(key, s);
      } else {
        Rational inv_mult = lt.multinom.inverse();
        for (auto& [m1, m2] : ordered_splittings(lt.m)) {
          Rational wgt = multinomial(m1) * multinomial(m2) * inv_mult;
          int l1 = letter_index(m1), l2 = letter_index(m2);
          std::vector<uint8_t> nw;
          nw.reserve(w.size() + 1);
          nw.insert(nw.end(), w.begin(), w.begin() + static_cast<long>(pos));
          nw.push_back(static_cast<uint8_t>(l1));
          nw.push_back(static_cast<uint8_t>(l2));
          nw.insert(nw.end(), w.begin() + static_cast<long>(pos) + 1, w.end());
          raw.emplace_back(fl_->word_id(degree + 1, nw), s * wgt);
        }
      }
    }
  }
  word_part = SparseVec::collect(std::move(raw));
}

void DgAlgebra::verify(Reporter& rep) const {
  AxiomSweepOptions opts;
  opts.id_prefix = "dg/" + label_ + "/";
  verify_dgla_axioms(*this, rep, opts);

  // Certify every served bracket entry against the tensor realization.
  {
    std::string bad;
    long long n = 0;
    std::vector<uint64_t> keys;
    keys.reserve(br_memo_.size());
    for (const auto& [key, val] : br_memo_) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (uint64_t key : keys) {
      const SparseVec& val = br_memo_.at(key);
      SymId a = static_cast<SymId>(key >> 32), b = static_cast<SymId>(key & 0xffffffffu);
      const SymInfo& ia = info_[static_cast<size_t>(a)];
      const SymInfo& ib = info_[static_cast<size_t>(b)];
      SparseVec want;
      if (ia.kind == 0 && ib.kind == 0) {
        SparseVec lb = L_.bracket(ia.x, ib.x);
        for (const auto& [c, coef] : lb.terms())
          want.add_term(l_syms_[static_cast<size_t>(c)], coef);
        if (!(want - val).is_zero()) {
          bad = "l-l entry " + tab_.name(a) + "," + tab_.name(b);
          break;
        }
        ++n;
        continue;
      }
      if (ia.kind == 2 || ib.kind == 2) continue;  // beyond-window generators have no realization
      int da = tab_.degree(a), db = tab_.degree(b);
      SparseVec got_t, want_t;
      if (ia.kind == 0) {
        want_t = l_action_tensor(ia.x, db, tensor_of(db, SparseVec::unit(b)));
        got_t = tensor_of(db, val);
      } else if (ib.kind == 0) {
        want_t = l_action_tensor(ib.x, da, tensor_of(da, SparseVec::unit(a)));
        want_t.scale(Rational(-1));
        got_t = tensor_of(da, val);
      } else {
        want_t = fl_->commutator(da, fl_->lie_basis(da)[static_cast<size_t>(ia.y)], db,
                                 fl_->lie_basis(db)[static_cast<size_t>(ib.y)]);
        got_t = tensor_of(da + db, val);
      }
      if (!(want_t - got_t).is_zero()) {
        bad = "entry [" + tab_.name(a) + "," + tab_.name(b) + "] disagrees with the tensor bracket";
        break;
      }
      ++n;
    }
    rep.check(bad.empty(), opts.id_prefix + "certify_brackets",
              "all served bracket entries match the tensor-algebra commutator (" +
                  std::to_string(n) + " entries)",
              bad);
  }

  {
    std::string bad;
    long long n = 0;
    std::vector<SymId> keys;
    keys.reserve(d_memo_.size());
    for (const auto& [s, val] : d_memo_) keys.push_back(s);
    std::sort(keys.begin(), keys.end());
    for (SymId s : keys) {
      const SparseVec& val = d_memo_.at(s);
      const SymInfo& in = info_[static_cast<size_t>(s)];
      if (in.kind == 0) continue;
      int li = letter_index_of(s);
      if (li >= 0 && letters_[static_cast<size_t>(li)].m.size() == 1) {
        ++n;
        continue;  // d i(x) = l(x) holds by definition
      }
      if (in.kind == 2) continue;
      int deg = tab_.degree(s);
      SparseVec word_part;
      std::vector<std::pair<int64_t, Rational>> rem;
      tensor_d(deg, tensor_of(deg, SparseVec::unit(s)), word_part, rem);
      std::sort(rem.begin(), rem.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      Rational acc;
      bool rem_ok = true;
      for (size_t i = 0; i <= rem.size(); ++i) {
        if (i == rem.size() || (i > 0 && rem[i].first != rem[i - 1].first)) {
          if (!acc.is_zero()) {
            rem_ok = false;
            break;
          }
          acc = Rational();
        }
        if (i < rem.size()) acc += rem[i].second;
      }
      if (!rem_ok) {
        bad = "degree-0 remainder of d(" + tab_.name(s) + ") fails to cancel";
        break;
      }
      if (!(word_part - tensor_of(deg + 1, val)).is_zero()) {
        bad = "entry d(" + tab_.name(s) + ") disagrees with the word-level derivation";
        break;
      }
      ++n;
    }
    rep.check(bad.empty(), opts.id_prefix + "certify_differential",
              "all served differentials match the word-level derivation with cancelling "
              "degree-0 remainder (" +
                  std::to_string(n) + " entries)",
              bad);
  }
}

AcyclicityReport acyclicity_report(const DgAlgebra& A, int k_lo, int k_hi) {
  if (k_lo > k_hi) throw std::invalid_argument("empty degree range");
  if (k_hi > 0 || k_lo - 1 < A.min_degree())
    throw CutoffRefusal("cohomology in [" + std::to_string(k_lo) + "," + std::to_string(k_hi) +
                        "] needs the stratum at degree " + std::to_string(k_lo - 1) +
                        "; constructed window is [" + std::to_string(A.min_degree()) +
                        ", 0], rebuild with a larger cutoff");
  AcyclicityReport R;
  R.k_lo = k_lo;
  R.k_hi = k_hi;
  for (int k = k_lo; k <= k_hi; ++k) {
    SparseLinearMap d_in(&A.symbols(), A.basis(k - 1), 1);
    for (SymId s : A.basis(k - 1)) d_in.set_column(s, A.d_sym(s));
    SparseLinearMap d_out(&A.symbols(), A.basis(k), 1);
    for (SymId s : A.basis(k)) d_out.set_column(s, A.d_sym(s));
    int h = cohomology_dim(d_in, d_out);
    R.h_dims.push_back(h);
    if (h != 0) R.all_zero = false;
  }
  return R;
}

SparseVec DglaMorphism::apply(const SparseVec& v) const {
  SparseVec out;
  for (const auto& [s, c] : v.terms()) out.axpy(c, images.at(s));
  return out;
}

SparseVec DglaMorphism::apply_sym(SymId s) const { return images.at(s); }

DglaMorphism projection_pi(const DgAlgebra& A, const Dgla& cone) {
  DglaMorphism pi;
  pi.src = &A;
  pi.dst = &cone;
  int n = A.lie().dim;
  for (int a = 0; a < n; ++a) pi.images[A.l_sym(a)] = SparseVec::unit(cone_L(A.lie(), a));
  for (int li = 0; li < A.letter_count(); ++li) {
    const Multiset& m = A.letter_multiset(li);
    pi.images[A.letter_sym(li)] =
        m.size() == 1 ? SparseVec::unit(cone_I(A.lie(), m[0])) : SparseVec{};
  }
  for (int D = 2; D <= A.cutoff(); ++D) {
    const auto& prov = A.free_lie().provenance(-D);
    const auto& syms = A.basis(-D);
    for (size_t r = 0; r < prov.size(); ++r) {
      if (prov[r].sub == -1) continue;  // letters are done
      const auto& cand = A.free_lie().candidates(-D)[static_cast<size_t>(
          A.free_lie().candidate_of(-D, prov[r].gen, prov[r].sub))];
      SymId gsym = A.letter_sym(prov[r].gen);
      int wdeg = -D - A.symbols().degree(gsym);
      SymId wsym = A.basis(wdeg)[static_cast<size_t>(prov[r].sub)];
      SparseVec img = cone.bracket(pi.images.at(gsym), pi.images.at(wsym));
      Rational lead;
      for (const auto& [row, c] : cand.coords.terms()) {
        if (static_cast<size_t>(row) == r) {
          lead = c;
          continue;
        }
        img.axpy(-c, pi.images.at(syms[static_cast<size_t>(row)]));
      }
      img.scale(lead.inverse());
      pi.images[syms[r]] = std::move(img);
    }
  }
  return pi;
}

void verify_projection(const DglaMorphism& pi, Reporter& rep, int random_elements,
                       uint64_t seed) {
  const Dgla& A = *pi.src;
  const Dgla& C = *pi.dst;
  std::vector<SymId> window;
  for (int deg = A.min_degree(); deg <= A.max_degree(); ++deg)
    for (SymId s : A.basis(deg)) window.push_back(s);

  {
    std::string bad;
    for (SymId s = 0; s < A.symbols().size(); ++s) {
      auto it = pi.images.find(s);
      if (it == pi.images.end()) continue;
      SparseVec lhs;
      try {
        lhs = pi.apply(A.d_sym(s));
      } catch (const CutoffRefusal&) {
        continue;  // differential of a beyond-window generator may be unrepresentable
      }
      SparseVec rhs = C.d(it->second);
      if (!(lhs - rhs).is_zero()) {
        bad = "chain map fails on " + A.symbols().name(s);
        break;
      }
    }
    rep.check(bad.empty(), "pi/chain_map", "pi(d a) = d(pi a) on every symbol", bad);
  }
  {
    std::string bad;
    for (SymId a : window) {
      for (SymId b : window) {
        if (b < a) continue;
        int dd = A.degree(a) + A.degree(b);
        if (dd < A.min_degree() || dd > A.max_degree()) continue;
        SparseVec lhs = pi.apply(A.bracket_sym(a, b));
        SparseVec rhs = C.bracket(pi.apply_sym(a), pi.apply_sym(b));
        if (!(lhs - rhs).is_zero()) {
          bad = "bracket fails on [" + A.symbols().name(a) + "," + A.symbols().name(b) + "]";
          break;
        }
      }
      if (!bad.empty()) break;
    }
    rep.check(bad.empty(), "pi/brackets", "pi[a,b] = [pi a, pi b] on all window pairs", bad);
  }
  {
    bool ok = true;
    for (int deg : {0, -1}) {
      Echelon ech;
      for (SymId s : A.basis(deg)) ech.add(pi.apply_sym(s));
      if (ech.rank() != static_cast<int>(C.basis(deg).size())) ok = false;
    }
    rep.check(ok, "pi/surjective", "pi hits all of degrees 0 and -1 of the cone", "");
  }
  {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::string bad;
    for (int t = 0; t < random_elements && bad.empty(); ++t) {
      auto random_elem = [&](int deg) {
        SparseVec v;
        for (SymId s : A.basis(deg)) v.add_term(s, Rational(coeff(rng)));
        return v;
      };
      int span = -A.min_degree();
      int p = -(1 + static_cast<int>(rng() % static_cast<uint64_t>(span)));
      int q_min = A.min_degree() - p;
      SparseVec x = random_elem(p);
      SparseVec dx_pi = pi.apply(A.d(x));
      SparseVec d_pix = C.d(pi.apply(x));
      if (!(dx_pi - d_pix).is_zero()) {
        bad = "chain map fails on a random element of degree " + std::to_string(p);
        break;
      }
      if (q_min <= -1) {
        int q = -(1 + static_cast<int>(rng() % static_cast<uint64_t>(-q_min)));
        SparseVec y = random_elem(q);
        SparseVec lhs = pi.apply(A.bracket(x, y));
        SparseVec rhs = C.bracket(pi.apply(x), pi.apply(y));
        if (!(lhs - rhs).is_zero())
          bad = "bracket fails on random elements of degrees " + std::to_string(p) + "," +
                std::to_string(q);
      }
    }
    rep.check(bad.empty(), "pi/random",
              "chain map and brackets on " + std::to_string(random_elements) + " random elements",
              bad);
  }
}

CentralExtensionDgla::CentralExtensionDgla(const DgAlgebra& base, InvariantPolynomial q)
    : base_(base), q_(std::move(q)) {
  if (q_.n < 2) throw std::invalid_argument("central extension needs a form of arity >= 2");
  if (q_.dim != base_.lie().dim) throw std::invalid_argument("form dimension mismatch");
  q_.validate(base_.lie());
  if (2 - 2 * q_.n < base_.min_degree())
    throw CutoffRefusal("center of degree " + std::to_string(2 - 2 * q_.n) +
                        " falls below the window; rebuild with cutoff >= " +
                        std::to_string(2 * q_.n - 2));
  const SymbolTable& bt = base_.symbols();
  for (SymId s = 0; s < bt.size(); ++s) tab_.intern(bt.name(s), bt.degree(s));
  c_ = tab_.intern("c", 2 - 2 * q_.n);
}

std::vector<SymId> CentralExtensionDgla::basis(int degree) const {
  std::vector<SymId> out = base_.basis(degree);
  if (degree == tab_.degree(c_)) out.push_back(c_);
  return out;
}

int CentralExtensionDgla::min_degree() const { return base_.min_degree(); }

SparseVec CentralExtensionDgla::bracket_sym(SymId a, SymId b) const {
  if (a == c_ || b == c_) return {};
  return base_.bracket_sym(a, b);
}

SparseVec CentralExtensionDgla::d_sym(SymId a) const {
  if (a == c_) return {};
  SparseVec v = base_.d_sym(a);
  int li = base_.letter_index_of(a);
  if (li >= 0 && static_cast<int>(base_.letter_multiset(li).size()) == q_.n) {
    Rational qa = q_.eval(base_.letter_multiset(li));
    if (!qa.is_zero()) v.add_term(c_, qa);
  }
  return v;
}

DpAlgebra build_d_p(const LieData& L, const InvariantPolynomial& p, int cutoff,
                    int letter_layers) {
  DpAlgebra out;
  out.base = std::make_unique<DgAlgebra>(L, cutoff, letter_layers);
  out.ext = std::make_unique<CentralExtensionDgla>(*out.base, p.scaled(Rational(-1)));
  return out;
}

}  // namespace dgla
