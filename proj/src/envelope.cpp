#include "dgla/envelope.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgla {

Envelope::Envelope(const Dgla& A, int degree_floor, int zero_cap)
    : a_(A), floor_(degree_floor), zero_cap_(zero_cap) {
  unit_ = tab_.intern("1", 0);
  words_.emplace_back();
  by_key_.emplace("", unit_);
}

std::string Envelope::key_of(const std::vector<SymId>& gens) {
  std::string k;
  for (SymId g : gens) {
    k += std::to_string(g);
    k += '.';
  }
  return k;
}

bool Envelope::gen_less(SymId g, SymId h) const {
  int dg = a_.symbols().degree(g), dh = a_.symbols().degree(h);
  if (dg != dh) return dg < dh;
  return g < h;
}

SymId Envelope::word_sym(const std::vector<SymId>& gens) const {
  std::string key = key_of(gens);
  auto it = by_key_.find(key);
  if (it != by_key_.end()) return it->second;
  int deg = 0, zeros = 0;
  for (size_t i = 0; i < gens.size(); ++i) {
    int d = a_.symbols().degree(gens[i]);
    if (d > 0) throw std::invalid_argument("envelope generators must have nonpositive degree");
    deg += d;
    if (d == 0) ++zeros;
    if (i + 1 < gens.size()) {
      if (gen_less(gens[i + 1], gens[i])) throw std::logic_error("word not in PBW order");
      if (gens[i] == gens[i + 1] && (d & 1)) throw std::logic_error("odd generator repeated");
    }
  }
  if (deg < floor_)
    throw CutoffRefusal("enveloping-algebra word of degree " + std::to_string(deg) +
                        " falls below the floor " + std::to_string(floor_));
  if (zeros > zero_cap_)
    throw CutoffRefusal("enveloping-algebra word exceeds the degree-zero letter cap");
  std::string name;
  if (gens.empty()) name = "1";
  for (size_t i = 0; i < gens.size(); ++i) {
    if (i) name += "·";
    name += a_.symbols().name(gens[i]);
  }
  SymId s = tab_.intern(name, deg);
  if (static_cast<size_t>(s) != words_.size()) throw std::logic_error("word re-interned");
  words_.push_back(gens);
  by_key_.emplace(std::move(key), s);
  return s;
}

const std::vector<SymId>& Envelope::word(SymId u) const {
  return words_.at(static_cast<size_t>(u));
}

SparseVec Envelope::normalize(std::vector<SymId> gens) const {
  std::string key = key_of(gens);
  auto memo = norm_memo_.find(key);
  if (memo != norm_memo_.end()) return memo->second;
  SparseVec out;
  bool reduced = false;
  for (size_t i = 0; i + 1 < gens.size(); ++i) {
    SymId g = gens[i], h = gens[i + 1];
    bool godd = a_.symbols().degree(g) & 1;
    if (g == h && godd) {
      // g g = 1/2 [g,g]
      SparseVec br = a_.bracket_sym(g, g);
      std::vector<SymId> rest(gens.begin(), gens.end());
      rest.erase(rest.begin() + static_cast<long>(i), rest.begin() + static_cast<long>(i) + 2);
      for (const auto& [s, c] : br.terms()) {
        std::vector<SymId> next = rest;
        next.insert(next.begin() + static_cast<long>(i), s);
        out.axpy(c * Rational(1, 2), normalize(std::move(next)));
      }
      reduced = true;
      break;
    }
    if (gen_less(h, g)) {
      bool hodd = a_.symbols().degree(h) & 1;
      std::vector<SymId> swapped = gens;
      std::swap(swapped[i], swapped[i + 1]);
      Rational sign((godd && hodd) ? -1 : 1);
      out.axpy(sign, normalize(std::move(swapped)));
      SparseVec br = a_.bracket_sym(g, h);
      for (const auto& [s, c] : br.terms()) {
        std::vector<SymId> next = gens;
        next[i] = s;
        next.erase(next.begin() + static_cast<long>(i) + 1);
        out.axpy(c, normalize(std::move(next)));
      }
      reduced = true;
      break;
    }
  }
  if (!reduced) out = SparseVec::unit(word_sym(gens));
  norm_memo_.emplace(std::move(key), out);
  return out;
}

SparseVec Envelope::mul(SymId u, SymId v) const {
  const auto& wu = word(u);
  const auto& wv = word(v);
  int deg = tab_.degree(u) + tab_.degree(v);
  if (deg < floor_)
    throw CutoffRefusal("enveloping-algebra product of degree " + std::to_string(deg) +
                        " falls below the floor");
  std::vector<SymId> gens = wu;
  gens.insert(gens.end(), wv.begin(), wv.end());
  return normalize(std::move(gens));
}

SparseVec Envelope::mul(const SparseVec& x, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [u, cu] : x.terms())
    for (const auto& [v, cv] : y.terms()) out.axpy(cu * cv, mul(u, v));
  return out;
}

SparseVec Envelope::d_word(SymId u) const {
  const auto& gens = word(u);
  SparseVec out;
  int sign = 1;
  for (size_t i = 0; i < gens.size(); ++i) {
    SparseVec dg = a_.d_sym(gens[i]);
    for (const auto& [s, c] : dg.terms()) {
      std::vector<SymId> next = gens;
      next[i] = s;
      out.axpy(Rational(sign) * c, normalize(std::move(next)));
    }
    if (a_.symbols().degree(gens[i]) & 1) sign = -sign;
  }
  return out;
}

SparseVec Envelope::d(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [u, c] : x.terms()) out.axpy(c, d_word(u));
  return out;
}

SparseVec Envelope::ad_gen(SymId g, SymId u) const {
  SparseVec gw = SparseVec::unit(word_sym({g}));
  SparseVec left = mul(gw, SparseVec::unit(u));
  SparseVec right = mul(SparseVec::unit(u), gw);
  bool sign = (a_.symbols().degree(g) & 1) && (tab_.degree(u) & 1);
  return sign ? left + right : left - right;
}

SymId Envelope::pair_sym(SymId u, SymId v) const {
  uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(u)) << 32) |
                 static_cast<uint32_t>(v);
  auto it = by_pair_.find(key);
  if (it != by_pair_.end()) return it->second;
  SymId s = pair_tab_.intern("(" + tab_.name(u) + ")⊗(" + tab_.name(v) + ")",
                             tab_.degree(u) + tab_.degree(v));
  pair_parts_.emplace_back(u, v);
  by_pair_.emplace(key, s);
  return s;
}

std::pair<SymId, SymId> Envelope::pair_split(SymId s) const {
  return pair_parts_.at(static_cast<size_t>(s));
}

SparseVec Envelope::coproduct(SymId u) const {
  const auto& gens = word(u);
  struct Piece {
    std::vector<SymId> left, right;
    int right_parity = 0;
    Rational coef;
  };
  std::vector<Piece> pieces{{{}, {}, 0, Rational(1)}};
  for (SymId g : gens) {
    int godd = a_.symbols().degree(g) & 1;
    std::vector<Piece> next;
    next.reserve(pieces.size() * 2);
    for (const auto& p : pieces) {
      Piece tl = p;  // g goes left: crosses the current right part
      if (godd && (p.right_parity & 1)) tl.coef = -tl.coef;
      tl.left.push_back(g);
      next.push_back(std::move(tl));
      Piece tr = p;
      tr.right.push_back(g);
      tr.right_parity ^= godd;
      next.push_back(std::move(tr));
    }
    pieces = std::move(next);
  }
  SparseVec out;
  for (const auto& p : pieces)
    out.add_term(pair_sym(word_sym(p.left), word_sym(p.right)), p.coef);
  return out;
}

WgEnvelope::WgEnvelope(const WeilAlgebra& W, const Envelope& U) : w_(W), u_(U) {}

SymId WgEnvelope::pair_sym(SymId w, SymId u) const {
  uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(w)) << 32) |
                 static_cast<uint32_t>(u);
  auto it = by_pair_.find(key);
  if (it != by_pair_.end()) return it->second;
  SymId s = tab_.intern("(" + w_.symbols().name(w) + ")⊗(" + u_.symbols().name(u) + ")",
                        w_.symbols().degree(w) + u_.symbols().degree(u));
  parts_.emplace_back(w, u);
  by_pair_.emplace(key, s);
  return s;
}

std::pair<SymId, SymId> WgEnvelope::split(SymId s) const {
  return parts_.at(static_cast<size_t>(s));
}

SparseVec WgEnvelope::embed(const SparseVec& w, const SparseVec& u) const {
  SparseVec out;
  for (const auto& [ws, wc] : w.terms())
    for (const auto& [us, uc] : u.terms()) out.add_term(pair_sym(ws, us), wc * uc);
  return out;
}

SparseVec WgEnvelope::one() const { return SparseVec::unit(pair_sym(w_.unit(), u_.unit())); }

SparseVec WgEnvelope::mul(const SparseVec& x, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [s1, c1] : x.terms()) {
    auto [w1, u1] = split(s1);
    bool u1_odd = u_.symbols().degree(u1) & 1;
    for (const auto& [s2, c2] : y.terms()) {
      auto [w2, u2] = split(s2);
      SparseVec uu = u_.mul(u1, u2);
      if (uu.is_zero()) continue;
      SparseVec ww = w_.mul(w1, w2);
      if (ww.is_zero()) continue;
      Rational c = c1 * c2;
      if (u1_odd && (w_.symbols().degree(w2) & 1)) c = -c;
      for (const auto& [ws, wc] : ww.terms())
        for (const auto& [us, uc] : uu.terms()) out.add_term(pair_sym(ws, us), c * wc * uc);
    }
  }
  return out;
}

SparseVec WgEnvelope::d(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) {
    auto [w, u] = split(s);
    out.axpy(c, embed(w_.d_sym(w), SparseVec::unit(u)));
    SparseVec du = u_.d_word(u);
    if (!du.is_zero()) {
      Rational cc = (w_.symbols().degree(w) & 1) ? -c : c;
      out.axpy(cc, embed(SparseVec::unit(w), du));
    }
  }
  return out;
}

SparseVec WgEnvelope::contract_w(int a, const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) {
    auto [w, u] = split(s);
    out.axpy(c, embed(w_.contract_sym(a, w), SparseVec::unit(u)));
  }
  return out;
}

SparseVec WgEnvelope::lie_der_w(int a, const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) {
    auto [w, u] = split(s);
    out.axpy(c, embed(w_.lie_der_sym(a, w), SparseVec::unit(u)));
  }
  return out;
}

SparseVec WgEnvelope::ad_env(SymId g, const SparseVec& x) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms()) {
    auto [w, u] = split(s);
    out.axpy(c, embed(SparseVec::unit(w), u_.ad_gen(g, u)));
  }
  return out;
}

SparseVec WgEnvelope::w_component(const SparseVec& x, int k) const {
  SparseVec out;
  for (const auto& [s, c] : x.terms())
    if (w_degree(s) == k) out.add_term(s, c);
  return out;
}

std::vector<SparseVec> layered_inverse(const WgEnvelope& E,
                                       const std::vector<SparseVec>& layers) {
  std::vector<SparseVec> inv(layers.size());
  if (layers.empty()) return inv;
  inv[0] = E.one();
  for (size_t k = 1; k < layers.size(); ++k) {
    SparseVec acc;
    for (size_t m = 1; m <= k; ++m) acc += E.mul(inv[k - m], layers[m]);
    inv[k] = -acc;
  }
  return inv;
}

}  // namespace dgla
