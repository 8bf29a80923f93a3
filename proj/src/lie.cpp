#include "dgla/lie.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dgla {

namespace {

void set_bracket(LieData& L, int a, int b, std::vector<std::pair<int, Rational>> terms) {
  SparseVec v;
  for (auto& [c, coef] : terms) v.add_term(c, coef);
  L.f[static_cast<size_t>(a)][static_cast<size_t>(b)] = v;
  L.f[static_cast<size_t>(b)][static_cast<size_t>(a)] = -v;
}

LieData make_abelian(int n, const std::string& label) {
  LieData L;
  L.label = label;
  L.dim = n;
  for (int i = 0; i < n; ++i) L.names.push_back("x" + std::to_string(i + 1));
  L.f.assign(static_cast<size_t>(n), std::vector<SparseVec>(static_cast<size_t>(n)));
  return L;
}

LieData make_sl2() {
  LieData L;
  L.label = "sl2";
  L.dim = 3;
  L.names = {"e", "h", "f"};
  L.f.assign(3, std::vector<SparseVec>(3));
  set_bracket(L, 1, 0, {{0, Rational(2)}});   // [h,e] = 2e
  set_bracket(L, 1, 2, {{2, Rational(-2)}});  // [h,f] = -2f
  set_bracket(L, 0, 2, {{1, Rational(1)}});   // [e,f] = h
  return L;
}

LieData make_so3() {
  LieData L;
  L.label = "so3";
  L.dim = 3;
  L.names = {"r1", "r2", "r3"};
  L.f.assign(3, std::vector<SparseVec>(3));
  set_bracket(L, 0, 1, {{2, Rational(1)}});
  set_bracket(L, 1, 2, {{0, Rational(1)}});
  set_bracket(L, 2, 0, {{1, Rational(1)}});
  return L;
}

// Basis g1..g8: the standard eight traceless hermitian generators with the
// eighth one rescaled so every structure constant is rational. All brackets
// below are validated by the Jacobi sweep at construction time.
LieData make_sl3() {
  LieData L;
  L.label = "sl3";
  L.dim = 8;
  for (int i = 1; i <= 8; ++i) L.names.push_back("g" + std::to_string(i));
  L.f.assign(8, std::vector<SparseVec>(8));
  const Rational h(1, 2), th(3, 2);
  set_bracket(L, 0, 1, {{2, 1}});
  set_bracket(L, 0, 2, {{1, -1}});
  set_bracket(L, 1, 2, {{0, 1}});
  set_bracket(L, 0, 3, {{6, h}});
  set_bracket(L, 0, 4, {{5, -h}});
  set_bracket(L, 0, 5, {{4, h}});
  set_bracket(L, 0, 6, {{3, -h}});
  set_bracket(L, 1, 3, {{5, h}});
  set_bracket(L, 1, 4, {{6, h}});
  set_bracket(L, 1, 5, {{3, -h}});
  set_bracket(L, 1, 6, {{4, -h}});
  set_bracket(L, 2, 3, {{4, h}});
  set_bracket(L, 2, 4, {{3, -h}});
  set_bracket(L, 2, 5, {{6, -h}});
  set_bracket(L, 2, 6, {{5, h}});
  set_bracket(L, 3, 4, {{2, h}, {7, th}});
  set_bracket(L, 3, 5, {{1, h}});
  set_bracket(L, 3, 6, {{0, h}});
  set_bracket(L, 4, 5, {{0, -h}});
  set_bracket(L, 4, 6, {{1, h}});
  set_bracket(L, 5, 6, {{2, -h}, {7, th}});
  set_bracket(L, 3, 7, {{4, -h}});
  set_bracket(L, 4, 7, {{3, h}});
  set_bracket(L, 5, 7, {{6, -h}});
  set_bracket(L, 6, 7, {{5, h}});
  return L;
}

}  // namespace

LieData LieData::builtin(const std::string& name) {
  LieData L;
  if (name == "sl2") {
    L = make_sl2();
  } else if (name == "so3") {
    L = make_so3();
  } else if (name == "sl3") {
    L = make_sl3();
  } else if (name.rfind("abelian_", 0) == 0) {
    int n = std::stoi(name.substr(8));
    if (n < 1 || n > 16) throw std::invalid_argument("builtin: abelian rank out of range");
    L = make_abelian(n, name);
  } else {
    throw std::invalid_argument("builtin: unknown algebra '" + name + "'");
  }
  L.validate();
  return L;
}

void LieData::validate() const {
  if (static_cast<int>(names.size()) != dim || static_cast<int>(f.size()) != dim)
    throw std::invalid_argument("LieData: inconsistent dimensions");
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      SparseVec s = bracket(a, b) + bracket(b, a);
      if (!s.is_zero()) {
        throw std::invalid_argument("LieData: antisymmetry fails on (" + names[a] + "," +
                                    names[b] + ")");
      }
    }
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b)
      for (int c = b + 1; c < dim; ++c) {
        SparseVec jac = bracket_vec(SparseVec::unit(a), bracket(b, c)) +
                        bracket_vec(SparseVec::unit(b), bracket(c, a)) +
                        bracket_vec(SparseVec::unit(c), bracket(a, b));
        if (!jac.is_zero()) {
          throw std::invalid_argument("LieData: Jacobi fails on (" + names[a] + "," + names[b] +
                                      "," + names[c] + ")");
        }
      }
}

std::pair<bool, std::string> check_jacobi(const LieData& L) {
  for (int a = 0; a < L.dim; ++a)
    for (int b = a + 1; b < L.dim; ++b)
      for (int c = b + 1; c < L.dim; ++c) {
        SparseVec jac = L.bracket_vec(SparseVec::unit(a), L.bracket(b, c)) +
                        L.bracket_vec(SparseVec::unit(b), L.bracket(c, a)) +
                        L.bracket_vec(SparseVec::unit(c), L.bracket(a, b));
        if (!jac.is_zero())
          return {false, "(" + L.names[a] + "," + L.names[b] + "," + L.names[c] + ")"};
      }
  return {true, ""};
}

SparseVec LieData::ad(int a, const SparseVec& v) const {
  SparseVec out;
  for (const auto& [b, c] : v.terms()) out.axpy(c, bracket(a, b));
  return out;
}

SparseVec LieData::bracket_vec(const SparseVec& x, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [a, ca] : x.terms())
    for (const auto& [b, cb] : y.terms()) out.axpy(ca * cb, bracket(a, b));
  return out;
}

Rational LieData::structure_const(int c, int a, int b) const {
  return bracket(a, b).coeff(c);
}

Rational LieData::killing(int a, int b) const {
  // tr(ad_a ad_b) over the basis.
  Rational tr(0);
  for (int i = 0; i < dim; ++i) {
    SparseVec v = ad(b, SparseVec::unit(i));
    v = ad(a, v);
    tr += v.coeff(i);
  }
  return tr;
}

LieData LieData::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open algebra file: " + path);
  LieData L;
  std::string line;
  std::unordered_map<std::string, int> index;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "algebra") {
      ls >> L.label;
    } else if (kw == "dim") {
      ls >> L.dim;
      L.f.assign(static_cast<size_t>(L.dim), std::vector<SparseVec>(static_cast<size_t>(L.dim)));
    } else if (kw == "basis") {
      std::string n;
      while (ls >> n) {
        index[n] = static_cast<int>(L.names.size());
        L.names.push_back(n);
      }
    } else if (kw == "bracket") {
      std::string an, bn, eq;
      ls >> an >> bn >> eq;
      if (eq != "=") throw std::runtime_error("algebra file: expected '=' in bracket line");
      if (!index.count(an) || !index.count(bn))
        throw std::runtime_error("algebra file: unknown basis name in bracket line");
      SparseVec v;
      std::string coef, cn;
      while (ls >> coef) {
        if (coef == "0") break;
        if (!(ls >> cn)) throw std::runtime_error("algebra file: dangling coefficient");
        if (!index.count(cn)) throw std::runtime_error("algebra file: unknown basis name " + cn);
        v.add_term(index[cn], Rational::from_string(coef));
      }
      int a = index[an], b = index[bn];
      L.f[static_cast<size_t>(a)][static_cast<size_t>(b)] = v;
      L.f[static_cast<size_t>(b)][static_cast<size_t>(a)] = -v;
    } else {
      throw std::runtime_error("algebra file: unknown keyword '" + kw + "'");
    }
  }
  if (static_cast<int>(L.names.size()) != L.dim)
    throw std::runtime_error("algebra file: basis size does not match dim");
  L.validate();
  return L;
}

uint64_t multiset_key(const Multiset& m) {
  uint64_t k = 1;  // leading 1 distinguishes lengths
  for (uint8_t x : m) k = (k << 5) | (uint64_t(x) + 1);
  return k;
}

Rational multinomial(const Multiset& m) {
  long long num = 1;
  int total = 0;
  long long run = 1;
  for (size_t i = 0; i < m.size(); ++i) {
    ++total;
    num *= total;
    if (i > 0 && m[i] == m[i - 1]) {
      ++run;
      num /= run;
    } else {
      run = 1;
    }
  }
  return Rational(num);
}

std::string multiset_name(const Multiset& m, const LieData& L) {
  std::string s;
  for (size_t i = 0; i < m.size(); ++i) {
    if (i) s += ".";
    s += L.names[m[i]];
  }
  return s;
}

std::vector<std::pair<Multiset, Rational>> ad_on_multiset(const LieData& L, int a,
                                                          const Multiset& m) {
  std::vector<std::pair<Multiset, Rational>> out;
  for (size_t i = 0; i < m.size(); ++i) {
    if (i > 0 && m[i] == m[i - 1]) continue;  // same letter, same contribution below
    int mult = 0;
    for (uint8_t x : m)
      if (x == m[i]) ++mult;
    const SparseVec& br = L.bracket(a, m[i]);
    for (const auto& [c, coef] : br.terms()) {
      Multiset mm = m;
      mm[i] = static_cast<uint8_t>(c);
      std::sort(mm.begin(), mm.end());
      out.emplace_back(std::move(mm), coef * Rational(mult));
    }
  }
  return out;
}

std::vector<Multiset> multisets_of_size(int dim, int k) {
  std::vector<Multiset> out;
  Multiset cur;
  // lexicographic non-decreasing tuples
  std::function<void(int)> rec = [&](int lo) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = lo; i < dim; ++i) {
      cur.push_back(static_cast<uint8_t>(i));
      rec(i);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

Rational InvariantPolynomial::eval(Multiset m) const {
  std::sort(m.begin(), m.end());
  auto it = vals.find(multiset_key(m));
  return it == vals.end() ? Rational(0) : it->second;
}

Rational InvariantPolynomial::eval_indices(std::initializer_list<int> idxs) const {
  Multiset m;
  for (int i : idxs) m.push_back(static_cast<uint8_t>(i));
  return eval(std::move(m));
}

void InvariantPolynomial::set(Multiset m, Rational v) {
  std::sort(m.begin(), m.end());
  if (v.is_zero())
    vals.erase(multiset_key(m));
  else
    vals[multiset_key(m)] = std::move(v);
}

bool InvariantPolynomial::is_zero() const {
  for (const auto& [k, v] : vals)
    if (!v.is_zero()) return false;
  return true;
}

InvariantPolynomial InvariantPolynomial::scaled(const Rational& r) const {
  InvariantPolynomial p;
  p.n = n;
  p.dim = dim;
  if (r.is_zero()) return p;
  for (const auto& [k, v] : vals) p.vals.emplace(k, r * v);
  return p;
}

void InvariantPolynomial::validate(const LieData& L) const {
  for (int z = 0; z < L.dim; ++z) {
    for (const Multiset& m : multisets_of_size(L.dim, n)) {
      Rational acc(0);
      for (const auto& [mm, c] : ad_on_multiset(L, z, m)) acc += c * eval(mm);
      if (!acc.is_zero())
        throw std::invalid_argument("invariant form: ad-invariance fails at z=" + L.names[z] +
                                    ", monomial " + multiset_name(m, L));
    }
  }
}

InvariantPolynomial InvariantPolynomial::zero(const LieData& L, int nn) {
  InvariantPolynomial p;
  p.n = nn;
  p.dim = L.dim;
  return p;
}

InvariantPolynomial InvariantPolynomial::killing_form(const LieData& L) {
  InvariantPolynomial p = zero(L, 2);
  for (int a = 0; a < L.dim; ++a)
    for (int b = a; b < L.dim; ++b) p.set({static_cast<uint8_t>(a), static_cast<uint8_t>(b)},
                                          L.killing(a, b));
  p.validate(L);
  return p;
}

InvariantPolynomial InvariantPolynomial::sl3_cubic(const LieData& L) {
  if (L.label != "sl3") throw std::invalid_argument("sl3_cubic needs the sl3 basis");
  InvariantPolynomial p = zero(L, 3);
  auto S = [&p](int a, int b, int c, Rational v) {
    p.set({static_cast<uint8_t>(a - 1), static_cast<uint8_t>(b - 1), static_cast<uint8_t>(c - 1)},
          std::move(v));
  };
  S(1, 1, 8, Rational(1, 3));
  S(2, 2, 8, Rational(1, 3));
  S(3, 3, 8, Rational(1, 3));
  S(8, 8, 8, Rational(-1, 9));
  S(4, 4, 8, Rational(-1, 6));
  S(5, 5, 8, Rational(-1, 6));
  S(6, 6, 8, Rational(-1, 6));
  S(7, 7, 8, Rational(-1, 6));
  S(1, 4, 6, Rational(1, 2));
  S(1, 5, 7, Rational(1, 2));
  S(2, 4, 7, Rational(-1, 2));
  S(2, 5, 6, Rational(1, 2));
  S(3, 4, 4, Rational(1, 2));
  S(3, 5, 5, Rational(1, 2));
  S(3, 6, 6, Rational(-1, 2));
  S(3, 7, 7, Rational(-1, 2));
  p.validate(L);
  return p;
}

std::vector<InvariantPolynomial> invariant_polynomials(const LieData& L, int n) {
  std::vector<Multiset> mons = multisets_of_size(L.dim, n);
  std::unordered_map<uint64_t, SymId> mon_id;
  for (size_t i = 0; i < mons.size(); ++i) mon_id[multiset_key(mons[i])] = static_cast<SymId>(i);

  // Constraint rows: for every z and monomial m, sum of ad-derivative values
  // vanishes. Columns are the unknown values p(m').
  std::vector<SparseVec> cols(mons.size());
  int row = 0;
  for (int z = 0; z < L.dim; ++z) {
    for (const Multiset& m : mons) {
      for (const auto& [mm, c] : ad_on_multiset(L, z, m)) {
        cols[static_cast<size_t>(mon_id.at(multiset_key(mm)))].add_term(row, c);
      }
      ++row;
    }
  }
  std::vector<SymId> labels(mons.size());
  for (size_t i = 0; i < mons.size(); ++i) labels[i] = static_cast<SymId>(i);
  std::vector<SparseVec> null = nullspace_of_columns(cols, labels);

  std::vector<InvariantPolynomial> out;
  for (const SparseVec& v : null) {
    InvariantPolynomial p = InvariantPolynomial::zero(L, n);
    for (const auto& [i, c] : v.terms()) p.set(mons[static_cast<size_t>(i)], c);
    p.validate(L);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dgla
