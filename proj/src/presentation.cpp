#include "dgla/dgla_iface.hpp"

#include <sstream>

namespace dgla {

SparseVec Dgla::bracket(const SparseVec& x, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [a, ca] : x.terms())
    for (const auto& [b, cb] : y.terms()) out.axpy(ca * cb, bracket_sym(a, b));
  return out;
}

SparseVec Dgla::d(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [a, c] : x.terms()) out.axpy(c, d_sym(a));
  return out;
}

std::vector<SymId> TableDgla::basis(int degree) const {
  std::vector<SymId> out;
  for (SymId s = 0; s < syms_.size(); ++s)
    if (syms_.degree(s) == degree) out.push_back(s);
  return out;
}

SymId TableDgla::add_symbol(const std::string& name, int degree) {
  SymId s = syms_.intern(name, degree);
  if (syms_.size() == 1) {
    min_deg_ = max_deg_ = degree;
  } else {
    min_deg_ = std::min(min_deg_, degree);
    max_deg_ = std::max(max_deg_, degree);
  }
  ensure_size();
  return s;
}

void TableDgla::ensure_size() {
  size_t n = static_cast<size_t>(syms_.size());
  br_.resize(n);
  for (auto& row : br_) row.resize(n);
  d_.resize(n);
}

void TableDgla::set_bracket(SymId a, SymId b, SparseVec v) {
  br_[static_cast<size_t>(a)][static_cast<size_t>(b)] = std::move(v);
}

void TableDgla::set_bracket_pair(SymId a, SymId b, const SparseVec& v) {
  br_[static_cast<size_t>(a)][static_cast<size_t>(b)] = v;
  int sign = (degree(a) & 1) && (degree(b) & 1) ? 1 : -1;
  // [b,a] = -(-1)^{|a||b|}[a,b]
  br_[static_cast<size_t>(b)][static_cast<size_t>(a)] = v * Rational(sign);
}

void TableDgla::set_d(SymId a, SparseVec v) { d_[static_cast<size_t>(a)] = std::move(v); }

SparseVec TableDgla::bracket_sym(SymId a, SymId b) const {
  return br_[static_cast<size_t>(a)][static_cast<size_t>(b)];
}

SparseVec TableDgla::d_sym(SymId a) const { return d_[static_cast<size_t>(a)]; }

namespace {

int koszul_sign(int da, int db) { return (da & 1) && (db & 1) ? -1 : 1; }

std::string describe(const Dgla& A, SymId a) { return A.symbols().name(a); }

}  // namespace

void verify_dgla_axioms(const Dgla& A, Reporter& rep, const AxiomSweepOptions& opts) {
  const std::string pre = opts.id_prefix;
  std::vector<SymId> all;
  for (int d = A.min_degree(); d <= A.max_degree(); ++d)
    for (SymId s : A.basis(d)) all.push_back(s);
  std::vector<int> deg_of(all.size());
  for (size_t i = 0; i < all.size(); ++i) deg_of[i] = A.degree(all[i]);

  auto in_window = [&](int deg) { return deg >= A.min_degree() && deg <= A.max_degree(); };

  if (opts.antisymmetry) {
    std::string bad;
    for (SymId a : all) {
      for (SymId b : all) {
        if (b < a) continue;
        if (!in_window(A.degree(a) + A.degree(b))) continue;
        SparseVec r = A.bracket_sym(a, b);
        r.axpy(Rational(koszul_sign(A.degree(a), A.degree(b))), A.bracket_sym(b, a));
        if (!r.is_zero()) {
          bad = "[" + describe(A, a) + "," + describe(A, b) + "] residual " +
                to_string(r, A.symbols());
          break;
        }
      }
      if (!bad.empty()) break;
    }
    rep.check(bad.empty(), pre + "antisymmetry", "[a,b] + (-1)^{|a||b|}[b,a] = 0", bad);
  }

  if (opts.d_squared) {
    std::string bad;
    for (SymId a : all) {
      if (!in_window(A.degree(a) + 2)) continue;
      SparseVec r = A.d(A.d_sym(a));
      if (!r.is_zero()) {
        bad = "d^2(" + describe(A, a) + ") = " + to_string(r, A.symbols());
        break;
      }
    }
    rep.check(bad.empty(), pre + "d_squared", "d(d(a)) = 0", bad);
  }

  if (opts.leibniz) {
    std::string bad;
    for (SymId a : all) {
      for (SymId b : all) {
        if (!in_window(A.degree(a) + A.degree(b)) || !in_window(A.degree(a) + A.degree(b) + 1))
          continue;
        SparseVec lhs = A.d(A.bracket_sym(a, b));
        SparseVec rhs = A.bracket(A.d_sym(a), SparseVec::unit(b));
        int sign = (A.degree(a) & 1) ? -1 : 1;
        rhs.axpy(Rational(sign), A.bracket(SparseVec::unit(a), A.d_sym(b)));
        lhs -= rhs;
        if (!lhs.is_zero()) {
          bad = "d[" + describe(A, a) + "," + describe(A, b) + "] mismatch " +
                to_string(lhs, A.symbols());
          break;
        }
      }
      if (!bad.empty()) break;
    }
    rep.check(bad.empty(), pre + "leibniz", "d[a,b] = [da,b] + (-1)^{|a|}[a,db]", bad);
  }

  if (opts.jacobi) {
    std::string bad;
    const int lo = A.min_degree(), hi = A.max_degree();
    for (size_t ia = 0; ia < all.size() && bad.empty(); ++ia) {
      const int da = deg_of[ia];
      for (size_t ib = ia; ib < all.size() && bad.empty(); ++ib) {
        const int db = deg_of[ib];
        if (da + db < lo || da + db > hi) continue;
        for (size_t ic = ib; ic < all.size(); ++ic) {
          const int dc = deg_of[ic];
          if (da + db + dc < lo || da + db + dc > hi || db + dc < lo || db + dc > hi ||
              da + dc < lo || da + dc > hi)
            continue;
          SymId a = all[ia], b = all[ib], c = all[ic];
          // [a,[b,c]] = [[a,b],c] + (-1)^{|a||b|}[b,[a,c]]
          SparseVec lhs = A.bracket(SparseVec::unit(a), A.bracket_sym(b, c));
          SparseVec rhs = A.bracket(A.bracket_sym(a, b), SparseVec::unit(c));
          rhs.axpy(Rational(koszul_sign(da, db)),
                   A.bracket(SparseVec::unit(b), A.bracket_sym(a, c)));
          lhs -= rhs;
          if (!lhs.is_zero()) {
            bad = "jacobi(" + describe(A, a) + "," + describe(A, b) + "," + describe(A, c) +
                  ") residual " + to_string(lhs, A.symbols());
            break;
          }
        }
      }
    }
    rep.check(bad.empty(), pre + "jacobi",
              "[a,[b,c]] = [[a,b],c] + (-1)^{|a||b|}[b,[a,c]]", bad);
  }
}

}  // namespace dgla
