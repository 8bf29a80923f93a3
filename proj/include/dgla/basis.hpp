#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgla/rational.hpp"

namespace dgla {

using SymId = int32_t;

// Sparse exact-rational vector over integer-indexed basis symbols.
// Terms are kept sorted by index with no explicit zeros.
class SparseVec {
 public:
  using Term = std::pair<SymId, Rational>;

  SparseVec() = default;
  static SparseVec unit(SymId s, Rational c = Rational(1));

  bool is_zero() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }

  const Rational* find(SymId s) const;
  Rational coeff(SymId s) const;
  SymId lead() const { return terms_.empty() ? -1 : terms_.front().first; }
  const Rational& lead_coeff() const { return terms_.front().second; }

  void add_term(SymId s, const Rational& c);
  SparseVec& operator+=(const SparseVec& o);
  SparseVec& operator-=(const SparseVec& o);
  SparseVec& axpy(const Rational& c, const SparseVec& v);  // this += c*v
  SparseVec& scale(const Rational& c);
  SparseVec operator*(const Rational& c) const;
  SparseVec operator+(const SparseVec& o) const;
  SparseVec operator-(const SparseVec& o) const;
  SparseVec operator-() const;
  friend bool operator==(const SparseVec& a, const SparseVec& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const SparseVec& a, const SparseVec& b) { return !(a == b); }

  // Build from unsorted/duplicated terms.
  static SparseVec collect(std::vector<Term> raw);

 private:
  std::vector<Term> terms_;
};

struct BasisSymbol {
  std::string name;
  int degree = 0;
};

// Interning table mapping symbol names to dense ids. Insertion order is the
// canonical basis order used by all deterministic eliminations.
class SymbolTable {
 public:
  SymId intern(const std::string& name, int degree);
  SymId lookup(const std::string& name) const;  // -1 when missing
  const BasisSymbol& at(SymId s) const { return syms_.at(static_cast<size_t>(s)); }
  int degree(SymId s) const { return at(s).degree; }
  const std::string& name(SymId s) const { return at(s).name; }
  int32_t size() const { return static_cast<int32_t>(syms_.size()); }

 private:
  std::vector<BasisSymbol> syms_;
  std::unordered_map<std::string, SymId> by_name_;
};

// Element of a graded space; the declared degree is optional metadata used by
// degree-checked solvers (mixed-degree elements simply leave it empty).
struct GradedElement {
  SparseVec v;
  std::optional<int> declared_degree;

  GradedElement() = default;
  GradedElement(SparseVec vec) : v(std::move(vec)) {}  // NOLINT
  GradedElement(SparseVec vec, int deg) : v(std::move(vec)), declared_degree(deg) {}
};

// Degree of a vector when all its terms share one; nullopt for 0 or mixed.
std::optional<int> homogeneous_degree(const SparseVec& v, const SymbolTable& tab);

std::string to_string(const SparseVec& v, const SymbolTable& tab);

}  // namespace dgla
