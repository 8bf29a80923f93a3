#include "dgla/basis.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dgla {

SparseVec SparseVec::unit(SymId s, Rational c) {
  SparseVec v;
  if (!c.is_zero()) v.terms_.emplace_back(s, std::move(c));
  return v;
}

const Rational* SparseVec::find(SymId s) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), s,
                             [](const Term& t, SymId key) { return t.first < key; });
  if (it != terms_.end() && it->first == s) return &it->second;
  return nullptr;
}

Rational SparseVec::coeff(SymId s) const {
  const Rational* p = find(s);
  return p ? *p : Rational(0);
}

void SparseVec::add_term(SymId s, const Rational& c) {
  if (c.is_zero()) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), s,
                             [](const Term& t, SymId key) { return t.first < key; });
  if (it != terms_.end() && it->first == s) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  } else {
    terms_.insert(it, {s, c});
  }
}

SparseVec& SparseVec::axpy(const Rational& c, const SparseVec& v) {
  if (c.is_zero() || v.terms_.empty()) return *this;
  std::vector<Term> out;
  out.reserve(terms_.size() + v.terms_.size());
  size_t i = 0, j = 0;
  while (i < terms_.size() && j < v.terms_.size()) {
    if (terms_[i].first < v.terms_[j].first) {
      out.push_back(std::move(terms_[i++]));
    } else if (terms_[i].first > v.terms_[j].first) {
      Rational cv = c * v.terms_[j].second;
      if (!cv.is_zero()) out.emplace_back(v.terms_[j].first, std::move(cv));
      ++j;
    } else {
      Rational s = terms_[i].second + c * v.terms_[j].second;
      if (!s.is_zero()) out.emplace_back(terms_[i].first, std::move(s));
      ++i;
      ++j;
    }
  }
  for (; i < terms_.size(); ++i) out.push_back(std::move(terms_[i]));
  for (; j < v.terms_.size(); ++j) {
    Rational cv = c * v.terms_[j].second;
    if (!cv.is_zero()) out.emplace_back(v.terms_[j].first, std::move(cv));
  }
  terms_ = std::move(out);
  return *this;
}

SparseVec& SparseVec::operator+=(const SparseVec& o) { return axpy(Rational(1), o); }
SparseVec& SparseVec::operator-=(const SparseVec& o) { return axpy(Rational(-1), o); }

SparseVec& SparseVec::scale(const Rational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= c;
  return *this;
}

SparseVec SparseVec::operator*(const Rational& c) const {
  SparseVec r(*this);
  r.scale(c);
  return r;
}

SparseVec SparseVec::operator+(const SparseVec& o) const {
  SparseVec r(*this);
  r += o;
  return r;
}

SparseVec SparseVec::operator-(const SparseVec& o) const {
  SparseVec r(*this);
  r -= o;
  return r;
}

SparseVec SparseVec::operator-() const {
  SparseVec r(*this);
  r.scale(Rational(-1));
  return r;
}

SparseVec SparseVec::collect(std::vector<Term> raw) {
  std::sort(raw.begin(), raw.end(),
            [](const Term& a, const Term& b) { return a.first < b.first; });
  SparseVec v;
  v.terms_.reserve(raw.size());
  for (auto& t : raw) {
    if (!v.terms_.empty() && v.terms_.back().first == t.first) {
      v.terms_.back().second += t.second;
      if (v.terms_.back().second.is_zero()) v.terms_.pop_back();
    } else if (!t.second.is_zero()) {
      v.terms_.push_back(std::move(t));
    }
  }
  return v;
}

SymId SymbolTable::intern(const std::string& name, int degree) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) {
    if (syms_[static_cast<size_t>(it->second)].degree != degree)
      throw std::logic_error("symbol '" + name + "' re-interned with a different degree");
    return it->second;
  }
  SymId id = static_cast<SymId>(syms_.size());
  syms_.push_back({name, degree});
  by_name_.emplace(name, id);
  return id;
}

SymId SymbolTable::lookup(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

std::optional<int> homogeneous_degree(const SparseVec& v, const SymbolTable& tab) {
  if (v.is_zero()) return std::nullopt;
  int deg = tab.degree(v.terms().front().first);
  for (const auto& t : v.terms())
    if (tab.degree(t.first) != deg) return std::nullopt;
  return deg;
}

std::string to_string(const SparseVec& v, const SymbolTable& tab) {
  if (v.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [s, c] : v.terms()) {
    Rational a = c;
    if (first) {
      if (a.sign() < 0) {
        os << "-";
        a = -a;
      }
      first = false;
    } else {
      if (a.sign() < 0) {
        os << " - ";
        a = -a;
      } else {
        os << " + ";
      }
    }
    if (!a.is_one()) os << a.str() << "*";
    os << tab.name(s);
  }
  return os.str();
}

}  // namespace dgla
