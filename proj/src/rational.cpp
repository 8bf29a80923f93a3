#include "dgla/rational.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace dgla {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

u128 uabs128(i128 v) { return v < 0 ? u128(-(v + 1)) + 1 : u128(v); }

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits64(i128 v) {
  return v >= i128(std::numeric_limits<int64_t>::min()) &&
         v <= i128(std::numeric_limits<int64_t>::max());
}

mpz_class mpz_from_i128(i128 v) {
  bool neg = v < 0;
  u128 u = uabs128(v);
  mpz_class hi(static_cast<unsigned long>(u >> 64));
  mpz_class lo(static_cast<unsigned long>(u & 0xffffffffffffffffULL));
  mpz_class r = (hi << 64) + lo;
  return neg ? mpz_class(-r) : r;
}

}  // namespace

Rational::Rational(long long n, long long d) : n_(0), d_(1), big_(nullptr) {
  if (d == 0) throw std::domain_error("Rational: zero denominator");
  set_from_i128(i128(n), i128(d));
}

Rational::Rational(const mpq_class& q) : n_(0), d_(1), big_(nullptr) {
  mpq_class c(q);
  c.canonicalize();
  promote_set(c);
}

Rational::Rational(const Rational& o) : n_(o.n_), d_(o.d_), big_(nullptr) {
  if (o.big_) big_ = new mpq_class(*o.big_);
}

Rational::Rational(Rational&& o) noexcept : n_(o.n_), d_(o.d_), big_(o.big_) {
  o.big_ = nullptr;
  o.n_ = 0;
  o.d_ = 1;
}

Rational& Rational::operator=(const Rational& o) {
  if (this == &o) return *this;
  delete big_;
  big_ = o.big_ ? new mpq_class(*o.big_) : nullptr;
  n_ = o.n_;
  d_ = o.d_;
  return *this;
}

Rational& Rational::operator=(Rational&& o) noexcept {
  if (this == &o) return *this;
  delete big_;
  big_ = o.big_;
  n_ = o.n_;
  d_ = o.d_;
  o.big_ = nullptr;
  o.n_ = 0;
  o.d_ = 1;
  return *this;
}

Rational::~Rational() { delete big_; }

void Rational::set_from_i128(i128 n, i128 d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  if (n == 0) {
    delete big_;
    big_ = nullptr;
    n_ = 0;
    d_ = 1;
    return;
  }
  u128 g = gcd128(uabs128(n), uabs128(d));
  // g >= 1 since n != 0. Exact division.
  bool neg = n < 0;
  u128 un = uabs128(n) / g;
  u128 ud = uabs128(d) / g;
  if (un <= u128(std::numeric_limits<int64_t>::max()) &&
      ud <= u128(std::numeric_limits<int64_t>::max())) {
    delete big_;
    big_ = nullptr;
    n_ = neg ? -int64_t(un) : int64_t(un);
    d_ = int64_t(ud);
    return;
  }
  mpq_class q(mpz_from_i128(neg ? -i128(un) : i128(un)), mpz_from_i128(i128(ud)));
  q.canonicalize();
  promote_set(q);
}

void Rational::promote_set(const mpq_class& q) {
  // Keep the small representation whenever the canonical form fits.
  if (q.get_num().fits_slong_p() && q.get_den().fits_slong_p()) {
    delete big_;
    big_ = nullptr;
    n_ = q.get_num().get_si();
    d_ = q.get_den().get_si();
    return;
  }
  if (big_)
    *big_ = q;
  else
    big_ = new mpq_class(q);
}

Rational Rational::from_string(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("Rational: bad literal '" + s + "'");
  if (sgn(q.get_den()) == 0) throw std::domain_error("Rational: zero denominator");
  q.canonicalize();
  return Rational(q);
}

mpq_class Rational::to_mpq() const {
  if (big_) return *big_;
  mpq_class q(static_cast<long>(n_), static_cast<long>(d_));
  q.canonicalize();
  return q;
}

Rational Rational::operator-() const {
  Rational r(*this);
  if (r.big_) {
    *r.big_ = -*r.big_;
  } else {
    r.n_ = -r.n_;
  }
  return r;
}

Rational& Rational::operator+=(const Rational& o) {
  if (!big_ && !o.big_) {
    i128 num = i128(n_) * o.d_ + i128(o.n_) * d_;
    i128 den = i128(d_) * o.d_;
    set_from_i128(num, den);
    return *this;
  }
  promote_set(mpq_class(to_mpq() + o.to_mpq()));
  return *this;
}

Rational& Rational::operator-=(const Rational& o) {
  if (!big_ && !o.big_) {
    i128 num = i128(n_) * o.d_ - i128(o.n_) * d_;
    i128 den = i128(d_) * o.d_;
    set_from_i128(num, den);
    return *this;
  }
  promote_set(mpq_class(to_mpq() - o.to_mpq()));
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  if (!big_ && !o.big_) {
    i128 num = i128(n_) * o.n_;
    i128 den = i128(d_) * o.d_;
    set_from_i128(num, den);
    return *this;
  }
  promote_set(mpq_class(to_mpq() * o.to_mpq()));
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::domain_error("Rational: division by zero");
  if (!big_ && !o.big_) {
    i128 num = i128(n_) * o.d_;
    i128 den = i128(d_) * o.n_;
    set_from_i128(num, den);
    return *this;
  }
  promote_set(mpq_class(to_mpq() / o.to_mpq()));
  return *this;
}

bool operator==(const Rational& a, const Rational& b) {
  if (!a.big_ && !b.big_) return a.n_ == b.n_ && a.d_ == b.d_;  // both canonical
  return a.to_mpq() == b.to_mpq();
}

bool operator<(const Rational& a, const Rational& b) {
  if (!a.big_ && !b.big_) return i128(a.n_) * b.d_ < i128(b.n_) * a.d_;
  return a.to_mpq() < b.to_mpq();
}

int Rational::sign() const {
  if (big_) return sgn(*big_);
  return n_ > 0 ? 1 : (n_ < 0 ? -1 : 0);
}

Rational Rational::inverse() const {
  if (is_zero()) throw std::domain_error("Rational: inverse of zero");
  Rational r;
  if (!big_) {
    r.set_from_i128(i128(d_), i128(n_));
  } else {
    r.promote_set(mpq_class(1 / *big_));
  }
  return r;
}

std::string Rational::str() const {
  if (big_) {
    if (big_->get_den() == 1) return big_->get_num().get_str();
    return big_->get_str();
  }
  std::string s = std::to_string(n_);
  if (d_ != 1) s += "/" + std::to_string(d_);
  return s;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace dgla
