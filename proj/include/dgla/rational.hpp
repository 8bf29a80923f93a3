#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dgla {

// Exact rational scalar, always reduced with positive denominator.
// Small values (the common case: structure constants, multinomial weights,
// elimination pivots) live inline as an int64 pair; anything that overflows
// the 64-bit reduced form is promoted to a heap mpq. Arithmetic is exact in
// both representations; there is no rounding anywhere in the engine.
class Rational {
 public:
  Rational() : n_(0), d_(1), big_(nullptr) {}
  Rational(long long n) : n_(n), d_(1), big_(nullptr) {}  // NOLINT
  Rational(int n) : n_(n), d_(1), big_(nullptr) {}        // NOLINT
  Rational(long long n, long long d);
  explicit Rational(const mpq_class& q);

  Rational(const Rational& o);
  Rational(Rational&& o) noexcept;
  Rational& operator=(const Rational& o);
  Rational& operator=(Rational&& o) noexcept;
  ~Rational();

  static Rational from_string(const std::string& s);

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b);
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b);

  bool is_zero() const { return big_ ? sgn(*big_) == 0 : n_ == 0; }
  bool is_one() const { return big_ ? *big_ == 1 : (n_ == 1 && d_ == 1); }
  int sign() const;
  Rational inverse() const;
  bool is_small() const { return big_ == nullptr; }

  // "num" when the denominator is 1, else "num/den".
  std::string str() const;

  mpq_class to_mpq() const;

 private:
  void promote_set(const mpq_class& q);  // store q, shrinking back if it fits
  void set_from_i128(__int128 n, __int128 d);

  int64_t n_, d_;
  mpq_class* big_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

inline Rational rat(long long n) { return Rational(n); }
inline Rational rat(long long n, long long d) { return Rational(n, d); }

}  // namespace dgla
