#pragma once

#include <cmath>
#include <string>

#include "ulap/errors.hpp"
#include "ulap/rational.hpp"

// Exact p-adic absolute values.  Every absolute value arising in this library
// is either 0 or an exact power p^e with rational exponent e: rational points
// have integer exponents, disc radii and kernel powers |.|^alpha introduce
// rational ones.  PAbs keeps (p, e) as exact data so products, quotients,
// powers and comparisons never round.  Conversion to double happens once, at
// the numeric frontier.

namespace ulap {

class PAbs {
 public:
  PAbs() : prime_(0), zero_(true), exp_(0) {}

  static PAbs zero(long prime) { return PAbs(prime, true, Rational(0)); }
  static PAbs one(long prime) { return PAbs(prime, false, Rational(0)); }
  static PAbs power(long prime, const Rational& e) { return PAbs(prime, false, e); }

  // |x|_p for rational x.
  static PAbs of(const Rational& x, long prime) {
    if (x == 0) return zero(prime);
    return power(prime, Rational(-valuation(x, prime)));
  }

  long prime() const { return prime_; }
  bool is_zero() const { return zero_; }

  const Rational& exponent() const {
    if (zero_) throw ZeroDistanceError("exponent of zero absolute value");
    return exp_;
  }

  PAbs operator*(const PAbs& o) const {
    check(o);
    if (zero_ || o.zero_) return zero(prime_);
    return power(prime_, exp_ + o.exp_);
  }

  PAbs operator/(const PAbs& o) const {
    check(o);
    if (o.zero_) throw ZeroDistanceError("division by zero absolute value");
    if (zero_) return zero(prime_);
    return power(prime_, exp_ - o.exp_);
  }

  // |.|^s with rational s; 0^s demands s > 0.
  PAbs pow(const Rational& s) const {
    if (zero_) {
      if (s <= 0) throw ZeroDistanceError("0 raised to a nonpositive power");
      return zero(prime_);
    }
    return power(prime_, exp_ * s);
  }

  bool operator==(const PAbs& o) const {
    check(o);
    if (zero_ != o.zero_) return false;
    return zero_ || exp_ == o.exp_;
  }
  bool operator!=(const PAbs& o) const { return !(*this == o); }

  bool operator<(const PAbs& o) const {
    check(o);
    if (zero_) return !o.zero_;
    if (o.zero_) return false;
    return exp_ < o.exp_;
  }
  bool operator<=(const PAbs& o) const { return *this < o || *this == o; }
  bool operator>(const PAbs& o) const { return o < *this; }
  bool operator>=(const PAbs& o) const { return o <= *this; }

  // Exact value; only defined for integer exponents.
  Rational to_rational() const {
    if (zero_) return Rational(0);
    if (!is_integer(exp_)) {
      throw PreconditionError("absolute value p^(" + ulap::to_string(exp_) +
                              ") is not rational");
    }
    return pow_int(Rational(prime_), exp_.get_num().get_si());
  }

  double to_double() const {
    if (zero_) return 0.0;
    if (is_integer(exp_) && mpz_cmpabs_ui(exp_.get_num_mpz_t(), 1024) <= 0) {
      return to_rational().get_d();
    }
    return std::pow(static_cast<double>(prime_), exp_.get_d());
  }

  std::string str() const {
    if (zero_) return "0";
    return std::to_string(prime_) + "^(" + ulap::to_string(exp_) + ")";
  }

 private:
  PAbs(long prime, bool zero, const Rational& e) : prime_(prime), zero_(zero), exp_(e) {}

  void check(const PAbs& o) const {
    if (prime_ != o.prime_) {
      throw PreconditionError("mixed primes in absolute value arithmetic");
    }
  }

  long prime_;
  bool zero_;
  Rational exp_;
};

inline PAbs max(const PAbs& a, const PAbs& b) { return a < b ? b : a; }

inline PAbs abs_p(const Rational& x, long prime) { return PAbs::of(x, prime); }

// Ultrametric distance |x - y|_p.
inline PAbs dist_p(const Rational& x, const Rational& y, long prime) {
  return PAbs::of(x - y, prime);
}

}  // namespace ulap
