#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <string>

#include "ulap/errors.hpp"

// Exact rational arithmetic.  All geometric data (centers, matrix entries,
// radius exponents, kernel exponents) is kept as mpq until a final numeric
// evaluation is requested.

namespace ulap {

using Integer = mpz_class;
using Rational = mpq_class;

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

// Parses "a", "-a", or "a/b" with arbitrary precision.  Used by the config
// reader, hence the ConfigError on malformed input.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ConfigError("empty rational literal");
  Rational q;
  if (q.set_str(text, 10) != 0) {
    throw ConfigError("malformed rational literal: '" + text + "'");
  }
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

// b^e for integer e of either sign; e < 0 requires b != 0.
inline Rational pow_int(const Rational& base, long exp) {
  if (exp == 0) return Rational(1);
  if (base == 0 && exp < 0) throw PreconditionError("0 raised to a negative power");
  Rational num, den;
  const unsigned long k = static_cast<unsigned long>(exp < 0 ? -exp : exp);
  mpz_pow_ui(num.get_num_mpz_t(), base.get_num_mpz_t(), k);
  mpz_pow_ui(num.get_den_mpz_t(), base.get_den_mpz_t(), k);
  num.canonicalize();
  if (exp < 0) {
    Rational inv;
    mpq_inv(inv.get_mpq_t(), num.get_mpq_t());
    return inv;
  }
  return num;
}

inline Integer pow_int(const Integer& base, unsigned long exp) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

// p-adic valuation of a nonzero integer: the exponent of p in n.
inline long valuation_int(const Integer& n, long p) {
  if (n == 0) throw ZeroDistanceError("valuation of zero requested");
  Integer rest;
  const mp_bitcnt_t v = mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), Integer(p).get_mpz_t());
  return static_cast<long>(v);
}

// v_p(q) for nonzero q; v_p(a/b) = v_p(a) - v_p(b).
inline long valuation(const Rational& q, long p) {
  if (q == 0) throw ZeroDistanceError("valuation of zero requested");
  return valuation_int(Integer(q.get_num()), p) - valuation_int(Integer(q.get_den()), p);
}

}  // namespace ulap
