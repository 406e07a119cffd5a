#pragma once

#include <array>
#include <string>

#include "ulap/errors.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"

// Moebius transformations z -> (az + b)/(cz + d) with exact rational entries,
// acting on P^1(Q_p).  A transformation is hyperbolic precisely when
// v_p(tr^2 / det) < 0, i.e. |tr|^2 > |det|; hyperbolic elements have two
// distinct fixed points on the boundary and generate Schottky dynamics.
// The scaling factor of such a map on a pole-free disc is the constant
// |m'(z)| = |det| / |cz + d|^2.

namespace ulap {

struct ProjectivePoint {
  bool at_infinity = false;
  Rational z = 0;

  static ProjectivePoint finite(const Rational& v) { return {false, v}; }
  static ProjectivePoint infinity() { return {true, Rational(0)}; }

  bool operator==(const ProjectivePoint& o) const {
    if (at_infinity != o.at_infinity) return false;
    return at_infinity || z == o.z;
  }
};

class Mobius {
 public:
  Mobius(const Rational& a, const Rational& b, const Rational& c, const Rational& d,
         long prime)
      : a_(a), b_(b), c_(c), d_(d), prime_(prime) {
    if (det() == 0) throw ConfigError("Moebius matrix is singular");
  }

  static Mobius identity(long prime) {
    return Mobius(Rational(1), Rational(0), Rational(0), Rational(1), prime);
  }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  const Rational& c() const { return c_; }
  const Rational& d() const { return d_; }
  long prime() const { return prime_; }

  Rational det() const { return a_ * d_ - b_ * c_; }
  Rational trace() const { return a_ + d_; }

  // The preimage of infinity: -d/c, or infinity itself when c = 0.
  ProjectivePoint pole() const {
    if (c_ == 0) return ProjectivePoint::infinity();
    return ProjectivePoint::finite(-d_ / c_);
  }

  ProjectivePoint apply(const ProjectivePoint& x) const {
    if (x.at_infinity) {
      if (c_ == 0) return ProjectivePoint::infinity();
      return ProjectivePoint::finite(a_ / c_);
    }
    const Rational den = c_ * x.z + d_;
    if (den == 0) return ProjectivePoint::infinity();
    return ProjectivePoint::finite((a_ * x.z + b_) / den);
  }

  // Finite image of a finite point; throws if the point is the pole.
  Rational apply_finite(const Rational& x) const {
    const Rational den = c_ * x + d_;
    if (den == 0) throw PoleError("Moebius map evaluated at its pole");
    return (a_ * x + b_) / den;
  }

  Mobius compose(const Mobius& o) const {
    if (prime_ != o.prime_) throw PreconditionError("mixed primes in composition");
    return Mobius(a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_,
                  c_ * o.a_ + d_ * o.c_, c_ * o.b_ + d_ * o.d_, prime_);
  }

  Mobius inverse() const { return Mobius(d_, -b_, -c_, a_, prime_); }

  // |m'(x)| at a finite non-pole point.
  PAbs derivative_abs(const Rational& x) const {
    const Rational den = c_ * x + d_;
    if (den == 0) throw PoleError("derivative requested at the pole");
    return PAbs::of(det(), prime_) / PAbs::of(den, prime_).pow(2);
  }

  // v_p(tr^2 / det) < 0, equivalently |tr|_p^2 > |det|_p.
  bool is_hyperbolic() const {
    const Rational tr = trace();
    if (tr == 0) return false;
    return valuation(tr * tr, prime_) < valuation(det(), prime_);
  }

  // Equality in PGL_2: matrices proportional over Q.
  bool projectively_equal(const Mobius& o) const {
    return a_ * o.b_ == b_ * o.a_ && a_ * o.c_ == c_ * o.a_ &&
           a_ * o.d_ == d_ * o.a_ && b_ * o.c_ == c_ * o.b_ &&
           b_ * o.d_ == d_ * o.b_ && c_ * o.d_ == d_ * o.c_;
  }

  std::string str() const {
    return "[" + to_string(a_) + ", " + to_string(b_) + "; " + to_string(c_) + ", " +
           to_string(d_) + "]";
  }

 private:
  Rational a_, b_, c_, d_;
  long prime_;
};

}  // namespace ulap
