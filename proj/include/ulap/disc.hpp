#pragma once

#include <string>

#include "ulap/errors.hpp"
#include "ulap/mobius.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"

// Closed discs in Q_p and in P^1(Q_p), with exact containment, disjointness,
// distance, and Moebius images.  Radii are powers p^rho with rational rho.
// Over an ultrametric field two closed discs are either nested or disjoint,
// disjoint discs sit at a constant pairwise distance |c1 - c2|, and a Moebius
// map whose pole avoids a disc scales it rigidly by |m'(center)|.

namespace ulap {

// Closed disc {|z - center| <= p^rho} in the affine line.
struct Disc {
  Rational center;
  Rational rho;
  long prime;

  PAbs radius() const { return PAbs::power(prime, rho); }

  bool contains_point(const Rational& x) const {
    return dist_p(x, center, prime) <= radius();
  }
  bool strictly_contains_point(const Rational& x) const {
    return dist_p(x, center, prime) < radius();
  }
  bool contains_disc(const Disc& o) const {
    return o.radius() <= radius() && dist_p(o.center, center, prime) <= radius();
  }
  bool disjoint_from(const Disc& o) const {
    return dist_p(center, o.center, prime) > max(radius(), o.radius());
  }
  bool equal_as_set(const Disc& o) const {
    return rho == o.rho && dist_p(center, o.center, prime) <= radius();
  }

  std::string str() const {
    return "D(" + to_string(center) + ", " + std::to_string(prime) + "^(" +
           to_string(rho) + "))";
  }
};

// Constant distance between two disjoint closed discs; zero if they meet.
inline PAbs disc_distance(const Disc& a, const Disc& b) {
  if (!a.disjoint_from(b)) return PAbs::zero(a.prime);
  return dist_p(a.center, b.center, a.prime);
}

// Closed disc in P^1: either {|z - c| <= p^rho} or {|z - c| >= p^rho} u {inf}.
struct PDisc {
  Rational center;
  Rational rho;
  bool exterior = false;
  long prime = 0;

  static PDisc interior_disc(const Rational& c, const Rational& rho, long prime) {
    return PDisc{c, rho, false, prime};
  }
  static PDisc exterior_disc(const Rational& c, const Rational& rho, long prime) {
    return PDisc{c, rho, true, prime};
  }

  PAbs radius() const { return PAbs::power(prime, rho); }

  Disc as_disc() const {
    if (exterior) throw PreconditionError("exterior disc has no affine model");
    return Disc{center, rho, prime};
  }

  bool contains(const ProjectivePoint& x) const {
    if (x.at_infinity) return exterior;
    const PAbs d = dist_p(x.z, center, prime);
    return exterior ? d >= radius() : d <= radius();
  }

  // Membership in the interior (the corresponding open set in P^1).
  bool open_contains(const ProjectivePoint& x) const {
    if (x.at_infinity) return exterior;
    const PAbs d = dist_p(x.z, center, prime);
    return exterior ? d > radius() : d < radius();
  }

  // Complement of the open set: same center and radius, opposite kind.
  PDisc complement_of_open() const { return PDisc{center, rho, !exterior, prime}; }

  bool equal_as_set(const PDisc& o) const {
    if (exterior != o.exterior || rho != o.rho) return false;
    const PAbs d = dist_p(center, o.center, prime);
    return exterior ? d < radius() : d <= radius();
  }

  bool disjoint_from(const PDisc& o) const {
    if (exterior && o.exterior) return false;
    if (!exterior && !o.exterior) {
      return dist_p(center, o.center, prime) > max(radius(), o.radius());
    }
    const PDisc& in = exterior ? o : *this;
    const PDisc& out = exterior ? *this : o;
    return in.radius() < out.radius() &&
           dist_p(in.center, out.center, prime) < out.radius();
  }

  std::string str() const {
    return std::string(exterior ? "E(" : "D(") + to_string(center) + ", " +
           std::to_string(prime) + "^(" + to_string(rho) + "))";
  }
};

// Distance between disjoint P^1 discs, taken over their finite points; zero
// if they intersect.
inline PAbs pdisc_distance(const PDisc& a, const PDisc& b) {
  if (!a.disjoint_from(b)) return PAbs::zero(a.prime);
  if (!a.exterior && !b.exterior) return dist_p(a.center, b.center, a.prime);
  // One exterior disc: the interior one sits inside its complement, and the
  // infimum is attained on the boundary circle of the exterior disc.
  const PDisc& out = a.exterior ? a : b;
  return out.radius();
}

// Image of a closed affine disc under a Moebius map whose pole lies strictly
// outside it.  |m(x) - m(c)| = |m'(c)| |x - c| on the disc, so the image is
// the closed disc around m(center) scaled by the constant |m'(center)|.
inline Disc disc_image(const Mobius& m, const Disc& d) {
  const ProjectivePoint pole = m.pole();
  if (!pole.at_infinity && d.contains_point(pole.z)) {
    throw PoleError("pole of " + m.str() + " lies in " + d.str());
  }
  const PAbs scale = m.derivative_abs(d.center);
  return Disc{m.apply_finite(d.center), d.rho + scale.exponent(), d.prime};
}

// Total image map for closed P^1 discs.  The image contains infinity exactly
// when the pole lies in the disc, which fixes the kind of the image:
//   pole outside, interior disc:  D(m(c), r |m'(c)|)
//   pole outside, exterior disc:  D(m(inf), |det| / (|c_m|^2 r))
//   pole inside, interior disc:   E(m(inf), |det| / (|c_m|^2 r))
//   pole inside, exterior disc:   E(m(c), r |m'(c)|)
inline PDisc pdisc_image(const Mobius& m, const PDisc& x) {
  const ProjectivePoint pole = m.pole();
  const bool pole_inside = x.contains(pole);
  const bool rigid = (x.exterior == pole_inside);
  if (rigid) {
    // The map is rigid around the finite center; the pole side fixes the kind.
    const PAbs scale = m.derivative_abs(x.center);
    return PDisc{m.apply_finite(x.center), x.rho + scale.exponent(), pole_inside,
                 x.prime};
  }
  // The center of the image is m(inf) = a / c_m; here c_m != 0 because the
  // pole is finite in both remaining cases.
  const Rational cm = m.c();
  if (cm == 0) throw PreconditionError("unexpected affine map in pdisc_image");
  const Rational center = m.a() / cm;
  const Rational e = Rational(-valuation(m.det(), x.prime)) -
                     2 * Rational(-valuation(cm, x.prime)) - x.rho;
  return PDisc{center, e, pole_inside, x.prime};
}

}  // namespace ulap
