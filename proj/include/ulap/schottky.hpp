#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ulap/disc.hpp"
#include "ulap/errors.hpp"
#include "ulap/mobius.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"
#include "ulap/words.hpp"

// Schottky groups of genus g: free groups on g hyperbolic Moebius generators,
// presented by a good fundamental domain of 2g disjoint closed P^1 discs in
// which generator i maps the complement of the open disc D_i onto the closed
// disc D_{i+g}.  The letter-length geometric series
//   S(s) = sum_{gamma} p^{-s l(gamma)} = 1 + 2g p^-s / (1 - (2g-1) p^-s)
// converges exactly when 2g - 1 < p^s; the sharper condition 2g < p^s is the
// regime in which kernel estimates close.

namespace ulap {

class SchottkyGroup {
 public:
  SchottkyGroup(long prime, std::vector<Mobius> generators)
      : prime_(prime), gens_(std::move(generators)) {
    if (gens_.empty()) throw ConfigError("Schottky group needs at least one generator");
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      if (gens_[i].prime() != prime_) {
        throw ConfigError("generator " + std::to_string(i + 1) + " has wrong prime");
      }
      if (!gens_[i].is_hyperbolic()) {
        throw ConfigError("generator " + std::to_string(i + 1) + " = " +
                          gens_[i].str() + " is not hyperbolic");
      }
      inv_.push_back(gens_[i].inverse());
    }
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      for (std::size_t j = i + 1; j < gens_.size(); ++j) {
        if (gens_[i].projectively_equal(gens_[j]) ||
            gens_[i].projectively_equal(inv_[j])) {
          throw ConfigError("generators " + std::to_string(i + 1) + " and " +
                            std::to_string(j + 1) + " do not generate freely");
        }
      }
    }
  }

  long prime() const { return prime_; }
  int genus() const { return static_cast<int>(gens_.size()); }

  const Mobius& generator(int i) const { return gens_.at(i); }  // 0-based

  // Letter +i is generator i (1-based), -i its inverse.
  const Mobius& letter_mobius(Letter l) const {
    if (l == 0 || std::abs(l) > genus()) {
      throw PreconditionError("letter out of range: " + std::to_string(l));
    }
    return l > 0 ? gens_.at(l - 1) : inv_.at(-l - 1);
  }

  Mobius word_mobius(const Word& w) const {
    Mobius m = Mobius::identity(prime_);
    for (Letter l : w.letters()) m = m.compose(letter_mobius(l));
    return m;
  }

  // Index (0-based, into a 2g disc list) of the fundamental domain disc that
  // contains the pole of the letter map: ingress(+i) = i-1, ingress(-i) = i-1+g.
  int ingress_disc(Letter l) const {
    return l > 0 ? l - 1 : (-l - 1) + genus();
  }
  // Index of the disc the letter maps everything else into.
  int egress_disc(Letter l) const {
    return l > 0 ? (l - 1) + genus() : -l - 1;
  }

  std::vector<Letter> all_letters() const {
    std::vector<Letter> out;
    for (int i = 1; i <= genus(); ++i) {
      out.push_back(i);
      out.push_back(-i);
    }
    return out;
  }

 private:
  long prime_;
  std::vector<Mobius> gens_;
  std::vector<Mobius> inv_;
};

struct GoodFundamentalDomain {
  std::vector<PDisc> discs;  // size 2g; disc i is paired with disc i+g
};

struct CheckItem {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct FdReport {
  std::vector<CheckItem> checks;
  bool ok = true;

  void add(const std::string& name, bool item_ok, const std::string& detail) {
    checks.push_back({name, item_ok, detail});
    if (!item_ok) ok = false;
  }
};

// Exact validation of a good fundamental domain: disc count, at most one
// exterior disc, pairwise disjointness, and the pairing identity
// gamma_i(P^1 minus open D_i) = closed D_{i+g} together with its inverse.
inline FdReport validate_fundamental_domain(const SchottkyGroup& group,
                                            const GoodFundamentalDomain& fd) {
  FdReport report;
  const int g = group.genus();
  const std::size_t expected = static_cast<std::size_t>(2 * g);
  report.add("disc_count", fd.discs.size() == expected,
             std::to_string(fd.discs.size()) + " of " + std::to_string(expected));
  if (fd.discs.size() != expected) return report;

  int n_exterior = 0;
  for (const PDisc& d : fd.discs) n_exterior += d.exterior ? 1 : 0;
  report.add("exterior_count", n_exterior <= 1,
             std::to_string(n_exterior) + " exterior discs");

  bool disjoint = true;
  std::string overlap;
  for (std::size_t i = 0; i < fd.discs.size(); ++i) {
    for (std::size_t j = i + 1; j < fd.discs.size(); ++j) {
      if (!fd.discs[i].disjoint_from(fd.discs[j])) {
        disjoint = false;
        overlap = fd.discs[i].str() + " meets " + fd.discs[j].str();
      }
    }
  }
  report.add("pairwise_disjoint", disjoint, disjoint ? "all disjoint" : overlap);

  for (int i = 0; i < g; ++i) {
    const Mobius& gi = group.generator(i);
    const PDisc forward = pdisc_image(gi, fd.discs[i].complement_of_open());
    const bool fwd_ok = forward.equal_as_set(fd.discs[i + g]);
    report.add("pairing_" + std::to_string(i + 1), fwd_ok,
               "image " + forward.str() + " vs " + fd.discs[i + g].str());
    const PDisc backward =
        pdisc_image(gi.inverse(), fd.discs[i + g].complement_of_open());
    const bool bwd_ok = backward.equal_as_set(fd.discs[i]);
    report.add("pairing_inverse_" + std::to_string(i + 1), bwd_ok,
               "image " + backward.str() + " vs " + fd.discs[i].str());
  }
  return report;
}

// Whether the open set underlying X meets the closed affine disc A.
inline bool open_pdisc_meets_disc(const PDisc& x, const Disc& a) {
  const PAbs d = dist_p(a.center, x.center, x.prime);
  if (!x.exterior) {
    return d < x.radius() || d <= PAbs::power(a.prime, a.rho);
  }
  // Open exterior misses A exactly when A lies in the closed complement.
  return !(PAbs::power(a.prime, a.rho) <= x.radius() && d <= x.radius());
}

// Letter-length geometric series over the group, exact over Q when the
// exponent s is a positive integer.
struct LengthSeries {
  bool exact = false;
  Rational truncated_q, tail_q, full_q;
  double truncated = 0, tail = 0, full = 0;
  bool sharp_condition = false;  // 2g < p^s (sharp regime)
};

// Exact convergence test (2g - 1) < p^s for rational s = n/d, d > 0.
inline bool series_converges(int genus, long prime, const Rational& s) {
  if (s <= 0) return 2 * genus - 1 < 1;
  const unsigned long d = s.get_den().get_ui();
  const unsigned long n = s.get_num().get_ui();
  return pow_int(Integer(2 * genus - 1), d) < pow_int(Integer(prime), n);
}

inline bool sharp_series_condition(int genus, long prime, const Rational& s) {
  if (s <= 0) return false;
  const unsigned long d = s.get_den().get_ui();
  const unsigned long n = s.get_num().get_ui();
  return pow_int(Integer(2 * genus), d) < pow_int(Integer(prime), n);
}

inline LengthSeries length_series(int genus, long prime, const Rational& s,
                                  std::size_t l_max) {
  if (!series_converges(genus, prime, s)) {
    throw DivergenceError("length series diverges: 2g-1 = " +
                          std::to_string(2 * genus - 1) + " >= " +
                          std::to_string(prime) + "^(" + to_string(s) + ")");
  }
  LengthSeries out;
  out.sharp_condition = sharp_series_condition(genus, prime, s);
  const double g2 = 2.0 * genus;
  const double r = std::pow(static_cast<double>(prime), -s.get_d());
  const double q = (g2 - 1.0) * r;
  out.full = 1.0 + g2 * r / (1.0 - q);
  out.truncated = 1.0;
  double term = g2 * r;  // contribution of length 1
  for (std::size_t l = 1; l <= l_max; ++l) {
    out.truncated += term;
    term *= q;
  }
  out.tail = g2 * r * std::pow(q, static_cast<double>(l_max)) / (1.0 - q);
  if (is_integer(s) && s > 0) {
    out.exact = true;
    const Rational rq = pow_int(Rational(prime), -s.get_num().get_si());
    const Rational qq = Rational(2 * genus - 1) * rq;
    out.full_q = 1 + Rational(2 * genus) * rq / (1 - qq);
    out.truncated_q = 1;
    Rational term_q = Rational(2 * genus) * rq;
    for (std::size_t l = 1; l <= l_max; ++l) {
      out.truncated_q += term_q;
      term_q *= qq;
    }
    out.tail_q = out.full_q - out.truncated_q;
    out.truncated = out.truncated_q.get_d();
    out.tail = out.tail_q.get_d();
    out.full = out.full_q.get_d();
  }
  return out;
}

}  // namespace ulap
