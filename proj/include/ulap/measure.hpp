#pragma once

#include <string>
#include <vector>

#include "ulap/disc.hpp"
#include "ulap/errors.hpp"
#include "ulap/mobius.hpp"
#include "ulap/orbit_tree.hpp"
#include "ulap/padic.hpp"
#include "ulap/rational.hpp"

// Measures on tree boundaries induced by a rational differential form
// omega = f dz with f = P/Q.  On a disc where P and Q have no zeros, |f| is
// constant; the mass of a vertex disc is |f(center)| times its diameter.
// Zero-freeness of a polynomial on D(c, r) is certified exactly from its
// Taylor expansion at c: if |b_0| > max_{k>=1} |b_k| r^k the value cannot
// vanish anywhere on the disc (strict ultrametric domination).

namespace ulap {

struct OmegaForm {
  std::vector<Rational> num{Rational(1)};  // coefficients, constant term first
  std::vector<Rational> den{Rational(1)};
};

inline Rational poly_eval(const std::vector<Rational>& coeffs, const Rational& x) {
  Rational acc(0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Coefficients of P(z + c) by repeated synthetic division.
inline std::vector<Rational> taylor_shift(const std::vector<Rational>& coeffs,
                                          const Rational& c) {
  std::vector<Rational> work = coeffs;
  std::vector<Rational> out(coeffs.size(), Rational(0));
  if (work.empty()) return out;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    // Divide work by (z - c): remainder is the k-th Taylor coefficient.
    Rational rem(0);
    for (std::size_t i = work.size(); i-- > 0;) {
      const Rational next = work[i] + rem * c;
      work[i] = rem;
      rem = next;
    }
    out[k] = rem;
    if (!work.empty()) work.pop_back();
  }
  return out;
}

// Certifies that the polynomial has no zero on the closed disc.  Returns the
// constant absolute value it takes there.  Throws FormVanishesError when the
// certificate fails (a genuine zero at the center, or no strict domination).
inline PAbs certify_nonvanishing(const std::vector<Rational>& coeffs, const Disc& d) {
  const std::vector<Rational> b = taylor_shift(coeffs, d.center);
  if (b.empty() || b[0] == 0) {
    throw FormVanishesError("polynomial vanishes at center of " + d.str());
  }
  const PAbs b0 = abs_p(b[0], d.prime);
  PAbs tail = PAbs::zero(d.prime);
  for (std::size_t k = 1; k < b.size(); ++k) {
    if (b[k] == 0) continue;
    tail = max(tail, abs_p(b[k], d.prime) * d.radius().pow(Rational(k)));
  }
  if (!(b0 > tail)) {
    throw FormVanishesError("cannot certify zero-freeness of polynomial on " +
                            d.str() + ": |b0| = " + b0.str() +
                            " does not dominate " + tail.str());
  }
  return b0;
}

// |f| on a disc where both numerator and denominator are zero-free.
inline PAbs form_abs_on_disc(const OmegaForm& f, const Disc& d) {
  const PAbs num = certify_nonvanishing(f.num, d);
  const PAbs den = certify_nonvanishing(f.den, d);
  return num / den;
}

inline PAbs form_abs_at(const OmegaForm& f, const Rational& x, long prime) {
  const Rational q = poly_eval(f.den, x);
  if (q == 0) throw FormVanishesError("form has a pole at " + to_string(x));
  return abs_p(poly_eval(f.num, x), prime) / abs_p(q, prime);
}

// Unscaled omega mass of a disc: |f(center)| diam, with zero-freeness
// certified so the value is well defined.
inline PAbs disc_mass(const OmegaForm& f, const Disc& d) {
  return form_abs_on_disc(f, d) * d.radius();
}

// Per-vertex masses of a measured tree.  The certificate runs on the root
// only; child discs are nested, so |f| is the same constant there, which the
// equity identity then re-checks exactly.
struct TreeMasses {
  std::vector<PAbs> mass;   // indexed by vertex
  PAbs scale;               // applied normalisation factor
};

inline TreeMasses tree_masses(const OrbitTree& tree, const OmegaForm& f,
                              bool probability_normalisation) {
  const Disc root = tree.vertex_disc(tree.root());
  const PAbs c = form_abs_on_disc(f, root);
  PAbs scale = PAbs::one(tree.prime());
  if (probability_normalisation) {
    scale = PAbs::one(tree.prime()) / (c * root.radius());
  }
  TreeMasses out;
  out.scale = scale;
  out.mass.reserve(tree.n_vertices());
  for (int v = 0; v < tree.n_vertices(); ++v) {
    out.mass.push_back(c * tree.vertex_diameter(v) * scale);
  }
  // Equity: children masses sum exactly to the parent mass.
  for (int v = 0; v < tree.n_vertices(); ++v) {
    const TreeVertex& tv = tree.vertex(v);
    if (tv.children.empty()) continue;
    Rational sum(0);
    for (int ch : tv.children) sum += out.mass[ch].to_rational();
    if (sum != out.mass[v].to_rational()) {
      throw DegenerateVertexError("equity fails at vertex " + std::to_string(v) +
                                  ": children sum " + to_string(sum) +
                                  " != " + to_string(out.mass[v].to_rational()));
    }
  }
  return out;
}

// Invariance diagnostic: compares the mass of each sample disc with the mass
// of its Moebius image.  A pole inside a sample disc marks the row skipped.
struct InvarianceRow {
  std::string disc;
  std::string map;
  std::string mass;
  std::string image_mass;
  bool skipped = false;
  bool ok = false;
};

struct InvarianceReport {
  std::vector<InvarianceRow> rows;
  bool ok = true;
};

inline InvarianceReport check_invariance(const OmegaForm& f,
                                         const std::vector<Mobius>& maps,
                                         const std::vector<Disc>& samples) {
  InvarianceReport report;
  for (const Disc& d : samples) {
    for (const Mobius& m : maps) {
      InvarianceRow row;
      row.disc = d.str();
      row.map = m.str();
      try {
        const PAbs before = disc_mass(f, d);
        const Disc image = disc_image(m, d);
        const PAbs after = disc_mass(f, image);
        row.mass = before.str();
        row.image_mass = after.str();
        row.ok = (before == after);
      } catch (const PoleError&) {
        row.skipped = true;
        row.ok = false;
      }
      if (!row.ok && !row.skipped) report.ok = false;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace ulap
