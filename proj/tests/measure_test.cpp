#include <gtest/gtest.h>

#include "ulap/measure.hpp"

namespace ulap {
namespace {

TEST(PolyTest, EvalAndShift) {
  const std::vector<Rational> p{Rational(1), Rational(0), Rational(1)};  // 1 + z^2
  EXPECT_EQ(poly_eval(p, Rational(3)), Rational(10));
  EXPECT_EQ(poly_eval(p, Rational(1, 2)), Rational(5, 4));
  // (z+1)^2 + 1 = 2 + 2z + z^2.
  const auto shifted = taylor_shift(p, Rational(1));
  ASSERT_EQ(shifted.size(), 3u);
  EXPECT_EQ(shifted[0], Rational(2));
  EXPECT_EQ(shifted[1], Rational(2));
  EXPECT_EQ(shifted[2], Rational(1));
  // Shift identity: eval at c recovers the constant coefficient.
  EXPECT_EQ(taylor_shift(p, Rational(7, 3))[0], poly_eval(p, Rational(7, 3)));
}

TEST(CertifyTest, Nonvanishing) {
  const std::vector<Rational> z{Rational(0), Rational(1)};  // the polynomial z
  const Disc off_zero{Rational(1), Rational(-1), 2};
  EXPECT_EQ(certify_nonvanishing(z, off_zero), PAbs::one(2));
  // Center is a zero.
  EXPECT_THROW(certify_nonvanishing(z, Disc{Rational(0), Rational(0), 2}),
               FormVanishesError);
  // Disc containing a zero away from the center: no strict domination.
  EXPECT_THROW(certify_nonvanishing(z, Disc{Rational(1), Rational(0), 2}),
               FormVanishesError);
}

TEST(FormTest, AbsValues) {
  OmegaForm dz_over_z;
  dz_over_z.num = {Rational(1)};
  dz_over_z.den = {Rational(0), Rational(1)};
  EXPECT_EQ(form_abs_at(dz_over_z, Rational(1), 2), PAbs::one(2));
  EXPECT_EQ(form_abs_at(dz_over_z, Rational(4), 2), PAbs::power(2, Rational(2)));
  EXPECT_THROW(form_abs_at(dz_over_z, Rational(0), 2), FormVanishesError);
  EXPECT_EQ(form_abs_on_disc(dz_over_z, Disc{Rational(1), Rational(-1), 2}),
            PAbs::one(2));
  EXPECT_EQ(disc_mass(dz_over_z, Disc{Rational(4), Rational(-3), 2}),
            PAbs::power(2, Rational(-1)));
}

TEST(TreeMassTest, NormalisedTate) {
  const OrbitTree t = OrbitTree::regular(2, Rational(1), -1, 3);
  OmegaForm dz_over_z;
  dz_over_z.num = {Rational(1)};
  dz_over_z.den = {Rational(0), Rational(1)};
  const TreeMasses m = tree_masses(t, dz_over_z, true);
  EXPECT_EQ(m.mass[0].to_rational(), Rational(1));
  for (int v : t.leaves()) {
    EXPECT_EQ(m.mass[v].to_rational(), Rational(1, 8));
  }
  // Unnormalised: the root carries |f| * diam = 1/2.
  const TreeMasses raw = tree_masses(t, dz_over_z, false);
  EXPECT_EQ(raw.mass[0].to_rational(), Rational(1, 2));
  for (int v : t.leaves()) {
    EXPECT_EQ(raw.mass[v].to_rational(), Rational(1, 16));
  }
}

TEST(TreeMassTest, EquityHolds) {
  const OrbitTree t = OrbitTree::regular(3, Rational(8), -2, 2);
  const TreeMasses m = tree_masses(t, OmegaForm{}, true);
  for (int v = 0; v < t.n_vertices(); ++v) {
    const TreeVertex& tv = t.vertex(v);
    if (tv.children.empty()) continue;
    Rational sum(0);
    for (int ch : tv.children) sum += m.mass[ch].to_rational();
    EXPECT_EQ(sum, m.mass[v].to_rational());
  }
}

TEST(TreeMassTest, FormWithZeroInsideTreeRejected) {
  // dz/z on a tree rooted at a disc containing 0 has no constant |f|.
  const OrbitTree t = OrbitTree::regular(2, Rational(0), -1, 2);
  OmegaForm dz_over_z;
  dz_over_z.num = {Rational(1)};
  dz_over_z.den = {Rational(0), Rational(1)};
  EXPECT_THROW(tree_masses(t, dz_over_z, true), FormVanishesError);
}

TEST(InvarianceTest, TateForm) {
  OmegaForm dz_over_z;
  dz_over_z.num = {Rational(1)};
  dz_over_z.den = {Rational(0), Rational(1)};
  const std::vector<Mobius> maps{Mobius(4, 0, 0, 1, 2)};
  const std::vector<Disc> samples{Disc{Rational(1), Rational(-1), 2},
                                  Disc{Rational(3), Rational(-2), 2}};
  const InvarianceReport report = check_invariance(dz_over_z, maps, samples);
  EXPECT_TRUE(report.ok);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const InvarianceRow& row : report.rows) {
    EXPECT_TRUE(row.ok);
    EXPECT_FALSE(row.skipped);
    EXPECT_EQ(row.mass, row.image_mass);
  }
}

TEST(InvarianceTest, SkipsPole) {
  const std::vector<Mobius> maps{Mobius(0, 1, 1, 0, 2)};  // 1/z
  const std::vector<Disc> samples{Disc{Rational(0), Rational(-1), 2}};
  const InvarianceReport report = check_invariance(OmegaForm{}, maps, samples);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_TRUE(report.rows[0].skipped);
  // Skipped rows do not fail the report.
  EXPECT_TRUE(report.ok);
}

TEST(InvarianceTest, DetectsNonInvariantForm) {
  // Lebesgue-type form dz is not invariant under z -> 4z.
  const std::vector<Mobius> maps{Mobius(4, 0, 0, 1, 2)};
  const std::vector<Disc> samples{Disc{Rational(1), Rational(-1), 2}};
  const InvarianceReport report = check_invariance(OmegaForm{}, maps, samples);
  EXPECT_FALSE(report.ok);
}

}  // namespace
}  // namespace ulap
