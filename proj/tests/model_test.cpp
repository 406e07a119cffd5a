#include <gtest/gtest.h>

#include "test_util.hpp"

#include "ulap/model.hpp"

namespace ulap {
namespace {

ComponentSpec tate_component() {
  ComponentSpec cs;
  cs.generators = {Mobius(4, 0, 0, 1, 2)};
  cs.fd_discs = {PDisc::exterior_disc(Rational(0), Rational(0), 2),
                 PDisc::interior_disc(Rational(0), Rational(-2), 2)};
  cs.tree_roots = {Disc{Rational(1), Rational(-1), 2}};
  cs.form.num = {Rational(1)};
  cs.form.den = {Rational(0), Rational(1)};
  cs.alpha = 2;
  cs.probability_normalisation = true;
  return cs;
}

ModelSpec tate_spec() {
  ModelSpec spec;
  spec.prime = 2;
  spec.components = {tate_component()};
  spec.depth = 3;
  spec.l_max = 12;
  return spec;
}

TEST(ModelTest, TateBasics) {
  const Model model = test::load_model("tate_p2.json");
  EXPECT_EQ(model.prime(), 2);
  EXPECT_EQ(model.n_components(), 1);
  EXPECT_EQ(model.n_leaves(), 8);
  EXPECT_FALSE(model.coupled());

  const Component& c = model.component(0);
  EXPECT_EQ(c.group.genus(), 1);
  EXPECT_TRUE(c.fd_report.ok);
  EXPECT_TRUE(c.sharp_condition);
  EXPECT_TRUE(c.alpha_integral);
  EXPECT_EQ(c.mu_total_q, Rational(1));
  // Translate separation delta = 1.
  EXPECT_EQ(c.separation, PAbs::one(2));
  // Words of length 1..12 over a rank-1 free group.
  EXPECT_EQ(c.translates.size(), 24u);

  const long centers[] = {1, 9, 5, 13, 3, 11, 7, 15};
  for (int b = 0; b < 8; ++b) {
    const Leaf& lf = model.leaf(b);
    EXPECT_EQ(lf.kcenter, Rational(centers[b]));
    EXPECT_EQ(lf.mass_q, Rational(1, 8));
    EXPECT_EQ(lf.comp, 0);
  }
}

TEST(ModelTest, TateTranslateKernelFrozen) {
  const Model model = test::load_model("tate_p2.json");
  const Component& c = model.component(0);
  ASSERT_EQ(c.translate_kernel.size(), 8u);
  const Rational expected =
      parse_rational("1649080265272344186945/4722366482869645213696");
  for (const KernelCoeff& kc : c.translate_kernel) {
    ASSERT_TRUE(kc.exact);
    // The exact translate sum is the same for every target leaf.
    EXPECT_EQ(kc.value_q, expected);
  }
  EXPECT_NEAR(c.translate_kernel[0].value, 0.3492063293381343, 1e-15);
  // Tail of the truncated translate sum: tail(series) * delta^-alpha.
  EXPECT_NEAR(model.kernel_tail(0), 3.9736429850260414e-08, 1e-20);
}

TEST(ModelTest, TateDistances) {
  const Model model = test::load_model("tate_p2.json");
  EXPECT_EQ(model.leaf_pair_distance(0, 1), PAbs::power(2, Rational(-3)));
  EXPECT_EQ(model.leaf_pair_distance(0, 4), PAbs::power(2, Rational(-1)));
  EXPECT_TRUE(model.leaf_pair_distance(3, 3).is_zero());
  model.require_single_tree();
  const LengthSeries& s = model.series_alpha(0);
  EXPECT_EQ(s.full_q, parse_rational("5/3"));
}

TEST(ModelTest, Genus2Basics) {
  const Model model = test::load_model("genus2_p3.json");
  EXPECT_EQ(model.prime(), 3);
  EXPECT_EQ(model.n_leaves(), 27);
  const Component& c = model.component(0);
  EXPECT_EQ(c.group.genus(), 2);
  EXPECT_TRUE(c.fd_report.ok);
  EXPECT_TRUE(c.sharp_condition);  // 4 < 9
  EXPECT_EQ(c.mu_total_q, Rational(1));
  // delta = 1/3 over all translate regions.
  EXPECT_EQ(c.separation, PAbs::power(3, Rational(-1)));
  // 4 * (3^6 - 1) / 2 words of length 1..6.
  EXPECT_EQ(c.translates.size(), 1456u);
  for (int b = 0; b < 27; ++b) {
    EXPECT_EQ(model.leaf(b).mass_q, Rational(1, 27));
  }
  const Rational expected = parse_rational("7280/2187");
  for (const KernelCoeff& kc : c.translate_kernel) {
    ASSERT_TRUE(kc.exact);
    EXPECT_EQ(kc.value_q, expected);
  }
}

TEST(ModelTest, ShiftedFramePullsBack) {
  const Model shifted = test::load_model("tate_p2_shifted.json");
  const Model reference = test::load_model("tate_p2.json");
  ASSERT_EQ(shifted.n_leaves(), reference.n_leaves());
  const Component& cs = shifted.component(0);
  EXPECT_EQ(cs.frame.letters(), (std::vector<Letter>{1}));
  // Physical tree sits in the shifted frame.
  EXPECT_EQ(cs.trees[0].vertex(0).center, Rational(4));
  EXPECT_EQ(cs.trees[0].vertex(0).rho, Rational(-3));
  // Pulled-back kernel geometry coincides with the canonical tree exactly.
  const OrbitTree& kt = cs.ktrees[0];
  const OrbitTree& ref = reference.component(0).trees[0];
  for (int v = 0; v < ref.n_vertices(); ++v) {
    EXPECT_EQ(kt.vertex(v).center, ref.vertex(v).center);
    EXPECT_EQ(kt.vertex(v).rho, ref.vertex(v).rho);
  }
  // Masses agree exactly for the invariant form.
  for (int b = 0; b < shifted.n_leaves(); ++b) {
    EXPECT_EQ(shifted.leaf(b).mass_q, reference.leaf(b).mass_q);
    EXPECT_EQ(shifted.leaf(b).kcenter, reference.leaf(b).kcenter);
  }
  EXPECT_EQ(cs.separation, PAbs::one(2));
  // Pulled fundamental domain equals the canonical one as sets.
  const Component& cr = reference.component(0);
  ASSERT_EQ(cs.kfd.discs.size(), cr.fd.discs.size());
  for (std::size_t i = 0; i < cs.kfd.discs.size(); ++i) {
    EXPECT_TRUE(cs.kfd.discs[i].equal_as_set(cr.fd.discs[i]));
  }
}

TEST(ModelTest, CoupledBasics) {
  const Model model = test::load_model("coupled_tates.json");
  EXPECT_EQ(model.n_components(), 2);
  EXPECT_EQ(model.n_leaves(), 16);
  EXPECT_TRUE(model.coupled());
  EXPECT_EQ(model.weight(0, 1), Rational(1));
  EXPECT_EQ(model.effective_alpha_z(), Rational(1));
  EXPECT_EQ(model.component(1).leaf_offset, 8);
  const LengthSeries& sz = model.series_z(0);
  EXPECT_EQ(sz.truncated_q, parse_rational("1610612735/536870912"));
  EXPECT_EQ(sz.full_q, Rational(3));
  EXPECT_THROW(model.leaf_pair_distance(0, 8), PreconditionError);
}

TEST(ModelTest, DecoupledHasZeroWeights) {
  const Model model = test::load_model("decoupled_tates.json");
  EXPECT_EQ(model.n_components(), 2);
  EXPECT_FALSE(model.coupled());
  EXPECT_EQ(model.weight(0, 1), Rational(0));
}

TEST(ModelTest, SpecValidation) {
  {
    ModelSpec spec = tate_spec();
    spec.depth = 0;
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    ModelSpec spec = tate_spec();
    spec.l_max = 0;
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    ModelSpec spec = tate_spec();
    spec.components.clear();
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    // 2^13 leaves exceed the partition budget.
    ModelSpec spec = tate_spec();
    spec.depth = 13;
    spec.l_max = 1;
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    ModelSpec spec = tate_spec();
    spec.components[0].alpha = Rational(-1);
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    ModelSpec spec = tate_spec();
    spec.components[0].frame = Word::from_letters({3});
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    ModelSpec spec = tate_spec();
    spec.components[0].tree_roots.clear();
    EXPECT_THROW(Model{spec}, ConfigError);
  }
}

TEST(ModelTest, WeightValidation) {
  ModelSpec spec = tate_spec();
  spec.components.push_back(tate_component());
  {
    ModelSpec s = spec;
    s.coupling.weights = {{Rational(0), Rational(1)}, {Rational(2), Rational(0)}};
    EXPECT_THROW(Model{s}, ConfigError);  // asymmetric
  }
  {
    ModelSpec s = spec;
    s.coupling.weights = {{Rational(0), Rational(-1)}, {Rational(-1), Rational(0)}};
    EXPECT_THROW(Model{s}, ConfigError);  // negative
  }
  {
    ModelSpec s = spec;
    s.coupling.weights = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    EXPECT_THROW(Model{s}, ConfigError);  // diagonal
  }
  {
    ModelSpec s = spec;
    s.coupling.weights = {{Rational(0)}};
    EXPECT_THROW(Model{s}, ConfigError);  // wrong shape
  }
  {
    ModelSpec s = spec;
    s.coupling.weights = {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
    EXPECT_NO_THROW(Model{s});
  }
}

TEST(ModelTest, GeometryRejections) {
  {
    // Tree root inside an open fundamental domain disc.
    ModelSpec spec = tate_spec();
    spec.components[0].tree_roots = {Disc{Rational(0), Rational(-3), 2}};
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    // Second root is the generator image of the first: a translate region
    // lands exactly on it, so the separation is zero.
    ModelSpec spec = tate_spec();
    spec.components[0].tree_roots = {Disc{Rational(1), Rational(-1), 2},
                                     Disc{Rational(4), Rational(-3), 2}};
    EXPECT_THROW(Model{spec}, ConfigError);
  }
  {
    // A lone root tangent to the inner domain circle is legal.
    ModelSpec spec = tate_spec();
    spec.components[0].tree_roots = {Disc{Rational(4), Rational(-3), 2}};
    spec.depth = 2;
    EXPECT_NO_THROW(Model{spec});
  }
  {
    // Overlapping orbit tree roots.
    ModelSpec spec = tate_spec();
    spec.components[0].tree_roots = {Disc{Rational(1), Rational(-1), 2},
                                     Disc{Rational(3), Rational(-2), 2}};
    EXPECT_THROW(Model{spec}, ConfigError);
  }
}

TEST(ModelTest, MultiTreeComponent) {
  ModelSpec spec = tate_spec();
  spec.components[0].tree_roots = {Disc{Rational(1), Rational(-2), 2},
                                   Disc{Rational(3), Rational(-2), 2}};
  spec.depth = 2;
  const Model model{spec};
  EXPECT_EQ(model.n_leaves(), 8);
  EXPECT_EQ(model.component(0).trees.size(), 2u);
  // Operators need a single orbit tree per component.
  EXPECT_THROW(model.require_single_tree(), ConfigError);
  // The cached per-leaf translate kernel is single-tree only.
  EXPECT_TRUE(model.component(0).translate_kernel.empty());
}

TEST(ModelTest, SeriesDivergenceIsLazy) {
  // alpha = 1 with g = 1, p = 2 converges; check a divergent configuration
  // is buildable and only the series accessor throws.
  ModelSpec spec = tate_spec();
  spec.components[0].generators = {Mobius(9, 0, 8, 1, 3),
                                   Mobius(43, -80, 8, -13, 3)};
  spec.components[0].fd_discs = {
      PDisc::interior_disc(Rational(-1, 8), Rational(-1), 3),
      PDisc::interior_disc(Rational(13, 8), Rational(-2), 3),
      PDisc::interior_disc(Rational(9, 8), Rational(-1), 3),
      PDisc::interior_disc(Rational(43, 8), Rational(-2), 3)};
  spec.components[0].tree_roots = {Disc{Rational(8), Rational(-2), 3}};
  spec.components[0].form = OmegaForm{};
  spec.components[0].alpha = 1;  // 2g - 1 = 3 >= 3^1: divergent
  spec.prime = 3;
  spec.depth = 2;
  spec.l_max = 4;
  const Model model{spec};
  EXPECT_FALSE(model.component(0).series_alpha.has_value());
  EXPECT_THROW(model.series_alpha(0), DivergenceError);
  EXPECT_THROW(model.kernel_tail(0), DivergenceError);
}

}  // namespace
}  // namespace ulap
