#include "ulap/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "ulap/errors.hpp"
#include "ulap/heat.hpp"
#include "ulap/model.hpp"
#include "ulap/spectral.hpp"

namespace ulap {
namespace {

using test::load_model;

TEST(SamplingTest, Splitmix64Frozen) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(state), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(splitmix64(state), 0x06c45d188009454fULL);
  state = 42;
  EXPECT_EQ(splitmix64(state), 0xbdd732262feb6e95ULL);
  EXPECT_EQ(splitmix64(state), 0x28efe333b266f103ULL);
}

TEST(SamplingTest, PathRngSeedDerivation) {
  // path_rng mixes seed and index through two splitmix64 draws.
  std::mt19937_64 got = path_rng(7, 3);
  std::mt19937_64 want(0x129b1c551ff11fc8ULL);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(got(), want());
  // Distinct indices give distinct streams.
  std::mt19937_64 other = path_rng(7, 4);
  std::mt19937_64 base = path_rng(7, 3);
  EXPECT_NE(other(), base());
}

TEST(SamplingTest, UniformAndExponentialDraws) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  std::mt19937_64 r2(2);
  for (int i = 0; i < 100; ++i) {
    EXPECT_GE(exponential_draw(r2, 3.0), 0.0);
  }
}

TEST(SamplingTest, PathStructure) {
  const Model model = load_model("tate_p2.json");
  const Operator op = assemble_matrix(model);
  const JumpPath path = sample_path(op, 0, 1.0, 20260823, 0);
  ASSERT_FALSE(path.times.empty());
  EXPECT_EQ(path.times[0], 0.0);
  EXPECT_EQ(path.states[0], 0);
  ASSERT_EQ(path.times.size(), path.states.size());
  for (std::size_t k = 1; k < path.times.size(); ++k) {
    EXPECT_GT(path.times[k], path.times[k - 1]);
    EXPECT_LE(path.times[k], 1.0);
    EXPECT_NE(path.states[k], path.states[k - 1]);
    EXPECT_GE(path.states[k], 0);
    EXPECT_LT(path.states[k], 8);
  }
}

TEST(SamplingTest, SeededReproducibility) {
  const Model model = load_model("tate_p2.json");
  const Operator op = assemble_matrix(model);
  const auto a = sample_paths(op, 0, 1.0, 50, 123);
  const auto b = sample_paths(op, 0, 1.0, 50, 123);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].times, b[k].times);
    EXPECT_EQ(a[k].states, b[k].states);
  }
  // Path k does not depend on how many sibling paths are drawn.
  const JumpPath solo = sample_path(op, 0, 1.0, 123, 7);
  EXPECT_EQ(solo.times, a[7].times);
  EXPECT_EQ(solo.states, a[7].states);
  const auto c = sample_paths(op, 0, 1.0, 50, 124);
  bool differs = false;
  for (std::size_t k = 0; k < c.size() && !differs; ++k) {
    differs = c[k].times != a[k].times || c[k].states != a[k].states;
  }
  EXPECT_TRUE(differs);
}

TEST(SamplingTest, CadlagStateLookup) {
  JumpPath path;
  path.times = {0.0, 0.5, 1.5};
  path.states = {2, 0, 1};
  EXPECT_EQ(path_state_at(path, 0.0), 2);
  EXPECT_EQ(path_state_at(path, 0.49), 2);
  EXPECT_EQ(path_state_at(path, 0.5), 0);  // right-continuous at jumps
  EXPECT_EQ(path_state_at(path, 1.49), 0);
  EXPECT_EQ(path_state_at(path, 1.5), 1);
  EXPECT_EQ(path_state_at(path, 100.0), 1);

  JumpPath still;
  still.times = {0.0};
  still.states = {3};
  const std::vector<JumpPath> family = {path, still};
  const std::vector<double> occ = occupation_at(family, 0.75, 4);
  EXPECT_EQ(occ[0], 0.5);
  EXPECT_EQ(occ[3], 0.5);
  EXPECT_EQ(occ[1], 0.0);
}

TEST(SamplingTest, GuardsAndAbsorbingStates) {
  Operator op;
  op.M = Eigen::MatrixXd::Zero(2, 2);
  op.mu = {0.5, 0.5};
  EXPECT_THROW(sample_path(op, 0, 1.0, 1, 0), AbsorbingStateError);
  EXPECT_THROW(sample_path(op, 5, 1.0, 1, 0), PreconditionError);
  EXPECT_THROW(sample_path(op, -1, 1.0, 1, 0), PreconditionError);

  Operator half;
  half.M = Eigen::MatrixXd::Zero(2, 2);
  half.M(0, 0) = -1.0;
  half.M(0, 1) = 1.0;
  half.mu = {0.5, 0.5};
  EXPECT_THROW(sample_path(half, 0, -1.0, 1, 0), NegativeTimeError);
  // One jump into the absorbing state, then the path persists there.
  const JumpPath path = sample_path(half, 0, 1e6, 5, 0);
  ASSERT_EQ(path.states.size(), 2u);
  EXPECT_EQ(path.states[1], 1);
  EXPECT_EQ(path_state_at(path, 1e6), 1);
  EXPECT_THROW(sample_path(half, 1, 1.0, 1, 0), AbsorbingStateError);
}

TEST(SamplingTest, EmpiricalLawTracksSemigroup) {
  const Model model = load_model("tate_p2.json");
  const Operator op = assemble_matrix(model);
  const auto paths = sample_paths(op, 0, 1.0, 2000, 20260823);
  const std::vector<double> occ0 = occupation_at(paths, 0.0, 8);
  EXPECT_EQ(occ0[0], 1.0);
  const std::vector<double> occ = occupation_at(paths, 1.0, 8);
  const Eigen::MatrixXd P = transition_matrix(analytic_decomposition(model), 1.0);
  double tv = 0;
  for (int y = 0; y < 8; ++y) tv += std::abs(occ[y] - P(0, y));
  tv *= 0.5;
  EXPECT_LE(tv, 0.05);
}

}  // namespace
}  // namespace ulap
