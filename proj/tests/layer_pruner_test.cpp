#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "gprune/bench.hpp"
#include "gprune/error.hpp"
#include "gprune/io.hpp"
#include "gprune/layer_pruner.hpp"
#include "test_util.hpp"

namespace gprune {
namespace {

using testing::ones;
using testing::random_matrix;
using testing::random_perms;

NormMatrix block_diagonal(std::size_t n, std::size_t g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n * n, 0.0);
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t c = 0; c < n; ++c)
      if (in_diagonal_block(f, c, n, n, g)) v[f * n + c] = rng.uniform(0.5, 1.5);
  return NormMatrix(n, n, v);
}

// Maximum over every pair of full permutations; no symmetry reduction.
double naive_optimum(const NormMatrix& m, std::size_t g) {
  std::vector<std::size_t> out(m.rows());
  std::vector<std::size_t> in(m.cols());
  std::iota(out.begin(), out.end(), std::size_t{0});
  double best = 0.0;
  do {
    std::iota(in.begin(), in.end(), std::size_t{0});
    do {
      best = std::max(best, testing::oracle_retained(m, {Permutation(out), Permutation(in)}, g));
    } while (std::next_permutation(in.begin(), in.end()));
  } while (std::next_permutation(out.begin(), out.end()));
  return best;
}

TEST(GreedyPermutation, ZeroRoundsIsIdentity) {
  const auto m = random_matrix(8, 8, 1);
  EXPECT_EQ(greedy_permutation(m, GroupCount(4), GreedyParams{0}), PermutationPair::identity(8, 8));
}

TEST(GreedyPermutation, AlreadyBlockDiagonalStaysOptimal) {
  const auto m = block_diagonal(6, 3, 5);
  const auto perms = greedy_permutation(m, GroupCount(3), GreedyParams{1});
  EXPECT_EQ(recovery_ratio(m, perms, GroupCount(3)), 1.0);
}

TEST(GreedyPermutation, RecoversPlantedSixteenByFour) {
  const auto inst = bench::generate_planted_instance(16, GroupCount(4), bench::ValueDistribution{}, 2024);
  const auto perms = greedy_permutation(inst.matrix, GroupCount(4), GreedyParams{10});
  EXPECT_EQ(recovery_ratio(inst.matrix, perms, GroupCount(4)), 1.0);
  // The kept kernels are exactly the planted support.
  EXPECT_EQ(prune_mask(16, 16, GroupCount(4), perms), prune_mask(16, 16, GroupCount(4), inst.truth.inverse()));
}

TEST(GreedyPermutation, AdversarialFixtureFallsShortOfOracle) {
  const auto report = io::read_report(testing::fixture_path("adversarial_4x4_g2.json"));
  ASSERT_TRUE(report.adversarial && report.adversarial->matrix);
  const NormMatrix& m = *report.adversarial->matrix;
  const auto greedy = solve_layer(m, GroupCount(2), GreedyParams{10});
  const auto oracle = brute_force_oracle(m, GroupCount(2));
  EXPECT_LT(greedy.recovery_ratio, 1.0);
  EXPECT_EQ(oracle.recovery_ratio, 1.0);
}

TEST(GreedyPermutation, RejectsNonDivisor) {
  EXPECT_THROW(greedy_permutation(random_matrix(6, 4, 1), GroupCount(3), GreedyParams{}), ValidationError);
}

TEST(GreedyPermutation, ReturnsBijectionsOnRectangularInputs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto m = random_matrix(12, 8, seed);
    const auto p = greedy_permutation(m, GroupCount(4), GreedyParams{seed % 6});
    EXPECT_NO_THROW(Permutation(std::vector<std::size_t>(p.out.indices().begin(), p.out.indices().end())));
    EXPECT_EQ(p.out.size(), 12u);
    EXPECT_EQ(p.in.size(), 8u);
  }
}

TEST(GreedyPermutation, ScaleInvariant) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_matrix(16, 16, seed);
    const auto base = greedy_permutation(m, GroupCount(4), GreedyParams{10});
    for (double factor : {0.25, 2.0, 1024.0, 3.0, 0.1}) {
      EXPECT_EQ(greedy_permutation(m.scaled(factor), GroupCount(4), GreedyParams{10}), base)
          << "seed " << seed << " factor " << factor;
    }
  }
}

TEST(GreedyPermutation, Deterministic) {
  const auto m = random_matrix(32, 16, 8);
  EXPECT_EQ(greedy_permutation(m, GroupCount(8), GreedyParams{10}),
            greedy_permutation(m, GroupCount(8), GreedyParams{10}));
}

TEST(SolveLayer, SingleGroupKeepsEverything) {
  const auto m = random_matrix(5, 7, 2);
  const auto s = solve_layer(m, GroupCount(1), GreedyParams{10});
  EXPECT_EQ(s.objective, m.total());
  EXPECT_EQ(s.cost, 0.0);
  EXPECT_EQ(s.recovery_ratio, 1.0);
}

TEST(SolveLayer, UniformMassIsPermutationIndependent) {
  for (std::size_t ns : {0u, 1u, 10u}) {
    const auto s = solve_layer(ones(4, 4), GroupCount(2), GreedyParams{ns});
    EXPECT_EQ(s.objective, 8.0);
    EXPECT_EQ(s.cost, 8.0);
    EXPECT_EQ(s.recovery_ratio, 0.5);
  }
}

TEST(SolveLayer, NeverBeatsOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_matrix(6, 6, seed);
    const auto greedy = solve_layer(m, GroupCount(2), GreedyParams{10});
    const auto oracle = brute_force_oracle(m, GroupCount(2));
    EXPECT_LE(greedy.objective, oracle.objective) << "seed " << seed;
  }
}

TEST(SolveLayer, SolutionInvariants) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto m = random_matrix(8, 12, seed);
    const GroupCount g(seed % 2 == 0 ? 4 : 2);
    const auto s = solve_layer(m, g, GreedyParams{seed % 11});
    const double recomputed = diagonal_block_sum(apply_permutation(m, s.perms), g);
    EXPECT_LE(testing::rel_diff(s.objective, recomputed), 1e-12);
    EXPECT_DOUBLE_EQ(s.cost, m.total() - s.objective);
    EXPECT_NEAR(s.recovery_ratio, 1.0 - s.cost / m.total(), 1e-12);
    EXPECT_GE(s.recovery_ratio, 0.0);
    EXPECT_LE(s.recovery_ratio, 1.0);
  }
}

TEST(RecoveryRatio, IdentityOnBlockDiagonal) {
  EXPECT_EQ(recovery_ratio(block_diagonal(8, 4, 1), PermutationPair::identity(8, 8), GroupCount(4)), 1.0);
}

TEST(RecoveryRatio, UniformMassIsHalf) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(recovery_ratio(ones(4, 4), random_perms(4, 4, seed), GroupCount(2)), 0.5);
  }
}

TEST(RecoveryRatio, MatchesTwoLoopOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = random_matrix(12, 6, seed);
    const auto p = random_perms(12, 6, seed + 500);
    const double expected = testing::oracle_retained(m, p, 3) / m.total();
    EXPECT_LE(testing::rel_diff(recovery_ratio(m, p, GroupCount(3)), expected), 1e-12);
  }
}

TEST(RecoveryRatio, ZeroMatrixCountsAsFullyRecovered) {
  EXPECT_EQ(recovery_ratio(NormMatrix::zeros(4, 4), PermutationPair::identity(4, 4), GroupCount(2)), 1.0);
}

TEST(PruneMask, SingleGroupKeepsAll) {
  EXPECT_EQ(prune_mask(3, 5, GroupCount(1), random_perms(3, 5, 1)), MaskPattern::all(3, 5, true));
}

TEST(PruneMask, OneByOneBlocksAreTheDiagonal) {
  const auto mask = prune_mask(4, 4, GroupCount(4), PermutationPair::identity(4, 4));
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(mask(f, c), f == c);
}

TEST(PruneMask, GreedyMaskMatchesPullback) {
  const auto m = random_matrix(6, 6, 31);
  const auto perms = greedy_permutation(m, GroupCount(3), GreedyParams{10});
  const auto mask = prune_mask(6, 6, GroupCount(3), perms);
  const auto inv = perms.inverse();
  for (std::size_t f = 0; f < 6; ++f) {
    EXPECT_EQ(mask.row_count(f), 2u);
    EXPECT_EQ(mask.col_count(f), 2u);
    for (std::size_t c = 0; c < 6; ++c) {
      EXPECT_EQ(mask(f, c), inv.out[f] / 2 == inv.in[c] / 2) << f << "," << c;
    }
  }
}

TEST(PruneMask, AlwaysRegular) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t g = 1 + seed % 4;
    const std::size_t c_out = g * (1 + seed % 5);
    const std::size_t c_in = g * (1 + (seed / 5) % 4);
    const auto mask = prune_mask(c_out, c_in, GroupCount(g), random_perms(c_out, c_in, seed));
    EXPECT_TRUE(mask.is_regular(GroupCount(g)));
  }
}

TEST(BruteForceOracle, PlantedOptimumIsTotal) {
  const auto inst = bench::generate_planted_instance(4, GroupCount(2), bench::ValueDistribution{}, 3);
  const auto s = brute_force_oracle(inst.matrix, GroupCount(2));
  EXPECT_EQ(s.objective, inst.matrix.total());
  EXPECT_EQ(s.recovery_ratio, 1.0);
}

TEST(BruteForceOracle, AllOnes) {
  EXPECT_EQ(brute_force_oracle(ones(4, 4), GroupCount(2)).objective, 8.0);
}

TEST(BruteForceOracle, MatchesNaiveFullEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = random_matrix(4, 4, seed);
    EXPECT_LE(testing::rel_diff(brute_force_oracle(m, GroupCount(2)).objective, naive_optimum(m, 2)), 1e-12);
  }
  const auto rect = random_matrix(6, 4, 42);
  EXPECT_LE(testing::rel_diff(brute_force_oracle(rect, GroupCount(2)).objective, naive_optimum(rect, 2)),
            1e-12);
}

TEST(BruteForceOracle, EvaluationCount) {
  EXPECT_EQ(oracle_evaluation_count(6, 6, GroupCount(2)), 200.0);  // 10 partitions x 20 splits
  EXPECT_EQ(oracle_evaluation_count(4, 4, GroupCount(1)), 1.0);
}

TEST(BruteForceOracle, RefusesLargeInstances) {
  EXPECT_THROW(brute_force_oracle(random_matrix(16, 16, 1), GroupCount(4)), OracleCapError);
  EXPECT_THROW(brute_force_oracle(random_matrix(6, 6, 1), GroupCount(2), 100.0), OracleCapError);
}

TEST(BruteForceOracle, DominatesGreedyOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto m = random_matrix(6, 6, 10'000 + seed);
    EXPECT_LE(solve_layer(m, GroupCount(2), GreedyParams{10}).objective,
              brute_force_oracle(m, GroupCount(2)).objective);
  }
}

TEST(BruteForceOracle, Deterministic) {
  const auto m = random_matrix(6, 6, 5);
  const auto a = brute_force_oracle(m, GroupCount(3));
  const auto b = brute_force_oracle(m, GroupCount(3));
  EXPECT_EQ(a.perms, b.perms);
  EXPECT_EQ(a.objective, b.objective);
}

}  // namespace
}  // namespace gprune
