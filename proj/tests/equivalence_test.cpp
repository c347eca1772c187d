#include <gtest/gtest.h>

#include "gprune/equivalence.hpp"
#include "gprune/error.hpp"
#include "test_util.hpp"

namespace gprune {
namespace {

using testing::random_input;
using testing::random_perms;
using testing::random_tensor;

WeightTensor zero_outside(const WeightTensor& w, const MaskPattern& mask) {
  std::vector<double> v(w.data().begin(), w.data().end());
  const std::size_t k = w.k_h() * w.k_w();
  for (std::size_t f = 0; f < w.c_out(); ++f)
    for (std::size_t c = 0; c < w.c_in(); ++c)
      if (!mask(f, c))
        for (std::size_t i = 0; i < k; ++i) v[(f * w.c_in() + c) * k + i] = 0.0;
  return WeightTensor(w.shape(), v);
}

double max_abs(const FeatureMap& y) {
  double m = 0.0;
  for (double v : y.data()) m = std::max(m, std::abs(v));
  return m;
}

TEST(DenseForward, OneByOneIsMatVec) {
  const WeightTensor w({2, 3, 1, 1}, {1, 2, 3, 4, 5, 6});
  const FeatureMap x(3, 1, 1, {1, -1, 2});
  const auto y = dense_forward(x, w, 0);
  EXPECT_EQ(y, FeatureMap(2, 1, 1, {5, 11}));
}

TEST(DenseForward, IdentityWeights) {
  std::vector<double> v(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) v[i * 4 + i] = 1.0;
  const auto x = random_input(4, 5, 3, 1);
  EXPECT_EQ(dense_forward(x, WeightTensor({4, 4, 1, 1}, v), 0), x);
}

TEST(DenseForward, MatchesSixLoopOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = random_tensor({5, 4, 3, 3}, seed);
    const auto x = random_input(4, 7, 6, seed + 50);
    EXPECT_LE(relative_error(dense_forward(x, w, 1), testing::oracle_conv(x, w, 1)), 1e-10);
  }
  const auto w = random_tensor({3, 2, 3, 1}, 9);
  const auto x = random_input(2, 5, 5, 10);
  EXPECT_LE(relative_error(dense_forward(x, w, 0), testing::oracle_conv(x, w, 0)), 1e-10);
}

TEST(DenseForward, RejectsChannelMismatch) {
  EXPECT_THROW(dense_forward(random_input(3, 4, 4, 1), random_tensor({2, 4, 1, 1}, 1), 0), ValidationError);
}

TEST(MaskedForward, AllTrueIsDense) {
  const auto w = random_tensor({4, 4, 3, 3}, 2);
  const auto x = random_input(4, 6, 6, 3);
  EXPECT_EQ(masked_forward(x, w, MaskPattern::all(4, 4, true), 1), dense_forward(x, w, 1));
}

TEST(MaskedForward, AllFalseIsZero) {
  const auto w = random_tensor({4, 4, 3, 3}, 2);
  const auto x = random_input(4, 6, 6, 3);
  EXPECT_EQ(masked_forward(x, w, MaskPattern::all(4, 4, false), 1), FeatureMap::zeros(4, 6, 6));
}

TEST(MaskedForward, EqualsConvolvingExplicitlyZeroedWeights) {
  const auto w = random_tensor({8, 8, 3, 3}, 4);
  const auto perms = greedy_permutation(kernel_norm_matrix(w), GroupCount(4), GreedyParams{});
  const auto mask = prune_mask(8, 8, GroupCount(4), perms);
  const auto x = random_input(8, 5, 5, 5);
  EXPECT_LE(relative_error(masked_forward(x, w, mask, 1), testing::oracle_conv(x, zero_outside(w, mask), 1)),
            1e-10);
  EXPECT_EQ(apply_mask(w, mask), zero_outside(w, mask));
}

TEST(ExportGrouped, SingleGroupIsWholeTensor) {
  const auto w = random_tensor({4, 6, 3, 3}, 6);
  const auto e = export_grouped(w, PermutationPair::identity(4, 6), GroupCount(1));
  ASSERT_EQ(e.blocks.size(), 1u);
  EXPECT_EQ(e.blocks[0], w);
}

TEST(ExportGrouped, IdentityOnBlockDiagonalTensor) {
  const auto w = random_tensor({4, 4, 1, 1}, 7);
  const auto e = export_grouped(w, PermutationPair::identity(4, 4), GroupCount(2));
  ASSERT_EQ(e.blocks.size(), 2u);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t f = 0; f < 2; ++f)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(e.blocks[b].at(f, c, 0, 0), w.at(2 * b + f, 2 * b + c, 0, 0));
}

TEST(ExportGrouped, ReassemblyIsBitExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = random_tensor({8, 12, 3, 3}, seed);
    const auto perms = random_perms(8, 12, seed + 7);
    const GroupCount g(seed % 2 == 0 ? 4 : 2);
    const auto e = export_grouped(w, perms, g);
    EXPECT_NO_THROW(e.validate());
    EXPECT_EQ(reassemble(e), apply_mask(w, prune_mask(8, 12, g, perms)));
  }
}

TEST(GroupedForward, SingleGroupIdentityIsDense) {
  const auto w = random_tensor({4, 3, 3, 3}, 8);
  const auto x = random_input(3, 6, 6, 9);
  const auto e = export_grouped(w, PermutationPair::identity(4, 3), GroupCount(1));
  EXPECT_EQ(grouped_forward(x, e, 1), dense_forward(x, w, 1));
}

TEST(GroupedForward, DepthwiseDiagonalScales) {
  const WeightTensor w({3, 3, 1, 1}, {2, 0, 0, 0, -1, 0, 0, 0, 0.5});
  const auto x = random_input(3, 4, 4, 10);
  const auto e = export_grouped(w, PermutationPair::identity(3, 3), GroupCount(3));
  const auto y = grouped_forward(x, e, 0);
  const double scale[] = {2.0, -1.0, 0.5};
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(y.at(c, i, j), scale[c] * x.at(c, i, j));
}

TEST(GroupedForward, MatchesMaskedOnSeededCases) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t k = rng.below(2) == 0 ? 1 : 3;
    const std::size_t c_out = 4 * (1 + rng.below(4));
    const std::size_t c_in = 4 * (1 + rng.below(4));
    const auto w = random_tensor({c_out, c_in, k, k}, seed + 1);
    const auto perms = greedy_permutation(kernel_norm_matrix(w), GroupCount(4), GreedyParams{});
    const auto x = random_input(c_in, 5, 5, seed + 2);
    const auto masked = masked_forward(x, w, prune_mask(c_out, c_in, GroupCount(4), perms), k / 2);
    const auto grouped = grouped_forward(x, export_grouped(w, perms, GroupCount(4)), k / 2);
    EXPECT_LE(relative_error(grouped, masked), 1e-5) << "seed " << seed;
  }
}

TEST(GroupedForward, IsLinearInInput) {
  const auto w = random_tensor({8, 8, 3, 3}, 11);
  const auto e = export_grouped(w, random_perms(8, 8, 12), GroupCount(2));
  const auto a = random_input(8, 4, 4, 13);
  const auto b = random_input(8, 4, 4, 14);
  std::vector<double> sum(a.data().size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = 2.0 * a.data()[i] - b.data()[i];
  const auto ya = grouped_forward(a, e, 1);
  const auto yb = grouped_forward(b, e, 1);
  const auto ys = grouped_forward(FeatureMap(8, 4, 4, sum), e, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < ys.data().size(); ++i) {
    worst = std::max(worst, std::abs(ys.data()[i] - (2.0 * ya.data()[i] - yb.data()[i])));
  }
  EXPECT_LE(worst / max_abs(ys), 1e-12);
}

TEST(ExportSparse, AllTrueRowOffsets) {
  const auto s = export_sparse(random_tensor({3, 5, 1, 1}, 1), MaskPattern::all(3, 5, true));
  EXPECT_EQ(s.row_offsets, (std::vector<std::size_t>{0, 5, 10, 15}));
  EXPECT_EQ(s.nnz(), 15u);
}

TEST(ExportSparse, IdentityMaskKeepsDiagonal) {
  const auto w = random_tensor({4, 4, 1, 1}, 2);
  const auto s = export_sparse(w, prune_mask(4, 4, GroupCount(4), PermutationPair::identity(4, 4)));
  EXPECT_EQ(s.row_offsets, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(s.column_indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(s.kernel_values[f], w.at(f, f, 0, 0));
}

TEST(ExportSparse, StrictRejectsIrregularMask) {
  std::vector<std::uint8_t> bits{1, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 0};
  const MaskPattern mask(4, 4, bits);
  const auto w = random_tensor({4, 4, 1, 1}, 3);
  EXPECT_THROW(export_sparse(w, mask), ValidationError);
  EXPECT_NO_THROW(export_sparse(w, mask, false));
}

TEST(SparseForward, MatchesMaskedForward) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = random_tensor({16, 8, 1, 1}, seed);
    const auto perms = greedy_permutation(kernel_norm_matrix(w), GroupCount(4), GreedyParams{});
    const auto mask = prune_mask(16, 8, GroupCount(4), perms);
    const auto x = random_input(8, 3, 4, seed + 99);
    EXPECT_LE(relative_error(sparse_forward_1x1(x, export_sparse(w, mask)), masked_forward(x, w, mask, 0)),
              1e-10);
  }
}

TEST(RelativeError, ShapeMismatchThrows) {
  EXPECT_THROW(relative_error(FeatureMap::zeros(1, 2, 2), FeatureMap::zeros(2, 2, 2)), ValidationError);
  EXPECT_EQ(relative_error(FeatureMap::zeros(1, 2, 2), FeatureMap::zeros(1, 2, 2)), 0.0);
}

}  // namespace
}  // namespace gprune
