#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gprune/layer.hpp"
#include "gprune/permutation.hpp"
#include "gprune/tensor.hpp"

namespace gprune {

/// Parameters of the sorting heuristic.
struct GreedyParams {
  /// Column-then-row sorting rounds per diagonal block. Zero disables sorting
  /// and yields the identity ("plain") permutations.
  std::size_t sort_rounds = 10;
};

/// Which kernels of a (rows x cols) grid survive pruning.
class MaskPattern {
 public:
  MaskPattern() = default;
  MaskPattern(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits);

  static MaskPattern all(std::size_t rows, std::size_t cols, bool value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool operator()(std::size_t f, std::size_t c) const { return bits_[f * cols_ + c] != 0; }

  std::size_t row_count(std::size_t f) const;
  std::size_t col_count(std::size_t c) const;
  /// Every row keeps cols/g kernels and every column keeps rows/g.
  bool is_regular(GroupCount g) const;

  friend bool operator==(const MaskPattern&, const MaskPattern&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Result of pruning one layer to `g` groups.
struct PruneSolution {
  PermutationPair perms;
  GroupCount g{1};
  double objective = 0.0;       ///< magnitude retained in the diagonal blocks
  double cost = 0.0;            ///< total magnitude minus objective
  double recovery_ratio = 1.0;  ///< objective / total, 1 for an all-zero matrix
};

/// Greedy block-by-block sorting heuristic. Blocks are resolved from the
/// bottom-right one to the top-left one; inside each block, every round
/// stable-sorts the unfrozen input channels ascending by their magnitude in
/// the current block's rows, then the unfrozen output channels ascending by
/// their magnitude in the current block's columns. Channels already placed in
/// resolved blocks never move again.
PermutationPair greedy_permutation(const NormMatrix& m, GroupCount g, const GreedyParams& params);

/// Kernel magnitude kept by `mask`, accumulated as row subtotals in original
/// row order. Two masks selecting the same kernels give bit-identical sums.
double retained_norm(const NormMatrix& m, const MaskPattern& mask);

/// Mask over original coordinates: (out[f], in[c]) is kept iff (f, c) lies in
/// a diagonal block of the permuted grid.
MaskPattern prune_mask(std::size_t c_out, std::size_t c_in, GroupCount g,
                       const PermutationPair& perms);

/// Retained fraction of the total magnitude when pruning with `perms`.
double recovery_ratio(const NormMatrix& m, const PermutationPair& perms, GroupCount g);

/// Scores a fixed permutation pair.
PruneSolution evaluate_solution(const NormMatrix& m, PermutationPair perms, GroupCount g);

PruneSolution solve_layer(const NormMatrix& m, GroupCount g, const GreedyParams& params);

/// Number of objective evaluations the exhaustive oracle would perform.
/// Returned as a double since it overflows 64 bits for modest sizes.
double oracle_evaluation_count(std::size_t c_out, std::size_t c_in, GroupCount g);

inline constexpr double kDefaultOracleCap = 1e8;

/// Globally optimal pruning by exhaustive enumeration: canonical partitions of
/// the input channels into g equal groups (group relabelling factored out)
/// against every labelled split of the output channels. Among equal optima the
/// first one in enumeration order is returned. Throws OracleCapError if the
/// enumeration would exceed `cap` evaluations.
PruneSolution brute_force_oracle(const NormMatrix& m, GroupCount g,
                                 double cap = kDefaultOracleCap);

}  // namespace gprune
