#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gprune/tensor.hpp"

namespace gprune {

/// A bijection on {0, ..., n-1} with gather semantics: position i of the
/// permuted axis holds original index `(*this)[i]`. Indices are 0-based.
class Permutation {
 public:
  Permutation() = default;
  /// Throws ValidationError unless `indices` is a bijection on [0, size).
  explicit Permutation(std::vector<std::size_t> indices);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return indices_.size(); }
  std::size_t operator[](std::size_t i) const { return indices_[i]; }
  std::span<const std::size_t> indices() const { return indices_; }
  bool is_identity() const;

  Permutation inverse() const;

  /// (a.then(b))[i] = a[b[i]]: gather by `a`, then gather the result by `b`.
  Permutation then(const Permutation& next) const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> indices_;
};

/// Output- and input-channel permutations; permuted(f, c) = original(out[f], in[c]).
struct PermutationPair {
  Permutation out;
  Permutation in;

  static PermutationPair identity(std::size_t c_out, std::size_t c_in) {
    return {Permutation::identity(c_out), Permutation::identity(c_in)};
  }

  PermutationPair inverse() const { return {out.inverse(), in.inverse()}; }

  friend bool operator==(const PermutationPair&, const PermutationPair&) = default;
};

/// Validates that `p` fits a (rows x cols) channel grid.
void check_fits(const PermutationPair& p, std::size_t rows, std::size_t cols);

NormMatrix apply_permutation(const NormMatrix& m, const PermutationPair& p);
/// Moves whole kernels; values are copied, never recomputed.
WeightTensor apply_permutation(const WeightTensor& w, const PermutationPair& p);

PermutationPair invert_permutation(const PermutationPair& p);

}  // namespace gprune
