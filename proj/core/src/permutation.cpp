#include "gprune/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gprune/error.hpp"

namespace gprune {

Permutation::Permutation(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::vector<bool> seen(indices_.size(), false);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const std::size_t v = indices_[i];
    if (v >= indices_.size()) {
      throw ValidationError("permutation entry " + std::to_string(i) + " = " +
                            std::to_string(v) + " is out of range [0, " +
                            std::to_string(indices_.size()) + ")");
    }
    if (seen[v]) {
      throw ValidationError("permutation is not a bijection: index " +
                            std::to_string(v) + " appears twice");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return Permutation(std::move(idx));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] != i) return false;
  }
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) inv[indices_[i]] = i;
  Permutation out;
  out.indices_ = std::move(inv);
  return out;
}

Permutation Permutation::then(const Permutation& next) const {
  if (next.size() != size()) {
    throw ValidationError("cannot compose permutations of different lengths");
  }
  std::vector<std::size_t> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = indices_[next[i]];
  Permutation p;
  p.indices_ = std::move(out);
  return p;
}

void check_fits(const PermutationPair& p, std::size_t rows, std::size_t cols) {
  if (p.out.size() != rows) {
    throw ValidationError("output permutation has length " + std::to_string(p.out.size()) +
                          ", expected " + std::to_string(rows));
  }
  if (p.in.size() != cols) {
    throw ValidationError("input permutation has length " + std::to_string(p.in.size()) +
                          ", expected " + std::to_string(cols));
  }
}

NormMatrix apply_permutation(const NormMatrix& m, const PermutationPair& p) {
  check_fits(p, m.rows(), m.cols());
  std::vector<double> out(m.rows() * m.cols());
  for (std::size_t f = 0; f < m.rows(); ++f) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[f * m.cols() + c] = m(p.out[f], p.in[c]);
  }
  return NormMatrix(m.rows(), m.cols(), std::move(out));
}

WeightTensor apply_permutation(const WeightTensor& w, const PermutationPair& p) {
  check_fits(p, w.c_out(), w.c_in());
  const std::size_t ks = w.shape().kernel_size();
  std::vector<double> out(w.shape().element_count());
  for (std::size_t f = 0; f < w.c_out(); ++f) {
    for (std::size_t c = 0; c < w.c_in(); ++c) {
      auto src = w.kernel(p.out[f], p.in[c]);
      std::copy(src.begin(), src.end(), out.begin() + (f * w.c_in() + c) * ks);
    }
  }
  return WeightTensor(w.shape(), std::move(out));
}

PermutationPair invert_permutation(const PermutationPair& p) { return p.inverse(); }

}  // namespace gprune
