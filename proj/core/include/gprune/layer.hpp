#pragma once

#include <cstddef>
#include <string>

#include "gprune/tensor.hpp"

namespace gprune {

/// Number of groups of a grouped convolution. Always >= 1.
class GroupCount {
 public:
  explicit GroupCount(std::size_t g);
  std::size_t value() const { return g_; }
  friend bool operator==(GroupCount, GroupCount) = default;
  friend auto operator<=>(GroupCount, GroupCount) = default;

 private:
  std::size_t g_;
};

/// Throws ValidationError unless `g` divides both channel counts.
void check_divides(GroupCount g, std::size_t c_out, std::size_t c_in);
bool divides(GroupCount g, std::size_t c_out, std::size_t c_in);

/// Dimensions of one convolution layer plus its output spatial size, which
/// is used only for operation counting.
struct LayerSpec {
  std::string name;
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t k_h = 1;
  std::size_t k_w = 1;
  std::size_t h_out = 1;
  std::size_t w_out = 1;

  /// Throws ValidationError if any dimension is zero.
  void validate() const;
  KernelShape kernel_shape() const { return {c_out, c_in, k_h, k_w}; }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// True when (f, c) of a (c_out x c_in) grid lies in a diagonal block of the
/// g-way partition.
inline bool in_diagonal_block(std::size_t f, std::size_t c, std::size_t c_out,
                              std::size_t c_in, std::size_t g) {
  return f / (c_out / g) == c / (c_in / g);
}

/// Sum of the entries of `m` inside its g diagonal blocks, accumulated as
/// row subtotals in row order (the same order as NormMatrix::total).
double diagonal_block_sum(const NormMatrix& m, GroupCount g);

}  // namespace gprune
