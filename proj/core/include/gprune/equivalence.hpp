#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gprune/layer.hpp"
#include "gprune/layer_pruner.hpp"
#include "gprune/permutation.hpp"
#include "gprune/tensor.hpp"

namespace gprune {

/// Channel-major (channels, height, width) activations.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> data);

  static FeatureMap zeros(std::size_t channels, std::size_t height, std::size_t width);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }

  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  std::span<const double> plane(std::size_t c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Direct cross-correlation, stride 1, symmetric zero padding. Output size is
/// (H + 2p - k_h + 1) x (W + 2p - k_w + 1). Accumulation runs over input
/// channels in order, then kernel rows, then kernel columns.
FeatureMap dense_forward(const FeatureMap& x, const WeightTensor& w, std::size_t padding);

/// `w` with every kernel outside `mask` set to zero.
WeightTensor apply_mask(const WeightTensor& w, const MaskPattern& mask);

/// dense_forward with the masked-out kernels treated as zero.
FeatureMap masked_forward(const FeatureMap& x, const WeightTensor& w, const MaskPattern& mask,
                          std::size_t padding);

/// A pruned layer as g independent convolutions between two channel shuffles.
struct GroupedLayerExport {
  GroupCount g{1};
  KernelShape shape;                 ///< shape of the original dense layer
  std::vector<WeightTensor> blocks;  ///< g blocks of (c_out/g, c_in/g, k_h, k_w)
  PermutationPair perms;

  /// Throws ValidationError if block count, block shapes or perms disagree.
  void validate() const;
};

/// Diagonal blocks of the permuted tensor. No arithmetic is performed.
GroupedLayerExport export_grouped(const WeightTensor& w, const PermutationPair& perms, GroupCount g);

/// Places the blocks back on the diagonal and undoes both permutations,
/// reproducing the masked original weights exactly.
WeightTensor reassemble(const GroupedLayerExport& e);

/// Gathers input channels by in_perm, convolves each channel group with its
/// block, concatenates, and scatters the result so that permuted output
/// channel f lands on original channel out_perm[f].
FeatureMap grouped_forward(const FeatureMap& x, const GroupedLayerExport& e, std::size_t padding);

/// Compressed-row layout of the retained kernels over the (c_out x c_in) grid.
struct SparseLayerExport {
  KernelShape shape;
  std::vector<std::size_t> row_offsets;     ///< c_out + 1 entries
  std::vector<std::size_t> column_indices;  ///< strictly increasing within a row
  std::vector<double> kernel_values;        ///< nnz * k_h * k_w, kernel-contiguous

  std::size_t nnz() const { return column_indices.size(); }
};

/// With `strict`, masks that are not regular for any group count dividing
/// both channel counts uniformly are rejected.
SparseLayerExport export_sparse(const WeightTensor& w, const MaskPattern& mask, bool strict = true);

/// Sparse matrix times dense feature map for 1x1 kernels: y(f) = sum_c W(f,c) x(c)
/// at every pixel, with c visited in increasing order.
FeatureMap sparse_forward_1x1(const FeatureMap& x, const SparseLayerExport& s);

/// max |a - b| / max(max |b|, tiny). Throws on shape mismatch.
double relative_error(const FeatureMap& a, const FeatureMap& b);

}  // namespace gprune
