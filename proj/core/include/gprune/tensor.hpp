#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gprune {

/// Dimensions of a convolution weight tensor, (c_out, c_in, k_h, k_w).
struct KernelShape {
  std::size_t c_out = 0;
  std::size_t c_in = 0;
  std::size_t k_h = 0;
  std::size_t k_w = 0;

  std::size_t kernel_size() const { return k_h * k_w; }
  std::size_t element_count() const { return c_out * c_in * k_h * k_w; }
  friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

/// Dense convolution weights stored row-major in (c_out, c_in, k_h, k_w) order.
/// All values are finite; the constructor rejects anything else.
class WeightTensor {
 public:
  WeightTensor() = default;
  WeightTensor(KernelShape shape, std::vector<double> data);

  static WeightTensor zeros(KernelShape shape);

  const KernelShape& shape() const { return shape_; }
  std::size_t c_out() const { return shape_.c_out; }
  std::size_t c_in() const { return shape_.c_in; }
  std::size_t k_h() const { return shape_.k_h; }
  std::size_t k_w() const { return shape_.k_w; }

  double at(std::size_t f, std::size_t c, std::size_t i, std::size_t j) const {
    return data_[offset(f, c) + i * shape_.k_w + j];
  }

  /// The k_h*k_w kernel connecting input channel c to output channel f.
  std::span<const double> kernel(std::size_t f, std::size_t c) const {
    return {data_.data() + offset(f, c), shape_.kernel_size()};
  }

  std::span<const double> data() const { return data_; }

  friend bool operator==(const WeightTensor&, const WeightTensor&) = default;

 private:
  std::size_t offset(std::size_t f, std::size_t c) const {
    return (f * shape_.c_in + c) * shape_.kernel_size();
  }

  KernelShape shape_;
  std::vector<double> data_;
};

/// (rows x cols) matrix of non-negative kernel magnitudes, row-major.
class NormMatrix {
 public:
  NormMatrix() = default;
  NormMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static NormMatrix zeros(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t f, std::size_t c) const { return values_[f * cols_ + c]; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(std::size_t f) const {
    return {values_.data() + f * cols_, cols_};
  }

  /// Sum of all entries: row subtotals accumulated in row order.
  double total() const;

  /// Same matrix with every entry multiplied by a positive factor.
  NormMatrix scaled(double factor) const;

  friend bool operator==(const NormMatrix&, const NormMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Entry (f, c) is the L2 norm of kernel (f, c). Biases never participate.
NormMatrix kernel_norm_matrix(const WeightTensor& w);

}  // namespace gprune
