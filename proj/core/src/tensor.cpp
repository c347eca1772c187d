#include "gprune/tensor.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "gprune/error.hpp"

namespace gprune {

WeightTensor::WeightTensor(KernelShape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (shape_.c_out == 0 || shape_.c_in == 0 || shape_.k_h == 0 || shape_.k_w == 0) {
    throw ValidationError("weight tensor dimensions must be positive");
  }
  if (data_.size() != shape_.element_count()) {
    std::ostringstream msg;
    msg << "weight tensor holds " << data_.size() << " values, shape ("
        << shape_.c_out << ", " << shape_.c_in << ", " << shape_.k_h << ", "
        << shape_.k_w << ") requires " << shape_.element_count();
    throw ValidationError(msg.str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      const std::size_t ks = shape_.kernel_size();
      const std::size_t kernel = i / ks;
      const std::size_t within = i % ks;
      std::ostringstream msg;
      msg << "non-finite weight at index (" << kernel / shape_.c_in << ", "
          << kernel % shape_.c_in << ", " << within / shape_.k_w << ", "
          << within % shape_.k_w << ")";
      throw ValidationError(msg.str());
    }
  }
}

WeightTensor WeightTensor::zeros(KernelShape shape) {
  return WeightTensor(shape, std::vector<double>(shape.element_count(), 0.0));
}

NormMatrix::NormMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    std::ostringstream msg;
    msg << "norm matrix holds " << values_.size() << " values, expected "
        << rows_ << " x " << cols_;
    throw ValidationError(msg.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      std::ostringstream msg;
      msg << "norm matrix entry (" << i / cols_ << ", " << i % cols_
          << ") must be finite and non-negative, got " << values_[i];
      throw ValidationError(msg.str());
    }
  }
}

NormMatrix NormMatrix::zeros(std::size_t rows, std::size_t cols) {
  return NormMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

double NormMatrix::total() const {
  double sum = 0.0;
  for (std::size_t f = 0; f < rows_; ++f) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) row_sum += values_[f * cols_ + c];
    sum += row_sum;
  }
  return sum;
}

NormMatrix NormMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ValidationError("scale factor must be positive and finite");
  }
  std::vector<double> out(values_);
  for (double& v : out) v *= factor;
  return NormMatrix(rows_, cols_, std::move(out));
}

NormMatrix kernel_norm_matrix(const WeightTensor& w) {
  std::vector<double> norms(w.c_out() * w.c_in());
  for (std::size_t f = 0; f < w.c_out(); ++f) {
    for (std::size_t c = 0; c < w.c_in(); ++c) {
      double sq = 0.0;
      for (double v : w.kernel(f, c)) sq += v * v;
      const double norm = std::sqrt(sq);
      if (!std::isfinite(norm)) {
        throw ValidationError("norm of kernel (" + std::to_string(f) + ", " +
                              std::to_string(c) + ") is not finite");
      }
      norms[f * w.c_in() + c] = norm;
    }
  }
  return NormMatrix(w.c_out(), w.c_in(), std::move(norms));
}

}  // namespace gprune
