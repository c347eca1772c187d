#include "gprune/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gprune/error.hpp"

namespace gprune {

FeatureMap::FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
                       std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (channels_ == 0 || height_ == 0 || width_ == 0) {
    throw ValidationError("feature map dimensions must be positive");
  }
  if (data_.size() != channels_ * height_ * width_) {
    throw ValidationError("feature map holds " + std::to_string(data_.size()) +
                          " values, expected " + std::to_string(channels_ * height_ * width_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ValidationError("feature map contains a non-finite value");
  }
}

FeatureMap FeatureMap::zeros(std::size_t channels, std::size_t height, std::size_t width) {
  return FeatureMap(channels, height, width, std::vector<double>(channels * height * width, 0.0));
}

FeatureMap dense_forward(const FeatureMap& x, const WeightTensor& w, std::size_t padding) {
  if (x.channels() != w.c_in()) {
    throw ValidationError("input has " + std::to_string(x.channels()) +
                          " channels, weights expect " + std::to_string(w.c_in()));
  }
  const std::size_t padded_h = x.height() + 2 * padding;
  const std::size_t padded_w = x.width() + 2 * padding;
  if (padded_h < w.k_h() || padded_w < w.k_w()) {
    throw ValidationError("kernel is larger than the padded input");
  }
  const std::size_t out_h = padded_h - w.k_h() + 1;
  const std::size_t out_w = padded_w - w.k_w() + 1;
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  FeatureMap y = FeatureMap::zeros(w.c_out(), out_h, out_w);
  for (std::size_t f = 0; f < w.c_out(); ++f) {
    for (std::size_t c = 0; c < w.c_in(); ++c) {
      for (std::size_t i = 0; i < w.k_h(); ++i) {
        for (std::size_t j = 0; j < w.k_w(); ++j) {
          const double wv = w.at(f, c, i, j);
          if (wv == 0.0) continue;
          for (std::size_t oy = 0; oy < out_h; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + i) - pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.height())) continue;
            for (std::size_t ox = 0; ox < out_w; ++ox) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + j) - pad;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(x.width())) continue;
              y.at(f, oy, ox) += wv * x.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
      }
    }
  }
  return y;
}

WeightTensor apply_mask(const WeightTensor& w, const MaskPattern& mask) {
  if (mask.rows() != w.c_out() || mask.cols() != w.c_in()) {
    throw ValidationError("mask shape does not match the weight tensor");
  }
  std::vector<double> data(w.data().begin(), w.data().end());
  const std::size_t ks = w.shape().kernel_size();
  for (std::size_t f = 0; f < w.c_out(); ++f) {
    for (std::size_t c = 0; c < w.c_in(); ++c) {
      if (!mask(f, c)) {
        std::fill_n(data.begin() + (f * w.c_in() + c) * ks, ks, 0.0);
      }
    }
  }
  return WeightTensor(w.shape(), std::move(data));
}

FeatureMap masked_forward(const FeatureMap& x, const WeightTensor& w, const MaskPattern& mask,
                          std::size_t padding) {
  return dense_forward(x, apply_mask(w, mask), padding);
}

void GroupedLayerExport::validate() const {
  const std::size_t groups = g.value();
  check_divides(g, shape.c_out, shape.c_in);
  check_fits(perms, shape.c_out, shape.c_in);
  if (blocks.size() != groups) {
    throw ValidationError("grouped export has " + std::to_string(blocks.size()) +
                          " blocks, expected " + std::to_string(groups));
  }
  const KernelShape block_shape{shape.c_out / groups, shape.c_in / groups, shape.k_h, shape.k_w};
  for (std::size_t k = 0; k < groups; ++k) {
    if (blocks[k].shape() != block_shape) {
      throw ValidationError("grouped export block " + std::to_string(k) + " has the wrong shape");
    }
  }
}

GroupedLayerExport export_grouped(const WeightTensor& w, const PermutationPair& perms, GroupCount g) {
  check_divides(g, w.c_out(), w.c_in());
  check_fits(perms, w.c_out(), w.c_in());
  const std::size_t groups = g.value();
  const std::size_t rows_per = w.c_out() / groups;
  const std::size_t cols_per = w.c_in() / groups;
  const std::size_t ks = w.shape().kernel_size();

  GroupedLayerExport e{g, w.shape(), {}, perms};
  e.blocks.reserve(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    std::vector<double> data;
    data.reserve(rows_per * cols_per * ks);
    for (std::size_t f = 0; f < rows_per; ++f) {
      for (std::size_t c = 0; c < cols_per; ++c) {
        auto kernel = w.kernel(perms.out[k * rows_per + f], perms.in[k * cols_per + c]);
        data.insert(data.end(), kernel.begin(), kernel.end());
      }
    }
    e.blocks.emplace_back(KernelShape{rows_per, cols_per, w.k_h(), w.k_w()}, std::move(data));
  }
  return e;
}

WeightTensor reassemble(const GroupedLayerExport& e) {
  e.validate();
  const std::size_t groups = e.g.value();
  const std::size_t rows_per = e.shape.c_out / groups;
  const std::size_t cols_per = e.shape.c_in / groups;
  const std::size_t ks = e.shape.kernel_size();

  std::vector<double> data(e.shape.element_count(), 0.0);
  for (std::size_t k = 0; k < groups; ++k) {
    for (std::size_t f = 0; f < rows_per; ++f) {
      for (std::size_t c = 0; c < cols_per; ++c) {
        const std::size_t orig_f = e.perms.out[k * rows_per + f];
        const std::size_t orig_c = e.perms.in[k * cols_per + c];
        auto kernel = e.blocks[k].kernel(f, c);
        std::copy(kernel.begin(), kernel.end(), data.begin() + (orig_f * e.shape.c_in + orig_c) * ks);
      }
    }
  }
  return WeightTensor(e.shape, std::move(data));
}

FeatureMap grouped_forward(const FeatureMap& x, const GroupedLayerExport& e, std::size_t padding) {
  e.validate();
  if (x.channels() != e.shape.c_in) {
    throw ValidationError("input has " + std::to_string(x.channels()) +
                          " channels, export expects " + std::to_string(e.shape.c_in));
  }
  const std::size_t groups = e.g.value();
  const std::size_t rows_per = e.shape.c_out / groups;
  const std::size_t cols_per = e.shape.c_in / groups;
  const std::size_t plane = x.plane_size();

  std::vector<double> out_data;
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  for (std::size_t k = 0; k < groups; ++k) {
    std::vector<double> group_in;
    group_in.reserve(cols_per * plane);
    for (std::size_t c = 0; c < cols_per; ++c) {
      auto p = x.plane(e.perms.in[k * cols_per + c]);
      group_in.insert(group_in.end(), p.begin(), p.end());
    }
    const FeatureMap y = dense_forward(FeatureMap(cols_per, x.height(), x.width(), std::move(group_in)),
                                       e.blocks[k], padding);
    if (out_data.empty()) {
      out_h = y.height();
      out_w = y.width();
      out_data.assign(e.shape.c_out * y.plane_size(), 0.0);
    }
    for (std::size_t f = 0; f < rows_per; ++f) {
      auto p = y.plane(f);
      std::copy(p.begin(), p.end(),
                out_data.begin() + e.perms.out[k * rows_per + f] * y.plane_size());
    }
  }
  return FeatureMap(e.shape.c_out, out_h, out_w, std::move(out_data));
}

namespace {

bool is_uniformly_regular(const MaskPattern& mask) {
  if (mask.rows() == 0 || mask.cols() == 0) return false;
  const std::size_t per_row = mask.row_count(0);
  const std::size_t per_col = mask.col_count(0);
  if (per_row == 0 || per_col == 0) return false;
  if (mask.cols() % per_row != 0 || mask.rows() % per_col != 0) return false;
  if (mask.cols() / per_row != mask.rows() / per_col) return false;
  for (std::size_t f = 1; f < mask.rows(); ++f) {
    if (mask.row_count(f) != per_row) return false;
  }
  for (std::size_t c = 1; c < mask.cols(); ++c) {
    if (mask.col_count(c) != per_col) return false;
  }
  return true;
}

}  // namespace

SparseLayerExport export_sparse(const WeightTensor& w, const MaskPattern& mask, bool strict) {
  if (mask.rows() != w.c_out() || mask.cols() != w.c_in()) {
    throw ValidationError("mask shape does not match the weight tensor");
  }
  if (strict && !is_uniformly_regular(mask)) {
    throw ValidationError("mask is not regular: retained kernels per row/column differ");
  }
  SparseLayerExport s;
  s.shape = w.shape();
  s.row_offsets.reserve(w.c_out() + 1);
  s.row_offsets.push_back(0);
  for (std::size_t f = 0; f < w.c_out(); ++f) {
    for (std::size_t c = 0; c < w.c_in(); ++c) {
      if (!mask(f, c)) continue;
      s.column_indices.push_back(c);
      auto kernel = w.kernel(f, c);
      s.kernel_values.insert(s.kernel_values.end(), kernel.begin(), kernel.end());
    }
    s.row_offsets.push_back(s.column_indices.size());
  }
  return s;
}

FeatureMap sparse_forward_1x1(const FeatureMap& x, const SparseLayerExport& s) {
  if (s.shape.k_h != 1 || s.shape.k_w != 1) {
    throw ValidationError("sparse execution supports 1x1 kernels only");
  }
  if (x.channels() != s.shape.c_in) {
    throw ValidationError("input has " + std::to_string(x.channels()) +
                          " channels, sparse layer expects " + std::to_string(s.shape.c_in));
  }
  if (s.row_offsets.size() != s.shape.c_out + 1 || s.kernel_values.size() != s.nnz()) {
    throw ValidationError("inconsistent sparse export");
  }
  const std::size_t plane = x.plane_size();
  std::vector<double> out(s.shape.c_out * plane, 0.0);
  for (std::size_t f = 0; f < s.shape.c_out; ++f) {
    for (std::size_t k = s.row_offsets[f]; k < s.row_offsets[f + 1]; ++k) {
      const double wv = s.kernel_values[k];
      auto in = x.plane(s.column_indices[k]);
      for (std::size_t p = 0; p < plane; ++p) out[f * plane + p] += wv * in[p];
    }
  }
  return FeatureMap(s.shape.c_out, x.height(), x.width(), std::move(out));
}

double relative_error(const FeatureMap& a, const FeatureMap& b) {
  if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError("feature maps differ in shape");
  }
  double max_diff = 0.0;
  double max_ref = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    max_diff = std::max(max_diff, std::abs(a.data()[i] - b.data()[i]));
    max_ref = std::max(max_ref, std::abs(b.data()[i]));
  }
  return max_diff / std::max(max_ref, 1e-300);
}

}  // namespace gprune
