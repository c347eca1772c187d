#pragma once

// Shared helpers for the test suites. The brute-force oracles here are
// deliberately naive and share no code with the library paths they check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gprune/equivalence.hpp"
#include "gprune/permutation.hpp"
#include "gprune/random.hpp"
#include "gprune/tensor.hpp"

namespace gprune::testing {

inline WeightTensor random_tensor(KernelShape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data(shape.element_count());
  for (double& v : data) v = rng.uniform(-1.0, 1.0);
  return WeightTensor(shape, std::move(data));
}

inline NormMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(rows * cols);
  for (double& v : values) v = rng.uniform01();
  return NormMatrix(rows, cols, std::move(values));
}

inline FeatureMap random_input(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data(c * h * w);
  for (double& v : data) v = rng.uniform(-1.0, 1.0);
  return FeatureMap(c, h, w, std::move(data));
}

inline PermutationPair random_perms(std::size_t c_out, std::size_t c_in, std::uint64_t seed) {
  Rng rng(seed);
  return {Permutation(rng.permutation(c_out)), Permutation(rng.permutation(c_in))};
}

inline NormMatrix ones(std::size_t rows, std::size_t cols) {
  return NormMatrix(rows, cols, std::vector<double>(rows * cols, 1.0));
}

/// Sum over (f, c) with floor(f*g/rows) == floor(c*g/cols), flat index loop.
inline double oracle_block_sum(const NormMatrix& m, std::size_t g) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) {
    const std::size_t f = i / m.cols();
    const std::size_t c = i % m.cols();
    if (f * g / m.rows() == c * g / m.cols()) s += m.values()[i];
  }
  return s;
}

/// Retained magnitude of perms at g, computed on the permuted grid directly.
inline double oracle_retained(const NormMatrix& m, const PermutationPair& p, std::size_t g) {
  double s = 0.0;
  for (std::size_t f = 0; f < m.rows(); ++f) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (f * g / m.rows() == c * g / m.cols()) s += m(p.out[f], p.in[c]);
    }
  }
  return s;
}

/// Six-loop direct convolution, stride 1, zero padding.
inline FeatureMap oracle_conv(const FeatureMap& x, const WeightTensor& w, std::size_t pad) {
  const std::size_t oh = x.height() + 2 * pad - w.k_h() + 1;
  const std::size_t ow = x.width() + 2 * pad - w.k_w() + 1;
  std::vector<double> y(w.c_out() * oh * ow, 0.0);
  for (std::size_t f = 0; f < w.c_out(); ++f)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t c = 0; c < w.c_in(); ++c)
          for (std::size_t i = 0; i < w.k_h(); ++i)
            for (std::size_t j = 0; j < w.k_w(); ++j) {
              const long iy = static_cast<long>(oy + i) - static_cast<long>(pad);
              const long ix = static_cast<long>(ox + j) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(x.height()) ||
                  ix >= static_cast<long>(x.width()))
                continue;
              acc += w.at(f, c, i, j) * x.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
        y[(f * oh + oy) * ow + ox] = acc;
      }
  return FeatureMap(w.c_out(), oh, ow, std::move(y));
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gprune_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(GPRUNE_FIXTURE_DIR) / name;
}

}  // namespace gprune::testing
