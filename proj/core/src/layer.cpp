#include "gprune/layer.hpp"

#include <string>

#include "gprune/error.hpp"

namespace gprune {

GroupCount::GroupCount(std::size_t g) : g_(g) {
  if (g == 0) throw ValidationError("number of groups must be at least 1");
}

bool divides(GroupCount g, std::size_t c_out, std::size_t c_in) {
  return c_out % g.value() == 0 && c_in % g.value() == 0;
}

void check_divides(GroupCount g, std::size_t c_out, std::size_t c_in) {
  if (!divides(g, c_out, c_in)) {
    throw ValidationError("G=" + std::to_string(g.value()) +
                          " does not divide both channel counts (c_out=" +
                          std::to_string(c_out) + ", c_in=" + std::to_string(c_in) + ")");
  }
}

void LayerSpec::validate() const {
  if (c_in == 0 || c_out == 0 || k_h == 0 || k_w == 0 || h_out == 0 || w_out == 0) {
    throw ValidationError("layer '" + name + "': all dimensions must be >= 1");
  }
}

double diagonal_block_sum(const NormMatrix& m, GroupCount g) {
  check_divides(g, m.rows(), m.cols());
  const std::size_t rows_per = m.rows() / g.value();
  const std::size_t cols_per = m.cols() / g.value();
  double sum = 0.0;
  for (std::size_t f = 0; f < m.rows(); ++f) {
    const std::size_t begin = (f / rows_per) * cols_per;
    double row_sum = 0.0;
    for (std::size_t c = begin; c < begin + cols_per; ++c) row_sum += m(f, c);
    sum += row_sum;
  }
  return sum;
}

}  // namespace gprune
