#include "gprune/layer_pruner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gprune/error.hpp"

namespace gprune {

MaskPattern::MaskPattern(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
  if (bits_.size() != rows_ * cols_) throw ValidationError("mask size does not match its shape");
}

MaskPattern MaskPattern::all(std::size_t rows, std::size_t cols, bool value) {
  return MaskPattern(rows, cols, std::vector<std::uint8_t>(rows * cols, value ? 1 : 0));
}

std::size_t MaskPattern::row_count(std::size_t f) const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin() + f * cols_, bits_.begin() + (f + 1) * cols_,
                    [](std::uint8_t b) { return b != 0; }));
}

std::size_t MaskPattern::col_count(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t f = 0; f < rows_; ++f) n += (*this)(f, c) ? 1 : 0;
  return n;
}

bool MaskPattern::is_regular(GroupCount g) const {
  if (!divides(g, rows_, cols_)) return false;
  for (std::size_t f = 0; f < rows_; ++f) {
    if (row_count(f) != cols_ / g.value()) return false;
  }
  for (std::size_t c = 0; c < cols_; ++c) {
    if (col_count(c) != rows_ / g.value()) return false;
  }
  return true;
}

namespace {

// Stable ascending sort of perm[0, prefix) by key(position).
template <typename KeyFn>
void sort_prefix(std::vector<std::size_t>& perm, std::size_t prefix, KeyFn key) {
  std::vector<std::pair<double, std::size_t>> keyed(prefix);
  for (std::size_t i = 0; i < prefix; ++i) keyed[i] = {key(i), perm[i]};
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < prefix; ++i) perm[i] = keyed[i].second;
}

}  // namespace

PermutationPair greedy_permutation(const NormMatrix& m, GroupCount g, const GreedyParams& params) {
  check_divides(g, m.rows(), m.cols());
  const std::size_t groups = g.value();
  const std::size_t rows_per = m.rows() / groups;
  const std::size_t cols_per = m.cols() / groups;

  std::vector<std::size_t> out(m.rows());
  std::vector<std::size_t> in(m.cols());
  std::iota(out.begin(), out.end(), std::size_t{0});
  std::iota(in.begin(), in.end(), std::size_t{0});

  for (std::size_t block = groups; block-- > 0;) {
    const std::size_t row_begin = block * rows_per;
    const std::size_t row_end = row_begin + rows_per;
    const std::size_t col_begin = block * cols_per;
    const std::size_t col_end = col_begin + cols_per;

    for (std::size_t round = 0; round < params.sort_rounds; ++round) {
      sort_prefix(in, col_end, [&](std::size_t c) {
        double key = 0.0;
        for (std::size_t f = row_begin; f < row_end; ++f) key += m(out[f], in[c]);
        return key;
      });
      sort_prefix(out, row_end, [&](std::size_t f) {
        double key = 0.0;
        for (std::size_t c = col_begin; c < col_end; ++c) key += m(out[f], in[c]);
        return key;
      });
    }
  }
  return {Permutation(std::move(out)), Permutation(std::move(in))};
}

double retained_norm(const NormMatrix& m, const MaskPattern& mask) {
  if (mask.rows() != m.rows() || mask.cols() != m.cols()) {
    throw ValidationError("mask shape does not match the norm matrix");
  }
  double sum = 0.0;
  for (std::size_t f = 0; f < m.rows(); ++f) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (mask(f, c)) row_sum += m(f, c);
    }
    sum += row_sum;
  }
  return sum;
}

MaskPattern prune_mask(std::size_t c_out, std::size_t c_in, GroupCount g,
                       const PermutationPair& perms) {
  check_divides(g, c_out, c_in);
  check_fits(perms, c_out, c_in);
  std::vector<std::uint8_t> bits(c_out * c_in, 0);
  for (std::size_t f = 0; f < c_out; ++f) {
    for (std::size_t c = 0; c < c_in; ++c) {
      if (in_diagonal_block(f, c, c_out, c_in, g.value())) {
        bits[perms.out[f] * c_in + perms.in[c]] = 1;
      }
    }
  }
  return MaskPattern(c_out, c_in, std::move(bits));
}

namespace {

double ratio_of(double objective, double total) {
  if (total <= 0.0) return 1.0;
  return std::clamp(objective / total, 0.0, 1.0);
}

}  // namespace

double recovery_ratio(const NormMatrix& m, const PermutationPair& perms, GroupCount g) {
  const double kept = retained_norm(m, prune_mask(m.rows(), m.cols(), g, perms));
  return ratio_of(kept, m.total());
}

PruneSolution evaluate_solution(const NormMatrix& m, PermutationPair perms, GroupCount g) {
  const double total = m.total();
  const double kept = retained_norm(m, prune_mask(m.rows(), m.cols(), g, perms));
  PruneSolution s{std::move(perms), g, kept, total - kept, ratio_of(kept, total)};
  return s;
}

PruneSolution solve_layer(const NormMatrix& m, GroupCount g, const GreedyParams& params) {
  return evaluate_solution(m, greedy_permutation(m, g, params), g);
}

namespace {

// log of the multinomial n! / (k!)^groups
double log_multinomial(std::size_t n, std::size_t k, std::size_t groups) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         static_cast<double>(groups) * std::lgamma(static_cast<double>(k) + 1.0);
}

class OracleSearch {
 public:
  OracleSearch(const NormMatrix& m, std::size_t groups)
      : m_(m),
        groups_(groups),
        in_size_(m.cols() / groups),
        out_size_(m.rows() / groups),
        in_label_(m.cols(), 0),
        in_fill_(groups, 0),
        out_label_(m.rows(), 0),
        out_fill_(groups, 0),
        row_sums_(m.rows() * groups, 0.0) {}

  void run() { assign_input(0, 0); }

  bool found() const { return found_; }
  const std::vector<std::size_t>& best_in() const { return best_in_; }
  const std::vector<std::size_t>& best_out() const { return best_out_; }

 private:
  // Canonical set partitions: channel c joins an open group or opens the next label.
  void assign_input(std::size_t c, std::size_t opened) {
    if (c == m_.cols()) {
      compute_row_sums();
      assign_output(0, 0.0);
      return;
    }
    const std::size_t limit = std::min(opened + 1, groups_);
    for (std::size_t k = 0; k < limit; ++k) {
      if (in_fill_[k] == in_size_) continue;
      in_label_[c] = k;
      ++in_fill_[k];
      assign_input(c + 1, std::max(opened, k + 1));
      --in_fill_[k];
    }
  }

  void compute_row_sums() {
    for (std::size_t f = 0; f < m_.rows(); ++f) {
      for (std::size_t k = 0; k < groups_; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < m_.cols(); ++c) {
          if (in_label_[c] == k) s += m_(f, c);
        }
        row_sums_[f * groups_ + k] = s;
      }
    }
  }

  void assign_output(std::size_t f, double partial) {
    if (f == m_.rows()) {
      if (!found_ || partial > best_) {
        found_ = true;
        best_ = partial;
        best_in_ = in_label_;
        best_out_ = out_label_;
      }
      return;
    }
    for (std::size_t k = 0; k < groups_; ++k) {
      if (out_fill_[k] == out_size_) continue;
      out_label_[f] = k;
      ++out_fill_[k];
      assign_output(f + 1, partial + row_sums_[f * groups_ + k]);
      --out_fill_[k];
    }
  }

  const NormMatrix& m_;
  std::size_t groups_;
  std::size_t in_size_;
  std::size_t out_size_;
  std::vector<std::size_t> in_label_;
  std::vector<std::size_t> in_fill_;
  std::vector<std::size_t> out_label_;
  std::vector<std::size_t> out_fill_;
  std::vector<double> row_sums_;
  bool found_ = false;
  double best_ = 0.0;
  std::vector<std::size_t> best_in_;
  std::vector<std::size_t> best_out_;
};

Permutation grouped_order(const std::vector<std::size_t>& labels, std::size_t groups) {
  std::vector<std::size_t> order;
  order.reserve(labels.size());
  for (std::size_t k = 0; k < groups; ++k) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == k) order.push_back(i);
    }
  }
  return Permutation(std::move(order));
}

}  // namespace

double oracle_evaluation_count(std::size_t c_out, std::size_t c_in, GroupCount g) {
  check_divides(g, c_out, c_in);
  const std::size_t groups = g.value();
  const double log_in = log_multinomial(c_in, c_in / groups, groups) -
                        std::lgamma(static_cast<double>(groups) + 1.0);
  const double log_out = log_multinomial(c_out, c_out / groups, groups);
  return std::round(std::exp(log_in + log_out));
}

PruneSolution brute_force_oracle(const NormMatrix& m, GroupCount g, double cap) {
  check_divides(g, m.rows(), m.cols());
  const double evaluations = oracle_evaluation_count(m.rows(), m.cols(), g);
  if (evaluations > cap) {
    std::ostringstream msg;
    msg << m.rows() << "x" << m.cols() << " with G=" << g.value() << " needs about "
        << evaluations << " evaluations, cap is " << cap;
    throw OracleCapError(msg.str());
  }
  OracleSearch search(m, g.value());
  search.run();
  PermutationPair perms{grouped_order(search.best_out(), g.value()),
                        grouped_order(search.best_in(), g.value())};
  return evaluate_solution(m, std::move(perms), g);
}

}  // namespace gprune
