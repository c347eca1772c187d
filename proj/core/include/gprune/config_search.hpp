#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gprune/layer.hpp"
#include "gprune/layer_pruner.hpp"
#include "gprune/tensor.hpp"

namespace gprune {

/// Common divisors of c_in and c_out, strictly decreasing; first element is
/// gcd(c_in, c_out), last is 1.
std::vector<GroupCount> group_candidates(std::size_t c_in, std::size_t c_out);

/// Parameters of a (possibly grouped) convolution: c_out*c_in*k_h*k_w / g.
std::uint64_t num_params(const LayerSpec& layer, GroupCount g);
/// Operations with one FMA counted as two: 2*h_out*w_out*c_out*c_in*k_h*k_w / g.
std::uint64_t num_ops(const LayerSpec& layer, GroupCount g);

/// Upper bounds on total parameters and operations; unset means unbounded.
struct BudgetConstraint {
  std::optional<std::uint64_t> max_params;
  std::optional<std::uint64_t> max_ops;

  bool satisfied_by(std::uint64_t params, std::uint64_t ops) const {
    return (!max_params || params <= *max_params) && (!max_ops || ops <= *max_ops);
  }
};

/// Memoized pruning cost of one layer per group count. Each candidate is
/// solved at most once.
class CostTable {
 public:
  CostTable(NormMatrix m, GreedyParams params);

  double cost(GroupCount g) const;
  /// Cost divided by the layer's total magnitude (0 for an all-zero layer).
  double normalized_cost(GroupCount g) const;
  std::size_t solve_count() const { return solves_; }
  const NormMatrix& matrix() const { return m_; }

 private:
  NormMatrix m_;
  GreedyParams params_;
  double total_;
  mutable std::map<std::size_t, double> cache_;
  mutable std::size_t solves_ = 0;
};

/// Pruning cost for each candidate, keyed by group count.
std::map<std::size_t, double> cost_table(const NormMatrix& m, const std::vector<GroupCount>& candidates,
                                         const GreedyParams& params);

struct SearchLayer {
  LayerSpec spec;
  NormMatrix norms;
};

enum class SearchDirection {
  kDensify,   ///< start at the largest group counts, move towards G=1
  kSparsify,  ///< start at G=1, move towards larger group counts
};

struct SearchOptions {
  GreedyParams greedy;
  SearchDirection direction = SearchDirection::kDensify;
  /// Rank moves by cost relative to the layer's total magnitude.
  bool normalized_cost = false;
  std::size_t threads = 1;
};

/// A per-layer group assignment together with its exact budget totals.
struct GroupConfig {
  std::vector<GroupCount> groups;
  std::vector<double> layer_costs;
  std::uint64_t total_params = 0;
  std::uint64_t total_ops = 0;
  double total_cost = 0.0;
  std::size_t moves = 0;
};

/// Totals recomputed from the layer specs; costs come from `tables`.
GroupConfig make_config(const std::vector<SearchLayer>& layers,
                        const std::vector<CostTable>& tables,
                        std::vector<GroupCount> groups);

std::vector<CostTable> build_cost_tables(const std::vector<SearchLayer>& layers,
                                         const GreedyParams& params, std::size_t threads);

/// Local search over per-layer candidate indices.
///
/// Densify starts with every layer at its largest group count and repeatedly
/// moves the layer whose next smaller candidate has the lowest cost (ties go to
/// the lowest layer index). The first move that would break the budget is
/// undone and the search stops, so the result always satisfies the budget.
///
/// Sparsify starts at G=1 everywhere and repeatedly moves the layer whose step
/// to the next larger candidate increases its cost the least, stopping at the
/// first configuration inside the budget.
///
/// Throws InfeasibleError if no reachable configuration fits the budget.
GroupConfig local_search(const std::vector<SearchLayer>& layers, const BudgetConstraint& budget,
                         const SearchOptions& options = {});

inline constexpr double kDefaultConfigOracleCap = 1e6;

/// Minimal-cost configuration over every combination of candidates that fits
/// the budget. Ties resolve to the lexicographically smallest group vector.
GroupConfig exhaustive_config_oracle(const std::vector<SearchLayer>& layers,
                                     const BudgetConstraint& budget, const GreedyParams& params,
                                     double cap = kDefaultConfigOracleCap, std::size_t threads = 1);

}  // namespace gprune
