#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gprune/layer.hpp"
#include "gprune/layer_pruner.hpp"
#include "gprune/permutation.hpp"
#include "gprune/random.hpp"
#include "gprune/tensor.hpp"

namespace gprune::bench {

/// Distribution of generated kernel magnitudes.
struct ValueDistribution {
  enum class Kind { kUniform, kAbsNormal };
  Kind kind = Kind::kUniform;
  double lo = 0.5;  ///< uniform bounds; ignored for kAbsNormal
  double hi = 1.5;

  static ValueDistribution uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }
  static ValueDistribution abs_normal() { return {Kind::kAbsNormal, 0.0, 0.0}; }

  /// e.g. "uniform[0.5,1.5]" or "abs_normal(0,1)".
  std::string describe() const;
  double draw(Rng& rng) const;
};

/// A block-diagonal matrix with strictly positive in-block entries, shuffled
/// by `truth`: matrix = apply_permutation(block_diagonal, truth).
struct PlantedInstance {
  NormMatrix matrix;
  GroupCount g{1};
  PermutationPair truth;
  ValueDistribution dist;
  std::uint64_t seed = 0;
};

/// Deterministic in (channels, g, dist, seed). The distribution must produce
/// strictly positive values (uniform with lo > 0).
PlantedInstance generate_planted_instance(std::size_t channels, GroupCount g,
                                          const ValueDistribution& dist, std::uint64_t seed);

/// Dense (rows x cols) matrix with i.i.d. entries from `dist`.
NormMatrix random_norm_matrix(std::size_t rows, std::size_t cols, const ValueDistribution& dist,
                              std::uint64_t seed);

inline constexpr std::size_t kHistogramBins = 20;
/// A sample counts as fully recovered when its ratio is at least this.
inline constexpr double kFullRecovery = 1.0 - 1e-12;

/// Histogram bin of a ratio in [0, 1]; 1.0 falls into the last bin.
std::size_t histogram_bin(double ratio);

struct SweepEntry {
  std::size_t size = 0;
  std::size_t g = 0;
  std::size_t sort_rounds = 0;
  std::size_t samples = 0;
  std::size_t fully_recovered = 0;  ///< ratio >= kFullRecovery
  std::size_t above_90 = 0;         ///< ratio >= 0.9
  double mean_ratio = 0.0;
  std::array<std::size_t, kHistogramBins> histogram{};

  double fraction_fully_recovered() const;
  double fraction_above_90() const;
  friend bool operator==(const SweepEntry&, const SweepEntry&) = default;
};

struct SweepConfig {
  std::size_t samples = 10000;
  std::vector<std::size_t> sizes{16};
  std::vector<std::size_t> g_values{4};
  std::vector<std::size_t> sort_rounds{0, 1, 2, 5, 10};
  std::uint64_t base_seed = 0;
  ValueDistribution dist;
  std::size_t threads = 1;
};

struct SweepReport {
  std::uint64_t base_seed = 0;
  std::string generator;
  std::string distribution;
  std::vector<SweepEntry> entries;  ///< ordered by size, then g, then sort rounds
  friend bool operator==(const SweepReport&, const SweepReport&) = default;
};

/// Runs the heuristic on `samples` planted instances per (size, g) and
/// aggregates per sort-round count. Sample i uses seed derive_seed(base_seed, i),
/// so every sort-round count sees the same instances and the report does not
/// depend on the thread count.
SweepReport recovery_sweep(const SweepConfig& config);

/// Per-sample recovery ratios behind one (size, g) cell of a sweep; result[s][i]
/// is sample i at sort_rounds[s].
std::vector<std::vector<double>> sweep_ratios(std::size_t samples, std::size_t size, GroupCount g,
                                              const std::vector<std::size_t>& sort_rounds,
                                              std::uint64_t base_seed, const ValueDistribution& dist,
                                              std::size_t threads);

/// CSV rows: size,g,n_s,bin_low,bin_high,count. Header comment lines carry
/// the generator, seed and distribution.
std::string sweep_histogram_csv(const SweepReport& report);

struct ImprovementRow {
  std::size_t g = 0;
  double ratio = 0.0;        ///< with sorting
  double plain_ratio = 0.0;  ///< without sorting
  double improvement = 0.0;  ///< ratio - plain_ratio
  std::size_t layers_used = 0;
};

/// Recovery ratio with `params` against the unsorted baseline for each g.
/// Throws if a g does not divide the matrix.
std::vector<ImprovementRow> improvement_report(const NormMatrix& m, const std::vector<std::size_t>& g_values,
                                               const GreedyParams& params);

/// Multi-layer variant: ratios aggregate retained / total magnitude over the
/// layers, i.e. weighted by each layer's total norm. Layers that g does not
/// divide are left out of that row.
std::vector<ImprovementRow> improvement_report(const std::vector<NormMatrix>& layers,
                                               const std::vector<std::size_t>& g_values,
                                               const GreedyParams& params);

struct AdversarialResult {
  bool found = false;
  std::size_t trials_used = 0;
  std::optional<PlantedInstance> instance;
  std::optional<PruneSolution> greedy;
  std::optional<PruneSolution> oracle;
};

/// Looks for a planted instance where the heuristic falls short of the exact
/// oracle. Even trials are plain planted instances; odd trials boost one
/// in-block entry per block so that a large value sits in a column belonging to
/// another block's rows, the classic failure pattern.
AdversarialResult find_adversarial_instance(std::size_t channels, GroupCount g, std::size_t trials,
                                            std::uint64_t seed, const GreedyParams& params = {},
                                            double oracle_cap = kDefaultOracleCap);

}  // namespace gprune::bench
