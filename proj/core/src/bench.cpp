#include "gprune/bench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gprune/error.hpp"
#include "gprune/parallel.hpp"

namespace gprune::bench {

std::string ValueDistribution::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (kind == Kind::kUniform) {
    out << "uniform[" << lo << "," << hi << "]";
  } else {
    out << "abs_normal(0,1)";
  }
  return out.str();
}

double ValueDistribution::draw(Rng& rng) const {
  return kind == Kind::kUniform ? rng.uniform(lo, hi) : std::abs(rng.normal());
}

namespace {

void check_positive(const ValueDistribution& dist) {
  if (dist.kind != ValueDistribution::Kind::kUniform || !(dist.lo > 0.0) || !(dist.hi >= dist.lo) ||
      !std::isfinite(dist.hi)) {
    throw ValidationError("planted instances need a uniform distribution with 0 < lo <= hi, got " +
                          dist.describe());
  }
}

// Planted instance, optionally with one entry per block multiplied by `boost`.
PlantedInstance make_planted(std::size_t channels, GroupCount g, const ValueDistribution& dist,
                             std::uint64_t seed, double boost) {
  check_divides(g, channels, channels);
  check_positive(dist);
  Rng rng(seed);
  const std::size_t per = channels / g.value();

  std::vector<double> block_diag(channels * channels, 0.0);
  for (std::size_t f = 0; f < channels; ++f) {
    const std::size_t begin = (f / per) * per;
    for (std::size_t c = begin; c < begin + per; ++c) block_diag[f * channels + c] = dist.draw(rng);
  }
  if (boost != 1.0) {
    for (std::size_t k = 0; k < g.value(); ++k) {
      const std::size_t f = k * per + rng.below(per);
      const std::size_t c = k * per + rng.below(per);
      block_diag[f * channels + c] *= boost;
    }
  }
  PermutationPair truth{Permutation(rng.permutation(channels)), Permutation(rng.permutation(channels))};
  NormMatrix shuffled =
      apply_permutation(NormMatrix(channels, channels, std::move(block_diag)), truth);
  return PlantedInstance{std::move(shuffled), g, std::move(truth), dist, seed};
}

}  // namespace

PlantedInstance generate_planted_instance(std::size_t channels, GroupCount g,
                                          const ValueDistribution& dist, std::uint64_t seed) {
  return make_planted(channels, g, dist, seed, 1.0);
}

NormMatrix random_norm_matrix(std::size_t rows, std::size_t cols, const ValueDistribution& dist,
                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(rows * cols);
  for (double& v : values) v = dist.draw(rng);
  return NormMatrix(rows, cols, std::move(values));
}

std::size_t histogram_bin(double ratio) {
  const double clamped = std::clamp(ratio, 0.0, 1.0);
  return std::min(static_cast<std::size_t>(clamped * kHistogramBins), kHistogramBins - 1);
}

double SweepEntry::fraction_fully_recovered() const {
  return samples == 0 ? 0.0 : static_cast<double>(fully_recovered) / static_cast<double>(samples);
}

double SweepEntry::fraction_above_90() const {
  return samples == 0 ? 0.0 : static_cast<double>(above_90) / static_cast<double>(samples);
}

std::vector<std::vector<double>> sweep_ratios(std::size_t samples, std::size_t size, GroupCount g,
                                              const std::vector<std::size_t>& sort_rounds,
                                              std::uint64_t base_seed, const ValueDistribution& dist,
                                              std::size_t threads) {
  check_divides(g, size, size);
  std::vector<std::vector<double>> ratios(sort_rounds.size(), std::vector<double>(samples, 0.0));
  parallel_for(samples, threads, [&](std::size_t i) {
    const PlantedInstance inst = generate_planted_instance(size, g, dist, derive_seed(base_seed, i));
    for (std::size_t s = 0; s < sort_rounds.size(); ++s) {
      const auto perms = greedy_permutation(inst.matrix, g, GreedyParams{sort_rounds[s]});
      ratios[s][i] = recovery_ratio(inst.matrix, perms, g);
    }
  });
  return ratios;
}

SweepReport recovery_sweep(const SweepConfig& config) {
  for (std::size_t size : config.sizes) {
    for (std::size_t g : config.g_values) check_divides(GroupCount(g), size, size);
  }
  SweepReport report{config.base_seed, std::string(Rng::kName), config.dist.describe(), {}};
  for (std::size_t size : config.sizes) {
    for (std::size_t g : config.g_values) {
      const auto ratios = sweep_ratios(config.samples, size, GroupCount(g), config.sort_rounds,
                                       config.base_seed, config.dist, config.threads);
      for (std::size_t s = 0; s < config.sort_rounds.size(); ++s) {
        SweepEntry e;
        e.size = size;
        e.g = g;
        e.sort_rounds = config.sort_rounds[s];
        e.samples = config.samples;
        double sum = 0.0;
        for (double r : ratios[s]) {
          sum += r;
          if (r >= kFullRecovery) ++e.fully_recovered;
          if (r >= 0.9) ++e.above_90;
          ++e.histogram[histogram_bin(r)];
        }
        e.mean_ratio = config.samples == 0 ? 0.0 : sum / static_cast<double>(config.samples);
        report.entries.push_back(e);
      }
    }
  }
  return report;
}

std::string sweep_histogram_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "# generator=" << report.generator << " seed=" << report.base_seed
      << " distribution=" << report.distribution << " index_base=0\n";
  out << "size,g,n_s,bin_low,bin_high,count\n";
  for (const auto& e : report.entries) {
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      // Bin edges are multiples of 0.05; print them exactly to two decimals.
      const std::size_t lo = b * 5;
      const std::size_t hi = (b + 1) * 5;
      out << e.size << ',' << e.g << ',' << e.sort_rounds << ',' << lo / 100 << '.'
          << (lo % 100 < 10 ? "0" : "") << lo % 100 << ',' << hi / 100 << '.'
          << (hi % 100 < 10 ? "0" : "") << hi % 100 << ',' << e.histogram[b] << '\n';
    }
  }
  return out.str();
}

std::vector<ImprovementRow> improvement_report(const NormMatrix& m, const std::vector<std::size_t>& g_values,
                                               const GreedyParams& params) {
  for (std::size_t g : g_values) check_divides(GroupCount(g), m.rows(), m.cols());
  return improvement_report(std::vector<NormMatrix>{m}, g_values, params);
}

std::vector<ImprovementRow> improvement_report(const std::vector<NormMatrix>& layers,
                                               const std::vector<std::size_t>& g_values,
                                               const GreedyParams& params) {
  std::vector<ImprovementRow> rows;
  for (std::size_t gv : g_values) {
    const GroupCount g(gv);
    double kept = 0.0;
    double kept_plain = 0.0;
    double total = 0.0;
    ImprovementRow row;
    row.g = gv;
    for (const auto& m : layers) {
      if (!divides(g, m.rows(), m.cols())) continue;
      kept += solve_layer(m, g, params).objective;
      kept_plain += solve_layer(m, g, GreedyParams{0}).objective;
      total += m.total();
      ++row.layers_used;
    }
    row.ratio = total > 0.0 ? kept / total : 1.0;
    row.plain_ratio = total > 0.0 ? kept_plain / total : 1.0;
    row.improvement = row.ratio - row.plain_ratio;
    rows.push_back(row);
  }
  return rows;
}

AdversarialResult find_adversarial_instance(std::size_t channels, GroupCount g, std::size_t trials,
                                            std::uint64_t seed, const GreedyParams& params,
                                            double oracle_cap) {
  check_divides(g, channels, channels);
  // Fail fast on instances the oracle cannot handle.
  if (oracle_evaluation_count(channels, channels, g) > oracle_cap) {
    brute_force_oracle(NormMatrix::zeros(channels, channels), g, oracle_cap);
  }
  const ValueDistribution dist = ValueDistribution::uniform(0.5, 1.5);
  AdversarialResult result;
  for (std::size_t t = 0; t < trials; ++t) {
    const double boost = (t % 2 == 1) ? 10.0 : 1.0;
    PlantedInstance inst = make_planted(channels, g, dist, derive_seed(seed, t), boost);
    PruneSolution greedy = solve_layer(inst.matrix, g, params);
    result.trials_used = t + 1;
    if (greedy.recovery_ratio >= 1.0) continue;
    PruneSolution oracle = brute_force_oracle(inst.matrix, g, oracle_cap);
    if (oracle.recovery_ratio >= 1.0 && greedy.objective < oracle.objective) {
      result.found = true;
      result.instance = std::move(inst);
      result.greedy = std::move(greedy);
      result.oracle = std::move(oracle);
      return result;
    }
  }
  return result;
}

}  // namespace gprune::bench
