#include "gprune/config_search.hpp"

#include <limits>
#include <numeric>
#include <sstream>

#include "gprune/error.hpp"
#include "gprune/parallel.hpp"

namespace gprune {

std::vector<GroupCount> group_candidates(std::size_t c_in, std::size_t c_out) {
  if (c_in == 0 || c_out == 0) throw ValidationError("channel counts must be positive");
  const std::size_t g = std::gcd(c_in, c_out);
  std::vector<GroupCount> out;
  for (std::size_t d = g; d >= 1; --d) {
    if (g % d == 0) out.emplace_back(d);
  }
  return out;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw ValidationError("budget arithmetic overflows 64 bits");
  }
  return a * b;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    throw ValidationError("budget arithmetic overflows 64 bits");
  }
  return a + b;
}

}  // namespace

std::uint64_t num_params(const LayerSpec& layer, GroupCount g) {
  layer.validate();
  check_divides(g, layer.c_out, layer.c_in);
  std::uint64_t n = checked_mul(layer.c_out, layer.c_in);
  n = checked_mul(n, checked_mul(layer.k_h, layer.k_w));
  return n / g.value();
}

std::uint64_t num_ops(const LayerSpec& layer, GroupCount g) {
  check_divides(g, layer.c_out, layer.c_in);
  std::uint64_t n = num_params(layer, GroupCount(1));
  n = checked_mul(n, checked_mul(layer.h_out, layer.w_out));
  return checked_mul(2, n) / g.value();
}

CostTable::CostTable(NormMatrix m, GreedyParams params)
    : m_(std::move(m)), params_(params), total_(m_.total()) {}

double CostTable::cost(GroupCount g) const {
  if (auto it = cache_.find(g.value()); it != cache_.end()) return it->second;
  const double c = g.value() == 1 ? 0.0 : solve_layer(m_, g, params_).cost;
  ++solves_;
  cache_.emplace(g.value(), c);
  return c;
}

double CostTable::normalized_cost(GroupCount g) const {
  return total_ > 0.0 ? cost(g) / total_ : 0.0;
}

std::map<std::size_t, double> cost_table(const NormMatrix& m, const std::vector<GroupCount>& candidates,
                                         const GreedyParams& params) {
  CostTable table(m, params);
  std::map<std::size_t, double> out;
  for (GroupCount g : candidates) out[g.value()] = table.cost(g);
  return out;
}

namespace {

void check_layers(const std::vector<SearchLayer>& layers) {
  for (const auto& l : layers) {
    l.spec.validate();
    if (l.norms.rows() != l.spec.c_out || l.norms.cols() != l.spec.c_in) {
      throw ValidationError("layer '" + l.spec.name + "': norm matrix is " +
                            std::to_string(l.norms.rows()) + "x" + std::to_string(l.norms.cols()) +
                            ", spec declares " + std::to_string(l.spec.c_out) + "x" +
                            std::to_string(l.spec.c_in));
    }
  }
}

std::vector<std::vector<GroupCount>> candidate_sets(const std::vector<SearchLayer>& layers) {
  std::vector<std::vector<GroupCount>> sets;
  sets.reserve(layers.size());
  for (const auto& l : layers) sets.push_back(group_candidates(l.spec.c_in, l.spec.c_out));
  return sets;
}

}  // namespace

std::vector<CostTable> build_cost_tables(const std::vector<SearchLayer>& layers,
                                         const GreedyParams& params, std::size_t threads) {
  check_layers(layers);
  std::vector<CostTable> tables;
  tables.reserve(layers.size());
  for (const auto& l : layers) tables.emplace_back(l.norms, params);

  // Populate every candidate up front; each worker touches only its own table.
  const auto sets = candidate_sets(layers);
  parallel_for(layers.size(), threads, [&](std::size_t i) {
    for (GroupCount g : sets[i]) tables[i].cost(g);
  });
  return tables;
}

GroupConfig make_config(const std::vector<SearchLayer>& layers,
                        const std::vector<CostTable>& tables,
                        std::vector<GroupCount> groups) {
  GroupConfig cfg;
  cfg.groups = std::move(groups);
  cfg.layer_costs.reserve(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const GroupCount g = cfg.groups[l];
    cfg.total_params = checked_add(cfg.total_params, num_params(layers[l].spec, g));
    cfg.total_ops = checked_add(cfg.total_ops, num_ops(layers[l].spec, g));
    const double c = tables[l].cost(g);
    cfg.layer_costs.push_back(c);
    cfg.total_cost += c;
  }
  return cfg;
}

namespace {

struct Totals {
  std::uint64_t params = 0;
  std::uint64_t ops = 0;
};

Totals totals_of(const std::vector<SearchLayer>& layers,
                 const std::vector<std::vector<GroupCount>>& sets,
                 const std::vector<std::size_t>& state) {
  Totals t;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const GroupCount g = sets[l][state[l]];
    t.params = checked_add(t.params, num_params(layers[l].spec, g));
    t.ops = checked_add(t.ops, num_ops(layers[l].spec, g));
  }
  return t;
}

std::vector<GroupCount> groups_of(const std::vector<std::vector<GroupCount>>& sets,
                                  const std::vector<std::size_t>& state) {
  std::vector<GroupCount> g;
  g.reserve(state.size());
  for (std::size_t l = 0; l < state.size(); ++l) g.push_back(sets[l][state[l]]);
  return g;
}

// Odometer step over candidate indices, last layer fastest.
bool advance(std::vector<std::size_t>& state, const std::vector<std::vector<GroupCount>>& sets) {
  for (std::size_t l = state.size(); l-- > 0;) {
    if (++state[l] < sets[l].size()) return true;
    state[l] = 0;
  }
  return false;
}

std::string describe(const Totals& t, const BudgetConstraint& b) {
  std::ostringstream msg;
  msg << "params " << t.params << " (max ";
  if (b.max_params) msg << *b.max_params; else msg << "unbounded";
  msg << "), ops " << t.ops << " (max ";
  if (b.max_ops) msg << *b.max_ops; else msg << "unbounded";
  msg << ")";
  return msg.str();
}

}  // namespace

GroupConfig local_search(const std::vector<SearchLayer>& layers, const BudgetConstraint& budget,
                         const SearchOptions& options) {
  const auto tables = build_cost_tables(layers, options.greedy, options.threads);
  const auto sets = candidate_sets(layers);
  const std::size_t n = layers.size();

  auto metric = [&](std::size_t l, std::size_t idx) {
    const GroupCount g = sets[l][idx];
    return options.normalized_cost ? tables[l].normalized_cost(g) : tables[l].cost(g);
  };

  std::vector<std::size_t> state(n, 0);
  std::size_t moves = 0;

  if (options.direction == SearchDirection::kDensify) {
    Totals t = totals_of(layers, sets, state);
    if (!budget.satisfied_by(t.params, t.ops)) {
      throw InfeasibleError("largest group counts already exceed the budget: " + describe(t, budget));
    }
    for (;;) {
      std::optional<std::size_t> best;
      double best_cost = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        if (state[l] + 1 >= sets[l].size()) continue;
        const double c = metric(l, state[l] + 1);
        if (!best || c < best_cost) {
          best = l;
          best_cost = c;
        }
      }
      if (!best) break;
      ++state[*best];
      t = totals_of(layers, sets, state);
      if (!budget.satisfied_by(t.params, t.ops)) {
        --state[*best];
        break;
      }
      ++moves;
    }
  } else {
    for (std::size_t l = 0; l < n; ++l) state[l] = sets[l].size() - 1;
    Totals t = totals_of(layers, sets, state);
    while (!budget.satisfied_by(t.params, t.ops)) {
      std::optional<std::size_t> best;
      double best_increase = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        if (state[l] == 0) continue;
        const double inc = metric(l, state[l] - 1) - metric(l, state[l]);
        if (!best || inc < best_increase) {
          best = l;
          best_increase = inc;
        }
      }
      if (!best) {
        throw InfeasibleError("largest group counts still exceed the budget: " + describe(t, budget));
      }
      --state[*best];
      ++moves;
      t = totals_of(layers, sets, state);
    }
  }

  GroupConfig cfg = make_config(layers, tables, groups_of(sets, state));
  cfg.moves = moves;
  return cfg;
}

GroupConfig exhaustive_config_oracle(const std::vector<SearchLayer>& layers,
                                     const BudgetConstraint& budget, const GreedyParams& params,
                                     double cap, std::size_t threads) {
  check_layers(layers);
  const auto sets = candidate_sets(layers);
  double combos = 1.0;
  for (const auto& s : sets) combos *= static_cast<double>(s.size());
  if (combos > cap) {
    std::ostringstream msg;
    msg << combos << " candidate combinations exceed the cap of " << cap;
    throw OracleCapError(msg.str());
  }
  const auto tables = build_cost_tables(layers, params, threads);
  const std::size_t n = layers.size();

  std::vector<std::size_t> state(n, 0);
  std::optional<std::vector<std::size_t>> best;
  double best_cost = 0.0;
  std::vector<std::size_t> best_values;
  for (;;) {
    const Totals t = totals_of(layers, sets, state);
    if (budget.satisfied_by(t.params, t.ops)) {
      double cost = 0.0;
      std::vector<std::size_t> values(n);
      for (std::size_t l = 0; l < n; ++l) {
        cost += tables[l].cost(sets[l][state[l]]);
        values[l] = sets[l][state[l]].value();
      }
      if (!best || cost < best_cost || (cost == best_cost && values < best_values)) {
        best = state;
        best_cost = cost;
        best_values = std::move(values);
      }
    }
    if (!advance(state, sets)) break;
  }
  if (!best) throw InfeasibleError("no candidate combination fits the budget");
  return make_config(layers, tables, groups_of(sets, *best));
}

}  // namespace gprune
