#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gprune/bench.hpp"
#include "gprune/config_search.hpp"
#include "gprune/equivalence.hpp"
#include "gprune/error.hpp"
#include "gprune/io.hpp"
#include "gprune/layer_pruner.hpp"
#include "gprune/parallel.hpp"
#include "gprune/random.hpp"

namespace gprune::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Common {
  std::size_t threads = 0;
  bool timing = false;
};

struct LayerArgs {
  std::string manifest;
  std::string layer;
  std::size_t groups = 1;
  std::size_t ns = 10;
  std::string out;
};

struct SearchArgs {
  std::string manifest;
  std::uint64_t max_params = 0;
  std::uint64_t max_ops = 0;
  std::size_t ns = 10;
  std::string direction = "densify";
  bool normalized = false;
  std::string out;
};

struct OracleArgs {
  LayerArgs layer;
  bool config = false;
  double cap = 0.0;
  std::uint64_t max_params = 0;
  std::uint64_t max_ops = 0;
};

struct SweepArgs {
  std::size_t samples = 10000;
  std::vector<std::size_t> sizes{16};
  std::vector<std::size_t> groups{4};
  std::vector<std::size_t> ns{0, 1, 2, 5, 10};
  std::uint64_t seed = 0;
  double lo = 0.5;
  double hi = 1.5;
  std::string out;
  std::string json_out;
};

struct AdversarialArgs {
  std::size_t size = 4;
  std::size_t groups = 2;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::size_t ns = 10;
  double cap = kDefaultOracleCap;
  std::string out;
};

struct ImprovementArgs {
  std::string manifest;
  std::vector<std::size_t> groups{2, 4, 8};
  std::size_t ns = 10;
  std::string out;
};

struct ExportArgs {
  LayerArgs layer;
  std::string format = "grouped";
  std::string out_dir;
};

struct VerifyArgs {
  LayerArgs layer;
  std::size_t cases = 100;
  double tol = 1e-5;
  std::uint64_t seed = 0;
};

std::string to_string_exact(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

io::RunReport base_report(const std::string& command) {
  io::RunReport r;
  r.tool_version = io::tool_version();
  r.command = command;
  r.generator = std::string(Rng::kName);
  return r;
}

void finish(io::RunReport& r, const Common& common, Clock::time_point start, const std::string& out_path,
            std::ostream& out, std::ostream& err) {
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (common.timing) r.timing_seconds = seconds;
  emit(out_path, io::report_to_json(r), out);
  err << "elapsed " << seconds << " s\n";
}

io::LayerResult layer_result(const std::string& name, const std::string& solver, const PruneSolution& s) {
  return {name, solver, s.g.value(), s.objective, s.cost, s.recovery_ratio, s.perms};
}

std::vector<SearchLayer> search_layers(const io::LoadedModel& model) {
  std::vector<SearchLayer> layers;
  for (const auto& l : model.layers) layers.push_back({l.spec, l.norms});
  return layers;
}

BudgetConstraint budget_from(const CLI::App& sub, std::uint64_t max_params, std::uint64_t max_ops) {
  BudgetConstraint b;
  if (sub.count("--max-params")) b.max_params = max_params;
  if (sub.count("--max-ops")) b.max_ops = max_ops;
  return b;
}

std::vector<std::pair<std::string, std::string>> budget_params(const BudgetConstraint& b) {
  return {{"max_params", b.max_params ? std::to_string(*b.max_params) : "unbounded"},
          {"max_ops", b.max_ops ? std::to_string(*b.max_ops) : "unbounded"}};
}

void config_report(io::RunReport& r, const io::LoadedModel& model, const GroupConfig& cfg, std::size_t ns) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    const PruneSolution s = solve_layer(layer.norms, cfg.groups[l], GreedyParams{ns});
    r.layers.push_back(layer_result(layer.spec.name, "greedy", s));
  }
  r.totals = io::ConfigTotals{cfg.total_params, cfg.total_ops, cfg.total_cost, "conv-only"};
}

void config_summary(const GroupConfig& cfg, const io::LoadedModel& model, std::ostream& err) {
  err << "groups:";
  for (std::size_t l = 0; l < cfg.groups.size(); ++l) {
    err << ' ' << model.layers[l].spec.name << '=' << cfg.groups[l].value();
  }
  err << "\nconv-only totals: params " << cfg.total_params << ", ops " << cfg.total_ops
      << ", cost " << cfg.total_cost << '\n';
}

// --- subcommands -----------------------------------------------------------

int run_prune_layer(const LayerArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto model = io::load_manifest(a.manifest);
  const auto& layer = model.find(a.layer);
  const GroupCount g(a.groups);
  const PruneSolution s = solve_layer(layer.norms, g, GreedyParams{a.ns});

  auto r = base_report("prune-layer");
  r.parameters = {{"manifest", a.manifest}, {"layer", a.layer}, {"groups", std::to_string(a.groups)},
                  {"ns", std::to_string(a.ns)}};
  r.layers.push_back(layer_result(a.layer, "greedy", s));
  r.totals = io::ConfigTotals{num_params(layer.spec, g), num_ops(layer.spec, g), s.cost, "conv-only"};
  err << a.layer << ": G=" << a.groups << " objective " << s.objective << " cost " << s.cost
      << " recovery ratio " << s.recovery_ratio << '\n';
  finish(r, c, start, a.out, out, err);
  return kExitOk;
}

int run_search(const SearchArgs& a, const CLI::App& sub, const Common& c, std::ostream& out,
               std::ostream& err) {
  const auto start = Clock::now();
  SearchOptions opts;
  opts.greedy.sort_rounds = a.ns;
  opts.normalized_cost = a.normalized;
  opts.threads = c.threads;
  if (a.direction == "densify") {
    opts.direction = SearchDirection::kDensify;
  } else if (a.direction == "sparsify") {
    opts.direction = SearchDirection::kSparsify;
  } else {
    throw ValidationError("--direction must be densify or sparsify");
  }
  const auto model = io::load_manifest(a.manifest);
  const BudgetConstraint budget = budget_from(sub, a.max_params, a.max_ops);
  const GroupConfig cfg = local_search(search_layers(model), budget, opts);

  auto r = base_report("search");
  r.parameters = {{"manifest", a.manifest}, {"ns", std::to_string(a.ns)}, {"direction", a.direction},
                  {"normalized_cost", a.normalized ? "true" : "false"}};
  for (auto& p : budget_params(budget)) r.parameters.push_back(p);
  config_report(r, model, cfg, a.ns);
  config_summary(cfg, model, err);
  finish(r, c, start, a.out, out, err);
  return kExitOk;
}

int run_oracle(const OracleArgs& a, const CLI::App& sub, const Common& c, std::ostream& out,
               std::ostream& err) {
  const auto start = Clock::now();
  const auto model = io::load_manifest(a.layer.manifest);
  if (a.config) {
    const double cap = sub.count("--cap") ? a.cap : kDefaultConfigOracleCap;
    const BudgetConstraint budget = budget_from(sub, a.max_params, a.max_ops);
    const GroupConfig cfg = exhaustive_config_oracle(search_layers(model), budget,
                                                     GreedyParams{a.layer.ns}, cap, c.threads);
    auto r = base_report("oracle --config");
    r.parameters = {{"manifest", a.layer.manifest}, {"ns", std::to_string(a.layer.ns)},
                    {"cap", to_string_exact(cap)}};
    for (auto& p : budget_params(budget)) r.parameters.push_back(p);
    config_report(r, model, cfg, a.layer.ns);
    config_summary(cfg, model, err);
    finish(r, c, start, a.layer.out, out, err);
    return kExitOk;
  }

  if (a.layer.layer.empty()) throw ValidationError("oracle needs --layer (or --config)");
  const double cap = sub.count("--cap") ? a.cap : kDefaultOracleCap;
  const auto& layer = model.find(a.layer.layer);
  const GroupCount g(a.layer.groups);
  const PruneSolution s = brute_force_oracle(layer.norms, g, cap);
  auto r = base_report("oracle");
  r.parameters = {{"manifest", a.layer.manifest}, {"layer", a.layer.layer},
                  {"groups", std::to_string(a.layer.groups)}, {"cap", to_string_exact(cap)}};
  r.layers.push_back(layer_result(a.layer.layer, "oracle", s));
  r.totals = io::ConfigTotals{num_params(layer.spec, g), num_ops(layer.spec, g), s.cost, "conv-only"};
  err << a.layer.layer << ": optimal objective " << s.objective << " cost " << s.cost
      << " recovery ratio " << s.recovery_ratio << '\n';
  finish(r, c, start, a.layer.out, out, err);
  return kExitOk;
}

int run_sweep(const SweepArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  bench::SweepConfig cfg;
  cfg.samples = a.samples;
  cfg.sizes = a.sizes;
  cfg.g_values = a.groups;
  cfg.sort_rounds = a.ns;
  cfg.base_seed = a.seed;
  cfg.dist = bench::ValueDistribution::uniform(a.lo, a.hi);
  cfg.threads = c.threads;
  if (!(a.lo > 0.0) || a.hi < a.lo) throw ValidationError("--low/--high must satisfy 0 < low <= high");
  const bench::SweepReport report = bench::recovery_sweep(cfg);

  emit(a.out, bench::sweep_histogram_csv(report), out);
  if (!a.json_out.empty()) {
    auto r = base_report("bench sweep");
    r.parameters = {{"samples", std::to_string(a.samples)}, {"size", join(a.sizes)},
                    {"groups", join(a.groups)}, {"ns", join(a.ns)},
                    {"distribution", report.distribution}};
    r.seeds = {a.seed};
    r.sweep = report.entries;
    if (c.timing) r.timing_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    io::write_report(r, a.json_out);
  }
  for (const auto& e : report.entries) {
    err << "size " << e.size << " G=" << e.g << " n_s=" << e.sort_rounds << ": mean "
        << e.mean_ratio << ", fully recovered " << e.fraction_fully_recovered() << ", >=0.9 "
        << e.fraction_above_90() << '\n';
  }
  err << "elapsed " << std::chrono::duration<double>(Clock::now() - start).count() << " s\n";
  return kExitOk;
}

int run_adversarial(const AdversarialArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto res = bench::find_adversarial_instance(a.size, GroupCount(a.groups), a.trials, a.seed,
                                                    GreedyParams{a.ns}, a.cap);
  auto r = base_report("bench adversarial");
  r.parameters = {{"size", std::to_string(a.size)}, {"groups", std::to_string(a.groups)},
                  {"trials", std::to_string(a.trials)}, {"ns", std::to_string(a.ns)},
                  {"cap", to_string_exact(a.cap)}};
  r.seeds = {a.seed};
  io::AdversarialRecord rec;
  rec.found = res.found;
  rec.trials_used = res.trials_used;
  rec.size = a.size;
  rec.g = a.groups;
  if (res.found) {
    rec.matrix = res.instance->matrix;
    rec.truth = res.instance->truth;
    r.seeds.push_back(res.instance->seed);
    r.layers.push_back(layer_result("greedy", "greedy", *res.greedy));
    r.layers.push_back(layer_result("oracle", "oracle", *res.oracle));
    err << "adversarial instance found after " << res.trials_used << " trials: greedy ratio "
        << res.greedy->recovery_ratio << ", oracle ratio " << res.oracle->recovery_ratio << '\n';
  } else {
    err << "no adversarial instance found in " << res.trials_used << " trials\n";
  }
  r.adversarial = std::move(rec);
  finish(r, c, start, a.out, out, err);
  return kExitOk;
}

int run_improvement(const ImprovementArgs& a, const Common&, std::ostream& out, std::ostream& err) {
  const auto model = io::load_manifest(a.manifest);
  std::vector<NormMatrix> mats;
  for (const auto& l : model.layers) mats.push_back(l.norms);
  const auto rows = bench::improvement_report(mats, a.groups, GreedyParams{a.ns});
  std::ostringstream csv;
  csv.precision(17);
  csv << "# n_s=" << a.ns << " weighting=layer_total_norm\n";
  csv << "g,ratio,plain_ratio,improvement,layers_used\n";
  for (const auto& row : rows) {
    csv << row.g << ',' << row.ratio << ',' << row.plain_ratio << ',' << row.improvement << ','
        << row.layers_used << '\n';
    err << "G=" << row.g << ": ratio " << row.ratio << " vs plain " << row.plain_ratio << " (+"
        << row.improvement << ") over " << row.layers_used << " layers\n";
  }
  emit(a.out, csv.str(), out);
  return kExitOk;
}

const WeightTensor& require_weights(const io::LoadedLayer& layer) {
  if (!layer.weights) {
    throw ValidationError("layer '" + layer.spec.name + "' has no data_file; raw weights are required");
  }
  return *layer.weights;
}

int run_export(const ExportArgs& a, const Common&, std::ostream&, std::ostream& err) {
  if (a.out_dir.empty()) throw ValidationError("export needs --out-dir");
  const auto model = io::load_manifest(a.layer.manifest);
  const auto& layer = model.find(a.layer.layer);
  const WeightTensor& w = require_weights(layer);
  const GroupCount g(a.layer.groups);
  const PermutationPair perms = greedy_permutation(layer.norms, g, GreedyParams{a.layer.ns});
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);

  nlohmann::json doc;
  doc["tool_version"] = io::tool_version();
  doc["layer"] = a.layer.layer;
  doc["g"] = a.layer.groups;
  doc["ns"] = a.layer.ns;
  doc["index_base"] = 0;
  doc["shape"] = {w.c_out(), w.c_in(), w.k_h(), w.k_w()};
  doc["out_perm"] = std::vector<std::size_t>(perms.out.indices().begin(), perms.out.indices().end());
  doc["in_perm"] = std::vector<std::size_t>(perms.in.indices().begin(), perms.in.indices().end());

  if (a.format == "grouped") {
    const GroupedLayerExport e = export_grouped(w, perms, g);
    doc["format"] = "grouped";
    doc["blocks"] = nlohmann::json::array();
    for (std::size_t k = 0; k < e.blocks.size(); ++k) {
      const std::string name = "block_" + std::to_string(k) + ".gpt1";
      io::write_weight_tensor(dir / name, e.blocks[k]);
      doc["blocks"].push_back(name);
    }
  } else if (a.format == "sparse") {
    const SparseLayerExport s = export_sparse(w, prune_mask(w.c_out(), w.c_in(), g, perms));
    doc["format"] = "sparse";
    doc["row_offsets"] = s.row_offsets;
    doc["column_indices"] = s.column_indices;
    doc["values_file"] = "kernels.gpt1";
    io::write_tensor(dir / "kernels.gpt1",
                     {static_cast<std::uint32_t>(s.nnz()), static_cast<std::uint32_t>(w.k_h()),
                      static_cast<std::uint32_t>(w.k_w())},
                     s.kernel_values);
  } else {
    throw ValidationError("--format must be grouped or sparse");
  }
  io::write_text(dir / "export.json", doc.dump(2) + "\n");
  err << "wrote " << a.format << " export of " << a.layer.layer << " (G=" << a.layer.groups
      << ") to " << dir.string() << '\n';
  return kExitOk;
}

int run_verify(const VerifyArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const auto model = io::load_manifest(a.layer.manifest);
  const auto& layer = model.find(a.layer.layer);
  const WeightTensor& w = require_weights(layer);
  const GroupCount g(a.layer.groups);
  const PermutationPair perms = greedy_permutation(layer.norms, g, GreedyParams{a.layer.ns});
  const MaskPattern mask = prune_mask(w.c_out(), w.c_in(), g, perms);
  const GroupedLayerExport grouped = export_grouped(w, perms, g);
  const bool one_by_one = w.k_h() == 1 && w.k_w() == 1;
  const SparseLayerExport sparse = export_sparse(w, mask);
  const bool reassembly_exact = reassemble(grouped) == apply_mask(w, mask);

  const std::size_t h = std::min<std::size_t>(layer.spec.h_out, 8);
  const std::size_t wd = std::min<std::size_t>(layer.spec.w_out, 8);
  const std::size_t padding = std::max(w.k_h(), w.k_w()) / 2;
  std::vector<double> grouped_err(a.cases, 0.0);
  std::vector<double> sparse_err(a.cases, 0.0);
  parallel_for(a.cases, c.threads, [&](std::size_t i) {
    Rng rng(derive_seed(a.seed, i));
    std::vector<double> data(w.c_in() * h * wd);
    for (double& v : data) v = rng.uniform(-1.0, 1.0);
    const FeatureMap x(w.c_in(), h, wd, std::move(data));
    const FeatureMap ref = masked_forward(x, w, mask, padding);
    grouped_err[i] = relative_error(grouped_forward(x, grouped, padding), ref);
    if (one_by_one) sparse_err[i] = relative_error(sparse_forward_1x1(x, sparse), ref);
  });
  double max_grouped = 0.0;
  double max_sparse = 0.0;
  for (std::size_t i = 0; i < a.cases; ++i) {
    max_grouped = std::max(max_grouped, grouped_err[i]);
    max_sparse = std::max(max_sparse, sparse_err[i]);
  }
  const bool pass = reassembly_exact && max_grouped <= a.tol && max_sparse <= a.tol &&
                    mask.is_regular(g);

  nlohmann::json doc{{"command", "verify"},
                     {"tool_version", io::tool_version()},
                     {"layer", a.layer.layer},
                     {"g", a.layer.groups},
                     {"ns", a.layer.ns},
                     {"cases", a.cases},
                     {"seed", a.seed},
                     {"tol", a.tol},
                     {"max_rel_error_grouped", max_grouped},
                     {"max_rel_error_sparse", one_by_one ? nlohmann::json(max_sparse) : nlohmann::json()},
                     {"reassembly_exact", reassembly_exact},
                     {"mask_regular", mask.is_regular(g)},
                     {"pass", pass}};
  emit(a.layer.out, doc.dump(2) + "\n", out);
  err << "verify " << a.layer.layer << " G=" << a.layer.groups << ": grouped max rel error "
      << max_grouped;
  if (one_by_one) err << ", sparse max rel error " << max_sparse;
  err << ", reassembly " << (reassembly_exact ? "exact" : "MISMATCH") << " -> "
      << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitValidation;
}

void add_layer_options(CLI::App* sub, LayerArgs& a, bool need_groups) {
  sub->add_option("--manifest", a.manifest, "model manifest (JSON)")->required();
  sub->add_option("--layer", a.layer, "layer name");
  auto* groups = sub->add_option("--groups", a.groups, "number of groups G")->check(CLI::PositiveNumber);
  if (need_groups) groups->required();
  sub->add_option("--ns", a.ns, "sorting rounds per block")->capture_default_str();
  sub->add_option("--out", a.out, "output file (default: standard output)");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gprune: prune convolution layers into group-convolution structure"};
  app.require_subcommand(1);
  Common common;
  common.threads = default_thread_count();
  app.add_option("--threads", common.threads, "worker threads (env GPRUNE_THREADS)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--timing", common.timing, "record wall-clock time in JSON reports");

  LayerArgs prune;
  auto* prune_cmd = app.add_subcommand("prune-layer", "prune one layer with the sorting heuristic");
  add_layer_options(prune_cmd, prune, true);
  prune_cmd->get_option("--layer")->required();

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "local search for per-layer group counts under a budget");
  search_cmd->add_option("--manifest", search.manifest, "model manifest (JSON)")->required();
  search_cmd->add_option("--max-params", search.max_params, "maximum total parameters");
  search_cmd->add_option("--max-ops", search.max_ops, "maximum total operations (FMA = 2)");
  search_cmd->add_option("--ns", search.ns, "sorting rounds per block")->capture_default_str();
  search_cmd->add_option("--direction", search.direction, "densify or sparsify")->capture_default_str();
  search_cmd->add_flag("--normalized-cost", search.normalized, "rank moves by cost / layer total norm");
  search_cmd->add_option("--out", search.out, "output file (default: standard output)");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact layer optimum, or exhaustive configuration search");
  add_layer_options(oracle_cmd, oracle.layer, false);
  oracle_cmd->add_flag("--config", oracle.config, "enumerate every group configuration instead");
  oracle_cmd->add_option("--cap", oracle.cap, "enumeration cap (default 1e8 layer, 1e6 config)");
  oracle_cmd->add_option("--max-params", oracle.max_params, "maximum total parameters (--config)");
  oracle_cmd->add_option("--max-ops", oracle.max_ops, "maximum total operations (--config)");

  auto* bench_cmd = app.add_subcommand("bench", "randomized evaluations");
  bench_cmd->require_subcommand(1);

  SweepArgs sweep;
  auto* sweep_cmd = bench_cmd->add_subcommand("sweep", "recovery-ratio sweep on planted instances");
  sweep_cmd->add_option("--samples", sweep.samples)->capture_default_str();
  sweep_cmd->add_option("--size", sweep.sizes, "channels per side")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--groups", sweep.groups)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--ns", sweep.ns)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed)->capture_default_str();
  sweep_cmd->add_option("--low", sweep.lo, "lower bound of in-block values")->capture_default_str();
  sweep_cmd->add_option("--high", sweep.hi, "upper bound of in-block values")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "histogram CSV (default: standard output)");
  sweep_cmd->add_option("--json", sweep.json_out, "also write the JSON report here");

  AdversarialArgs adv;
  auto* adv_cmd = bench_cmd->add_subcommand("adversarial", "search for an instance the heuristic misses");
  adv_cmd->add_option("--size", adv.size)->capture_default_str();
  adv_cmd->add_option("--groups", adv.groups)->capture_default_str();
  adv_cmd->add_option("--trials", adv.trials)->capture_default_str();
  adv_cmd->add_option("--seed", adv.seed)->capture_default_str();
  adv_cmd->add_option("--ns", adv.ns)->capture_default_str();
  adv_cmd->add_option("--cap", adv.cap, "oracle enumeration cap")->capture_default_str();
  adv_cmd->add_option("--out", adv.out, "output file (default: standard output)");

  ImprovementArgs imp;
  auto* imp_cmd = bench_cmd->add_subcommand("improvement", "recovery ratio against the unsorted baseline");
  imp_cmd->add_option("--manifest", imp.manifest)->required();
  imp_cmd->add_option("--groups", imp.groups)->delimiter(',')->capture_default_str();
  imp_cmd->add_option("--ns", imp.ns)->capture_default_str();
  imp_cmd->add_option("--out", imp.out, "CSV output (default: standard output)");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "write the pruned layer in grouped or sparse form");
  add_layer_options(export_cmd, exp.layer, true);
  export_cmd->get_option("--layer")->required();
  export_cmd->add_option("--format", exp.format, "grouped or sparse")->capture_default_str();
  export_cmd->add_option("--out-dir", exp.out_dir, "output directory")->required();

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "check masked, grouped and sparse forms agree");
  add_layer_options(verify_cmd, verify.layer, true);
  verify_cmd->get_option("--layer")->required();
  verify_cmd->add_option("--cases", verify.cases)->capture_default_str();
  verify_cmd->add_option("--tol", verify.tol)->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (prune_cmd->parsed()) return run_prune_layer(prune, common, out, err);
    if (search_cmd->parsed()) return run_search(search, *search_cmd, common, out, err);
    if (oracle_cmd->parsed()) return run_oracle(oracle, *oracle_cmd, common, out, err);
    if (sweep_cmd->parsed()) return run_sweep(sweep, common, out, err);
    if (adv_cmd->parsed()) return run_adversarial(adv, common, out, err);
    if (imp_cmd->parsed()) return run_improvement(imp, common, out, err);
    if (export_cmd->parsed()) return run_export(exp, common, out, err);
    if (verify_cmd->parsed()) return run_verify(verify, common, out, err);
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const OracleCapError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace gprune::cli
