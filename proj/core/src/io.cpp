#include "gprune/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gprune/error.hpp"

#ifndef GPRUNE_VERSION_STRING
#define GPRUNE_VERSION_STRING "0.0.0"
#endif

namespace gprune::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tool_version() { return GPRUNE_VERSION_STRING; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(path.string() + ": cannot open file for writing");
  out << text;
  if (!out) throw ValidationError(path.string() + ": write failed");
}

// --- GPT1 tensors -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'G', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

RawTensor read_tensor(const fs::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError(path.string() + ": not a GPT1 tensor file (bad magic)");
  }
  RawTensor t;
  const std::uint32_t rank = get_u32(bytes, 4);
  if (bytes.size() < 8 + 4ull * rank) {
    throw ValidationError(path.string() + ": truncated header");
  }
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.dims.push_back(get_u32(bytes, 8 + 4 * i));
    count *= t.dims.back();
  }
  const std::size_t offset = 8 + 4ull * rank;
  if (bytes.size() != offset + 4 * count) {
    throw ValidationError(path.string() + ": expected " + std::to_string(count) +
                          " float32 values, file holds " +
                          std::to_string((bytes.size() - offset) / 4));
  }
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
    if (!std::isfinite(v)) {
      throw ValidationError(path.string() + ": non-finite value at flat index " + std::to_string(i));
    }
    t.values[i] = static_cast<double>(v);
  }
  return t;
}

void write_tensor(const fs::path& path, const std::vector<std::uint32_t>& dims,
                  const std::vector<double>& values) {
  std::size_t count = 1;
  for (auto d : dims) count *= d;
  if (count != values.size()) throw ValidationError("tensor dims do not match value count");
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_u32(out, d);
  for (double v : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  write_text(path, out);
}

void write_weight_tensor(const fs::path& path, const WeightTensor& w) {
  write_tensor(path,
               {static_cast<std::uint32_t>(w.c_out()), static_cast<std::uint32_t>(w.c_in()),
                static_cast<std::uint32_t>(w.k_h()), static_cast<std::uint32_t>(w.k_w())},
               std::vector<double>(w.data().begin(), w.data().end()));
}

// --- norm CSV ---------------------------------------------------------------

NormMatrix read_norm_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing CSV header");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  const std::size_t cols = split(line).size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols) {
      throw ValidationError(path.string() + ": row " + std::to_string(rows) + " has " +
                            std::to_string(cells.size()) + " columns, header has " +
                            std::to_string(cols));
    }
    for (const auto& cell : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || !std::isfinite(v) || v < 0.0) {
        throw ValidationError(path.string() + ": row " + std::to_string(rows) + ": invalid norm '" +
                              cell + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  return NormMatrix(rows, cols, std::move(values));
}

void write_norm_csv(const fs::path& path, const NormMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << 'c' << c;
  out << '\n';
  for (std::size_t f = 0; f < m.rows(); ++f) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(f, c);
    out << '\n';
  }
  write_text(path, out.str());
}

// --- manifest ---------------------------------------------------------------

const LoadedLayer& LoadedModel::find(const std::string& name) const {
  for (const auto& l : layers) {
    if (l.spec.name == name) return l;
  }
  throw ValidationError("no layer named '" + name + "' in manifest");
}

namespace {

std::size_t positive_field(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned() || j[key].get<std::uint64_t>() == 0) {
    throw ValidationError(where + "." + key + ": must be a positive integer");
  }
  return j[key].get<std::size_t>();
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
}

}  // namespace

LoadedModel load_manifest(const fs::path& path) {
  const std::string origin = path.string();
  const json doc = parse_json(read_text(path), origin);
  if (!doc.is_object()) throw ValidationError(origin + ": manifest must be a JSON object");
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw ValidationError(origin + ": format_version: missing or not an integer");
  }
  LoadedModel model;
  model.manifest.format_version = doc["format_version"].get<int>();
  if (model.manifest.format_version != kManifestFormatVersion) {
    throw ValidationError(origin + ": format_version: unsupported version " +
                          std::to_string(model.manifest.format_version));
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw ValidationError(origin + ": layers: missing or not an array");
  }

  const fs::path base = path.parent_path();
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
    const json& j = doc["layers"][i];
    const std::string where = origin + ": layers[" + std::to_string(i) + "]";
    if (!j.is_object()) throw ValidationError(where + ": must be an object");
    ManifestLayer ml;
    if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty()) {
      throw ValidationError(where + ".name: missing or empty");
    }
    ml.spec.name = j["name"].get<std::string>();
    if (!names.insert(ml.spec.name).second) {
      throw ValidationError(where + ".name: duplicate layer name '" + ml.spec.name + "'");
    }
    ml.spec.c_in = positive_field(j, where, "c_in");
    ml.spec.c_out = positive_field(j, where, "c_out");
    ml.spec.k_h = positive_field(j, where, "k_h");
    ml.spec.k_w = positive_field(j, where, "k_w");
    ml.spec.h_out = positive_field(j, where, "h_out");
    ml.spec.w_out = positive_field(j, where, "w_out");
    ml.dtype = j.value("dtype", std::string("float32"));
    if (ml.dtype != "float32") {
      throw ValidationError(where + ".dtype: only float32 is supported, got '" + ml.dtype + "'");
    }
    if (j.contains("data_file")) ml.data_file = j["data_file"].get<std::string>();
    if (j.contains("norm_file")) ml.norm_file = j["norm_file"].get<std::string>();
    if (!ml.data_file && !ml.norm_file) {
      throw ValidationError(where + ": needs data_file or norm_file");
    }

    LoadedLayer layer{ml.spec, std::nullopt, NormMatrix{}};
    if (ml.data_file) {
      const fs::path file = base / *ml.data_file;
      RawTensor raw = read_tensor(file);
      const std::vector<std::uint32_t> expected{
          static_cast<std::uint32_t>(ml.spec.c_out), static_cast<std::uint32_t>(ml.spec.c_in),
          static_cast<std::uint32_t>(ml.spec.k_h), static_cast<std::uint32_t>(ml.spec.k_w)};
      if (raw.dims != expected) {
        std::ostringstream msg;
        msg << where << ".data_file: dimension mismatch in " << file.string() << ": file has (";
        for (std::size_t d = 0; d < raw.dims.size(); ++d) msg << (d ? ", " : "") << raw.dims[d];
        msg << "), manifest declares (c_out, c_in, k_h, k_w) = (" << ml.spec.c_out << ", "
            << ml.spec.c_in << ", " << ml.spec.k_h << ", " << ml.spec.k_w << ")";
        throw ValidationError(msg.str());
      }
      layer.weights = WeightTensor(ml.spec.kernel_shape(), std::move(raw.values));
      layer.norms = kernel_norm_matrix(*layer.weights);
    }
    if (ml.norm_file) {
      const fs::path file = base / *ml.norm_file;
      NormMatrix norms = read_norm_csv(file);
      if (norms.rows() != ml.spec.c_out || norms.cols() != ml.spec.c_in) {
        throw ValidationError(where + ".norm_file: dimension mismatch in " + file.string() +
                              ": file is " + std::to_string(norms.rows()) + "x" +
                              std::to_string(norms.cols()) + ", manifest declares " +
                              std::to_string(ml.spec.c_out) + "x" + std::to_string(ml.spec.c_in));
      }
      layer.norms = std::move(norms);
    }
    model.manifest.layers.push_back(std::move(ml));
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void write_manifest(const fs::path& path, const ModelManifest& manifest) {
  json doc;
  doc["format_version"] = manifest.format_version;
  doc["layers"] = json::array();
  for (const auto& l : manifest.layers) {
    json j{{"name", l.spec.name}, {"c_in", l.spec.c_in},   {"c_out", l.spec.c_out},
           {"k_h", l.spec.k_h},   {"k_w", l.spec.k_w},     {"h_out", l.spec.h_out},
           {"w_out", l.spec.w_out}, {"dtype", l.dtype}};
    if (l.data_file) j["data_file"] = *l.data_file;
    if (l.norm_file) j["norm_file"] = *l.norm_file;
    doc["layers"].push_back(std::move(j));
  }
  write_text(path, doc.dump(2) + "\n");
}

// --- reports ----------------------------------------------------------------

namespace {

json perm_json(const Permutation& p) {
  return json(std::vector<std::size_t>(p.indices().begin(), p.indices().end()));
}

Permutation perm_from(const json& j, const std::string& field) {
  try {
    return Permutation(j.get<std::vector<std::size_t>>());
  } catch (const json::exception& e) {
    throw ValidationError("report: " + field + ": " + e.what());
  }
}

json matrix_json(const NormMatrix& m) {
  json rows = json::array();
  for (std::size_t f = 0; f < m.rows(); ++f) {
    rows.push_back(std::vector<double>(m.row(f).begin(), m.row(f).end()));
  }
  return rows;
}

NormMatrix matrix_from(const json& j) {
  std::vector<double> values;
  std::size_t cols = 0;
  for (std::size_t f = 0; f < j.size(); ++f) {
    auto row = j[f].get<std::vector<double>>();
    if (f == 0) cols = row.size();
    if (row.size() != cols) throw ValidationError("report: ragged matrix");
    values.insert(values.end(), row.begin(), row.end());
  }
  return NormMatrix(j.size(), cols, std::move(values));
}

json to_json(const RunReport& r) {
  json doc;
  doc["schema_version"] = r.schema_version;
  doc["tool_version"] = r.tool_version;
  doc["command"] = r.command;
  doc["index_base"] = 0;
  json params = json::array();
  for (const auto& [k, v] : r.parameters) params.push_back({k, v});
  doc["parameters"] = params;
  doc["seeds"] = r.seeds;
  doc["generator"] = r.generator;
  json layers = json::array();
  for (const auto& l : r.layers) {
    layers.push_back({{"name", l.name},
                      {"solver", l.solver},
                      {"g", l.g},
                      {"objective", l.objective},
                      {"cost", l.cost},
                      {"recovery_ratio", l.recovery_ratio},
                      {"out_perm", perm_json(l.perms.out)},
                      {"in_perm", perm_json(l.perms.in)}});
  }
  doc["layers"] = layers;
  if (r.totals) {
    doc["totals"] = {{"params", r.totals->params},
                     {"ops", r.totals->ops},
                     {"cost", r.totals->cost},
                     {"scope", r.totals->scope}};
  }
  json sweep = json::array();
  for (const auto& e : r.sweep) {
    sweep.push_back({{"size", e.size},
                     {"g", e.g},
                     {"n_s", e.sort_rounds},
                     {"samples", e.samples},
                     {"fully_recovered", e.fully_recovered},
                     {"above_90", e.above_90},
                     {"fraction_fully_recovered", e.fraction_fully_recovered()},
                     {"fraction_above_90", e.fraction_above_90()},
                     {"mean_ratio", e.mean_ratio},
                     {"histogram", e.histogram}});
  }
  doc["sweep"] = sweep;
  if (r.adversarial) {
    const auto& a = *r.adversarial;
    json adv{{"found", a.found}, {"trials_used", a.trials_used}, {"size", a.size}, {"g", a.g}};
    if (a.matrix) adv["matrix"] = matrix_json(*a.matrix);
    if (a.truth) adv["truth"] = {{"out_perm", perm_json(a.truth->out)}, {"in_perm", perm_json(a.truth->in)}};
    doc["adversarial"] = adv;
  }
  if (r.timing_seconds) doc["timing_seconds"] = *r.timing_seconds;
  return doc;
}

RunReport from_json(const json& doc) {
  RunReport r;
  try {
    r.schema_version = doc.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw ValidationError("report: schema_version: unsupported version " +
                            std::to_string(r.schema_version));
    }
    if (doc.at("index_base").get<int>() != 0) throw ValidationError("report: index_base must be 0");
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.command = doc.at("command").get<std::string>();
    for (const auto& p : doc.at("parameters")) {
      r.parameters.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
    r.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    r.generator = doc.at("generator").get<std::string>();
    for (const auto& j : doc.at("layers")) {
      LayerResult l;
      l.name = j.at("name").get<std::string>();
      l.solver = j.at("solver").get<std::string>();
      l.g = j.at("g").get<std::size_t>();
      l.objective = j.at("objective").get<double>();
      l.cost = j.at("cost").get<double>();
      l.recovery_ratio = j.at("recovery_ratio").get<double>();
      l.perms = {perm_from(j.at("out_perm"), "out_perm"), perm_from(j.at("in_perm"), "in_perm")};
      r.layers.push_back(std::move(l));
    }
    if (doc.contains("totals")) {
      const auto& t = doc["totals"];
      r.totals = ConfigTotals{t.at("params").get<std::uint64_t>(), t.at("ops").get<std::uint64_t>(),
                              t.at("cost").get<double>(), t.at("scope").get<std::string>()};
    }
    for (const auto& j : doc.at("sweep")) {
      bench::SweepEntry e;
      e.size = j.at("size").get<std::size_t>();
      e.g = j.at("g").get<std::size_t>();
      e.sort_rounds = j.at("n_s").get<std::size_t>();
      e.samples = j.at("samples").get<std::size_t>();
      e.fully_recovered = j.at("fully_recovered").get<std::size_t>();
      e.above_90 = j.at("above_90").get<std::size_t>();
      e.mean_ratio = j.at("mean_ratio").get<double>();
      e.histogram = j.at("histogram").get<std::array<std::size_t, bench::kHistogramBins>>();
      r.sweep.push_back(e);
    }
    if (doc.contains("adversarial")) {
      const auto& j = doc["adversarial"];
      AdversarialRecord a;
      a.found = j.at("found").get<bool>();
      a.trials_used = j.at("trials_used").get<std::size_t>();
      a.size = j.at("size").get<std::size_t>();
      a.g = j.at("g").get<std::size_t>();
      if (j.contains("matrix")) a.matrix = matrix_from(j["matrix"]);
      if (j.contains("truth")) {
        a.truth = PermutationPair{perm_from(j["truth"].at("out_perm"), "truth.out_perm"),
                                  perm_from(j["truth"].at("in_perm"), "truth.in_perm")};
      }
      r.adversarial = std::move(a);
    }
    if (doc.contains("timing_seconds")) r.timing_seconds = doc["timing_seconds"].get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: schema violation: ") + e.what());
  }
  return r;
}

}  // namespace

std::string report_to_json(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

RunReport report_from_json(const std::string& text) {
  return from_json(parse_json(text, "report"));
}

void write_report(const RunReport& report, const fs::path& path) {
  write_text(path, report_to_json(report));
}

RunReport read_report(const fs::path& path) {
  const json doc = parse_json(read_text(path), path.string());
  return from_json(doc);
}

}  // namespace gprune::io
