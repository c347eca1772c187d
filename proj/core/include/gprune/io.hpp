#pragma once

// File formats. All channel indices written by this module are 0-based.
//
// Tensor files ("GPT1"): 4-byte magic "GPT1", u32 rank, rank x u32 dims, then
// the values as IEEE-754 binary32, row-major. Every integer and float is
// little-endian. Weight tensors are rank 4 in (c_out, c_in, k_h, k_w) order.
//
// Norm CSV: one header line (column names, ignored apart from their count),
// then c_out lines of c_in comma-separated non-negative numbers.
//
// Manifest JSON:
//   {"format_version": 1,
//    "layers": [{"name": "conv1", "c_in": 64, "c_out": 64, "k_h": 3, "k_w": 3,
//                "h_out": 32, "w_out": 32, "dtype": "float32",
//                "data_file": "conv1.gpt1", "norm_file": "conv1.csv"}]}
// Relative file paths resolve against the manifest's directory. Each layer
// needs data_file or norm_file; when both are given the norms come from
// norm_file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gprune/bench.hpp"
#include "gprune/layer.hpp"
#include "gprune/permutation.hpp"
#include "gprune/tensor.hpp"

namespace gprune::io {

inline constexpr int kManifestFormatVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

std::string tool_version();

struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

RawTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const std::vector<std::uint32_t>& dims,
                  const std::vector<double>& values);
void write_weight_tensor(const std::filesystem::path& path, const WeightTensor& w);

NormMatrix read_norm_csv(const std::filesystem::path& path);
void write_norm_csv(const std::filesystem::path& path, const NormMatrix& m);

struct ManifestLayer {
  LayerSpec spec;
  std::string dtype = "float32";
  std::optional<std::string> data_file;
  std::optional<std::string> norm_file;
};

struct ModelManifest {
  int format_version = kManifestFormatVersion;
  std::vector<ManifestLayer> layers;
};

struct LoadedLayer {
  LayerSpec spec;
  std::optional<WeightTensor> weights;
  NormMatrix norms;
};

struct LoadedModel {
  ModelManifest manifest;
  std::vector<LoadedLayer> layers;

  /// Throws ValidationError if no layer has this name.
  const LoadedLayer& find(const std::string& name) const;
};

/// Parses, validates and loads every referenced tensor or norm file.
LoadedModel load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const ModelManifest& manifest);

struct LayerResult {
  std::string name;
  std::string solver;  ///< "greedy" or "oracle"
  std::size_t g = 1;
  double objective = 0.0;
  double cost = 0.0;
  double recovery_ratio = 1.0;
  PermutationPair perms;
  friend bool operator==(const LayerResult&, const LayerResult&) = default;
};

struct ConfigTotals {
  std::uint64_t params = 0;
  std::uint64_t ops = 0;
  double cost = 0.0;
  std::string scope = "conv-only";
  friend bool operator==(const ConfigTotals&, const ConfigTotals&) = default;
};

struct AdversarialRecord {
  bool found = false;
  std::size_t trials_used = 0;
  std::size_t size = 0;
  std::size_t g = 0;
  std::optional<NormMatrix> matrix;
  std::optional<PermutationPair> truth;
  friend bool operator==(const AdversarialRecord&, const AdversarialRecord&) = default;
};

/// Self-describing result of one CLI run. `command` and `parameters` are
/// enough to regenerate it; wall-clock timing is only present when requested.
struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string tool_version;
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::uint64_t> seeds;
  std::string generator;
  std::vector<LayerResult> layers;
  std::optional<ConfigTotals> totals;
  std::vector<bench::SweepEntry> sweep;
  std::optional<AdversarialRecord> adversarial;
  std::optional<double> timing_seconds;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// JSON text of a report; deterministic (keys sorted, shortest round-trip numbers).
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace gprune::io
