#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/fgla.hpp"
#include "fbpghi/scales.hpp"
#include "fbpghi/signals.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbpghi {

struct NamedSignal {
  std::string name;
  SignalSpec spec;
};

struct NamedFilterBank {
  std::string name;
  FilterBankSpec spec;
};

enum class MethodKind { fbpghi, fgla };

struct MethodSpec {
  MethodKind kind = MethodKind::fbpghi;
  double tol = 1e-7;     ///< fbpghi
  int iterations = 100;  ///< fgla
  double alpha = 0.99;   ///< fgla

  /// "fbpghi" or "fgla@<iterations>".
  std::string label() const;
};

/// Cells are the product signals x filterbanks x methods x seeds, in that order.
struct ExperimentConfig {
  std::vector<NamedSignal> signals;
  std::vector<NamedFilterBank> filterbanks;
  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir;  ///< empty: no artifacts
};

/// Config JSON with the keys signals, filterbanks, methods, seeds, output_dir.
///
///   signals:     "s1" | "s2" | "s3" | {name, kind, duration, sample_rate, seed, path}
///   filterbanks: "FB1".."FB5" | {name, preset, scale, bins, bw, fmin, fmax, decimation,
///                                sample_rate, edge_channels}
///   methods:     "fbpghi" | "fgla" | {method, tol, iterations, alpha}
///   seeds:       array of nonnegative integers (default [0])
///
/// Unknown keys, bad values and duplicate names throw DataError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CellResult {
  std::string signal;
  std::string filterbank;
  std::string method;
  std::uint64_t seed = 0;
  Index channels = 0;
  Index decimation = 0;
  Index length = 0;
  double redundancy = 0.0;
  std::optional<double> spectral_difference_db;
  std::vector<double> trace;  ///< fgla only
  std::string error_kind;     ///< empty on success
  std::string error;
  double runtime_ms = 0.0;  ///< kept out of the report, see timings_json
  RealGrid phase_difference;  ///< fbpghi only, empty otherwise

  bool ok() const noexcept { return error_kind.empty(); }
};

struct EvalReport {
  std::vector<CellResult> cells;
};

struct ExperimentOptions {
  std::function<void(const CellResult&)> progress;  ///< called after each cell
  bool keep_phase_maps = true;
};

/// Runs every cell; module errors are recorded in the cell and the run continues.
EvalReport run_experiment(const ExperimentConfig& config, const ExperimentOptions& options = {});

/// Deterministic serialization: no timings, fixed key order.
std::string report_json(const EvalReport& report);

/// Wall times per cell, written next to the report.
std::string timings_json(const EvalReport& report);

/// report.json, timings.json, summary.csv and per-cell phase maps (CSV and
/// PGM) or fgla traces (CSV) under `dir`.
void write_artifacts(const std::filesystem::path& dir, const EvalReport& report);

/// Phase map in (-1, 1] as 8-bit binary PGM: -1 -> 0, 1 -> 255, frames along x
/// and the highest channel on the top row.
std::string phase_map_pgm(const RealGrid& map);

std::string grid_csv(const RealGrid& grid);

struct CompareOptions {
  double tol = 1e-7;
  int iterations = 100;
  double alpha = 0.99;
  std::uint64_t seed = 0;
};

struct CompareResult {
  double fbpghi_db = 0.0;
  FglaTrace trace;
  /// First fgla iteration (1-based) whose spectral difference is at or below
  /// fbpghi_db; empty if never reached.
  std::optional<int> crossing;
};

/// FBPGHI against randomly initialized fGLA on the same magnitudes.
CompareResult compare_methods(const RealSignal& s, const FilterBankSpec& spec,
                              const CompareOptions& options = {});

/// iteration,fgla_db,fbpghi_db rows.
std::string compare_csv(const CompareResult& result);

}  // namespace fbpghi
