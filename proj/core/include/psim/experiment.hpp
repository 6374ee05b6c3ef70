#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psim/analytics.hpp"
#include "psim/model.hpp"
#include "psim/workloads.hpp"

namespace psim {

/// Strategy x workload x resource count x seed sweep.
struct ExperimentMatrix {
  std::vector<StrategyId> strategies{StrategyId::Fifo, StrategyId::Pas, StrategyId::Eas};
  std::vector<DailyShape> workloads{DailyShape::Flat, DailyShape::Normal, DailyShape::Peaky};
  std::vector<int> resources{4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path output_dir;

  /// Throws std::invalid_argument on an empty axis or a resource count < 1.
  void validate() const;
};

struct CellSpec {
  StrategyId strategy = StrategyId::Fifo;
  DailyShape workload = DailyShape::Flat;
  int resources = 1;
  std::uint64_t seed = 1;

  /// e.g. "flat_fifo_r10_s1".
  std::string name() const;
};

/// Cells in workload, strategy, resources, seed order.
std::vector<CellSpec> enumerate_cells(const ExperimentMatrix& matrix);

/// Exact periodic scenario selected with the family-f workload.
struct FamilyRunParams {
  int proposition = 2;
  int m = 2;
  std::string delta = "10";
  std::string epsilon = "6";
  int b = 5;
  int periods = 0;  // 0 means b + 2
};

/// Config, daily curve and matrix as one resolved unit.
struct ResolvedConfig {
  SimConfig sim;
  DailyCurveParams curve;
  ExperimentMatrix matrix;
  FamilyRunParams family;
};

struct CellResult {
  CellSpec cell;
  MetricsSummary summary;
  Histogram histogram;
  std::vector<RequestRow> rows;  // kept only on request
  std::optional<std::string> error;
};

/// Runs one cell. Exceptions propagate.
CellResult run_cell(const CellSpec& cell, const SimConfig& base, const DailyCurveParams& curve, bool keep_rows);

struct ExperimentOptions {
  int workers = 1;
  bool write_files = true;
  bool write_cell_files = true;  // per-request and histogram files; needs write_files
  bool keep_rows = false;
  /// Called after each finished cell, from the worker thread that ran it.
  std::function<void(const CellResult&)> on_cell;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // enumeration order
  std::vector<MetricsSummary> summaries;
  std::vector<AggregateRow> aggregate;
  std::optional<std::string> first_failure;  // "<cell>: <message>"

  bool ok() const { return !first_failure.has_value(); }
};

/// Runs every cell, in parallel up to `options.workers`. With write_files,
/// writes cells/<cell>.csv, histograms/<cell>.csv, summary.csv and
/// aggregate.csv under matrix.output_dir, each headed by the config echo.
ExperimentResult run_experiment(const ResolvedConfig& config, const ExperimentOptions& options);

struct FamilyRunResult {
  StrategyId strategy = StrategyId::Fifo;
  MetricsSummary summary;
  int active_at_end = 0;
};

/// Runs the family-f scenario once per matrix strategy in exact arithmetic.
/// With write_files, writes cells/family-f_<strategy>.csv and summary.csv
/// under matrix.output_dir.
std::vector<FamilyRunResult> run_family_experiment(const ResolvedConfig& config, bool write_files);

/// $PSIM_OUT_DIR if set, else "psim-out".
std::filesystem::path default_output_dir();

/// Re-reads every cell CSV under `dir`/cells and rebuilds the summaries.
std::vector<MetricsSummary> summaries_from_directory(const std::filesystem::path& dir, double cutoff);

}  // namespace psim
