#include "psim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "psim/config_io.hpp"
#include "psim/engine.hpp"
#include "psim/prop_verifier.hpp"

namespace psim {

void ExperimentMatrix::validate() const {
  if (strategies.empty()) throw std::invalid_argument("experiment matrix: no strategies");
  if (workloads.empty()) throw std::invalid_argument("experiment matrix: no workloads");
  if (resources.empty()) throw std::invalid_argument("experiment matrix: no resource counts");
  if (seeds.empty()) throw std::invalid_argument("experiment matrix: no seeds");
  for (int r : resources) {
    if (r < 1) throw std::invalid_argument("experiment matrix: resource count " + std::to_string(r) + " < 1");
  }
}

std::string CellSpec::name() const {
  return std::string(to_string(workload)) + "_" + std::string(to_string(strategy)) + "_r" +
         std::to_string(resources) + "_s" + std::to_string(seed);
}

std::vector<CellSpec> enumerate_cells(const ExperimentMatrix& matrix) {
  matrix.validate();
  std::vector<CellSpec> out;
  for (auto w : matrix.workloads) {
    for (auto s : matrix.strategies) {
      for (int r : matrix.resources) {
        for (auto seed : matrix.seeds) out.push_back({s, w, r, seed});
      }
    }
  }
  return out;
}

CellResult run_cell(const CellSpec& cell, const SimConfig& base, const DailyCurveParams& curve, bool keep_rows) {
  SimConfig cfg = base;
  cfg.servers = cell.resources;
  cfg.rng_seed = cell.seed;
  const auto workload = generate_daily(cell.workload, curve, cell.seed);
  const auto trace = run_simulation<double>(cfg, workload, cell.strategy);
  auto rows = request_rows(trace, cell.strategy, cell.resources, cell.seed);

  CellResult out;
  out.cell = cell;
  out.summary = summarize(rows, std::string(to_string(cell.workload)), std::string(to_string(cell.strategy)),
                          cell.resources, cell.seed, cfg.patience_zero_cutoff);
  out.histogram = patience_distribution(rows).histogram;
  if (keep_rows) out.rows = std::move(rows);
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

ExperimentResult run_experiment(const ResolvedConfig& config, const ExperimentOptions& options) {
  config.sim.validate();
  const auto cells = enumerate_cells(config.matrix);
  const auto dir = config.matrix.output_dir.empty() ? default_output_dir() : config.matrix.output_dir;
  if (options.write_files) std::filesystem::create_directories(dir);
  if (options.write_files && options.write_cell_files) {
    std::filesystem::create_directories(dir / "cells");
    std::filesystem::create_directories(dir / "histograms");
  }

  ExperimentResult result;
  result.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& cell = cells[i];
      CellResult r;
      r.cell = cell;
      try {
        const bool cell_files = options.write_files && options.write_cell_files;
        r = run_cell(cell, config.sim, config.curve, options.keep_rows || cell_files);
        if (cell_files) {
          const auto echo = config_echo(config, &cell);
          write_file(dir / "cells" / (cell.name() + ".csv"),
                     [&](std::ostream& out) { write_request_csv(out, r.rows, echo); });
          write_file(dir / "histograms" / (cell.name() + ".csv"),
                     [&](std::ostream& out) { write_histogram_csv(out, r.histogram, echo); });
        }
        if (!options.keep_rows) r.rows = {};
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      if (options.on_cell) options.on_cell(r);
      result.cells[i] = std::move(r);
    }
  };

  const int n = std::clamp(options.workers, 1, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  for (const auto& c : result.cells) {
    if (c.error) {
      if (!result.first_failure) result.first_failure = c.cell.name() + ": " + *c.error;
      continue;
    }
    result.summaries.push_back(c.summary);
  }
  result.aggregate = aggregate_over_seeds(result.summaries);

  if (options.write_files) {
    const auto echo = config_echo(config);
    write_file(dir / "summary.csv", [&](std::ostream& out) { write_summary_csv(out, result.summaries, echo); });
    write_file(dir / "aggregate.csv", [&](std::ostream& out) { write_aggregate_csv(out, result.aggregate, echo); });
  }
  return result;
}

std::vector<FamilyRunResult> run_family_experiment(const ResolvedConfig& config, bool write_files) {
  const auto& f = config.family;
  if (f.periods < 0) throw std::invalid_argument("family.periods must be >= 0");
  const auto scenario =
      make_family_f_config(f.proposition, f.m, parse_rational(f.delta), parse_rational(f.epsilon), f.b,
                           f.periods == 0 ? std::nullopt : std::optional<int>(f.periods));
  validate_family_f(scenario);
  if (config.matrix.strategies.empty()) throw std::invalid_argument("experiment matrix: no strategies");
  const auto sim = family_f_sim_config(scenario);
  const auto workload = generate_family_f(scenario);
  const auto dir = config.matrix.output_dir.empty() ? default_output_dir() : config.matrix.output_dir;
  if (write_files) std::filesystem::create_directories(dir / "cells");

  std::vector<FamilyRunResult> out;
  std::vector<MetricsSummary> summaries;
  for (auto strategy : config.matrix.strategies) {
    const auto trace = run_simulation<Rational>(sim, workload, strategy);
    const auto rows = request_rows(trace, strategy, f.m, 0);
    FamilyRunResult r;
    r.strategy = strategy;
    r.summary = summarize(rows, "family-f", std::string(to_string(strategy)), f.m, 0, config.sim.patience_zero_cutoff);
    r.active_at_end = trace.active_at_end();
    summaries.push_back(r.summary);
    if (write_files) {
      const auto echo = config_echo(config) + "\nfamily-f strategy=" + std::string(to_string(strategy)) +
                        " active_at_end=" + std::to_string(r.active_at_end);
      write_file(dir / "cells" / ("family-f_" + std::string(to_string(strategy)) + ".csv"),
                 [&](std::ostream& o) { write_request_csv(o, rows, echo); });
    }
    out.push_back(std::move(r));
  }
  if (write_files) {
    const auto echo = config_echo(config);
    write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, summaries, echo); });
  }
  return out;
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("PSIM_OUT_DIR"); env && *env) return env;
  return "psim-out";
}

std::vector<MetricsSummary> summaries_from_directory(const std::filesystem::path& dir, double cutoff) {
  const auto cells = dir / "cells";
  if (!std::filesystem::is_directory(cells)) throw std::invalid_argument("no cells/ directory under " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(cells)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MetricsSummary> out;
  for (const auto& path : files) {
    std::ifstream in(path);
    const auto rows = read_request_csv(in);
    const auto stem = path.stem().string();
    const auto workload = stem.substr(0, stem.find('_'));
    if (rows.empty()) throw std::runtime_error("cell file " + path.string() + " has no rows");
    out.push_back(summarize(rows, workload, rows.front().strategy, rows.front().resources, rows.front().seed, cutoff));
  }
  return out;
}

}  // namespace psim
