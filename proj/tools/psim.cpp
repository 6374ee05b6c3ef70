// psim: run scheduling experiments, verify the family F scenarios, and
// re-aggregate per-request CSV output.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psim/analytics.hpp"
#include "psim/config_io.hpp"
#include "psim/experiment.hpp"
#include "psim/prop_verifier.hpp"

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string config_path;
  std::vector<std::string> strategies;
  std::vector<std::string> workloads;
  std::vector<int> resources;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int workers = 1;
  bool summary_only = false;
  bool print_config = false;
  bool quiet = false;
};

struct VerifyArgs {
  int proposition = 2;
  int m = 2;
  std::string delta = "10";
  std::optional<std::string> epsilon;
  int b = 5;
  std::optional<int> periods;
  std::string h0 = "1";
  std::string critical = "1/2";
  std::vector<std::string> strategies{"fifo", "eas"};
  int instances = 200;
  std::uint64_t seed = 1;
  int max_tasks = 8;
  std::string out;
};

struct ReportArgs {
  std::string dir;
  std::string dest;
  double cutoff = 0.5;
};

int run_simulate(const SimulateArgs& a) {
  psim::ResolvedConfig cfg;
  if (!a.config_path.empty()) cfg = psim::load_config(a.config_path);
  if (!a.strategies.empty()) {
    cfg.matrix.strategies.clear();
    for (const auto& s : a.strategies) cfg.matrix.strategies.push_back(psim::parse_strategy(s));
  }
  const bool family = std::find(a.workloads.begin(), a.workloads.end(), "family-f") != a.workloads.end();
  if (family && a.workloads.size() > 1) throw std::invalid_argument("--workload family-f cannot be combined");
  if (!a.workloads.empty() && !family) {
    cfg.matrix.workloads.clear();
    for (const auto& w : a.workloads) cfg.matrix.workloads.push_back(psim::parse_daily_shape(w));
  }
  if (!a.resources.empty()) cfg.matrix.resources = a.resources;
  if (!a.seeds.empty()) cfg.matrix.seeds = a.seeds;
  if (!a.out.empty()) cfg.matrix.output_dir = a.out;
  if (cfg.matrix.output_dir.empty()) cfg.matrix.output_dir = psim::default_output_dir();
  cfg.sim.validate();
  cfg.matrix.validate();

  if (a.print_config) {
    std::cout << psim::config_to_json(cfg) << '\n';
    return 0;
  }

  if (family) {
    const auto results = psim::run_family_experiment(cfg, !a.summary_only);
    for (const auto& r : results) {
      std::cout << psim::to_string(r.strategy) << ": requests=" << r.summary.requests
                << " active_at_end=" << r.active_at_end << '\n';
    }
    if (!a.summary_only) std::cout << "wrote family-f cells to " << cfg.matrix.output_dir.string() << '\n';
    return 0;
  }

  psim::ExperimentOptions opts;
  opts.workers = a.workers;
  opts.write_cell_files = !a.summary_only;
  std::mutex log_mutex;
  const auto total = psim::enumerate_cells(cfg.matrix).size();
  std::size_t done = 0;
  opts.on_cell = [&](const psim::CellResult& r) {
    std::lock_guard lock(log_mutex);
    ++done;
    if (a.quiet && !r.error) return;
    std::cerr << '[' << done << '/' << total << "] " << r.cell.name();
    if (r.error) {
      std::cerr << " FAILED: " << *r.error << '\n';
    } else {
      std::cerr << " requests=" << r.summary.requests << '\n';
    }
  };

  const auto result = psim::run_experiment(cfg, opts);
  if (!result.ok()) {
    std::cerr << "psim: cell " << *result.first_failure << '\n';
    return 1;
  }
  std::cout << "wrote " << result.summaries.size() << " cells to " << cfg.matrix.output_dir.string() << '\n';
  return 0;
}

int write_outputs(const std::string& out_dir, const std::string& stem, const auto& report) {
  write_text_report(std::cout, report);
  if (out_dir.empty()) return report.passed() ? 0 : 1;
  fs::create_directories(out_dir);
  {
    std::ofstream text(fs::path(out_dir) / (stem + "_report.txt"));
    write_text_report(text, report);
  }
  {
    std::ofstream json(fs::path(out_dir) / (stem + "_summary.json"));
    write_json_summary(json, report);
  }
  return report.passed() ? 0 : 1;
}

int run_verify(const VerifyArgs& a) {
  const std::string stem = "prop" + std::to_string(a.proposition);
  if (a.proposition == 1) {
    if (a.max_tasks < 2 || a.max_tasks > static_cast<int>(psim::kMaxBruteForceTasks)) {
      throw std::invalid_argument("--max-tasks must be in [2, " + std::to_string(psim::kMaxBruteForceTasks) + "]");
    }
    const auto report =
        psim::verify_batch_oracle(a.seed, a.instances, static_cast<std::size_t>(a.max_tasks));
    return write_outputs(a.out, stem, report);
  }
  const std::string eps = a.epsilon.value_or(a.proposition == 3 ? "4" : "6");
  auto cfg = psim::make_family_f_config(a.proposition, a.m, psim::parse_rational(a.delta), psim::parse_rational(eps),
                                        a.b, a.periods);
  cfg.initial_happiness = psim::parse_rational(a.h0);
  cfg.critical = psim::parse_rational(a.critical);
  std::vector<psim::StrategyId> strategies;
  for (const auto& s : a.strategies) strategies.push_back(psim::parse_strategy(s));
  const auto report = psim::verify_periodic(a.proposition, cfg, strategies);
  return write_outputs(a.out, stem, report);
}

int run_report(const ReportArgs& a) {
  const fs::path dir = a.dir.empty() ? psim::default_output_dir() : fs::path(a.dir);
  const fs::path dest = a.dest.empty() ? dir : fs::path(a.dest);
  const auto summaries = psim::summaries_from_directory(dir, a.cutoff);
  const auto aggregate = psim::aggregate_over_seeds(summaries);
  fs::create_directories(dest);
  const std::string preamble = "re-aggregated from " + (dir / "cells").string() +
                               "\npatience_zero_cutoff " + psim::format_double(a.cutoff);
  {
    std::ofstream out(dest / "summary.csv");
    psim::write_summary_csv(out, summaries, preamble);
  }
  {
    std::ofstream out(dest / "aggregate.csv");
    psim::write_aggregate_csv(out, aggregate, preamble);
  }
  std::cout << "re-aggregated " << summaries.size() << " cells into " << dest.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psim: patience-aware scheduling simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the strategy x workload x resources x seed matrix");
  simulate->add_option("--config", sim.config_path, "JSON config with flat dotted keys")->check(CLI::ExistingFile);
  simulate->add_option("--strategy", sim.strategies, "fifo, pas, eas (comma separated)")->delimiter(',');
  simulate->add_option("--workload", sim.workloads, "flat, normal, peaky (comma separated) or family-f")->delimiter(',');
  simulate->add_option("--resources", sim.resources, "Server counts (comma separated)")->delimiter(',');
  simulate->add_option("--seed", sim.seeds, "Seeds (comma separated)")->delimiter(',');
  simulate->add_option("--out", sim.out, "Output directory (default: $PSIM_OUT_DIR or ./psim-out)");
  simulate->add_option("--workers", sim.workers, "Cells run in parallel")->check(CLI::PositiveNumber);
  simulate->add_flag("--summary-only", sim.summary_only, "Skip per-request and histogram files");
  simulate->add_flag("--print-config", sim.print_config, "Print the resolved config and exit");
  simulate->add_flag("--quiet", sim.quiet, "Only report failing cells");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Check a proposition scenario with exact arithmetic");
  verify->add_option("--proposition", ver.proposition, "1 (batch oracle), 2, 3 or 4")
      ->check(CLI::Range(1, 4))
      ->required();
  verify->add_option("--m", ver.m, "Users per group and servers");
  verify->add_option("--delta", ver.delta, "Task length (rational, e.g. 10 or 21/2)");
  verify->add_option("--epsilon", ver.epsilon, "Offset (default 6, or 4 for proposition 3)");
  verify->add_option("--b", ver.b, "Tolerance window");
  verify->add_option("--periods", ver.periods, "Run length in periods (default b+2)");
  verify->add_option("--h0", ver.h0, "Initial happiness");
  verify->add_option("--critical", ver.critical, "Critical happiness level");
  verify->add_option("--strategy", ver.strategies, "Strategies to run (comma separated)")->delimiter(',');
  verify->add_option("--instances", ver.instances, "Proposition 1: random batches")->check(CLI::PositiveNumber);
  verify->add_option("--seed", ver.seed, "Proposition 1: generator seed");
  verify->add_option("--max-tasks", ver.max_tasks, "Proposition 1: largest batch");
  verify->add_option("--out", ver.out, "Directory for the text report and JSON summary");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Rebuild summary.csv and aggregate.csv from per-request CSVs");
  report->add_option("dir", rep.dir, "Directory written by simulate (default: $PSIM_OUT_DIR or ./psim-out)");
  report->add_option("--dest", rep.dest, "Where to write the summaries (default: dir)");
  report->add_option("--cutoff", rep.cutoff, "Patience index counted as tending to zero")
      ->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim);
    if (*verify) return run_verify(ver);
    if (*report) return run_report(rep);
  } catch (const std::exception& e) {
    std::cerr << "psim: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
