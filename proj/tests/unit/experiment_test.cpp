#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "psim/experiment.hpp"

namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    ++n;
  }
  return n;
}

std::vector<fs::path> files_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename());
  std::sort(out.begin(), out.end());
  return out;
}

psim::ResolvedConfig short_config(double horizon) {
  psim::ResolvedConfig c;
  c.curve.horizon = horizon;
  c.curve.normal_peak_starts = {600.0};
  c.curve.work_start = 300.0;
  c.curve.peaky_spike_starts = {900.0};
  return c;
}

TEST(Matrix, DefaultHas243UniqueCells) {
  const auto cells = psim::enumerate_cells(psim::ExperimentMatrix{});
  EXPECT_EQ(cells.size(), 243u);
  std::set<std::string> names;
  for (const auto& c : cells) names.insert(c.name());
  EXPECT_EQ(names.size(), 243u);
  EXPECT_EQ(cells.front().name(), "flat_fifo_r4_s1");
  EXPECT_EQ(cells.back().name(), "peaky_eas_r20_s3");
}

TEST(Matrix, ValidationErrors) {
  psim::ExperimentMatrix m;
  m.resources = {4, 0};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.resources = {};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  psim::ExperimentMatrix n;
  n.seeds = {};
  EXPECT_THROW(psim::enumerate_cells(n), std::invalid_argument);
}

TEST(Experiment, OneCellOneFileOneSummary) {
  TempDir dir("psim_exp_one");
  auto cfg = short_config(3600.0);
  cfg.matrix.strategies = {psim::StrategyId::Pas};
  cfg.matrix.workloads = {psim::DailyShape::Normal};
  cfg.matrix.resources = {8};
  cfg.matrix.seeds = {2};
  cfg.matrix.output_dir = dir.path();
  const auto r = psim::run_experiment(cfg, {});
  ASSERT_TRUE(r.ok()) << *r.first_failure;
  EXPECT_EQ(files_in(dir.path() / "cells"), std::vector<fs::path>{"normal_pas_r8_s2.csv"});
  EXPECT_EQ(files_in(dir.path() / "histograms"), std::vector<fs::path>{"normal_pas_r8_s2.csv"});
  EXPECT_EQ(data_lines(dir.path() / "summary.csv"), 1u);
  EXPECT_EQ(data_lines(dir.path() / "aggregate.csv"), 1u);
  EXPECT_EQ(data_lines(dir.path() / "cells" / "normal_pas_r8_s2.csv"), r.summaries.at(0).requests);
  EXPECT_EQ(data_lines(dir.path() / "histograms" / "normal_pas_r8_s2.csv"), 20u);

  std::ifstream cell(dir.path() / "cells" / "normal_pas_r8_s2.csv");
  std::string first;
  std::getline(cell, first);
  EXPECT_EQ(first, "# cell normal_pas_r8_s2: strategy=pas workload=normal resources=8 seed=2");
}

TEST(Experiment, FullDefaultMatrixWritesEveryCell) {
  TempDir dir("psim_exp_full");
  auto cfg = short_config(1200.0);
  cfg.matrix.output_dir = dir.path();
  psim::ExperimentOptions opts;
  opts.workers = 4;
  const auto r = psim::run_experiment(cfg, opts);
  ASSERT_TRUE(r.ok()) << *r.first_failure;

  std::set<std::string> expected;
  for (const auto& c : psim::enumerate_cells(cfg.matrix)) expected.insert(c.name() + ".csv");
  std::set<std::string> found;
  for (const auto& f : files_in(dir.path() / "cells")) found.insert(f.string());
  EXPECT_EQ(found, expected);
  EXPECT_EQ(data_lines(dir.path() / "summary.csv"), 243u);
  EXPECT_EQ(data_lines(dir.path() / "aggregate.csv"), 81u);

  const auto reread = psim::summaries_from_directory(dir.path(), cfg.sim.patience_zero_cutoff);
  ASSERT_EQ(reread.size(), r.summaries.size());
  std::map<std::string, psim::MetricsSummary> by_name;
  for (const auto& s : r.summaries) {
    by_name[s.workload + s.strategy + std::to_string(s.resources) + "_" + std::to_string(s.seed)] = s;
  }
  for (const auto& s : reread) {
    EXPECT_EQ(s, by_name.at(s.workload + s.strategy + std::to_string(s.resources) + "_" + std::to_string(s.seed)));
  }
}

TEST(Experiment, ParallelMatchesSerial) {
  auto cfg = short_config(1800.0);
  cfg.matrix.resources = {4, 8};
  cfg.matrix.seeds = {1, 2};
  psim::ExperimentOptions serial;
  serial.write_files = false;
  auto parallel = serial;
  parallel.workers = 5;
  const auto a = psim::run_experiment(cfg, serial);
  const auto b = psim::run_experiment(cfg, parallel);
  EXPECT_EQ(a.summaries, b.summaries);
}

TEST(Experiment, RepeatedRunsByteIdentical) {
  TempDir dir("psim_exp_det");
  auto cfg = short_config(1800.0);
  cfg.matrix.resources = {6};
  cfg.matrix.seeds = {4};
  cfg.matrix.output_dir = dir.path();
  const auto snapshot = [&] {
    std::map<std::string, std::string> files;
    for (const auto& sub : {"cells", "histograms"}) {
      for (const auto& n : files_in(dir.path() / sub)) {
        files[std::string(sub) + "/" + n.string()] = slurp(dir.path() / sub / n);
      }
    }
    files["summary.csv"] = slurp(dir.path() / "summary.csv");
    return files;
  };
  ASSERT_TRUE(psim::run_experiment(cfg, {}).ok());
  const auto first = snapshot();
  fs::remove_all(dir.path());
  psim::ExperimentOptions opts;
  opts.workers = 3;
  ASSERT_TRUE(psim::run_experiment(cfg, opts).ok());
  const auto second = snapshot();
  ASSERT_EQ(first.size(), 19u);
  for (const auto& [name, text] : first) EXPECT_EQ(text, second.at(name)) << name;
}

TEST(Experiment, FailingCellReported) {
  auto cfg = short_config(600.0);
  cfg.sim.happiness_enabled = true;
  cfg.sim.history_window = 1;
  cfg.matrix.resources = {4};
  cfg.matrix.seeds = {1};
  psim::ExperimentOptions opts;
  opts.write_files = false;
  const auto r = psim::run_experiment(cfg, opts);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.first_failure->rfind("flat_fifo_r4_s1: ", 0), 0u) << *r.first_failure;
  EXPECT_TRUE(r.summaries.empty());
}

TEST(Experiment, OnCellCalledForEveryCell) {
  auto cfg = short_config(600.0);
  cfg.matrix.resources = {4, 6};
  cfg.matrix.seeds = {1};
  std::atomic<int> calls{0};
  psim::ExperimentOptions opts;
  opts.write_files = false;
  opts.workers = 2;
  opts.on_cell = [&](const psim::CellResult&) { ++calls; };
  psim::run_experiment(cfg, opts);
  EXPECT_EQ(calls.load(), 18);
}

TEST(FamilyRun, MatchesVerifierOutcome) {
  TempDir dir("psim_exp_family");
  psim::ResolvedConfig cfg;
  cfg.matrix.strategies = {psim::StrategyId::Fifo, psim::StrategyId::Eas};
  cfg.matrix.output_dir = dir.path();
  const auto results = psim::run_family_experiment(cfg, true);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].active_at_end, 2);
  EXPECT_EQ(results[1].active_at_end, 4);
  EXPECT_EQ(results[0].summary.workload, "family-f");
  EXPECT_EQ(files_in(dir.path() / "cells"),
            (std::vector<fs::path>{"family-f_eas.csv", "family-f_fifo.csv"}));
  EXPECT_EQ(data_lines(dir.path() / "cells" / "family-f_fifo.csv"), results[0].summary.requests);
  const auto reread = psim::summaries_from_directory(dir.path(), cfg.sim.patience_zero_cutoff);
  ASSERT_EQ(reread.size(), 2u);
  EXPECT_EQ(reread[1], results[0].summary);
}

TEST(FamilyRun, RejectsOutOfBoundsEpsilon) {
  psim::ResolvedConfig cfg;
  cfg.family.epsilon = "8";
  EXPECT_THROW(psim::run_family_experiment(cfg, false), std::invalid_argument);
  cfg.family.epsilon = "6";
  cfg.family.periods = -1;
  EXPECT_THROW(psim::run_family_experiment(cfg, false), std::invalid_argument);
}

TEST(Experiment, DefaultOutputDirFromEnvironment) {
  ::setenv("PSIM_OUT_DIR", "/tmp/psim-env-dir", 1);
  EXPECT_EQ(psim::default_output_dir(), fs::path("/tmp/psim-env-dir"));
  ::unsetenv("PSIM_OUT_DIR");
  EXPECT_EQ(psim::default_output_dir(), fs::path("psim-out"));
}

}  // namespace
