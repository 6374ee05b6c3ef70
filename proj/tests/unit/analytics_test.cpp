#include <gtest/gtest.h>

#include <sstream>

#include "psim/analytics.hpp"
#include "psim/experiment.hpp"
#include "support/oracles.hpp"

namespace {

using psim::Rational;
using psim::RequestRow;

RequestRow row(double expected, double actual) {
  RequestRow r;
  r.expected_rt = expected;
  r.actual_rt = actual;
  r.patience_index = expected / actual;
  r.strategy = "fifo";
  return r;
}

std::vector<RequestRow> small_cell(psim::StrategyId s, int resources, double horizon = 1800.0) {
  psim::DailyCurveParams curve;
  curve.horizon = horizon;
  psim::SimConfig cfg;
  return psim::run_cell({s, psim::DailyShape::Flat, resources, 1}, cfg, curve, true).rows;
}

TEST(PatienceDistribution, AllOnTimeGivesEmpty) {
  std::vector<RequestRow> rows(5, row(12, 12));
  const auto d = psim::patience_distribution(rows);
  EXPECT_TRUE(d.values.empty());
  EXPECT_EQ(d.total_requests, 5u);
  EXPECT_EQ(d.histogram.counts.size(), 20u);
}

TEST(PatienceDistribution, SingleSlowRequest) {
  std::vector<RequestRow> rows{row(30, 60), row(10, 10)};
  const auto d = psim::patience_distribution(rows);
  ASSERT_EQ(d.values.size(), 1u);
  EXPECT_DOUBLE_EQ(d.values[0], 0.5);
  EXPECT_DOUBLE_EQ(d.mean, 0.5);
  EXPECT_EQ(d.histogram.counts[10], 1u);
}

TEST(PatienceDistribution, UnloadedSystemIdenticalAcrossStrategies) {
  const auto fifo = psim::patience_distribution(small_cell(psim::StrategyId::Fifo, 100));
  for (auto s : {psim::StrategyId::Pas, psim::StrategyId::Eas}) {
    const auto other = psim::patience_distribution(small_cell(s, 100));
    EXPECT_EQ(other.values, fifo.values);
    EXPECT_EQ(other.histogram.counts, fifo.histogram.counts);
  }
}

TEST(PctToZero, NoSlowRequests) {
  std::vector<RequestRow> rows(3, row(12, 10));
  EXPECT_DOUBLE_EQ(psim::pct_patience_to_zero(rows, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(psim::pct_patience_to_zero(std::vector<RequestRow>{}, 0.5), 0.0);
}

TEST(PctToZero, EverySlowRequest) {
  std::vector<RequestRow> rows(4, row(10, 100));
  EXPECT_DOUBLE_EQ(psim::pct_patience_to_zero(rows, 0.5), 1.0);
}

TEST(PctToZero, MatchesCsvLinearScan) {
  const auto rows = small_cell(psim::StrategyId::Fifo, 4, 3600.0);
  std::ostringstream csv;
  psim::write_request_csv(csv, rows, "scan test");
  for (double cutoff : {0.1, 0.3, 0.5, 0.9}) {
    const auto scan = oracle::scan_patience_csv(csv.str(), cutoff);
    ASSERT_EQ(scan.rows, rows.size());
    EXPECT_DOUBLE_EQ(psim::pct_patience_to_zero(rows, cutoff),
                     static_cast<double>(scan.at_or_below) / static_cast<double>(scan.rows));
  }
}

TEST(PctToZero, CutoffMustBeOpenUnitInterval) {
  std::vector<RequestRow> rows(1, row(10, 20));
  EXPECT_THROW(psim::pct_patience_to_zero(rows, 0.0), std::invalid_argument);
  EXPECT_THROW(psim::pct_patience_to_zero(rows, 1.0), std::invalid_argument);
}

TEST(HappinessNorms, Examples) {
  const std::vector<Rational> c(2, Rational(1, 2));
  EXPECT_EQ(psim::happiness_norms(psim::HappinessState<Rational>(2, Rational(1)), std::span<const Rational>(c)).l0_active,
            2);
  psim::HappinessState<Rational> s(2, Rational(1));
  s.set(1, Rational(2, 5));
  const auto n = psim::happiness_norms(s, std::span<const Rational>(c));
  EXPECT_EQ(n.l1, Rational(7, 5));
  EXPECT_EQ(n.l0_active, 1);

  const auto zero = psim::happiness_norms(psim::HappinessState<Rational>(2, Rational(0)), std::span<const Rational>(c));
  EXPECT_EQ(zero.l1, Rational(0));
  EXPECT_EQ(zero.l0_active, 0);
}

TEST(HappinessNorms, AtCriticalCountsAndZeroDoesNot) {
  const std::vector<Rational> c{Rational(1, 2), Rational(0)};
  psim::HappinessState<Rational> s(2, Rational(1, 2));
  s.set(1, Rational(0));
  EXPECT_EQ(psim::happiness_norms(s, std::span<const Rational>(c)).l0_active, 1);
}

TEST(HappinessNorms, DimensionMismatch) {
  const std::vector<Rational> c(3, Rational(1, 2));
  EXPECT_THROW(psim::happiness_norms(psim::HappinessState<Rational>(2, Rational(1)), std::span<const Rational>(c)),
               std::invalid_argument);
}

TEST(RequestCsv, RoundTripIsExact) {
  const auto rows = small_cell(psim::StrategyId::Eas, 6);
  std::stringstream io;
  psim::write_request_csv(io, rows, "line one\nline two");
  const auto back = psim::read_request_csv(io);
  EXPECT_EQ(back, rows);
  const auto a = psim::summarize(rows, "flat", "eas", 6, 1, 0.5);
  const auto b = psim::summarize(back, "flat", "eas", 6, 1, 0.5);
  EXPECT_EQ(a, b);
}

TEST(RequestCsv, PreambleAndHeader) {
  std::ostringstream out;
  psim::write_request_csv(out, std::vector<RequestRow>{}, "a\nb");
  EXPECT_EQ(out.str(), std::string("# a\n# b\n") + psim::kRequestCsvHeader + "\n");
}

TEST(RequestCsv, MalformedInputRejected) {
  std::istringstream missing_header("1,2,3\n");
  EXPECT_THROW(psim::read_request_csv(missing_header), std::runtime_error);
  std::istringstream short_row(std::string(psim::kRequestCsvHeader) + "\n1,2,3\n");
  EXPECT_THROW(psim::read_request_csv(short_row), std::runtime_error);
  std::istringstream bad_number(std::string(psim::kRequestCsvHeader) + "\n1,2,x,0,0,0,0,0,0,fifo,1,1\n");
  EXPECT_THROW(psim::read_request_csv(bad_number), std::runtime_error);
}

TEST(Percentile, NearestRank) {
  EXPECT_DOUBLE_EQ(psim::percentile({}, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(psim::percentile({5, 1, 3, 2, 4}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(psim::percentile({5, 1, 3, 2, 4}, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(psim::percentile({5, 1, 3, 2, 4}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(psim::percentile({10, 20, 30, 40}, 0.95), 40.0);
}

TEST(Summary, CountsAndMeans) {
  std::vector<RequestRow> rows{row(10, 40), row(10, 20), row(10, 10), row(10, 5)};
  const auto s = psim::summarize(rows, "flat", "pas", 8, 2, 0.5);
  EXPECT_EQ(s.requests, 4u);
  EXPECT_EQ(s.below_one, 2u);
  EXPECT_DOUBLE_EQ(s.mean_below_one, (0.25 + 0.5) / 2);
  EXPECT_DOUBLE_EQ(s.pct_to_zero, 0.5);
  EXPECT_DOUBLE_EQ(s.mean_rt, 75.0 / 4);
}

TEST(Summary, CsvRoundTrip) {
  std::vector<psim::MetricsSummary> in{
      psim::summarize(small_cell(psim::StrategyId::Fifo, 4), "flat", "fifo", 4, 1, 0.5),
      psim::summarize(small_cell(psim::StrategyId::Pas, 8), "flat", "pas", 8, 1, 0.5)};
  std::stringstream io;
  psim::write_summary_csv(io, in, "echo");
  EXPECT_EQ(psim::read_summary_csv(io), in);
}

TEST(Aggregate, MeansOverSeeds) {
  psim::MetricsSummary a, b, c;
  a.workload = b.workload = c.workload = "flat";
  a.strategy = b.strategy = "eas";
  c.strategy = "fifo";
  a.resources = b.resources = c.resources = 8;
  a.seed = 1;
  b.seed = 2;
  a.pct_to_zero = 0.1;
  b.pct_to_zero = 0.3;
  a.mean_below_one = 0.6;
  b.mean_below_one = 0.8;
  std::vector<psim::MetricsSummary> all{a, b, c};
  const auto rows = psim::aggregate_over_seeds(all);
  ASSERT_EQ(rows.size(), 2u);
  const auto& eas = rows[0].strategy == "eas" ? rows[0] : rows[1];
  EXPECT_EQ(eas.seeds, 2);
  EXPECT_DOUBLE_EQ(eas.pct_to_zero, 0.2);
  EXPECT_DOUBLE_EQ(eas.mean_below_one, 0.7);
}

TEST(Histogram, CsvHasOneLinePerBin) {
  psim::Histogram h;
  h.counts = {1, 2, 3, 4};
  std::ostringstream out;
  psim::write_histogram_csv(out, h);
  EXPECT_EQ(out.str(), "bin_low,bin_high,count\n0,0.25,1\n0.25,0.5,2\n0.5,0.75,3\n0.75,1,4\n");
}

}  // namespace
