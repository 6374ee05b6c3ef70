#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psim/engine.hpp"
#include "psim/model.hpp"

namespace psim {

/// One line of the per-request CSV.
struct RequestRow {
  std::uint64_t task_id = 0;
  std::uint32_t user_id = 0;
  double arrival = 0.0;
  double start = 0.0;
  double completion = 0.0;
  double duration = 0.0;
  double expected_rt = 0.0;
  double actual_rt = 0.0;
  double patience_index = 0.0;
  std::string strategy;
  int resources = 0;
  std::uint64_t seed = 0;

  bool operator==(const RequestRow&) const = default;
};

inline constexpr const char* kRequestCsvHeader =
    "task_id,user_id,arrival,start,completion,duration,expected_rt,actual_rt,patience_index,strategy,resources,seed";

template <class Num>
std::vector<RequestRow> request_rows(const SimTrace<Num>& trace, StrategyId strategy, int resources,
                                     std::uint64_t seed) {
  std::vector<RequestRow> rows;
  rows.reserve(trace.completions.size());
  for (const auto& c : trace.completions) {
    rows.push_back({c.task_id, c.user_id, to_double(c.arrival), to_double(c.start), to_double(c.completion),
                    to_double(c.duration), to_double(c.expected_rt), to_double(c.response_time),
                    to_double(c.patience_index), std::string(to_string(strategy)), resources, seed});
  }
  return rows;
}

/// Writes `# ` prefixed comment lines (one per line of `preamble`), the
/// header, then one row per request. Doubles use round-trip precision.
void write_request_csv(std::ostream& out, std::span<const RequestRow> rows, const std::string& preamble = {});

/// Skips `#` comment lines and the header. Throws std::runtime_error on malformed input.
std::vector<RequestRow> read_request_csv(std::istream& in);

std::string format_double(double v);

// ---------------------------------------------------------------------------

struct Histogram {
  double low = 0.0;
  double high = 1.0;
  std::vector<std::uint64_t> counts;

  double bin_width() const { return (high - low) / static_cast<double>(counts.size()); }
};

/// Patience indexes strictly below 1.0, with summary statistics.
struct PatienceDistribution {
  std::vector<double> values;  // in completion order
  std::uint64_t total_requests = 0;
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  Histogram histogram;
};

PatienceDistribution patience_distribution(std::span<const RequestRow> rows, int bins = 20);

template <class Num>
PatienceDistribution patience_distribution(const SimTrace<Num>& trace, int bins = 20) {
  auto rows = request_rows(trace, StrategyId::Fifo, 0, 0);
  return patience_distribution(std::span<const RequestRow>(rows), bins);
}

/// Fraction of completed requests whose patience index is <= cutoff. 0 for an empty trace.
double pct_patience_to_zero(std::span<const RequestRow> rows, double cutoff);

template <class Num>
double pct_patience_to_zero(const SimTrace<Num>& trace, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw std::invalid_argument("cutoff must be in (0,1)");
  if (trace.completions.empty()) return 0.0;
  std::uint64_t n = 0;
  for (const auto& c : trace.completions) n += to_double(c.patience_index) <= cutoff ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(trace.completions.size());
}

template <class Num>
struct HappinessNorms {
  Num l1{};
  int l0_active = 0;  // entries with s_x >= c(u_x)
};

/// L1 of s, and L0 of the masked vector s' (s'_x = s_x if s_x >= c(u_x), else 0).
template <class Num>
HappinessNorms<Num> happiness_norms(const HappinessState<Num>& state, std::span<const Num> critical) {
  if (state.size() != critical.size()) {
    throw std::invalid_argument("happiness_norms: state has " + std::to_string(state.size()) +
                                " entries but critical has " + std::to_string(critical.size()));
  }
  HappinessNorms<Num> out;
  out.l1 = state.l1();
  for (std::size_t i = 0; i < state.size(); ++i) {
    // A zero entry contributes nothing to ||s'||_0 even when c = 0.
    if (state[i] >= critical[i] && state[i] != Num(0)) ++out.l0_active;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct MetricsSummary {
  std::string strategy;
  std::string workload;
  int resources = 0;
  std::uint64_t seed = 0;
  std::uint64_t requests = 0;
  std::uint64_t below_one = 0;
  double mean_below_one = 0.0;  // mean patience index of requests below 1.0 (0 if none)
  double median_below_one = 0.0;
  double cutoff = 0.5;
  double pct_to_zero = 0.0;
  double mean_rt = 0.0;
  double p50_rt = 0.0;
  double p95_rt = 0.0;
  double p99_rt = 0.0;

  bool operator==(const MetricsSummary&) const = default;
};

inline constexpr const char* kSummaryCsvHeader =
    "workload,strategy,resources,seed,requests,below_one,mean_below_one,median_below_one,cutoff,pct_to_zero,"
    "mean_rt,p50_rt,p95_rt,p99_rt";

MetricsSummary summarize(std::span<const RequestRow> rows, const std::string& workload, const std::string& strategy,
                         int resources, std::uint64_t seed, double cutoff);

void write_summary_csv(std::ostream& out, std::span<const MetricsSummary> summaries, const std::string& preamble = {});
std::vector<MetricsSummary> read_summary_csv(std::istream& in);

void write_histogram_csv(std::ostream& out, const Histogram& h, const std::string& preamble = {});

/// Mean of a metric over seeds, keyed by (workload, strategy, resources).
struct AggregateRow {
  std::string workload;
  std::string strategy;
  int resources = 0;
  int seeds = 0;
  double mean_below_one = 0.0;
  double pct_to_zero = 0.0;
  double mean_rt = 0.0;
};

std::vector<AggregateRow> aggregate_over_seeds(std::span<const MetricsSummary> summaries);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows, const std::string& preamble = {});

/// Nearest-rank percentile of an unsorted sample; 0 for an empty one.
double percentile(std::vector<double> values, double q);

}  // namespace psim
