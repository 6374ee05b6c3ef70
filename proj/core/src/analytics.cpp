#include "psim/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace psim {

namespace {

void write_preamble(std::ostream& out, const std::string& preamble) {
  if (preamble.empty()) return;
  std::istringstream lines(preamble);
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& s, const char* field) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error(std::string("malformed CSV field '") + field + "': '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const char* field) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error(std::string("malformed CSV field '") + field + "': '" + s + "'");
  }
  return v;
}

bool is_data_line(const std::string& line) { return !line.empty() && line.front() != '#'; }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_request_csv(std::ostream& out, std::span<const RequestRow> rows, const std::string& preamble) {
  write_preamble(out, preamble);
  out << kRequestCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.task_id << ',' << r.user_id << ',' << format_double(r.arrival) << ',' << format_double(r.start) << ','
        << format_double(r.completion) << ',' << format_double(r.duration) << ',' << format_double(r.expected_rt)
        << ',' << format_double(r.actual_rt) << ',' << format_double(r.patience_index) << ',' << r.strategy << ','
        << r.resources << ',' << r.seed << '\n';
  }
}

std::vector<RequestRow> read_request_csv(std::istream& in) {
  std::vector<RequestRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!is_data_line(line)) continue;
    if (!header_seen) {
      if (line != kRequestCsvHeader) throw std::runtime_error("unexpected request CSV header: " + line);
      header_seen = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != 12) throw std::runtime_error("request CSV row has " + std::to_string(f.size()) + " fields");
    RequestRow r;
    r.task_id = parse_number<std::uint64_t>(f[0], "task_id");
    r.user_id = parse_number<std::uint32_t>(f[1], "user_id");
    r.arrival = parse_double(f[2], "arrival");
    r.start = parse_double(f[3], "start");
    r.completion = parse_double(f[4], "completion");
    r.duration = parse_double(f[5], "duration");
    r.expected_rt = parse_double(f[6], "expected_rt");
    r.actual_rt = parse_double(f[7], "actual_rt");
    r.patience_index = parse_double(f[8], "patience_index");
    r.strategy = f[9];
    r.resources = parse_number<int>(f[10], "resources");
    r.seed = parse_number<std::uint64_t>(f[11], "seed");
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("request CSV has no header");
  return rows;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(q * static_cast<double>(values.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(values.size()))) - 1;
  return values[idx];
}

PatienceDistribution patience_distribution(std::span<const RequestRow> rows, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  PatienceDistribution d;
  d.total_requests = rows.size();
  d.histogram.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const auto& r : rows) {
    if (r.patience_index < 1.0) d.values.push_back(r.patience_index);
  }
  if (d.values.empty()) return d;
  d.mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) / static_cast<double>(d.values.size());
  d.median = percentile(d.values, 0.5);
  d.p10 = percentile(d.values, 0.1);
  d.p90 = percentile(d.values, 0.9);
  for (double v : d.values) {
    auto bin = static_cast<std::size_t>(v / d.histogram.bin_width());
    d.histogram.counts[std::min(bin, d.histogram.counts.size() - 1)]++;
  }
  return d;
}

double pct_patience_to_zero(std::span<const RequestRow> rows, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw std::invalid_argument("cutoff must be in (0,1)");
  if (rows.empty()) return 0.0;
  std::uint64_t n = 0;
  for (const auto& r : rows) n += r.patience_index <= cutoff ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(rows.size());
}

MetricsSummary summarize(std::span<const RequestRow> rows, const std::string& workload, const std::string& strategy,
                         int resources, std::uint64_t seed, double cutoff) {
  MetricsSummary s;
  s.workload = workload;
  s.strategy = strategy;
  s.resources = resources;
  s.seed = seed;
  s.cutoff = cutoff;
  s.requests = rows.size();
  const auto dist = patience_distribution(rows);
  s.below_one = dist.values.size();
  s.mean_below_one = dist.mean;
  s.median_below_one = dist.median;
  s.pct_to_zero = pct_patience_to_zero(rows, cutoff);
  std::vector<double> rts;
  rts.reserve(rows.size());
  for (const auto& r : rows) rts.push_back(r.actual_rt);
  if (!rts.empty()) s.mean_rt = std::accumulate(rts.begin(), rts.end(), 0.0) / static_cast<double>(rts.size());
  s.p50_rt = percentile(rts, 0.5);
  s.p95_rt = percentile(rts, 0.95);
  s.p99_rt = percentile(rts, 0.99);
  return s;
}

void write_summary_csv(std::ostream& out, std::span<const MetricsSummary> summaries, const std::string& preamble) {
  write_preamble(out, preamble);
  out << kSummaryCsvHeader << '\n';
  for (const auto& s : summaries) {
    out << s.workload << ',' << s.strategy << ',' << s.resources << ',' << s.seed << ',' << s.requests << ','
        << s.below_one << ',' << format_double(s.mean_below_one) << ',' << format_double(s.median_below_one) << ','
        << format_double(s.cutoff) << ',' << format_double(s.pct_to_zero) << ',' << format_double(s.mean_rt) << ','
        << format_double(s.p50_rt) << ',' << format_double(s.p95_rt) << ',' << format_double(s.p99_rt) << '\n';
  }
}

std::vector<MetricsSummary> read_summary_csv(std::istream& in) {
  std::vector<MetricsSummary> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!is_data_line(line)) continue;
    if (!header_seen) {
      if (line != kSummaryCsvHeader) throw std::runtime_error("unexpected summary CSV header: " + line);
      header_seen = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != 14) throw std::runtime_error("summary CSV row has " + std::to_string(f.size()) + " fields");
    MetricsSummary s;
    s.workload = f[0];
    s.strategy = f[1];
    s.resources = parse_number<int>(f[2], "resources");
    s.seed = parse_number<std::uint64_t>(f[3], "seed");
    s.requests = parse_number<std::uint64_t>(f[4], "requests");
    s.below_one = parse_number<std::uint64_t>(f[5], "below_one");
    s.mean_below_one = parse_double(f[6], "mean_below_one");
    s.median_below_one = parse_double(f[7], "median_below_one");
    s.cutoff = parse_double(f[8], "cutoff");
    s.pct_to_zero = parse_double(f[9], "pct_to_zero");
    s.mean_rt = parse_double(f[10], "mean_rt");
    s.p50_rt = parse_double(f[11], "p50_rt");
    s.p95_rt = parse_double(f[12], "p95_rt");
    s.p99_rt = parse_double(f[13], "p99_rt");
    out.push_back(std::move(s));
  }
  if (!header_seen) throw std::runtime_error("summary CSV has no header");
  return out;
}

void write_histogram_csv(std::ostream& out, const Histogram& h, const std::string& preamble) {
  write_preamble(out, preamble);
  out << "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double lo = h.low + h.bin_width() * static_cast<double>(i);
    out << format_double(lo) << ',' << format_double(lo + h.bin_width()) << ',' << h.counts[i] << '\n';
  }
}

std::vector<AggregateRow> aggregate_over_seeds(std::span<const MetricsSummary> summaries) {
  std::map<std::tuple<std::string, std::string, int>, AggregateRow> groups;
  for (const auto& s : summaries) {
    auto& g = groups[{s.workload, s.strategy, s.resources}];
    g.workload = s.workload;
    g.strategy = s.strategy;
    g.resources = s.resources;
    g.seeds += 1;
    g.mean_below_one += s.mean_below_one;
    g.pct_to_zero += s.pct_to_zero;
    g.mean_rt += s.mean_rt;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, g] : groups) {
    const double n = static_cast<double>(g.seeds);
    g.mean_below_one /= n;
    g.pct_to_zero /= n;
    g.mean_rt /= n;
    out.push_back(g);
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows, const std::string& preamble) {
  write_preamble(out, preamble);
  out << "workload,strategy,resources,seeds,mean_below_one,pct_to_zero,mean_rt\n";
  for (const auto& r : rows) {
    out << r.workload << ',' << r.strategy << ',' << r.resources << ',' << r.seeds << ','
        << format_double(r.mean_below_one) << ',' << format_double(r.pct_to_zero) << ',' << format_double(r.mean_rt)
        << '\n';
  }
}

}  // namespace psim
