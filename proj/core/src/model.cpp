#include "psim/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace psim {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::int64_t parse_int(std::string_view s, const std::string& whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not a rational number: '" + whole + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(StrategyId s) {
  switch (s) {
    case StrategyId::Fifo: return "fifo";
    case StrategyId::Pas: return "pas";
    case StrategyId::Eas: return "eas";
  }
  return "?";
}

StrategyId parse_strategy(std::string_view text) {
  const auto s = lower(text);
  if (s == "fifo") return StrategyId::Fifo;
  if (s == "pas") return StrategyId::Pas;
  if (s == "eas") return StrategyId::Eas;
  throw std::invalid_argument("unknown strategy '" + std::string(text) + "' (expected fifo|pas|eas)");
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (servers < 1) fail("servers must be >= 1");
  if (history_window < 1) fail("history_window must be >= 1");
  if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) fail("ewma_alpha must be in (0,1]");
  if (ewma_window < 1) fail("ewma_window must be >= 1");
  if (outlier_window < 1) fail("outlier_window must be >= 1");
  if (!(outlier_cutoff >= 0.0 && outlier_cutoff < 1.0)) fail("outlier_cutoff must be in [0,1)");
  if (tolerance_margin < 0.0) fail("tolerance_margin must be >= 0");
  if (!(think_time_max > 0.0)) fail("think_time_max must be > 0");
  if (!(job_length > 0.0)) fail("job_length must be > 0");
  if (!(threshold_low > 0.0) || threshold_low > threshold_high) fail("threshold range must satisfy 0 < low <= high");
  if (!(provider_max_rt > 0.0)) fail("provider_max_rt must be > 0");
  if (!(penalty_rt > 0.0)) fail("penalty_rt must be > 0");
  if (!(patience_zero_cutoff > 0.0 && patience_zero_cutoff < 1.0)) fail("patience_zero_cutoff must be in (0,1)");
  if (initial_happiness < 0.0 || initial_happiness > 1.0) fail("initial_happiness must be in [0,1]");
  if (critical_level < 0.0 || critical_level > 1.0) fail("critical_level must be in [0,1]");
}

Rational parse_rational(const std::string& text) {
  std::string_view s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto num = parse_int(s.substr(0, slash), text);
    const auto den = parse_int(s.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    const bool negative = !s.empty() && s.front() == '-';
    const auto whole_part = s.substr(0, dot);
    const auto frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 12) throw std::invalid_argument("not a rational number: '" + text + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const std::int64_t w = (whole_part.empty() || whole_part == "-") ? 0 : parse_int(whole_part, text);
    const std::int64_t f = parse_int(frac, text);
    Rational r(std::abs(w) * scale + f, scale);
    return negative ? -r : r;
  }
  return Rational(parse_int(s, text));
}

std::string to_string(const Rational& x) {
  std::ostringstream os;
  os << x.numerator();
  if (x.denominator() != 1) os << '/' << x.denominator();
  return os.str();
}

}  // namespace psim
