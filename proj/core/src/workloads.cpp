#include "psim/workloads.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace psim {

std::string_view to_string(DailyShape s) {
  switch (s) {
    case DailyShape::Flat: return "flat";
    case DailyShape::Normal: return "normal";
    case DailyShape::Peaky: return "peaky";
  }
  return "?";
}

DailyShape parse_daily_shape(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "flat") return DailyShape::Flat;
  if (s == "normal") return DailyShape::Normal;
  if (s == "peaky") return DailyShape::Peaky;
  throw std::invalid_argument("unknown workload '" + std::string(text) + "' (expected flat|normal|peaky)");
}

UserCountCurve::UserCountCurve(std::vector<CurveSegment> segments) {
  std::stable_sort(segments.begin(), segments.end(),
                   [](const CurveSegment& a, const CurveSegment& b) { return a.start < b.start; });
  for (const auto& s : segments) {
    if (s.users < 0) throw std::invalid_argument("user count curve values must be >= 0");
    if (!segments_.empty() && segments_.back().start == s.start) {
      segments_.back() = s;
    } else if (segments_.empty() || segments_.back().users != s.users) {
      segments_.push_back(s);
    }
  }
}

int UserCountCurve::at(double t) const {
  int value = 0;
  for (const auto& s : segments_) {
    if (s.start > t) break;
    value = s.users;
  }
  return value;
}

int UserCountCurve::max_users() const {
  int m = 0;
  for (const auto& s : segments_) m = std::max(m, s.users);
  return m;
}

namespace {

/// Lays `bumps` (start, length, level) over a base function of time.
template <class Base>
UserCountCurve overlay(double horizon, Base base, const std::vector<double>& bump_starts, double bump_length,
                       int bump_level) {
  std::vector<double> cuts{0.0};
  for (double s : bump_starts) {
    cuts.push_back(s);
    cuts.push_back(s + bump_length);
  }
  for (double c : base.breakpoints) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<CurveSegment> out;
  for (double c : cuts) {
    if (c >= horizon) break;
    int users = base.level(c);
    for (double s : bump_starts) {
      if (c >= s && c < s + bump_length) users = std::max(users, bump_level);
    }
    out.push_back({c, users});
  }
  return UserCountCurve(std::move(out));
}

struct WorkHours {
  std::vector<double> breakpoints;
  double start, end;
  int inside, outside;
  int level(double t) const { return (t >= start && t < end) ? inside : outside; }
};

struct Constant {
  std::vector<double> breakpoints;
  int value;
  int level(double) const { return value; }
};

}  // namespace

UserCountCurve daily_curve(DailyShape shape, const DailyCurveParams& p) {
  auto check = [&p](int users) {
    if (users < 0 || users > p.max_users) {
      throw std::invalid_argument("curve level " + std::to_string(users) + " outside [0, max_users]");
    }
  };
  switch (shape) {
    case DailyShape::Flat:
      check(p.flat_users);
      return UserCountCurve({{0.0, p.flat_users}});
    case DailyShape::Normal: {
      check(p.normal_baseline);
      check(p.normal_work_users);
      check(p.normal_peak_users);
      WorkHours base{{p.work_start, p.work_end}, p.work_start, p.work_end, p.normal_work_users, p.normal_baseline};
      return overlay(p.horizon, base, p.normal_peak_starts, p.normal_peak_length, p.normal_peak_users);
    }
    case DailyShape::Peaky: {
      check(p.peaky_baseline);
      check(p.peaky_spike_users);
      Constant base{{}, p.peaky_baseline};
      return overlay(p.horizon, base, p.peaky_spike_starts, p.peaky_spike_length, p.peaky_spike_users);
    }
  }
  throw std::logic_error("unknown daily shape");
}

WorkloadSource<double> generate_daily(DailyShape shape, const DailyCurveParams& params, std::uint64_t seed) {
  if (!(params.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  DailyWorkload w;
  w.shape = shape;
  w.curve = daily_curve(shape, params);
  w.horizon = params.horizon;
  w.max_users = params.max_users;
  w.seed = seed;
  WorkloadKind kind = shape == DailyShape::Flat     ? WorkloadKind::Flat
                      : shape == DailyShape::Normal ? WorkloadKind::Normal
                                                    : WorkloadKind::Peaky;
  return {kind, std::move(w)};
}

ScenarioFamilyConfig make_family_f_config(int proposition, int m, Rational delta, Rational epsilon, int b,
                                          std::optional<int> periods) {
  if (b < 2) throw std::invalid_argument("family F requires b >= 2 (got b=" + std::to_string(b) + ")");
  ScenarioFamilyConfig cfg;
  cfg.proposition = proposition;
  cfg.m = m;
  cfg.delta = delta;
  cfg.epsilon = epsilon;
  cfg.b = b;
  cfg.periods = periods.value_or(b + 2);
  auto& u1 = cfg.groups[0];
  auto& u2 = cfg.groups[1];
  const Rational zero{0};
  switch (proposition) {
    case 2:
      cfg.period_length = 3 * delta;
      u1 = {{zero, epsilon}, 2 * delta, 2 * delta, step_above_alpha(delta, b)};
      u2 = {{4 * epsilon / 3}, delta, delta, step_above_alpha(zero, b)};
      break;
    case 3:
      cfg.period_length = 3 * delta;
      u1 = {{zero, epsilon}, 3 * delta / 2, 3 * delta / 2, step_above_zero(Rational(b - 1))};
      u2 = {{2 * epsilon}, delta, delta, step_above_zero(Rational(b + 1))};
      break;
    case 4:
      cfg.period_length = 2 * delta;
      u1 = {{zero}, 2 * delta, 2 * delta, step_above_alpha(delta, b)};
      u2 = {{epsilon}, zero, zero, step_above_alpha(zero, b)};
      break;
    default:
      throw std::invalid_argument("family F is defined for propositions 2, 3 and 4 (got " +
                                  std::to_string(proposition) + ")");
  }
  return cfg;
}

void validate_family_f(const ScenarioFamilyConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("family F: " + what); };
  const auto eps = to_string(cfg.epsilon);
  const auto del = to_string(cfg.delta);
  if (cfg.m < 1) fail("m >= 1 violated");
  if (cfg.b < 2) fail("b >= 2 violated");
  if (cfg.periods < 1) fail("periods >= 1 violated");
  if (!(cfg.delta > 0)) fail("delta > 0 violated (delta=" + del + ")");
  if (!(cfg.epsilon > 0)) fail("0 < epsilon violated (epsilon=" + eps + ")");
  if (cfg.epsilon > cfg.delta) fail("epsilon <= delta violated (epsilon=" + eps + ", delta=" + del + ")");
  if (cfg.proposition == 2 && !(cfg.epsilon < 3 * cfg.delta / 4)) {
    fail("epsilon < 3*delta/4 violated (epsilon=" + eps + ", delta=" + del + ")");
  }
  if (cfg.proposition == 3 && !(cfg.epsilon < cfg.delta / 2)) {
    fail("epsilon < delta/2 violated (epsilon=" + eps + ", delta=" + del + ")");
  }
  if (cfg.initial_happiness < 0 || cfg.initial_happiness > 1 || cfg.critical < 0 || cfg.critical > 1) {
    fail("h0 and c must lie in [0,1]");
  }
  if (!(cfg.period_length > 0)) fail("period length > 0 violated");
  for (const auto& g : cfg.groups) {
    if (g.offsets.empty()) fail("every group needs at least one submission offset");
    for (const auto& o : g.offsets) {
      if (o < 0 || !(o < cfg.period_length)) fail("offsets must lie in [0, period)");
    }
  }
}

WorkloadSource<Rational> generate_family_f(const ScenarioFamilyConfig& cfg) {
  validate_family_f(cfg);
  ScriptedWorkload<Rational> w;
  for (int g = 0; g < 2; ++g) {
    const auto& spec = cfg.groups[static_cast<std::size_t>(g)];
    // Offset slots are numbered across both groups: U1 first, then U2.
    const std::size_t slot_base = g == 0 ? 0 : cfg.groups[0].offsets.size();
    for (int i = 0; i < cfg.m; ++i) {
      const auto user = static_cast<UserId>(w.users.size());
      w.users.push_back(ScriptedUser<Rational>{g, spec.initial_tolerance, spec.tolerance_padding,
                                               cfg.initial_happiness, cfg.critical, spec.impact, 60.0});
      for (std::size_t k = 0; k < spec.offsets.size(); ++k) {
        w.streams.push_back(ArrivalStream<Rational>{user, spec.offsets[k], cfg.period_length, cfg.periods,
                                                    cfg.delta, static_cast<int>(slot_base + k)});
      }
    }
  }
  return {WorkloadKind::FamilyF, std::move(w)};
}

}  // namespace psim
