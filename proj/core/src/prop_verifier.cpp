#include "psim/prop_verifier.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "psim/analytics.hpp"

namespace psim {

// ---------------------------------------------------------------------------
// Batch scheduling
// ---------------------------------------------------------------------------

std::vector<Rational> SchedulePlan::starts(std::size_t tasks) const {
  std::vector<Rational> out(tasks);
  for (const auto& e : entries) out.at(e.task) = e.start;
  return out;
}

std::string_view to_string(MonotonicityClass c) {
  switch (c) {
    case MonotonicityClass::Constant: return "constant";
    case MonotonicityClass::NonIncreasing: return "non-increasing";
    case MonotonicityClass::NonDecreasing: return "non-decreasing";
  }
  return "unknown";
}

bool PairImpactFunction::matches_declared_class(std::span<const std::pair<Rational, Rational>> samples) const {
  for (const auto& [ax, ay] : samples) {
    const Rational fa = (*this)(ax, ay);
    const Rational sa = abs_value(ax) + abs_value(ay);
    for (const auto& [bx, by] : samples) {
      const Rational fb = (*this)(bx, by);
      const Rational sb = abs_value(bx) + abs_value(by);
      switch (declared) {
        case MonotonicityClass::Constant:
          if (fa != fb) return false;
          break;
        case MonotonicityClass::NonIncreasing:
          if (sa <= sb && fa < fb) return false;
          break;
        case MonotonicityClass::NonDecreasing:
          if (sa <= sb && fa > fb) return false;
          break;
      }
    }
  }
  return true;
}

PairImpactFunction constant_impact(Rational change) {
  return {MonotonicityClass::Constant, [change](const Rational&) { return change; }};
}

PairImpactFunction decreasing_abs_impact(Rational slope) {
  if (slope < 0) throw std::invalid_argument("decreasing_abs_impact needs slope >= 0");
  return {MonotonicityClass::NonIncreasing, [slope](const Rational& e) { return -slope * abs_value(e); }};
}

PairImpactFunction increasing_abs_impact(Rational slope) {
  if (slope < 0) throw std::invalid_argument("increasing_abs_impact needs slope >= 0");
  return {MonotonicityClass::NonDecreasing, [slope](const Rational& e) { return slope * abs_value(e); }};
}

SchedulePlan list_schedule(const BatchInstance& batch, std::span<const std::size_t> order) {
  if (batch.servers < 1) throw std::invalid_argument("batch needs at least one server");
  std::vector<Rational> free_at(static_cast<std::size_t>(batch.servers), Rational(0));
  SchedulePlan plan;
  plan.entries.reserve(order.size());
  for (std::size_t task : order) {
    const auto server =
        static_cast<std::size_t>(std::distance(free_at.begin(), std::min_element(free_at.begin(), free_at.end())));
    const Rational start = std::max(free_at[server], batch.arrivals.at(task));
    free_at[server] = start + batch.duration;
    plan.entries.push_back({task, server, start});
  }
  return plan;
}

std::vector<Rational> excess_delays(const BatchInstance& batch, const SchedulePlan& plan) {
  std::vector<Rational> out(batch.size());
  for (const auto& e : plan.entries) out.at(e.task) = e.start - batch.arrivals[e.task] - batch.tolerances[e.task];
  return out;
}

Rational plan_l1(const BatchInstance& batch, const SchedulePlan& plan, const PairImpactFunction& impact) {
  Rational sum{0};
  for (const auto& e : excess_delays(batch, plan)) {
    sum += HappinessState<Rational>::clamp(batch.initial_happiness + impact.per_task(e));
  }
  return sum;
}

SchedulePlan engine_plan(const BatchInstance& batch, StrategyId strategy) {
  std::vector<ScriptedUser<Rational>> users;
  std::vector<TaskRequest<Rational>> tasks;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    users.push_back(ScriptedUser<Rational>{0, batch.tolerances[i], batch.tolerances[i], batch.initial_happiness,
                                           Rational(0), StepImpact<Rational>{}, 60.0});
    tasks.push_back({i, static_cast<UserId>(i), batch.arrivals[i], batch.duration});
  }
  SimConfig cfg;
  cfg.servers = batch.servers;
  cfg.expectation_source = ExpectationSource::Tolerance;
  const auto trace = run_simulation<Rational>(cfg, scripted_batch(std::move(users), tasks), strategy);
  if (trace.completions.size() != batch.size()) throw std::logic_error("engine did not complete the whole batch");

  SchedulePlan plan;
  for (const auto& c : trace.completions) plan.entries.push_back({c.user_id, c.server, c.start});
  std::stable_sort(plan.entries.begin(), plan.entries.end(), [](const PlannedTask& a, const PlannedTask& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.server < b.server;
  });
  return plan;
}

BatchResult brute_force_batch(const BatchInstance& batch, const PairImpactFunction& impact) {
  if (batch.size() > kMaxBruteForceTasks) {
    throw std::invalid_argument("brute_force_batch: " + std::to_string(batch.size()) + " tasks exceed the limit of " +
                                std::to_string(kMaxBruteForceTasks));
  }
  if (batch.arrivals.size() != batch.tolerances.size()) {
    throw std::invalid_argument("brute_force_batch: arrivals and tolerances differ in length");
  }
  BatchResult out;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  bool first = true;
  do {
    auto plan = list_schedule(batch, order);
    const Rational l1 = plan_l1(batch, plan, impact);
    if (first || l1 > out.best_l1) {
      out.best_l1 = l1;
      out.best_plan = std::move(plan);
      first = false;
    }
    ++out.orders_enumerated;
  } while (std::next_permutation(order.begin(), order.end()));

  out.fifo_plan = engine_plan(batch, StrategyId::Fifo);
  out.fifo_l1 = plan_l1(batch, out.fifo_plan, impact);
  out.eas_plan = engine_plan(batch, StrategyId::Eas);
  out.eas_l1 = plan_l1(batch, out.eas_plan, impact);
  return out;
}

std::vector<ExchangePair> exchange_pairs(const BatchInstance& batch, const SchedulePlan& fifo) {
  std::vector<ExchangePair> out;
  const auto m = static_cast<std::size_t>(batch.servers);
  const auto& e = fifo.entries;
  for (std::size_t p = 0; p < e.size(); ++p) {
    for (std::size_t q = p + m + 1; q < e.size(); ++q) {
      const std::size_t x = e[p].task;
      const std::size_t y = e[q].task;
      if (batch.deadline(x) > batch.deadline(y) && batch.arrivals[y] <= e[p].start) out.push_back({x, y});
    }
  }
  return out;
}

ExchangeCheck check_exchange(const BatchInstance& batch, const SchedulePlan& fifo, const ExchangePair& pair) {
  std::vector<std::size_t> order;
  for (const auto& e : fifo.entries) order.push_back(e.task);
  auto px = std::find(order.begin(), order.end(), pair.first);
  auto py = std::find(order.begin(), order.end(), pair.second);
  if (px == order.end() || py == order.end()) throw std::invalid_argument("exchange pair not in plan");
  std::iter_swap(px, py);
  const auto before = excess_delays(batch, fifo);
  const auto after = excess_delays(batch, list_schedule(batch, order));

  ExchangeCheck c;
  c.pair = pair;
  c.sum_before = before[pair.first] + before[pair.second];
  c.sum_after = after[pair.first] + after[pair.second];
  c.max_before = std::max(before[pair.first], before[pair.second]);
  c.max_after = std::max(after[pair.first], after[pair.second]);
  return c;
}

BatchInstance random_batch(std::mt19937_64& rng, std::size_t tasks, int servers, int duration, int max_tolerance) {
  if (duration < 1) throw std::invalid_argument("random_batch needs duration >= 1");
  std::uniform_int_distribution<int> arrival(0, duration - 1);
  std::uniform_int_distribution<int> tolerance(0, max_tolerance);
  BatchInstance b;
  b.servers = servers;
  b.duration = Rational(duration);
  for (std::size_t i = 0; i < tasks; ++i) {
    b.arrivals.emplace_back(arrival(rng));
    b.tolerances.emplace_back(tolerance(rng));
  }
  return b;
}

namespace {

std::string describe_batch(const BatchInstance& b) {
  std::ostringstream s;
  s << "m=" << b.servers << " duration=" << to_string(b.duration) << " tasks (a,w):";
  for (std::size_t i = 0; i < b.size(); ++i) s << " (" << to_string(b.arrivals[i]) << ',' << to_string(b.tolerances[i]) << ')';
  return s.str();
}

}  // namespace

BatchOracleReport verify_batch_oracle(std::uint64_t seed, int instances, std::size_t max_tasks) {
  if (max_tasks < 2 || max_tasks > kMaxBruteForceTasks) {
    throw std::invalid_argument("verify_batch_oracle: max_tasks must be in [2, " +
                                std::to_string(kMaxBruteForceTasks) + "]");
  }
  BatchOracleReport report;
  report.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, max_tasks);
  const auto constant = constant_impact(Rational(-1, 10));
  const auto decreasing = decreasing_abs_impact(Rational(1, 200));
  auto fail = [&](std::string what) {
    if (!report.first_failure) report.first_failure = std::move(what);
  };

  for (int i = 0; i < instances; ++i) {
    const std::size_t n = size(rng);
    const int m = 1 + i % 2;
    const auto batch = random_batch(rng, n, m);
    ++report.instances;

    const auto flat = brute_force_batch(batch, constant);
    report.orders_enumerated += flat.orders_enumerated;
    if (!flat.fifo_optimal() || !flat.eas_optimal()) {
      ++report.constant_not_optimal;
      fail("constant impact: FIFO " + to_string(flat.fifo_l1) + ", EAS " + to_string(flat.eas_l1) + ", optimum " +
           to_string(flat.best_l1) + " on " + describe_batch(batch));
    }

    const auto res = brute_force_batch(batch, decreasing);
    report.orders_enumerated += res.orders_enumerated;
    report.eas_optimal += res.eas_optimal() ? 1 : 0;

    std::vector<std::pair<Rational, Rational>> samples;
    const auto e_fifo = excess_delays(batch, res.fifo_plan);
    const auto e_eas = excess_delays(batch, res.eas_plan);
    for (std::size_t x = 0; x + 1 < n; ++x) {
      samples.emplace_back(e_fifo[x], e_fifo[x + 1]);
      samples.emplace_back(e_eas[x], e_eas[x + 1]);
    }
    if (!decreasing.matches_declared_class(samples) || !constant.matches_declared_class(samples)) {
      ++report.class_mismatches;
      fail("impact function does not match its declared class on " + describe_batch(batch));
    }

    const auto pairs = exchange_pairs(batch, res.fifo_plan);
    if (pairs.empty()) continue;
    ++report.instances_with_pairs;
    if (res.eas_l1 < res.fifo_l1) {
      ++report.eas_below_fifo;
      fail("non-increasing impact: EAS " + to_string(res.eas_l1) + " < FIFO " + to_string(res.fifo_l1) + " on " +
           describe_batch(batch));
    }
    for (const auto& p : pairs) {
      ++report.pairs_checked;
      const auto c = check_exchange(batch, res.fifo_plan, p);
      if (!c.holds()) {
        ++report.exchange_failures;
        fail("exchange of tasks " + std::to_string(p.first) + " and " + std::to_string(p.second) + ": sums " +
             to_string(c.sum_before) + " -> " + to_string(c.sum_after) + ", max " + to_string(c.max_before) +
             " -> " + to_string(c.max_after) + " on " + describe_batch(batch));
      }
    }
  }
  return report;
}

void write_text_report(std::ostream& out, const BatchOracleReport& r) {
  out << "Batch exchange oracle (seed " << r.seed << ")\n"
      << "  instances: " << r.instances << " (" << r.instances_with_pairs << " with exchange pairs)\n"
      << "  service orders enumerated: " << r.orders_enumerated << '\n'
      << "  exchange pairs checked: " << r.pairs_checked << '\n'
      << "  constant impact, FIFO or EAS below optimum: " << r.constant_not_optimal << '\n'
      << "  non-increasing impact, EAS below FIFO: " << r.eas_below_fifo << '\n'
      << "  exchange pair failures: " << r.exchange_failures << '\n'
      << "  declared class mismatches: " << r.class_mismatches << '\n'
      << "  non-increasing impact, EAS optimal: " << r.eas_optimal << " of " << r.instances << '\n';
  if (r.first_failure) out << "  first failure: " << *r.first_failure << '\n';
  out << "\nresult: " << (r.passed() ? "PASS" : "FAIL") << '\n';
}

void write_json_summary(std::ostream& out, const BatchOracleReport& r) {
  nlohmann::json j{{"proposition", 1},
                   {"passed", r.passed()},
                   {"seed", r.seed},
                   {"instances", r.instances},
                   {"instances_with_pairs", r.instances_with_pairs},
                   {"pairs_checked", r.pairs_checked},
                   {"orders_enumerated", r.orders_enumerated},
                   {"constant_not_optimal", r.constant_not_optimal},
                   {"eas_below_fifo", r.eas_below_fifo},
                   {"exchange_failures", r.exchange_failures},
                   {"class_mismatches", r.class_mismatches},
                   {"eas_optimal", r.eas_optimal},
                   {"first_failure", r.first_failure ? nlohmann::json(*r.first_failure) : nlohmann::json(nullptr)}};
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Family F
// ---------------------------------------------------------------------------

bool StrategyOutcome::passed() const {
  if (expected_active && *expected_active != active_at_end) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

bool PeriodicReport::passed() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const StrategyOutcome& o) { return o.passed(); });
}

std::optional<std::string> PeriodicReport::first_failure() const {
  for (const auto& o : outcomes) {
    for (const auto& c : o.checks) {
      if (!c.passed) return std::string(to_string(o.strategy)) + ": " + c.name + ": " + c.detail;
    }
  }
  return std::nullopt;
}

SimConfig family_f_sim_config(const ScenarioFamilyConfig& cfg) {
  SimConfig sim;
  sim.servers = cfg.m;
  sim.history_window = cfg.b;
  sim.expectation_source = ExpectationSource::Tolerance;
  sim.happiness_enabled = true;
  return sim;
}

namespace {

using Records = std::vector<CompletionRecord<Rational>>;

std::string describe(const CompletionRecord<Rational>& r, int group) {
  std::ostringstream s;
  s << "task " << r.task_id << " user " << r.user_id << " (U" << group + 1 << ", slot " << r.offset_index
    << ") a=" << to_string(r.arrival) << " s=" << to_string(r.start) << " r=" << to_string(r.response_time)
    << " e=" << to_string(r.excess_delay) << " w_submit=" << to_string(r.tolerance)
    << " w_after=" << to_string(r.tolerance_after) << " h_after=" << to_string(r.happiness_after);
  return s.str();
}

class Checker {
 public:
  Checker(const SimTrace<Rational>& trace, std::vector<CheckResult>& out) : trace_(trace), out_(out) {}

  int group(UserId u) const { return trace_.groups.at(u); }

  Records of_user(UserId u) const {
    Records out;
    for (const auto& c : trace_.completions) {
      if (c.user_id == u) out.push_back(c);
    }
    return out;
  }

  std::vector<UserId> users_in(int g) const {
    std::vector<UserId> out;
    for (std::size_t u = 0; u < trace_.groups.size(); ++u) {
      if (trace_.groups[u] == g) out.push_back(static_cast<UserId>(u));
    }
    return out;
  }

  void pass(std::string name, std::string detail = {}) { out_.push_back({std::move(name), true, std::move(detail)}); }
  void fail(std::string name, std::string detail) { out_.push_back({std::move(name), false, std::move(detail)}); }

  /// Passes iff `ok` holds for every record accepted by `filter`.
  template <class Filter, class Pred>
  void all_records(const std::string& name, Filter filter, Pred ok, const std::string& expectation) {
    std::size_t checked = 0;
    for (const auto& r : trace_.completions) {
      if (!filter(r)) continue;
      ++checked;
      if (!ok(r)) {
        fail(name, "expected " + expectation + "; first divergence: " + describe(r, group(r.user_id)));
        return;
      }
    }
    if (checked == 0) {
      fail(name, "no records to check");
      return;
    }
    pass(name, std::to_string(checked) + " records");
  }

  void closed_forms(const std::map<int, Rational>& by_slot, std::optional<Rational> until) {
    std::ostringstream expect;
    expect << "r by slot {";
    for (const auto& [slot, r] : by_slot) expect << ' ' << slot << ':' << to_string(r);
    expect << " }";
    all_records(
        "closed-form response times", [&](const auto& r) { return !until || r.arrival < *until; },
        [&](const auto& r) {
          auto it = by_slot.find(r.offset_index);
          return it != by_slot.end() && it->second == r.response_time;
        },
        expect.str());
  }

  /// Happiness after the n-th completion (1-based) of every user in `g`.
  void happiness_at(const std::string& name, int g, int n, const Rational& expected, bool above_before) {
    for (UserId u : users_in(g)) {
      const auto recs = of_user(u);
      if (recs.size() < static_cast<std::size_t>(n)) {
        fail(name, "user " + std::to_string(u) + " completed only " + std::to_string(recs.size()) + " tasks");
        return;
      }
      const auto& at = recs[static_cast<std::size_t>(n - 1)];
      if (at.happiness_after != expected) {
        fail(name, "expected h=" + to_string(expected) + " at completion " + std::to_string(n) +
                       "; first divergence: " + describe(at, g));
        return;
      }
      if (above_before) {
        for (int i = 0; i + 1 < n; ++i) {
          const auto& r = recs[static_cast<std::size_t>(i)];
          if (!(r.happiness_after > trace_.critical[u])) {
            fail(name, "reached the critical level before completion " + std::to_string(n) +
                           "; first divergence: " + describe(r, g));
            return;
          }
        }
      }
    }
    pass(name, "h=" + to_string(expected) + " at completion " + std::to_string(n));
  }

  /// w limit as the mean of the last two post-completion tolerance values.
  void tolerance_limit(const std::string& name, int g, const Rational& expected, int min_completions) {
    for (UserId u : users_in(g)) {
      const auto recs = of_user(u);
      if (recs.size() < static_cast<std::size_t>(std::max(min_completions, 2))) {
        fail(name, "user " + std::to_string(u) + " completed only " + std::to_string(recs.size()) + " tasks");
        return;
      }
      const auto& last = recs.back();
      const auto& prev = recs[recs.size() - 2];
      const Rational limit = (last.tolerance_after + prev.tolerance_after) / 2;
      if (limit != expected) {
        fail(name, "expected w limit " + to_string(expected) + ", got " + to_string(limit) +
                       "; last record: " + describe(last, g));
        return;
      }
    }
    pass(name, "w -> " + to_string(expected));
  }

  void group_activity(const std::string& name, int g, bool expected) {
    for (UserId u : users_in(g)) {
      if (trace_.final_active.at(u) != expected) {
        fail(name, "user " + std::to_string(u) + " (U" + std::to_string(g + 1) + ") is " +
                       (expected ? "inactive" : "active") + " at the end");
        return;
      }
    }
    pass(name, std::string("U") + std::to_string(g + 1) + (expected ? " active" : " inactive"));
  }

  void never_below(const std::string& name, int floor) {
    for (const auto& s : trace_.active_timeline) {
      if (s.active < floor) {
        fail(name, std::to_string(s.active) + " active at t=" + to_string(s.time));
        return;
      }
    }
    pass(name, "active >= " + std::to_string(floor) + " throughout");
  }

 private:
  const SimTrace<Rational>& trace_;
  std::vector<CheckResult>& out_;
};

std::optional<Rational> first_abandonment(const SimTrace<Rational>& trace) {
  if (trace.abandonments.empty()) return std::nullopt;
  return trace.abandonments.front().time;
}

void check_prop2(const ScenarioFamilyConfig& cfg, StrategyOutcome& o) {
  const Rational D = cfg.delta, E = cfg.epsilon, c = cfg.critical;
  Checker k(o.trace, o.checks);
  const int U1 = 0, U2 = 1;
  if (o.strategy == StrategyId::Fifo) {
    o.expected_active = cfg.m;
    k.closed_forms({{0, D}, {1, 2 * D - E}, {2, 3 * D - 4 * E / 3}}, std::nullopt);
    const Rational bound = 2 * D - 4 * E / 3;
    const Rational horizon = cfg.period_length * cfg.b;
    k.all_records(
        "U2 tolerance below 2*delta-4*epsilon/3 for k<b",
        [&](const auto& r) { return k.group(r.user_id) == U2 && r.arrival < horizon; },
        [&](const auto& r) { return r.tolerance < bound; }, "w < " + to_string(bound));
    k.happiness_at("U2 happiness reaches c at iteration b-1", U2, cfg.b - 1, c, true);
    k.group_activity("U1 survives", U1, true);
    k.group_activity("U2 abandons", U2, false);
    k.tolerance_limit("U1 tolerance limit (delta-epsilon)/2", U1, (D - E) / 2, cfg.b);
  } else if (o.strategy == StrategyId::Eas) {
    o.expected_active = 2 * cfg.m;
    k.closed_forms({{0, D}, {1, 3 * D - E}, {2, 2 * D - 4 * E / 3}}, std::nullopt);
    k.never_below("all users active at every iteration", 2 * cfg.m);
    k.tolerance_limit("U1 tolerance limit delta-epsilon/2", U1, D - E / 2, cfg.b);
    k.tolerance_limit("U2 tolerance limit delta-4*epsilon/3", U2, D - 4 * E / 3, cfg.b);
  }
}

void check_prop3(const ScenarioFamilyConfig& cfg, StrategyOutcome& o) {
  const Rational D = cfg.delta, E = cfg.epsilon, h0 = cfg.initial_happiness, c = cfg.critical;
  Checker k(o.trace, o.checks);
  const int U1 = 0, U2 = 1;
  if (o.strategy == StrategyId::Fifo) {
    o.expected_active = 2 * cfg.m;
    const auto abandoned = first_abandonment(o.trace);
    k.closed_forms({{0, D}, {1, 2 * D - E}, {2, 3 * D - 2 * E}}, abandoned);
    const Rational expected = (2 * h0 + (cfg.b - 1) * c) / (cfg.b + 1);
    k.happiness_at("U2 happiness after b-1 drops", U2, cfg.b - 1, expected, true);
    const Rational settle = 3 * cfg.b * D;
    k.all_records(
        "U2 equilibrium e=0 once a >= 3*b*delta (all users active)",
        [&](const auto& r) {
          return k.group(r.user_id) == U2 && r.arrival >= settle && (!abandoned || r.arrival < *abandoned);
        },
        [](const auto& r) { return r.excess_delay == Rational(0); }, "e = 0");
    k.tolerance_limit("U1 tolerance limit (delta-epsilon)/2", U1, (D - E) / 2, cfg.b);
  } else if (o.strategy == StrategyId::Eas) {
    o.expected_active = cfg.m;
  }
}

void check_prop4(const ScenarioFamilyConfig& cfg, StrategyOutcome& o) {
  const Rational D = cfg.delta, E = cfg.epsilon;
  Checker k(o.trace, o.checks);
  if (o.strategy == StrategyId::Fifo || o.strategy == StrategyId::Eas) {
    o.expected_active = cfg.m;
    k.closed_forms({{0, D}, {1, 2 * D - E}}, std::nullopt);
  }
}

}  // namespace

PeriodicReport verify_periodic(int proposition, const ScenarioFamilyConfig& cfg,
                               std::span<const StrategyId> strategies) {
  if (proposition != cfg.proposition) {
    throw std::invalid_argument("verify_periodic: config was built for proposition " +
                                std::to_string(cfg.proposition) + ", not " + std::to_string(proposition));
  }
  validate_family_f(cfg);
  if (cfg.periods < cfg.b + 2) {
    throw std::invalid_argument("verify_periodic: run length of " + std::to_string(cfg.periods) +
                                " periods is below b+2 = " + std::to_string(cfg.b + 2));
  }
  PeriodicReport report;
  report.proposition = proposition;
  report.config = cfg;
  const auto workload = generate_family_f(cfg);
  const auto sim = family_f_sim_config(cfg);
  for (StrategyId s : strategies) {
    StrategyOutcome o;
    o.strategy = s;
    o.trace = run_simulation<Rational>(sim, workload, s);
    o.active_at_end = o.trace.active_at_end();
    switch (proposition) {
      case 2: check_prop2(cfg, o); break;
      case 3: check_prop3(cfg, o); break;
      case 4: check_prop4(cfg, o); break;
      default: break;
    }
    if (o.expected_active) {
      const bool ok = *o.expected_active == o.active_at_end;
      o.checks.insert(o.checks.begin(),
                      CheckResult{"active users at end", ok,
                                  "expected " + std::to_string(*o.expected_active) + ", got " +
                                      std::to_string(o.active_at_end)});
    }
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

void write_text_report(std::ostream& out, const PeriodicReport& report) {
  const auto& cfg = report.config;
  out << "Family F scenario, proposition " << report.proposition << '\n'
      << "  m=" << cfg.m << " delta=" << to_string(cfg.delta) << " epsilon=" << to_string(cfg.epsilon)
      << " b=" << cfg.b << " periods=" << cfg.periods << " period=" << to_string(cfg.period_length) << '\n'
      << "  h0=" << to_string(cfg.initial_happiness) << " c=" << to_string(cfg.critical)
      << " (any h0 > c is admissible)\n"
      << "  active means h > c; L0 counts entries with h >= c\n";
  for (const auto& o : report.outcomes) {
    const auto norms = happiness_norms(o.trace.final_happiness, std::span<const Rational>(o.trace.critical));
    out << '\n'
        << to_string(o.strategy) << ": " << (o.passed() ? "PASS" : "FAIL") << "  active=" << o.active_at_end;
    if (o.expected_active) out << " (expected " << *o.expected_active << ")";
    out << "  L1=" << to_string(norms.l1) << "  L0=" << norms.l0_active << "  completions=" << o.trace.completions.size()
        << '\n';
    for (const auto& c : o.checks) {
      out << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name;
      if (!c.detail.empty()) out << ": " << c.detail;
      out << '\n';
    }
  }
  out << "\nresult: " << (report.passed() ? "PASS" : "FAIL") << '\n';
}

void write_json_summary(std::ostream& out, const PeriodicReport& report) {
  using nlohmann::json;
  const auto& cfg = report.config;
  json j;
  j["proposition"] = report.proposition;
  j["passed"] = report.passed();
  j["config"] = {{"m", cfg.m},
                 {"delta", to_string(cfg.delta)},
                 {"epsilon", to_string(cfg.epsilon)},
                 {"b", cfg.b},
                 {"periods", cfg.periods},
                 {"h0", to_string(cfg.initial_happiness)},
                 {"c", to_string(cfg.critical)}};
  j["outcomes"] = json::array();
  for (const auto& o : report.outcomes) {
    json jo;
    jo["strategy"] = std::string(to_string(o.strategy));
    jo["passed"] = o.passed();
    jo["active_at_end"] = o.active_at_end;
    jo["expected_active"] = o.expected_active ? json(*o.expected_active) : json(nullptr);
    jo["checks"] = json::array();
    for (const auto& c : o.checks) jo["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["outcomes"].push_back(std::move(jo));
  }
  out << j.dump(2) << '\n';
}

}  // namespace psim
