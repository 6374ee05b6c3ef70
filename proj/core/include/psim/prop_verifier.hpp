#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "psim/engine.hpp"
#include "psim/model.hpp"
#include "psim/workloads.hpp"

namespace psim {

// ---------------------------------------------------------------------------
// Batch scheduling: exhaustive plans versus FIFO and EAS
// ---------------------------------------------------------------------------

struct PlannedTask {
  std::size_t task = 0;  // index into the batch
  std::size_t server = 0;
  Rational start{};
};

/// Tasks in service order, each with its server and start time.
struct SchedulePlan {
  std::vector<PlannedTask> entries;

  /// Start time of every batch task, indexed by task.
  std::vector<Rational> starts(std::size_t tasks) const;
};

/// A batch of equal-length tasks, one user per task.
struct BatchInstance {
  std::vector<Rational> arrivals;
  std::vector<Rational> tolerances;
  Rational duration{10};
  int servers = 1;
  Rational initial_happiness{1};

  std::size_t size() const { return arrivals.size(); }
  Rational deadline(std::size_t i) const { return arrivals.at(i) + tolerances.at(i); }
};

enum class MonotonicityClass {
  Constant,
  NonIncreasing,  // in |e_x| + |e_y|
  NonDecreasing,  // in |e_x| + |e_y|
};

std::string_view to_string(MonotonicityClass c);

/// Happiness change of a pair of tasks as a function of their excess delays.
/// Built from a per-task impact so that a plan's L1 norm can be evaluated.
struct PairImpactFunction {
  MonotonicityClass declared = MonotonicityClass::Constant;
  std::function<Rational(const Rational&)> per_task;

  Rational operator()(const Rational& ex, const Rational& ey) const { return per_task(ex) + per_task(ey); }

  /// Checks the declared class on every pair of sampled points.
  bool matches_declared_class(std::span<const std::pair<Rational, Rational>> samples) const;
};

PairImpactFunction constant_impact(Rational change);
/// -slope * |e|.
PairImpactFunction decreasing_abs_impact(Rational slope);
/// +slope * |e|.
PairImpactFunction increasing_abs_impact(Rational slope);

/// Assigns tasks in `order` to the earliest free server (lowest index on
/// ties), starting each at max(server free time, arrival).
SchedulePlan list_schedule(const BatchInstance& batch, std::span<const std::size_t> order);

/// e(t) = start - arrival - tolerance for every task.
std::vector<Rational> excess_delays(const BatchInstance& batch, const SchedulePlan& plan);

/// Sum over tasks of clamp(h0 + i(e)).
Rational plan_l1(const BatchInstance& batch, const SchedulePlan& plan, const PairImpactFunction& impact);

/// Plan produced by the simulation engine under `strategy`.
SchedulePlan engine_plan(const BatchInstance& batch, StrategyId strategy);

struct BatchResult {
  SchedulePlan best_plan;
  Rational best_l1{};
  SchedulePlan fifo_plan;
  Rational fifo_l1{};
  SchedulePlan eas_plan;
  Rational eas_l1{};
  std::uint64_t orders_enumerated = 0;

  bool fifo_optimal() const { return fifo_l1 == best_l1; }
  bool eas_optimal() const { return eas_l1 == best_l1; }
};

inline constexpr std::size_t kMaxBruteForceTasks = 9;

/// Enumerates every service order. Throws std::invalid_argument for more
/// than kMaxBruteForceTasks tasks.
BatchResult brute_force_batch(const BatchInstance& batch, const PairImpactFunction& impact);

/// Positions x < y in the FIFO order with x + m < y, deadline(x) > deadline(y)
/// and task y already waiting when task x starts.
struct ExchangePair {
  std::size_t first = 0;   // task index served earlier under FIFO
  std::size_t second = 0;  // task index served later under FIFO
};

std::vector<ExchangePair> exchange_pairs(const BatchInstance& batch, const SchedulePlan& fifo);

struct ExchangeCheck {
  ExchangePair pair;
  Rational sum_before{};
  Rational sum_after{};
  Rational max_before{};
  Rational max_after{};

  bool holds() const { return sum_before == sum_after && max_before > max_after; }
};

/// Swaps the pair in the FIFO order and compares the two tasks' excess delays.
ExchangeCheck check_exchange(const BatchInstance& batch, const SchedulePlan& fifo, const ExchangePair& pair);

/// Integer arrivals in [0, duration), integer tolerances in [0, max_tolerance].
BatchInstance random_batch(std::mt19937_64& rng, std::size_t tasks, int servers, int duration = 10,
                           int max_tolerance = 30);

/// Randomized batch sweep: Constant-class optimality of FIFO and EAS, EAS >=
/// FIFO under a NonIncreasing-class impact, and every exchange pair.
struct BatchOracleReport {
  std::uint64_t seed = 0;
  int instances = 0;
  int instances_with_pairs = 0;
  std::uint64_t pairs_checked = 0;
  std::uint64_t orders_enumerated = 0;
  int constant_not_optimal = 0;
  int eas_below_fifo = 0;
  int exchange_failures = 0;
  int class_mismatches = 0;
  int eas_optimal = 0;  // informational: NonIncreasing instances where EAS attains the optimum
  std::optional<std::string> first_failure;

  bool passed() const { return !first_failure.has_value(); }
};

BatchOracleReport verify_batch_oracle(std::uint64_t seed, int instances, std::size_t max_tasks = 8);

void write_text_report(std::ostream& out, const BatchOracleReport& report);
void write_json_summary(std::ostream& out, const BatchOracleReport& report);

// ---------------------------------------------------------------------------
// Family F periodic scenarios
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct StrategyOutcome {
  StrategyId strategy = StrategyId::Fifo;
  int active_at_end = 0;
  std::optional<int> expected_active;
  std::vector<CheckResult> checks;
  SimTrace<Rational> trace;

  bool passed() const;
};

struct PeriodicReport {
  int proposition = 2;
  ScenarioFamilyConfig config;
  std::vector<StrategyOutcome> outcomes;

  bool passed() const;
  /// Detail of the first failing check, if any.
  std::optional<std::string> first_failure() const;
};

/// Runs the scenario through the exact engine under each strategy and checks
/// active counts, closed-form response times, happiness and tolerance values.
/// Throws std::invalid_argument if `cfg` is outside the proposition's bounds.
PeriodicReport verify_periodic(int proposition, const ScenarioFamilyConfig& cfg,
                               std::span<const StrategyId> strategies);

/// Engine settings for an exact family F run.
SimConfig family_f_sim_config(const ScenarioFamilyConfig& cfg);

void write_text_report(std::ostream& out, const PeriodicReport& report);
void write_json_summary(std::ostream& out, const PeriodicReport& report);

}  // namespace psim
