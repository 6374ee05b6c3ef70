#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "psim/prop_verifier.hpp"

namespace {

using psim::Rational;
using psim::StrategyId;

psim::BatchInstance two_tasks() {
  psim::BatchInstance b;
  b.arrivals = {Rational(0), Rational(0)};
  b.tolerances = {Rational(20), Rational(0)};
  return b;
}

TEST(ListSchedule, EarliestFreeServer) {
  psim::BatchInstance b;
  b.arrivals = {Rational(0), Rational(0), Rational(0)};
  b.tolerances = {Rational(0), Rational(0), Rational(0)};
  b.servers = 2;
  const std::vector<std::size_t> order{2, 0, 1};
  const auto plan = psim::list_schedule(b, order);
  const auto s = plan.starts(3);
  EXPECT_EQ(s[2], Rational(0));
  EXPECT_EQ(s[0], Rational(0));
  EXPECT_EQ(s[1], Rational(10));
  EXPECT_EQ(plan.entries[1].server, 1u);
}

TEST(BruteForce, TwoTasksOneServer) {
  const auto batch = two_tasks();
  const auto impact = psim::decreasing_abs_impact(Rational(1, 200));
  // Hand evaluation of both orders: h = 1 - |e| / 200 per task.
  // 0 then 1: e = {-20, 10}; 1 then 0: e = {-10, 0}.
  const Rational first_order = (1 - Rational(20, 200)) + (1 - Rational(10, 200));
  const Rational second_order = (1 - Rational(10, 200)) + 1;
  const auto r = psim::brute_force_batch(batch, impact);
  EXPECT_EQ(r.orders_enumerated, 2u);
  EXPECT_EQ(r.best_l1, std::max(first_order, second_order));
  EXPECT_EQ(r.fifo_l1, first_order);
  EXPECT_EQ(r.eas_l1, second_order);
  EXPECT_TRUE(r.eas_optimal());
  EXPECT_FALSE(r.fifo_optimal());
}

TEST(BruteForce, ConstantImpactEveryOrderOptimal) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto batch = psim::random_batch(rng, 5, 1 + i % 2);
    const auto r = psim::brute_force_batch(batch, psim::constant_impact(Rational(-1, 10)));
    EXPECT_TRUE(r.fifo_optimal());
    EXPECT_TRUE(r.eas_optimal());
    EXPECT_EQ(r.orders_enumerated, 120u);
  }
}

TEST(BruteForce, OversizedBatchRejected) {
  std::mt19937_64 rng(1);
  const auto batch = psim::random_batch(rng, psim::kMaxBruteForceTasks + 1, 1);
  EXPECT_THROW(psim::brute_force_batch(batch, psim::constant_impact(Rational(0))), std::invalid_argument);
}

TEST(EnginePlan, FifoFollowsArrivalOrder) {
  psim::BatchInstance b;
  b.arrivals = {Rational(3), Rational(0), Rational(1)};
  b.tolerances = {Rational(0), Rational(50), Rational(2)};
  const auto fifo = psim::engine_plan(b, StrategyId::Fifo);
  ASSERT_EQ(fifo.entries.size(), 3u);
  EXPECT_EQ(fifo.entries[0].task, 1u);
  EXPECT_EQ(fifo.entries[1].task, 2u);
  EXPECT_EQ(fifo.entries[2].task, 0u);
  const auto eas = psim::engine_plan(b, StrategyId::Eas);
  EXPECT_EQ(eas.entries[1].task, 2u);
  EXPECT_EQ(eas.entries[2].task, 0u);
}

TEST(ImpactClass, DeclaredClassesHold) {
  std::vector<std::pair<Rational, Rational>> samples;
  for (int x = -20; x <= 20; x += 5) {
    for (int y = -20; y <= 20; y += 5) samples.push_back({Rational(x), Rational(y)});
  }
  EXPECT_TRUE(psim::constant_impact(Rational(-1, 10)).matches_declared_class(samples));
  EXPECT_TRUE(psim::decreasing_abs_impact(Rational(1, 200)).matches_declared_class(samples));
  EXPECT_TRUE(psim::increasing_abs_impact(Rational(1, 200)).matches_declared_class(samples));
  auto mislabelled = psim::decreasing_abs_impact(Rational(1, 200));
  mislabelled.declared = psim::MonotonicityClass::Constant;
  EXPECT_FALSE(mislabelled.matches_declared_class(samples));
}

TEST(Exchange, SwapPreservesSumAndLowersMax) {
  // One server, Δ = 10: task 0 waits with a loose deadline while task 3,
  // already queued, has a tight one.
  psim::BatchInstance b;
  b.arrivals = {Rational(0), Rational(0), Rational(0), Rational(0)};
  b.tolerances = {Rational(100), Rational(100), Rational(100), Rational(0)};
  const std::vector<std::size_t> order{0, 1, 2, 3};
  const auto fifo = psim::list_schedule(b, order);
  const auto pairs = psim::exchange_pairs(b, fifo);
  ASSERT_FALSE(pairs.empty());
  EXPECT_EQ(pairs[0].first, 0u);
  EXPECT_EQ(pairs[0].second, 3u);
  const auto check = psim::check_exchange(b, fifo, pairs[0]);
  EXPECT_TRUE(check.holds());
  EXPECT_EQ(check.sum_before, check.sum_after);
  EXPECT_EQ(check.max_before, Rational(30));
}

TEST(BatchOracle, SmallSweepPasses) {
  const auto report = psim::verify_batch_oracle(3, 25, 6);
  EXPECT_TRUE(report.passed()) << report.first_failure.value_or("");
  EXPECT_EQ(report.instances, 25);
  EXPECT_GT(report.orders_enumerated, 0u);
}

TEST(BatchOracle, JsonSummaryParses) {
  const auto report = psim::verify_batch_oracle(4, 5, 4);
  std::ostringstream out;
  psim::write_json_summary(out, report);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j.at("instances").get<int>(), 5);
  EXPECT_TRUE(j.at("passed").get<bool>());
}

const psim::CheckResult* find_check(const psim::StrategyOutcome& o, const std::string& fragment) {
  for (const auto& c : o.checks) {
    if (c.name.find(fragment) != std::string::npos) return &c;
  }
  return nullptr;
}

TEST(Periodic, ThreeSlotScenarioPasses) {
  const auto cfg = psim::make_family_f_config(2, 2, Rational(10), Rational(6), 5);
  const std::vector<StrategyId> both{StrategyId::Fifo, StrategyId::Eas};
  const auto report = psim::verify_periodic(2, cfg, both);
  EXPECT_TRUE(report.passed()) << report.first_failure().value_or("");
  ASSERT_EQ(report.outcomes.size(), 2u);
  EXPECT_EQ(report.outcomes[0].active_at_end, 2);
  EXPECT_EQ(report.outcomes[1].active_at_end, 4);
}

TEST(Periodic, TwoSlotScenarioPasses) {
  const auto cfg = psim::make_family_f_config(4, 3, Rational(10), Rational(6), 4);
  const std::vector<StrategyId> both{StrategyId::Fifo, StrategyId::Eas};
  const auto report = psim::verify_periodic(4, cfg, both);
  EXPECT_TRUE(report.passed()) << report.first_failure().value_or("");
  for (const auto& o : report.outcomes) EXPECT_EQ(o.active_at_end, 3);
}

TEST(Periodic, SlowDecayTrajectory) {
  const auto cfg = psim::make_family_f_config(3, 2, Rational(10), Rational(4), 5);
  const std::vector<StrategyId> both{StrategyId::Fifo, StrategyId::Eas};
  const auto report = psim::verify_periodic(3, cfg, both);
  const auto& fifo = report.outcomes.at(0);
  const auto* traj = find_check(fifo, "happiness");
  ASSERT_NE(traj, nullptr);
  EXPECT_TRUE(traj->passed) << traj->detail;
  EXPECT_TRUE(report.outcomes.at(1).passed());
  EXPECT_EQ(report.outcomes.at(1).active_at_end, 2);
}

TEST(Periodic, DivergenceReportsState) {
  auto cfg = psim::make_family_f_config(2, 1, Rational(10), Rational(6), 5);
  cfg.groups[0].initial_tolerance = Rational(0);
  cfg.groups[0].tolerance_padding = Rational(0);
  cfg.groups[0].impact = psim::step_above_zero(Rational(2));
  const std::vector<StrategyId> fifo{StrategyId::Fifo};
  const auto report = psim::verify_periodic(2, cfg, fifo);
  EXPECT_FALSE(report.passed());
  ASSERT_TRUE(report.first_failure());
  bool has_divergence = false;
  for (const auto& c : report.outcomes[0].checks) {
    has_divergence |= !c.passed && c.detail.find("first divergence") != std::string::npos;
  }
  EXPECT_TRUE(has_divergence);
}

TEST(Periodic, RejectsMismatchedOrShortConfigs) {
  const std::vector<StrategyId> fifo{StrategyId::Fifo};
  const auto cfg = psim::make_family_f_config(2, 2, Rational(10), Rational(6), 5);
  EXPECT_THROW(psim::verify_periodic(4, cfg, fifo), std::invalid_argument);
  const auto short_cfg = psim::make_family_f_config(2, 2, Rational(10), Rational(6), 5, 3);
  EXPECT_THROW(psim::verify_periodic(2, short_cfg, fifo), std::invalid_argument);
}

TEST(Periodic, TextReportListsStrategies) {
  const auto cfg = psim::make_family_f_config(4, 1, Rational(10), Rational(6), 3);
  const std::vector<StrategyId> both{StrategyId::Fifo, StrategyId::Eas};
  std::ostringstream out;
  psim::write_text_report(out, psim::verify_periodic(4, cfg, both));
  EXPECT_NE(out.str().find("fifo: PASS"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("eas: PASS"), std::string::npos) << out.str();
}

}  // namespace
