#include <gtest/gtest.h>

#include <vector>

#include "psim/user_behavior.hpp"
#include "support/oracles.hpp"

namespace {

using psim::ExpectationModel;
using psim::Rational;

ExpectationModel seeded(std::initializer_list<double> samples) {
  ExpectationModel m;
  for (double s : samples) m.observe(s);
  return m;
}

TEST(Expectation, FirstSampleBecomesEwma) {
  const auto m = psim::update_expectation(ExpectationModel{}, 10.0);
  ASSERT_TRUE(m.ewma());
  EXPECT_DOUBLE_EQ(*m.ewma(), 10.0);
}

TEST(Expectation, SecondSampleMatchesRecursion) {
  const auto m = psim::update_expectation(psim::update_expectation(ExpectationModel{}, 10.0), 20.0);
  EXPECT_DOUBLE_EQ(*m.ewma(), oracle::ewma({10.0, 20.0}, 0.8));
  EXPECT_DOUBLE_EQ(*m.ewma(), 18.0);
}

TEST(Expectation, OutlierKeptInShortWindowOnly) {
  auto m = seeded({50, 50, 50, 50});
  const double before = *m.ewma();
  m = psim::update_expectation(m, 30.0);
  EXPECT_DOUBLE_EQ(*m.ewma(), before);
  EXPECT_DOUBLE_EQ(m.recent().back(), 30.0);
  EXPECT_EQ(m.accepted().size(), 4u);
}

TEST(Expectation, CutoffSeparatesAcceptedAndOutlier) {
  auto m = seeded({50, 50, 50, 50});
  EXPECT_TRUE(m.observe(35.01));
  auto n = seeded({50, 50, 50, 50});
  EXPECT_FALSE(n.observe(34.99));
}

TEST(Expectation, AcceptedLogBoundedByWindow) {
  ExpectationModel m;
  for (int i = 0; i < 50; ++i) m.observe(10.0 + i);
  EXPECT_EQ(m.accepted().size(), 20u);
  EXPECT_EQ(m.recent().size(), 4u);
  EXPECT_DOUBLE_EQ(m.accepted().back(), 59.0);
}

TEST(Expectation, MatchesRecursionOverAcceptedSamples) {
  oracle::Gen gen(3);
  ExpectationModel m;
  std::vector<double> accepted;
  for (int i = 0; i < 200; ++i) {
    const double s = gen.real(5.0, 80.0);
    if (m.observe(s)) accepted.push_back(s);
  }
  ASSERT_FALSE(accepted.empty());
  EXPECT_NEAR(*m.ewma(), oracle::ewma(accepted, 0.8), 1e-9);
}

TEST(Expectation, RejectsNonPositiveResponse) {
  EXPECT_THROW(psim::update_expectation(ExpectationModel{}, 0.0), std::invalid_argument);
}

TEST(ExpectedResponseTime, AddsMargin) {
  EXPECT_DOUBLE_EQ(*psim::expected_response_time(seeded({50})), 60.0);
  ExpectationModel::Params p;
  p.margin = 0.0;
  ExpectationModel no_margin(p);
  no_margin.observe(10.0);
  EXPECT_DOUBLE_EQ(*psim::expected_response_time(no_margin), 10.0);
  EXPECT_NEAR(*psim::expected_response_time(seeded({33.3})), 39.96, 1e-12);
}

TEST(ExpectedResponseTime, EmptyHistory) { EXPECT_FALSE(psim::expected_response_time(ExpectationModel{})); }

TEST(ProviderPenalty, AppliesToEasAndPas) {
  const auto base = seeded({20});
  for (auto s : {psim::StrategyId::Eas, psim::StrategyId::Pas}) {
    const auto m = psim::provider_penalty_update(base, 70.0, 60.0, 40.0, s);
    EXPECT_DOUBLE_EQ(*m.ewma(), 0.8 * 40.0 + 0.2 * 20.0);
    EXPECT_DOUBLE_EQ(m.recent().back(), 70.0);
    EXPECT_DOUBLE_EQ(m.accepted().back(), 40.0);
  }
}

TEST(ProviderPenalty, FifoRecordsActual) {
  const auto m = psim::provider_penalty_update(seeded({20}), 70.0, 60.0, 40.0, psim::StrategyId::Fifo);
  EXPECT_DOUBLE_EQ(m.accepted().back(), 70.0);
  EXPECT_DOUBLE_EQ(*m.ewma(), 0.8 * 70.0 + 0.2 * 20.0);
}

TEST(ProviderPenalty, BelowLimitIsNormalUpdate) {
  const auto base = seeded({20});
  const auto m = psim::provider_penalty_update(base, 55.0, 60.0, 40.0, psim::StrategyId::Pas);
  EXPECT_EQ(m, psim::update_expectation(base, 55.0));
}

TEST(Patience, Examples) {
  EXPECT_DOUBLE_EQ(psim::patience_index(12.0, 12.0), 1.0);
  EXPECT_DOUBLE_EQ(psim::patience_index(12.0, 24.0), 0.5);
  EXPECT_DOUBLE_EQ(psim::patience_index(12.0, 8.0), 1.5);
  EXPECT_EQ(psim::patience_index(Rational(20), Rational(14)), Rational(10, 7));
  EXPECT_THROW(psim::patience_index(12.0, 0.0), std::invalid_argument);
}

TEST(Happiness, NoChangeWithinTolerance) {
  const auto spec = psim::step_above_alpha(Rational(10), 5);
  const auto u = psim::happiness_step(Rational(1), spec, Rational(-20), Rational(1), Rational(1, 2));
  EXPECT_EQ(u.value, Rational(1));
  EXPECT_FALSE(u.clamped);
}

TEST(Happiness, ReachesCriticalAfterBMinusOneDrops) {
  const int b = 5;
  const Rational h0(1), c(1, 2);
  const auto spec = psim::step_above_alpha(Rational(0), b);
  Rational h = h0;
  for (int i = 0; i < b - 1; ++i) {
    EXPECT_TRUE(psim::is_active(h, c));
    h = psim::happiness_step(h, spec, Rational(2), h0, c).value;
  }
  EXPECT_EQ(h, c);
  EXPECT_FALSE(psim::is_active(h, c));
}

TEST(Happiness, SlowerDecayStaysAboveCritical) {
  const int b = 5;
  const Rational h0(1), c(1, 2);
  const auto spec = psim::step_above_zero(Rational(b + 1));
  Rational h = h0;
  for (int i = 0; i < b - 1; ++i) h = psim::happiness_step(h, spec, Rational(1), h0, c).value;
  EXPECT_EQ(h, (2 * h0 + (b - 1) * c) / (b + 1));
  EXPECT_EQ(h, Rational(2, 3));
}

TEST(Happiness, ClampsAtZero) {
  const auto spec = psim::table_impact<Rational>({{Rational(0), Rational(0)}, {Rational(100), Rational(-1, 4)}});
  const auto u = psim::happiness_step(Rational(1, 10), spec, Rational(5), Rational(1), Rational(1, 2));
  EXPECT_EQ(u.value, Rational(0));
  EXPECT_TRUE(u.clamped);
}

TEST(Happiness, TableBeyondLastBoundUsesLastRow) {
  const auto spec = psim::table_impact<double>({{0.0, 0.0}, {10.0, -0.1}, {20.0, -0.2}});
  EXPECT_DOUBLE_EQ(psim::impact_value(spec, -3.0, 1.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(psim::impact_value(spec, 10.0, 1.0, 0.5), -0.1);
  EXPECT_DOUBLE_EQ(psim::impact_value(spec, 500.0, 1.0, 0.5), -0.2);
}

TEST(Happiness, SpecValidation) {
  EXPECT_THROW(psim::step_above_alpha(Rational(0), 1), std::invalid_argument);
  EXPECT_THROW(psim::step_above_zero(Rational(0)), std::invalid_argument);
  EXPECT_THROW(psim::table_impact<double>({}), std::invalid_argument);
  EXPECT_THROW(psim::table_impact<double>({{0.0, 0.1}}), std::invalid_argument);
  EXPECT_THROW(psim::table_impact<double>({{1.0, 0.0}, {1.0, -0.1}}), std::invalid_argument);
}

TEST(Tolerance, EmptyHistoryIsPadding) {
  std::vector<Rational> none;
  EXPECT_EQ(psim::tolerance_step<Rational>(none, 4, Rational(10)), Rational(10));
}

TEST(Tolerance, AlternatingWaitsFullWindow) {
  const Rational delta(10), eps(6);
  std::vector<Rational> waits{Rational(0), delta - eps, Rational(0), delta - eps};
  EXPECT_EQ(psim::tolerance_step<Rational>(waits, 4, Rational(20)), (delta - eps) / 2);
}

TEST(Tolerance, PartialWindowMatchesOracle) {
  std::vector<Rational> waits{Rational(4), Rational(0), Rational(4)};
  const auto got = psim::tolerance_step<Rational>(waits, 5, Rational(12));
  EXPECT_EQ(got, oracle::padded_mean(waits, 5, Rational(12)));
  EXPECT_EQ(got, Rational(32, 5));
}

TEST(Tolerance, ModelTracksPaddedMean) {
  oracle::Gen gen(11);
  psim::ToleranceModel<Rational> model(3, Rational(7), Rational(5));
  EXPECT_EQ(model.value(), Rational(7));
  std::vector<Rational> waits;
  for (int i = 0; i < 20; ++i) {
    waits.push_back(gen.rational(0, 30));
    model.observe(waits.back());
    EXPECT_EQ(model.value(), oracle::padded_mean(waits, 3, Rational(5)));
  }
  EXPECT_EQ(model.waits().size(), 3u);
  EXPECT_THROW(psim::ToleranceModel<double>(0, 0.0, 0.0), std::invalid_argument);
}

TEST(Active, StrictlyAboveCritical) {
  EXPECT_TRUE(psim::is_active(Rational(6, 10), Rational(1, 2)));
  EXPECT_FALSE(psim::is_active(Rational(1, 2), Rational(1, 2)));
  EXPECT_FALSE(psim::is_active(Rational(3, 10), Rational(1, 2)));
}

TEST(Randomness, ThinkTimeWithinBounds) {
  auto rng = psim::make_user_rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double t = psim::sample_think_time(rng, 100.0);
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 100.0);
  }
}

TEST(Randomness, ThresholdWithinBounds) {
  auto rng = psim::make_user_rng(2, 5);
  for (int i = 0; i < 10000; ++i) {
    const double t = psim::sample_threshold(rng, 40.0, 60.0);
    EXPECT_GE(t, 40.0);
    EXPECT_LE(t, 60.0);
  }
  EXPECT_DOUBLE_EQ(psim::sample_threshold(rng, 50.0, 50.0), 50.0);
}

TEST(Randomness, StreamsDeterministicAndDistinct) {
  auto a = psim::make_user_rng(9, 3);
  auto b = psim::make_user_rng(9, 3);
  auto c = psim::make_user_rng(9, 4);
  auto d = psim::make_user_rng(10, 3);
  bool differs_user = false, differs_seed = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs_user |= x != c();
    differs_seed |= x != d();
  }
  EXPECT_TRUE(differs_user);
  EXPECT_TRUE(differs_seed);
}

}  // namespace
