#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "psim/model.hpp"

namespace psim {

// ---------------------------------------------------------------------------
// Expectation formation
// ---------------------------------------------------------------------------

/// Response-time expectation built from two moving averages: an EWMA over
/// accepted samples, and a short plain mean over the most recent raw samples
/// that decides whether a new sample is an outlier.
///
/// A sample more than `outlier_cutoff` below the short mean is kept in the
/// short window but does not move the EWMA. The EWMA recursion is
/// `ewma <- alpha * sample + (1 - alpha) * ewma`, newest sample weighted alpha;
/// `ewma_window` bounds the log of accepted samples.
class ExpectationModel {
 public:
  struct Params {
    double alpha = 0.8;
    std::size_t ewma_window = 20;
    std::size_t outlier_window = 4;
    double outlier_cutoff = 0.3;
    double margin = 0.2;

    bool operator==(const Params&) const = default;
  };

  ExpectationModel() = default;
  explicit ExpectationModel(const Params& p) : params_(p) {}

  /// Feeds one observed response time; returns true if the EWMA moved.
  bool observe(double rt);

  /// Feeds `sample` straight into the EWMA recursion while `observed` goes
  /// into the outlier window. Used by the provider's self-penalty.
  void observe_override(double sample, double observed);

  std::optional<double> ewma() const { return ewma_; }
  const std::deque<double>& accepted() const { return accepted_; }
  const std::deque<double>& recent() const { return recent_; }
  const Params& params() const { return params_; }

  bool operator==(const ExpectationModel&) const = default;

 private:
  void push_accepted(double sample);

  Params params_{};
  std::optional<double> ewma_;
  std::deque<double> accepted_;
  std::deque<double> recent_;
};

ExpectationModel update_expectation(ExpectationModel model, double new_rt);

/// ewma * (1 + margin), or nullopt before the first accepted sample.
std::optional<double> expected_response_time(const ExpectationModel& model);

/// Applies the provider's self-penalty: under PAS/EAS a response slower than
/// `provider_max` is recorded as `penalty_rt`. Otherwise a normal update.
ExpectationModel provider_penalty_update(ExpectationModel model, double actual_rt, double provider_max,
                                         double penalty_rt, StrategyId strategy);

// ---------------------------------------------------------------------------
// Patience
// ---------------------------------------------------------------------------

/// expected / actual. Below 1 means the user waited longer than expected.
template <class Num>
Num patience_index(const Num& expected_rt, const Num& actual_rt) {
  if (!(actual_rt > Num(0))) throw std::invalid_argument("patience_index: actual response time must be > 0");
  return expected_rt / actual_rt;
}

// ---------------------------------------------------------------------------
// Happiness impact i(u, e)
// ---------------------------------------------------------------------------

/// No change while e <= threshold, otherwise a drop of (h0 - c) / denominator.
template <class Num>
struct StepImpact {
  Num threshold{};
  Num denominator{1};
};

/// Piecewise-constant impact: the first row whose bound is >= e gives the
/// change; e beyond every bound takes the last row. All changes <= 0.
template <class Num>
struct TableImpact {
  std::vector<std::pair<Num, Num>> rows;  // (upper bound on e, change)
};

template <class Num>
using HappinessImpactSpec = std::variant<StepImpact<Num>, TableImpact<Num>>;

/// Drop (h0-c)/(b-1) once e exceeds `alpha`.
template <class Num>
HappinessImpactSpec<Num> step_above_alpha(const Num& alpha, int b) {
  if (b < 2) throw std::invalid_argument("step_above_alpha requires b >= 2");
  return StepImpact<Num>{alpha, Num(b - 1)};
}

/// Drop (h0-c)/beta once e exceeds zero.
template <class Num>
HappinessImpactSpec<Num> step_above_zero(const Num& beta) {
  if (!(beta > Num(0))) throw std::invalid_argument("step_above_zero requires beta > 0");
  return StepImpact<Num>{Num(0), beta};
}

template <class Num>
HappinessImpactSpec<Num> table_impact(std::vector<std::pair<Num, Num>> rows) {
  if (rows.empty()) throw std::invalid_argument("table impact needs at least one row");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].second > Num(0)) throw std::invalid_argument("table impact changes must be <= 0");
    if (i > 0 && !(rows[i - 1].first < rows[i].first)) {
      throw std::invalid_argument("table impact bounds must be strictly increasing");
    }
  }
  return TableImpact<Num>{std::move(rows)};
}

template <class Num>
Num impact_value(const HappinessImpactSpec<Num>& spec, const Num& e, const Num& h0, const Num& c) {
  if (const auto* step = std::get_if<StepImpact<Num>>(&spec)) {
    if (e <= step->threshold) return Num(0);
    Num drop = (h0 - c) / step->denominator;
    return drop > Num(0) ? -drop : Num(0);
  }
  const auto& table = std::get<TableImpact<Num>>(spec);
  for (const auto& [bound, change] : table.rows) {
    if (e <= bound) return change;
  }
  return table.rows.back().second;
}

template <class Num>
struct HappinessUpdate {
  Num value{};
  bool clamped = false;
};

/// h + i(e), clamped into [0,1].
template <class Num>
HappinessUpdate<Num> happiness_step(const Num& h, const HappinessImpactSpec<Num>& spec, const Num& e,
                                    const Num& h0, const Num& c) {
  const Num raw = h + impact_value(spec, e, h0, c);
  const Num clamped = HappinessState<Num>::clamp(raw);
  return {clamped, clamped != raw};
}

// ---------------------------------------------------------------------------
// Tolerance dynamics j(u, t, e)
// ---------------------------------------------------------------------------

/// Mean of the newest `b` waiting times, left-padded with `padding` when
/// fewer than `b` exist.
template <class Num>
Num tolerance_step(std::span<const Num> history, int b, const Num& padding) {
  if (b < 1) throw std::invalid_argument("tolerance_step requires b >= 1");
  const std::size_t window = static_cast<std::size_t>(b);
  const std::size_t used = std::min(window, history.size());
  Num sum{0};
  for (std::size_t i = history.size() - used; i < history.size(); ++i) sum += history[i];
  sum += padding * Num(static_cast<std::int64_t>(window - used));
  return sum / Num(b);
}

/// Tolerance w(u) tracked as the padded mean of the last b waiting times.
template <class Num>
class ToleranceModel {
 public:
  ToleranceModel() = default;
  ToleranceModel(int window, Num initial, Num padding)
      : window_(window), padding_(std::move(padding)), value_(std::move(initial)) {
    if (window_ < 1) throw std::invalid_argument("tolerance window must be >= 1");
  }

  void observe(const Num& waiting_time) {
    waits_.push_back(waiting_time);
    while (waits_.size() > static_cast<std::size_t>(window_)) waits_.erase(waits_.begin());
    value_ = tolerance_step<Num>(waits_, window_, padding_);
  }

  const Num& value() const { return value_; }
  std::span<const Num> waits() const { return waits_; }

 private:
  int window_ = 1;
  Num padding_{};
  Num value_{};
  std::vector<Num> waits_;
};

/// A user keeps submitting while h > c.
template <class Num>
bool is_active(const Num& h, const Num& c) {
  return h > c;
}

// ---------------------------------------------------------------------------
// Randomness
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Independent stream per (seed, user) so strategies see identical draws.
Rng make_user_rng(std::uint64_t seed, UserId user);

double sample_think_time(Rng& rng, double think_time_max);
double sample_threshold(Rng& rng, double low, double high);

}  // namespace psim
