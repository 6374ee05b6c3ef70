#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psim/numeric.hpp"

namespace psim {

using TaskId = std::uint64_t;
using UserId = std::uint32_t;

enum class StrategyId { Fifo, Pas, Eas };

std::string_view to_string(StrategyId s);
/// Accepts "fifo", "pas", "eas" (case-insensitive).
StrategyId parse_strategy(std::string_view text);

/// One job submission.
template <class Num>
struct TaskRequest {
  TaskId id = 0;
  UserId user = 0;
  Num arrival{};
  Num duration{};
};

/// Per-user state visible to the rest of the system. The expectation
/// machinery that feeds `threshold` and `rt_history` lives in user_behavior.
template <class Num>
struct UserProfile {
  UserId id = 0;
  Num tolerance{};          // w(u)
  Num happiness{1};         // h(u), always in [0,1]
  Num initial_happiness{1};  // h0(u)
  Num critical{};           // c(u), always in [0,1]
  bool active = true;
  std::deque<Num> rt_history;  // accepted response times, newest last
  std::size_t history_window = 20;
  double threshold = 60.0;  // max acceptable response time for metrics

  void remember(const Num& rt) {
    rt_history.push_back(rt);
    while (rt_history.size() > history_window) rt_history.pop_front();
  }
};

/// Outcome of one serviced task.
template <class Num>
struct CompletionRecord {
  TaskId task_id = 0;
  UserId user_id = 0;
  std::size_t server = 0;
  Num arrival{};
  Num start{};
  Num completion{};
  Num duration{};
  Num response_time{};
  Num excess_delay{};
  Num tolerance{};             // w(u) in force at submission
  Num expected_rt{};           // user-side expectation when the task completed
  Num provider_expected_rt{};  // estimate the dispatcher keyed on
  Num patience_index{};
  Num happiness_after{};
  Num tolerance_after{};
  bool over_threshold = false;
  int offset_index = -1;  // submission slot within a scripted period, -1 otherwise
};

/// s in Z^|U|: one happiness value per user, fixed dimension.
template <class Num>
class HappinessState {
 public:
  HappinessState() = default;
  HappinessState(std::size_t users, const Num& initial) : values_(users, clamp(initial)) {}

  std::size_t size() const { return values_.size(); }
  const Num& operator[](std::size_t i) const { return values_.at(i); }
  std::span<const Num> values() const { return values_; }

  /// Stores `v` clamped into [0,1]; returns true if clamping happened.
  bool set(std::size_t i, const Num& v) {
    Num c = clamp(v);
    values_.at(i) = c;
    return c != v;
  }

  Num l1() const {
    Num sum{0};
    for (const auto& v : values_) sum += v;
    return sum;
  }

  static Num clamp(const Num& v) {
    if (v < Num(0)) return Num(0);
    if (v > Num(1)) return Num(1);
    return v;
  }

  bool operator==(const HappinessState&) const = default;

 private:
  std::vector<Num> values_;
};

/// Where the deadline/patience keys get their expected response time.
enum class ExpectationSource {
  ProviderEwma,  // provider-side EWMA model (daily simulations)
  Tolerance,     // Δ(t) + w(u) at submission (proposition scenarios)
};

/// Which side gets the tolerance margin added to its EWMA estimate.
enum class MarginTarget { User, Provider, Both };

/// PAS ordering key.
enum class PasKey {
  Dynamic,            // expected_rt / (wait so far + Δ)
  HistoricalAverage,  // mean of the user's past patience indexes
};

struct SimConfig {
  int servers = 10;  // m
  std::uint64_t rng_seed = 1;
  int history_window = 5;  // b
  double ewma_alpha = 0.8;
  int ewma_window = 20;
  int outlier_window = 4;
  double outlier_cutoff = 0.3;
  double tolerance_margin = 0.2;
  double think_time_max = 100.0;
  double job_length = 10.0;
  double threshold_low = 40.0;
  double threshold_high = 60.0;
  double provider_max_rt = 60.0;
  double penalty_rt = 40.0;
  double patience_zero_cutoff = 0.5;

  ExpectationSource expectation_source = ExpectationSource::ProviderEwma;
  MarginTarget margin_target = MarginTarget::User;
  PasKey pas_key = PasKey::Dynamic;
  bool happiness_enabled = false;
  bool cancel_queued_on_abandon = false;
  double initial_happiness = 1.0;  // daily users, when happiness is enabled
  double critical_level = 0.5;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// r(t) = (s(t) - a(t)) + Δ(t). Throws std::logic_error if start precedes arrival.
template <class Num>
Num response_time(const Num& arrival, const Num& start, const Num& duration) {
  if (start < arrival - comparison_epsilon<Num>()) {
    throw std::logic_error("task started before it arrived");
  }
  return (start - arrival) + duration;
}

/// e(u,t) = r(t) - (Δ(t) + w(u)). Negative when served ahead of expectation.
template <class Num>
Num excess_delay(const Num& response, const Num& duration, const Num& tolerance) {
  return response - (duration + tolerance);
}

}  // namespace psim
